#include "semcov/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "semcov/errors.hpp"
#include "semcov/jsonl_io.hpp"
#include "semcov/stats.hpp"

namespace semcov {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        sq += diff * diff;
    }
    return sq;
}

// log(exp(a) + exp(b)) without leaving log domain.
double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

void check_h(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("bandwidth h must be positive and finite");
}

} // namespace

bool GapSet::contains(const std::string& id) const {
    return std::find(point_ids.begin(), point_ids.end(), id) != point_ids.end();
}

KdeAccumulator::KdeAccumulator(const Dataset& eval_points, KdeParams params)
    : h_(params.h) {
    check_h(h_);
    eval_ids_.reserve(eval_points.size());
    eval_vecs_.reserve(eval_points.size());
    for (const auto& rec : eval_points.records()) {
        eval_ids_.push_back(rec.id);
        eval_vecs_.push_back(rec.vector);
    }
    log_sums_.assign(eval_vecs_.size(), kNegInf);
}

void KdeAccumulator::add_sample(const std::vector<double>& vec) {
    if (!eval_vecs_.empty() && vec.size() != eval_vecs_[0].size())
        throw ValidationError("sample dimension " + std::to_string(vec.size()) +
                              " does not match evaluation points");
    const double inv = 1.0 / (2.0 * h_ * h_);
    for (std::size_t j = 0; j < eval_vecs_.size(); ++j) {
        const double exponent = -squared_distance(eval_vecs_[j], vec) * inv;
        log_sums_[j] = logaddexp(log_sums_[j], exponent);
    }
    ++m_;
}

void KdeAccumulator::add_samples(const Dataset& samples) {
    for (const auto& rec : samples.records()) add_sample(rec.vector);
}

DensityField KdeAccumulator::field() const {
    if (m_ == 0) throw ValidationError("density estimation needs a non-empty sample set");
    DensityField f;
    f.eval_ids = eval_ids_;
    f.log_densities.reserve(log_sums_.size());
    const double log_norm = std::log(static_cast<double>(m_) * h_);
    for (double ls : log_sums_) {
        const double v = ls - log_norm;
        if (!std::isfinite(v))
            throw ValidationError("non-finite log density (corrupt accumulator state)");
        f.log_densities.push_back(v);
    }
    return f;
}

DensityField kde_log_density(const Dataset& samples, const Dataset& eval_points,
                             KdeParams params) {
    if (samples.empty()) throw ValidationError("density estimation needs a non-empty sample set");
    if (!eval_points.empty() && samples.dim() != eval_points.dim())
        throw ValidationError("sample dim " + std::to_string(samples.dim()) +
                              " does not match eval dim " + std::to_string(eval_points.dim()));
    KdeAccumulator acc(eval_points, params);
    acc.add_samples(samples);
    return acc.field();
}

std::vector<IdDelta> log_density_ratio(const DensityField& numerator,
                                       const DensityField& denominator) {
    if (numerator.eval_ids != denominator.eval_ids)
        throw ValidationError("log_density_ratio: evaluation points differ between fields");
    std::vector<IdDelta> out;
    out.reserve(numerator.eval_ids.size());
    for (std::size_t j = 0; j < numerator.eval_ids.size(); ++j)
        out.push_back({numerator.eval_ids[j],
                       numerator.log_densities[j] - denominator.log_densities[j]});
    return out;
}

GapSet gap_points(const std::vector<IdDelta>& deltas, double slack) {
    if (slack < 0.0 || !std::isfinite(slack))
        throw ValidationError("gap slack must be a non-negative finite value");
    GapSet g;
    g.threshold_used = slack;
    for (const auto& [id, delta] : deltas) {
        if (delta > slack) {
            g.point_ids.push_back(id);
            g.deltas.push_back(delta);
        }
    }
    return g;
}

double percentile_threshold(const std::vector<double>& positive_deltas, double t_d) {
    if (positive_deltas.empty())
        throw ValidationError("percentile_threshold needs a non-empty delta list");
    if (!(t_d >= 0.0 && t_d <= 1.0))
        throw ValidationError("t_d must lie in [0,1]");
    return quantile_of(positive_deltas, 1.0 - t_d);
}

GapSet select_gap(const Dataset& reference, const Dataset& candidate,
                  KdeParams params, double t_d, double slack, ThresholdMode mode) {
    if (reference.empty()) throw ValidationError("select_gap: reference set is empty");
    if (!(t_d >= 0.0 && t_d <= 1.0)) throw ValidationError("t_d must lie in [0,1]");

    // Evaluation points: candidate points first (the set the ratio is "about"),
    // then any reference points not already present, so uncovered reference
    // regions can surface even when the candidate set has no points there.
    Dataset eval("eval", DatasetRole::Batch, reference.dim());
    for (const auto& rec : candidate.records()) eval.add(rec);
    for (const auto& rec : reference.records()) {
        if (!eval.contains(rec.id)) {
            eval.add(rec);
        } else if (eval.at(eval.index_of(rec.id)).vector != rec.vector) {
            throw ValidationError("select_gap: id '" + rec.id +
                                  "' appears in both sets with different vectors");
        }
    }

    const DensityField num = kde_log_density(reference, eval, params);
    const DensityField den = kde_log_density(candidate, eval, params);
    const std::vector<IdDelta> deltas = log_density_ratio(num, den);

    if (mode == ThresholdMode::Literal) return gap_points(deltas, std::max(t_d, 0.0));

    const GapSet candidates = gap_points(deltas, slack);
    if (candidates.empty()) return candidates;
    const double tau = percentile_threshold(candidates.deltas, t_d);
    GapSet g = gap_points(deltas, tau);
    return g;
}

// --- serialization -----------------------------------------------------------

std::string density_field_to_jsonl(const DensityField& f) {
    std::ostringstream out;
    for (std::size_t j = 0; j < f.eval_ids.size(); ++j) {
        Json line;
        line["id"] = f.eval_ids[j];
        line["log_density"] = f.log_densities[j];
        out << line.dump() << '\n';
    }
    return out.str();
}

DensityField density_field_from_jsonl(const std::filesystem::path& path) {
    DensityField f;
    for_each_jsonl(path, [&](std::size_t lineno, const Json& j) {
        if (!j.contains("id") || !j.contains("log_density"))
            throw ValidationError(path.filename().string() + " line " + std::to_string(lineno) +
                                  ": expected id and log_density fields");
        f.eval_ids.push_back(j.at("id").get<std::string>());
        f.log_densities.push_back(j.at("log_density").get<double>());
    });
    return f;
}

std::string gap_set_to_jsonl(const GapSet& g) {
    std::ostringstream out;
    for (std::size_t j = 0; j < g.point_ids.size(); ++j) {
        Json line;
        line["id"] = g.point_ids[j];
        line["delta"] = g.deltas[j];
        out << line.dump() << '\n';
    }
    return out.str();
}

} // namespace semcov
