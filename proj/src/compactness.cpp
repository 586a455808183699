#include "semcov/compactness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semcov/errors.hpp"
#include "semcov/stats.hpp"

namespace semcov {

Json AdmissionDecision::to_json() const {
    Json j;
    j["accepted"] = accepted;
    j["r"] = r;
    j["batch_id"] = batch_id;
    j["corpus_size_before"] = corpus_size_before;
    j["corpus_size_after"] = corpus_size_after;
    j["forced"] = forced;
    return j;
}

Json RedundancyReport::to_json() const {
    Json j;
    j["pair_count"] = pair_count;
    j["fraction_below_threshold"] = fraction_below_threshold;
    j["cosine_threshold"] = cosine_threshold;
    Json q = Json::array();
    for (const auto& [level, value] : summary_quantiles)
        q.push_back(Json{{"level", level}, {"value", value}});
    j["summary_quantiles"] = q;
    return j;
}

double pearson_r(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ValidationError("pearson_r: length mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    if (a.size() < 2) throw ValidationError("pearson_r: need at least 2 points");

    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) { ma += a[i]; mb += b[i]; }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);

    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw DegenerateCorrelation("pearson_r: zero-variance input");
    const double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

namespace {

// Union of the two sample sets, X's points first. Shared ids must agree.
Dataset union_points(const Dataset& x, const Dataset& y) {
    Dataset u("union", DatasetRole::Batch, x.dim());
    for (const auto& rec : x.records()) u.add(rec);
    for (const auto& rec : y.records()) {
        if (!u.contains(rec.id)) {
            u.add(rec);
        } else if (u.at(u.index_of(rec.id)).vector != rec.vector) {
            throw ValidationError("id '" + rec.id + "' appears in both sets with different vectors");
        }
    }
    return u;
}

} // namespace

double compactness_r(const Dataset& X, const Dataset& Y, KdeParams params) {
    if (X.empty() || Y.empty())
        throw ValidationError("compactness_r: both sets must be non-empty");
    if (X.dim() != Y.dim())
        throw ValidationError("compactness_r: dimension mismatch");

    const Dataset eval = union_points(X, Y);
    const DensityField fx = kde_log_density(X, eval, params);
    const DensityField fy = kde_log_density(Y, eval, params);

    // One shared shift for both fields: Pearson is affine-invariant, so each
    // vector could be scaled on its own, but only a common scale preserves
    // the relationship BETWEEN them.
    double shift = -std::numeric_limits<double>::infinity();
    for (double v : fx.log_densities) shift = std::max(shift, v);
    for (double v : fy.log_densities) shift = std::max(shift, v);

    std::vector<double> dx, dy;
    dx.reserve(fx.log_densities.size());
    dy.reserve(fy.log_densities.size());
    for (double v : fx.log_densities) dx.push_back(std::exp(v - shift));
    for (double v : fy.log_densities) dy.push_back(std::exp(v - shift));
    return pearson_r(dx, dy);
}

AdmissionDecision admit_batch(const Dataset& X, const Dataset& C, double t_c,
                              KdeParams params) {
    if (!(t_c >= -1.0 && t_c <= 1.0)) throw ValidationError("t_c must lie in [-1,1]");
    if (X.empty()) throw ValidationError("admit_batch: empty candidate batch");

    AdmissionDecision d;
    d.batch_id = X.name();
    d.corpus_size_before = C.size();
    if (C.empty()) {
        d.accepted = true;
        d.r = 1.0;
    } else {
        try {
            d.r = compactness_r(X, C, params);
        } catch (const DegenerateCorrelation&) {
            d.r = 1.0; // constant density profile: treat as maximal redundancy
        }
        d.accepted = d.r < t_c;
    }
    d.corpus_size_after = d.accepted ? C.size() + X.size() : C.size();
    return d;
}

RedundancyReport redundancy_report(const Dataset& d, double cosine_threshold) {
    if (d.size() < 2) throw ValidationError("redundancy_report: need at least 2 records");

    std::vector<double> norms(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        double sq = 0.0;
        for (double v : d.at(i).vector) sq += v * v;
        if (sq == 0.0)
            throw ValidationError("redundancy_report: zero-norm vector at record '" +
                                  d.at(i).id + "'");
        norms[i] = std::sqrt(sq);
    }

    std::vector<double> nn(d.size(), 2.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (i == j) continue;
            double dot = 0.0;
            const auto& a = d.at(i).vector;
            const auto& b = d.at(j).vector;
            for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
            nn[i] = std::min(nn[i], 1.0 - dot / (norms[i] * norms[j]));
        }
    }

    RedundancyReport rep;
    rep.pair_count = d.size();
    rep.cosine_threshold = cosine_threshold;
    std::size_t below = 0;
    for (double v : nn)
        if (v < cosine_threshold) ++below;
    rep.fraction_below_threshold = static_cast<double>(below) / static_cast<double>(nn.size());
    for (double level : {0.0, 0.25, 0.5, 0.75, 0.9, 1.0})
        rep.summary_quantiles.emplace_back(level, quantile_of(nn, level));
    return rep;
}

} // namespace semcov
