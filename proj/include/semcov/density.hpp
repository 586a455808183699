#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semcov/dataset.hpp"

namespace semcov {

struct KdeParams {
    double h = 5.0;
};

/// Log densities of one sample set evaluated at a shared list of points.
/// Values never leave log domain here; exponentiation is the caller's
/// business (and needs a shared shift, see compactness).
struct DensityField {
    std::vector<std::string> eval_ids;
    std::vector<double> log_densities;
};

struct IdDelta {
    std::string id;
    double delta;
    bool operator==(const IdDelta&) const = default;
};

/// Evaluation points whose log density ratio exceeded threshold_used.
struct GapSet {
    std::vector<std::string> point_ids;
    std::vector<double> deltas;
    double threshold_used = 0.0;

    std::size_t size() const { return point_ids.size(); }
    bool empty() const { return point_ids.empty(); }
    bool contains(const std::string& id) const;
};

/// How select_gap turns t_d into a cutoff. Percentile treats t_d as a fill
/// fraction: tau = quantile(positive deltas, 1 - t_d), so larger t_d selects
/// more points. Literal uses t_d itself as the cutoff (delta > t_d), which
/// selects fewer points as t_d grows.
enum class ThresholdMode { Percentile, Literal };

/// Streaming kernel-density accumulator over a fixed evaluation-point list.
/// Gaussian kernel, log domain throughout: each eval point keeps the running
/// log of sum_i exp(-|d - e_i|^2 / (2 h^2)), merged across add_samples calls
/// with shifted summation so nothing underflows. The density normalization
/// 1/(m*h) is applied when the field is read out.
class KdeAccumulator {
public:
    KdeAccumulator(const Dataset& eval_points, KdeParams params);

    void add_samples(const Dataset& samples);
    void add_sample(const std::vector<double>& vec);

    std::size_t sample_count() const { return m_; }

    /// Finished field: log[(1/(m h)) * sum_i exp(...)] per eval point.
    /// Errors when no samples have been added.
    DensityField field() const;

private:
    std::vector<std::string> eval_ids_;
    std::vector<std::vector<double>> eval_vecs_;
    double h_;
    std::vector<double> log_sums_; // log of the raw kernel sum, -inf before any sample
    std::size_t m_ = 0;
};

/// Log KDE of `samples` at each point of `eval_points`:
/// log f(d) = log[(1/(m h)) * sum_i exp(-|d - e_i|^2 / (2 h^2))],
/// computed with max-shifted summation. The normalization is 1/(m h) with no
/// dimension-dependent constant; the constant would cancel in every ratio and
/// correlation this field feeds, so the simpler form is kept throughout.
DensityField kde_log_density(const Dataset& samples, const Dataset& eval_points,
                             KdeParams params);

/// delta_j = numerator.log_densities[j] - denominator.log_densities[j].
/// Requires identical eval_ids in identical order.
std::vector<IdDelta> log_density_ratio(const DensityField& numerator,
                                       const DensityField& denominator);

/// Points with delta strictly above the slack. threshold_used = slack.
GapSet gap_points(const std::vector<IdDelta>& deltas, double slack);

/// Empirical quantile of the positive deltas at level (1 - t_d), linear
/// interpolation between order statistics. Errors on empty input or t_d
/// outside [0,1].
double percentile_threshold(const std::vector<double>& positive_deltas, double t_d);

/// One-call gap extraction: density of `reference` over density of
/// `candidate`, evaluated at the union of both point sets (candidate points
/// first), thresholded per `mode`. Under Percentile the cutoff is
/// percentile_threshold over the deltas exceeding `slack`; under Literal the
/// cutoff is t_d itself. Records sharing an id across the two sets must carry
/// identical vectors (they count once as eval points).
GapSet select_gap(const Dataset& reference, const Dataset& candidate,
                  KdeParams params, double t_d, double slack = 0.05,
                  ThresholdMode mode = ThresholdMode::Percentile);

// --- serialization -----------------------------------------------------------

std::string density_field_to_jsonl(const DensityField& f);
DensityField density_field_from_jsonl(const std::filesystem::path& path);
std::string gap_set_to_jsonl(const GapSet& g);

} // namespace semcov
