#pragma once

#include <string>
#include <utility>
#include <vector>

#include "semcov/dataset.hpp"
#include "semcov/density.hpp"
#include "semcov/jsonl_io.hpp"

namespace semcov {

/// Outcome of the redundancy gate for one candidate batch.
struct AdmissionDecision {
    bool accepted = false;
    double r = 1.0; // density correlation with the existing corpus; 1.0 on bootstrap
    std::string batch_id;
    std::size_t corpus_size_before = 0;
    std::size_t corpus_size_after = 0;
    bool forced = false; // admitted by the completion pass despite r >= t_c

    Json to_json() const;
};

/// Nearest-neighbor cosine-distance profile of one dataset. pair_count is
/// the number of (record, nearest neighbor) pairs, i.e. the record count.
struct RedundancyReport {
    std::size_t pair_count = 0;
    double fraction_below_threshold = 0.0;
    double cosine_threshold = 0.2;
    std::vector<std::pair<double, double>> summary_quantiles; // (level, value)

    Json to_json() const;
};

/// Sample Pearson correlation coefficient. Throws ValidationError on length
/// mismatch or n < 2 and DegenerateCorrelation when either input has zero
/// variance (callers that gate on r treat that case as r = 1, fail closed).
double pearson_r(const std::vector<double>& a, const std::vector<double>& b);

/// Correlation between the density profiles of X and Y over the union of
/// their sample points (X's points first). Both log fields are exponentiated
/// after subtracting one shared maximum so their ratio structure survives the
/// trip out of log domain.
double compactness_r(const Dataset& X, const Dataset& Y, KdeParams params);

/// Eq.-style admission gate: accept when C is empty (bootstrap) or when the
/// density correlation r(X, C) falls below t_c. Degenerate correlations count
/// as r = 1 and are rejected.
AdmissionDecision admit_batch(const Dataset& X, const Dataset& C, double t_c,
                              KdeParams params);

/// Per-record nearest-neighbor cosine distances (1 - cosine similarity) and
/// the fraction below the threshold (default 0.2).
RedundancyReport redundancy_report(const Dataset& d, double cosine_threshold = 0.2);

} // namespace semcov
