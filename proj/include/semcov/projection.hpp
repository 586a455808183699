#pragma once

#include <string>
#include <utility>
#include <vector>

#include "semcov/dataset.hpp"

namespace semcov {

/// Fitted 2D view of an embedding space: mean-centering plus the top two
/// principal directions of the fitting set. Each direction's sign is pinned
/// by making its largest-magnitude loading positive, so a refit on the same
/// data reproduces identical coordinates. Projection never feeds back into
/// any density computation; it exists for reporting only.
struct PcaBasis {
    std::vector<double> mean;
    std::vector<double> axis1;
    std::vector<double> axis2; // all-zero when the space has one dimension
    double var1 = 0.0;         // sample variance along each axis
    double var2 = 0.0;

    /// Eigendecomposition of the sample covariance (1/(n-1)). A single-point
    /// or zero-variance dataset projects everything to the origin.
    static PcaBasis fit(const Dataset& d);

    std::pair<double, double> project(const std::vector<double>& v) const;
};

struct FramePoint {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    std::string role; // "existing" | "new" | "questions" | "gap"

    bool operator==(const FramePoint&) const = default;
};

/// One renderable scatter: the points of every layer projected onto a shared
/// basis, tagged with the layer's role. Ids listed in gap_ids override their
/// layer role with "gap".
struct ProjectionFrame {
    std::vector<FramePoint> points;

    /// "id,x,y,role" header plus one line per point; fields are quoted when
    /// they contain commas or quotes, numbers use shortest round-trip form.
    std::string to_csv() const;
};

ProjectionFrame project_frame(const PcaBasis& basis,
                              const std::vector<std::pair<const Dataset*, std::string>>& layers,
                              const std::vector<std::string>& gap_ids = {});

/// Self-contained SVG scatter (inline styles, no external references):
/// one dot per point, colors keyed by role, legend and title included.
std::string frame_to_svg(const ProjectionFrame& frame, const std::string& title);

} // namespace semcov
