#include "semcov/projection.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "semcov/errors.hpp"

namespace semcov {

namespace {

// Shortest representation that round-trips the double exactly.
std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Largest-magnitude loading becomes positive; ties keep the lower index.
void pin_sign(std::vector<double>& axis) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < axis.size(); ++j)
        if (std::abs(axis[j]) > std::abs(axis[arg])) arg = j;
    if (axis[arg] < 0.0)
        for (double& v : axis) v = -v;
}

} // namespace

PcaBasis PcaBasis::fit(const Dataset& d) {
    if (d.empty()) throw ValidationError("projection: cannot fit an empty dataset");
    const std::size_t n = d.size();
    const std::size_t dim = d.dim();

    PcaBasis basis;
    basis.mean.assign(dim, 0.0);
    for (const auto& rec : d.records())
        for (std::size_t j = 0; j < dim; ++j) basis.mean[j] += rec.vector[j];
    for (double& m : basis.mean) m /= static_cast<double>(n);

    basis.axis1.assign(dim, 0.0);
    basis.axis2.assign(dim, 0.0);
    basis.axis1[0] = 1.0;
    if (dim >= 2) basis.axis2[1] = 1.0;
    if (n < 2) return basis; // no variance to decompose

    Eigen::MatrixXd centered(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                d.at(i).vector[j] - basis.mean[j];
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw ValidationError("projection: eigendecomposition failed");
    // eigenvalues ascend; the top two sit at the end
    const auto& values = solver.eigenvalues();
    const auto& vectors = solver.eigenvectors();
    const Eigen::Index last = static_cast<Eigen::Index>(dim) - 1;
    basis.var1 = std::max(0.0, values(last));
    for (std::size_t j = 0; j < dim; ++j) basis.axis1[j] = vectors(static_cast<Eigen::Index>(j), last);
    pin_sign(basis.axis1);
    if (dim >= 2) {
        basis.var2 = std::max(0.0, values(last - 1));
        for (std::size_t j = 0; j < dim; ++j)
            basis.axis2[j] = vectors(static_cast<Eigen::Index>(j), last - 1);
        pin_sign(basis.axis2);
    }
    return basis;
}

std::pair<double, double> PcaBasis::project(const std::vector<double>& v) const {
    if (v.size() != mean.size())
        throw ValidationError("projection: vector dimension " + std::to_string(v.size()) +
                              " does not match the basis dimension " +
                              std::to_string(mean.size()));
    double x = 0.0;
    double y = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double c = v[j] - mean[j];
        x += c * axis1[j];
        y += c * axis2[j];
    }
    return {x, y};
}

ProjectionFrame project_frame(const PcaBasis& basis,
                              const std::vector<std::pair<const Dataset*, std::string>>& layers,
                              const std::vector<std::string>& gap_ids) {
    const std::set<std::string> gaps(gap_ids.begin(), gap_ids.end());
    ProjectionFrame frame;
    for (const auto& [dataset, role] : layers) {
        for (const auto& rec : dataset->records()) {
            const auto [x, y] = basis.project(rec.vector);
            frame.points.push_back(
                {rec.id, x, y, gaps.count(rec.id) > 0 ? std::string("gap") : role});
        }
    }
    return frame;
}

std::string ProjectionFrame::to_csv() const {
    std::ostringstream out;
    out << "id,x,y,role\n";
    for (const auto& p : points)
        out << csv_field(p.id) << ',' << fmt_double(p.x) << ',' << fmt_double(p.y) << ','
            << csv_field(p.role) << '\n';
    return out.str();
}

std::string frame_to_svg(const ProjectionFrame& frame, const std::string& title) {
    constexpr double kWidth = 640.0;
    constexpr double kHeight = 480.0;
    constexpr double kPad = 48.0;

    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    if (!frame.points.empty()) {
        min_x = max_x = frame.points[0].x;
        min_y = max_y = frame.points[0].y;
        for (const auto& p : frame.points) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
    }
    const double span_x = max_x - min_x > 0.0 ? max_x - min_x : 1.0;
    const double span_y = max_y - min_y > 0.0 ? max_y - min_y : 1.0;
    auto map_x = [&](double x) { return kPad + (x - min_x) / span_x * (kWidth - 2 * kPad); };
    // SVG y grows downward; flip so larger component values plot higher
    auto map_y = [&](double y) { return kHeight - kPad - (y - min_y) / span_y * (kHeight - 2 * kPad); };

    auto color_of = [](const std::string& role) -> const char* {
        if (role == "existing") return "#4878a8";
        if (role == "new") return "#e85590"; // newly added points plot pink
        if (role == "questions") return "#3a9e4f";
        if (role == "gap") return "#e8a33d";
        return "#888888";
    };

    auto fixed2 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    auto escape = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '"': out += "&quot;"; break;
                default: out += c;
            }
        }
        return out;
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    svg << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"#ffffff\" stroke=\"#cccccc\"/>\n";
    svg << "  <text x=\"" << kPad << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\">"
        << escape(title) << "</text>\n";

    // legend: only the roles actually present, in first-appearance order
    std::vector<std::string> roles;
    for (const auto& p : frame.points)
        if (std::find(roles.begin(), roles.end(), p.role) == roles.end()) roles.push_back(p.role);
    double legend_y = 28.0;
    for (const auto& role : roles) {
        svg << "  <circle cx=\"" << kWidth - 140 << "\" cy=\"" << fixed2(legend_y - 4)
            << "\" r=\"5\" fill=\"" << color_of(role) << "\"/>\n";
        svg << "  <text x=\"" << kWidth - 128 << "\" y=\"" << fixed2(legend_y)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(role) << "</text>\n";
        legend_y += 18.0;
    }

    for (const auto& p : frame.points) {
        svg << "  <circle cx=\"" << fixed2(map_x(p.x)) << "\" cy=\"" << fixed2(map_y(p.y))
            << "\" r=\"3\" fill=\"" << color_of(p.role) << "\" fill-opacity=\"0.75\">"
            << "<title>" << escape(p.id) << "</title></circle>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace semcov
