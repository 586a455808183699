#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "semcov/errors.hpp"
#include "semcov/projection.hpp"
#include "semcov/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace semcov;
using namespace testsup;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

// |cos angle| between two unit vectors; 1 means equal up to sign.
double abs_cos(const std::vector<double>& a, const std::vector<double>& b) {
    return std::abs(dot(a, b));
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("basis recovers a planted dominant direction") {
    // points spread along e0 with variance 9, along e1 with variance 1,
    // nothing elsewhere: axis1 must align with e0, axis2 with e1
    Rng rng(500);
    Dataset d("d", DatasetRole::Space, 5);
    for (int i = 0; i < 400; ++i) {
        EmbeddingRecord rec;
        rec.id = "p" + std::to_string(i);
        rec.source = "src";
        rec.vector = {3.0 * rng.gauss(), rng.gauss(), 0.0, 0.0, 0.0};
        d.add(rec);
    }
    const PcaBasis basis = PcaBasis::fit(d);
    CHECK(std::abs(basis.axis1[0]) > 0.999);
    CHECK(std::abs(basis.axis2[1]) > 0.999);
    CHECK(basis.var1 > basis.var2);
    CHECK(basis.var1 == doctest::Approx(9.0).epsilon(0.15));
    CHECK(basis.var2 == doctest::Approx(1.0).epsilon(0.15));

    // sign pinning: the largest-magnitude loading is positive
    CHECK(basis.axis1[0] > 0.0);
    CHECK(basis.axis2[1] > 0.0);
}

TEST_CASE("basis matches the power-iteration oracle up to sign") {
    Rng rng(501);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 10 + rng.below(60);
        const std::size_t dim = 2 + rng.below(9);
        std::vector<std::vector<double>> rows;
        Dataset d("d", DatasetRole::Space, dim);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v(dim);
            for (auto& x : v) x = rng.uniform(-2.0, 2.0) + rng.gauss();
            rows.push_back(v);
            EmbeddingRecord rec;
            rec.id = "p" + std::to_string(i);
            rec.source = "src";
            rec.vector = v;
            d.add(rec);
        }
        const PcaBasis basis = PcaBasis::fit(d);
        const oracle::PcaAxes axes = oracle::pca_power_iteration(rows, 2);

        // random covariance spectra can have near-ties where the axes are
        // ill-conditioned; compare only when the top eigenvalues separate
        const double gap12 = std::abs(axes.eigenvalues[0] - axes.eigenvalues[1]);
        if (gap12 < 1e-3 * axes.eigenvalues[0]) continue;
        CHECK(abs_cos(basis.axis1, axes.axes[0]) > 1.0 - 1e-6);
        CHECK(abs_cos(basis.axis2, axes.axes[1]) > 1.0 - 1e-6);
        CHECK(basis.var1 == doctest::Approx(axes.eigenvalues[0]).epsilon(1e-6));
    }
}

TEST_CASE("projection is exact on constructed coordinates") {
    // three points on a line through the mean: projections are the signed
    // distances along the dominant direction
    Dataset d("d", DatasetRole::Space, 3);
    const std::vector<std::vector<double>> pts = {{0, 0, 0}, {2, 0, 0}, {4, 0, 0}};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EmbeddingRecord rec;
        rec.id = "p" + std::to_string(i);
        rec.source = "src";
        rec.vector = pts[i];
        d.add(rec);
    }
    const PcaBasis basis = PcaBasis::fit(d);
    CHECK(basis.axis1 == std::vector<double>{1.0, 0.0, 0.0});
    const auto [x0, y0] = basis.project(pts[0]);
    const auto [x2, y2] = basis.project(pts[2]);
    CHECK(x0 == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(x2 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(y0) < 1e-12);
    CHECK(std::abs(y2) < 1e-12);

    CHECK_THROWS_AS(basis.project({1.0, 2.0}), ValidationError);
}

TEST_CASE("degenerate datasets fit without blowing up") {
    Dataset single("d", DatasetRole::Space, 4);
    EmbeddingRecord rec;
    rec.id = "only";
    rec.source = "src";
    rec.vector = {1.0, 2.0, 3.0, 4.0};
    single.add(rec);
    const PcaBasis basis = PcaBasis::fit(single);
    const auto [x, y] = basis.project(rec.vector);
    CHECK(x == 0.0);
    CHECK(y == 0.0);

    Dataset empty("e", DatasetRole::Space, 4);
    CHECK_THROWS_AS(PcaBasis::fit(empty), ValidationError);
}

TEST_CASE("frames tag layers and gap overrides") {
    Rng rng(502);
    Dataset corpus("c", DatasetRole::Corpus, 4);
    add_cluster(corpus, rng, "c", "src", {0, 0, 0, 0}, 1.0, 10);
    Dataset questions("q", DatasetRole::Questions, 4);
    add_cluster(questions, rng, "q", "faq", {1, 1, 1, 1}, 1.0, 5);

    const PcaBasis basis = PcaBasis::fit(corpus);
    const ProjectionFrame frame =
        project_frame(basis, {{&corpus, "existing"}, {&questions, "questions"}}, {"c3", "q1"});
    REQUIRE(frame.points.size() == 15);
    std::size_t gaps = 0;
    for (const auto& p : frame.points) {
        if (p.id == "c3" || p.id == "q1") {
            CHECK(p.role == "gap");
            ++gaps;
        } else {
            CHECK((p.role == "existing" || p.role == "questions"));
        }
        CHECK(std::isfinite(p.x));
        CHECK(std::isfinite(p.y));
    }
    CHECK(gaps == 2);

    // CSV: header plus one line per point, stable field order
    const std::string csv = frame.to_csv();
    CHECK(count_lines(csv) == 16);
    CHECK(csv.rfind("id,x,y,role\n", 0) == 0);
}

TEST_CASE("csv escapes separators and quotes") {
    ProjectionFrame frame;
    frame.points.push_back({"plain", 1.5, -2.0, "existing"});
    frame.points.push_back({"has,comma", 0.0, 0.0, "new"});
    frame.points.push_back({"has\"quote", 0.25, 0.5, "gap"});
    const std::string csv = frame.to_csv();
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "id,x,y,role");
    std::getline(lines, line);
    CHECK(line == "plain,1.5,-2,existing");
    std::getline(lines, line);
    CHECK(line == "\"has,comma\",0,0,new");
    std::getline(lines, line);
    CHECK(line == "\"has\"\"quote\",0.25,0.5,gap");
}

TEST_CASE("svg output is self-contained and covers every point") {
    Rng rng(503);
    Dataset corpus("c", DatasetRole::Corpus, 6);
    add_cluster(corpus, rng, "c", "src", {0, 0, 0, 0, 0, 0}, 1.0, 20);
    const PcaBasis basis = PcaBasis::fit(corpus);
    const ProjectionFrame frame = project_frame(basis, {{&corpus, "existing"}});

    const std::string svg = frame_to_svg(frame, "round 1 <test> & \"check\"");
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("href") == std::string::npos); // no external references
    CHECK(svg.find("&lt;test&gt; &amp; &quot;check&quot;") != std::string::npos);

    std::size_t circles = 0;
    for (std::size_t pos = svg.find("<circle"); pos != std::string::npos;
         pos = svg.find("<circle", pos + 1))
        ++circles;
    CHECK(circles == frame.points.size() + 1); // one legend swatch for one role

    // identical frames render identical bytes
    CHECK(frame_to_svg(frame, "round 1 <test> & \"check\"") == svg);

    // an empty frame still renders a valid document
    const std::string blank = frame_to_svg(ProjectionFrame{}, "empty");
    CHECK(blank.rfind("<svg", 0) == 0);
    CHECK(blank.find("</svg>") != std::string::npos);
}
