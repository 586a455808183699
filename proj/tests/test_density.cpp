#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "semcov/dataset.hpp"
#include "semcov/density.hpp"
#include "semcov/errors.hpp"
#include "semcov/jsonl_io.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace semcov;

namespace {

Dataset from_rows(const std::vector<std::vector<double>>& rows, const std::string& prefix = "p") {
    Dataset d("inline", DatasetRole::Space, rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        d.add({prefix + std::to_string(i), "s", std::nullopt, rows[i]});
    return d;
}

} // namespace

TEST_CASE("kde at a lone sample point equals 1/h") {
    const Dataset samples = from_rows({{1.0, 2.0, 3.0}});
    const DensityField f = kde_log_density(samples, samples, {5.0});
    REQUIRE(f.log_densities.size() == 1);
    CHECK(f.log_densities[0] == doctest::Approx(std::log(0.2)).epsilon(1e-12));
}

TEST_CASE("two coincident samples keep density 1/h (1/m cancels the double count)") {
    const Dataset samples = from_rows({{4.0, -1.0}, {4.0, -1.0}});
    const Dataset eval = from_rows({{4.0, -1.0}}, "e");
    const DensityField f = kde_log_density(samples, eval, {5.0});
    CHECK(f.log_densities[0] == doctest::Approx(std::log(0.2)).epsilon(1e-12));
}

TEST_CASE("kde matches the brute-force oracle on random instances") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 1 + rng.below(8);
        const std::size_t n = 1 + rng.below(50);
        const double h = 0.5 + rng.uniform() * 9.5;
        std::vector<std::vector<double>> samples, evals;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v(dim);
            for (auto& x : v) x = rng.uniform(0.0, 0.5);
            samples.push_back(v);
        }
        for (std::size_t i = 0; i < 20; ++i) {
            std::vector<double> v(dim);
            for (auto& x : v) x = rng.uniform(0.0, 0.5);
            evals.push_back(v);
        }
        const DensityField f = kde_log_density(from_rows(samples), from_rows(evals, "e"), {h});
        for (std::size_t j = 0; j < evals.size(); ++j) {
            const double want = oracle::kde_log_density(evals[j], samples, h);
            CHECK(f.log_densities[j] == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("kde is translation invariant") {
    Rng rng(5);
    Dataset samples("s", DatasetRole::Space, 6);
    testsup::add_cluster(samples, rng, "a", "s", {0, 0, 0, 0, 0, 0}, 1.0, 40);
    const Dataset eval = samples;
    const DensityField base = kde_log_density(samples, eval, {2.0});

    const std::vector<double> shift{100.0, -40.0, 3.5, 0.25, -7.0, 55.0};
    Dataset samples2("s2", DatasetRole::Space, 6), eval2("e2", DatasetRole::Space, 6);
    for (auto rec : samples.records()) {
        for (std::size_t j = 0; j < shift.size(); ++j) rec.vector[j] += shift[j];
        samples2.add(rec);
    }
    eval2 = samples2;
    const DensityField shifted = kde_log_density(samples2, eval2, {2.0});
    for (std::size_t j = 0; j < base.log_densities.size(); ++j)
        CHECK(shifted.log_densities[j] == doctest::Approx(base.log_densities[j]).epsilon(1e-9));
}

TEST_CASE("duplicating every sample leaves log densities unchanged") {
    Rng rng(8);
    Dataset samples("s", DatasetRole::Space, 4);
    testsup::add_cluster(samples, rng, "a", "s", {1, 1, 1, 1}, 0.7, 25);
    Dataset doubled("d", DatasetRole::Space, 4);
    for (const auto& rec : samples.records()) doubled.add(rec);
    for (auto rec : samples.records()) {
        rec.id += "-copy";
        doubled.add(std::move(rec));
    }
    Dataset eval("e", DatasetRole::Space, 4);
    testsup::add_cluster(eval, rng, "e", "s", {1.2, 0.8, 1.0, 1.1}, 0.5, 10);

    const DensityField f1 = kde_log_density(samples, eval, {3.0});
    const DensityField f2 = kde_log_density(doubled, eval, {3.0});
    for (std::size_t j = 0; j < f1.log_densities.size(); ++j)
        CHECK(f2.log_densities[j] == doctest::Approx(f1.log_densities[j]).epsilon(1e-12));
}

TEST_CASE("far-away eval points still get finite log densities") {
    const Dataset samples = from_rows({{0.0}, {0.1}, {-0.1}});
    const Dataset eval = from_rows({{60.0}, {-900.0}}, "e");
    const DensityField f = kde_log_density(samples, eval, {0.5});
    for (double v : f.log_densities) {
        CHECK(std::isfinite(v));
        CHECK(v < -1000.0); // genuinely tiny, not clamped to something tame
    }
}

TEST_CASE("kde validates inputs") {
    const Dataset samples = from_rows({{1.0, 2.0}});
    const Dataset eval3 = from_rows({{1.0, 2.0, 3.0}}, "e");
    CHECK_THROWS_AS(kde_log_density(Dataset("x", DatasetRole::Space, 2), samples, {5.0}),
                    ValidationError);
    CHECK_THROWS_AS(kde_log_density(samples, eval3, {5.0}), ValidationError);
    CHECK_THROWS_AS(kde_log_density(samples, samples, {0.0}), ValidationError);
    CHECK_THROWS_AS(kde_log_density(samples, samples, {-1.0}), ValidationError);
}

TEST_CASE("log_density_ratio subtracts elementwise and checks alignment") {
    DensityField a{{"x", "y"}, {1.5, -2.0}};
    DensityField b{{"x", "y"}, {0.5, -2.0}};
    const auto deltas = log_density_ratio(a, b);
    CHECK(deltas == std::vector<IdDelta>{{"x", 1.0}, {"y", 0.0}});

    const auto self = log_density_ratio(a, a);
    for (const auto& d : self) CHECK(d.delta == 0.0); // exact, not approximate

    DensityField c{{"y", "x"}, {0.5, -2.0}};
    CHECK_THROWS_AS(log_density_ratio(a, c), ValidationError);
}

TEST_CASE("log_density_ratio matches an elementwise oracle on random fields") {
    Rng rng(12);
    DensityField a, b;
    for (int i = 0; i < 200; ++i) {
        a.eval_ids.push_back("p" + std::to_string(i));
        a.log_densities.push_back(rng.uniform(-50.0, 10.0));
        b.log_densities.push_back(rng.uniform(-50.0, 10.0));
    }
    b.eval_ids = a.eval_ids;
    const auto deltas = log_density_ratio(a, b);
    for (int i = 0; i < 200; ++i) {
        const auto u = static_cast<std::size_t>(i);
        CHECK(deltas[u].delta == a.log_densities[u] - b.log_densities[u]);
    }
}

TEST_CASE("gap_points filters strictly above the slack") {
    CHECK(gap_points({{"a", 0.0}, {"b", 0.0}}, 0.0).empty());

    const GapSet g = gap_points({{"a", 0.5}, {"b", -0.2}, {"c", 0.01}}, 0.05);
    CHECK(g.point_ids == std::vector<std::string>{"a"});
    CHECK(g.threshold_used == 0.05);

    CHECK_THROWS_AS(gap_points({}, -0.1), ValidationError);
}

TEST_CASE("gap_points membership equals a brute filter on 1000 random deltas") {
    Rng rng(33);
    std::vector<IdDelta> deltas;
    std::set<std::string> expect;
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.uniform(-1.0, 1.0);
        const std::string id = "p" + std::to_string(i);
        deltas.push_back({id, d});
        if (d > 0.1) expect.insert(id);
    }
    const GapSet g = gap_points(deltas, 0.1);
    CHECK(g.size() == expect.size());
    for (const auto& id : g.point_ids) CHECK(expect.count(id) == 1);
}

TEST_CASE("percentile_threshold endpoints and median") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(percentile_threshold(v, 1.0) == doctest::Approx(1.0));
    CHECK(percentile_threshold(v, 0.0) == doctest::Approx(4.0));

    Rng rng(21);
    std::vector<double> u;
    for (int i = 0; i < 500; ++i) u.push_back(rng.uniform(0.0, 5.0));
    CHECK(percentile_threshold(u, 0.5) == doctest::Approx(oracle::quantile(u, 0.5)).epsilon(1e-12));

    CHECK_THROWS_AS(percentile_threshold({}, 0.5), ValidationError);
    CHECK_THROWS_AS(percentile_threshold(v, 1.5), ValidationError);
    CHECK_THROWS_AS(percentile_threshold(v, -0.1), ValidationError);
}

TEST_CASE("select_gap is empty when candidate equals reference") {
    Rng rng(44);
    Dataset c("c", DatasetRole::Corpus, 8);
    testsup::add_cluster(c, rng, "a", "s", std::vector<double>(8, 0.0), 1.0, 60);
    const GapSet g = select_gap(c, c, {5.0}, 0.6);
    CHECK(g.empty());
}

TEST_CASE("select_gap flags the uncovered cluster") {
    Rng rng(55);
    const std::size_t dim = 16;
    const double h = 2.0;
    std::vector<double> near(dim, 0.0), far(dim, 0.0);
    far[0] = 10.0 * h * 2.0; // separation 20h, far beyond kernel reach

    Dataset reference("s", DatasetRole::Space, dim);
    testsup::add_cluster(reference, rng, "a", "s", near, 1.0, 120);
    testsup::add_cluster(reference, rng, "b", "s", far, 1.0, 120);

    std::vector<std::string> cluster_a_ids;
    for (std::size_t i = 0; i < 120; ++i) cluster_a_ids.push_back("a" + std::to_string(i));
    const Dataset candidate = reference.subset(cluster_a_ids, "c");

    const GapSet g = select_gap(reference, candidate, {h}, 1.0);
    std::size_t b_hit = 0, a_hit = 0;
    for (const auto& id : g.point_ids) {
        if (id.starts_with("b")) ++b_hit;
        if (id.starts_with("a")) ++a_hit;
    }
    CHECK(b_hit >= 114); // >= 95% of the 120 uncovered points
    CHECK(a_hit <= 12);  // <= 10% of the covered ones
}

TEST_CASE("select_gap count is non-decreasing in t_d under percentile mode") {
    Rng rng(66);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 4;
        Dataset reference("s", DatasetRole::Space, dim);
        std::vector<double> c1(dim, 0.0), c2(dim, 0.0);
        c2[0] = rng.uniform(3.0, 30.0);
        testsup::add_cluster(reference, rng, "a", "s", c1, 1.0, 30);
        testsup::add_cluster(reference, rng, "b", "s", c2, 1.0, 30);
        Dataset candidate("q", DatasetRole::Questions, dim);
        testsup::add_cluster(candidate, rng, "q", "q", c1, 1.2, 20);

        std::size_t prev = 0;
        bool first = true;
        for (double t_d : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const GapSet g = select_gap(reference, candidate, {1.0}, t_d);
            if (!first) CHECK(g.size() >= prev);
            prev = g.size();
            first = false;
        }
    }
}

TEST_CASE("literal threshold mode selects fewer points as t_d grows") {
    Rng rng(77);
    Dataset reference("s", DatasetRole::Space, 4);
    std::vector<double> c1(4, 0.0), c2(4, 0.0);
    c2[0] = 12.0;
    testsup::add_cluster(reference, rng, "a", "s", c1, 1.0, 30);
    testsup::add_cluster(reference, rng, "b", "s", c2, 1.0, 30);
    Dataset candidate("q", DatasetRole::Questions, 4);
    testsup::add_cluster(candidate, rng, "q", "q", c1, 1.0, 20);

    const GapSet lo = select_gap(reference, candidate, {1.0}, 0.1, 0.05, ThresholdMode::Literal);
    const GapSet hi = select_gap(reference, candidate, {1.0}, 0.9, 0.05, ThresholdMode::Literal);
    CHECK(lo.size() >= hi.size());
    CHECK(lo.threshold_used == doctest::Approx(0.1));
    CHECK(hi.threshold_used == doctest::Approx(0.9));
}

TEST_CASE("select_gap rejects conflicting duplicate ids and bad t_d") {
    const Dataset a = from_rows({{0.0, 0.0}}, "x");
    const Dataset b = from_rows({{1.0, 1.0}}, "x"); // same id "x0", different vector
    CHECK_THROWS_AS(select_gap(a, b, {5.0}, 0.5), ValidationError);
    CHECK_THROWS_AS(select_gap(a, a, {5.0}, 1.5), ValidationError);
}

TEST_CASE("density field serializes to jsonl and back") {
    testsup::TempDir tmp("density");
    DensityField f{{"p0", "p1", "p2"}, {-1.5, -2.25, -0.125}};
    atomic_write(tmp.file("f.jsonl"), density_field_to_jsonl(f));
    const DensityField back = density_field_from_jsonl(tmp.file("f.jsonl"));
    CHECK(back.eval_ids == f.eval_ids);
    CHECK(back.log_densities == f.log_densities);

    const GapSet g{{"a"}, {0.75}, 0.5};
    CHECK(gap_set_to_jsonl(g) == "{\"delta\":0.75,\"id\":\"a\"}\n");
}
