#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dtn/error.hpp"
#include "dtn/harness.hpp"
#include "dtn/io.hpp"
#include "test_util.hpp"

using namespace dtn;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dtn_unit_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("reference conductivity") {
    const SquareLattice l(10);
    const Vec g = generate_truth(l);
    CHECK(g[l.edge_index(dtn::Edge{Orientation::Horizontal, {1, 1}})] ==
          doctest::Approx((2 * std::pow(std::sin(0.6), 2) + 1) / 3).epsilon(1e-15));
    CHECK(g[l.edge_index(dtn::Edge{Orientation::Horizontal, {1, 1}})] == doctest::Approx(0.5459).epsilon(1e-4));
    CHECK(g[l.edge_index(dtn::Edge{Orientation::Vertical, {1, 1}})] == doctest::Approx(0.5128).epsilon(1e-4));
    CHECK(g.minCoeff() >= 1.0 / 3.0);
    CHECK(g.maxCoeff() <= 1.0);
}

TEST_CASE("multiplicative noise") {
    const SquareLattice l(1);
    Mat lam = dtn_matrix(l, Vec::Ones(4));
    lam(0, 1) = lam(1, 0) = 0.0;
    std::mt19937_64 rng = make_stream(3, 1);
    CHECK(add_noise(lam, 0.0, rng) == lam);
    const Mat once = add_noise(lam, 0.1, rng);
    CHECK(once(0, 1) == 0.0);
    CHECK((once - once.transpose()).cwiseAbs().maxCoeff() > 0.0);
    const Mat sym = add_noise(lam, 0.1, rng, true);
    CHECK((sym - sym.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(add_noise(lam, -1.0, rng), DomainError);

    const double eps = 1e-3;
    double sum = 0.0, sq = 0.0;
    long count = 0;
    for (int draw = 0; draw < 10000; ++draw) {
        const Mat x = add_noise(lam, eps, rng);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                if (lam(i, j) == 0.0) continue;
                const double r = (x(i, j) - lam(i, j)) / lam(i, j);
                sum += r;
                sq += r * r;
                ++count;
            }
    }
    const double mean = sum / count;
    const double sd = std::sqrt(sq / count - mean * mean);
    CHECK(std::abs(mean) < 5.0 * eps / std::sqrt(static_cast<double>(count)));
    CHECK(sd == doctest::Approx(eps).epsilon(0.02));
}

TEST_CASE("streams are independent and reproducible") {
    CHECK(derive_seed(5, 1) == derive_seed(5, 1));
    CHECK(derive_seed(5, 1) != derive_seed(5, 2));
    CHECK(derive_seed(5, 1) != derive_seed(6, 1));
}

TEST_CASE("named masks") {
    CHECK(build_mask("C3n", 10).count() == 1200);
    CHECK(build_mask("Tsq", 10).count() == 900);
    CHECK(build_mask("Tre", 10).count() == 600);
    CHECK(build_mask("full", 10).count() == 1600);
    CHECK(build_mask("C2n", 10).count() == 800);
    CHECK(build_mask("D2n", 10).count() == 800);
    CHECK_THROWS_AS(build_mask("C4n", 10), ConfigError);

    const int n = 3;
    const DataMask c3 = build_mask("C3n", n), d2 = build_mask("D2n", n), c2 = build_mask("C2n", n);
    const DataMask tsq = build_mask("Tsq", n), tre = build_mask("Tre", n);
    for (int i = 0; i < 4 * n; ++i)
        for (int j = 0; j < 4 * n; ++j) {
            CHECK(c3.known(i, j) == (j >= n));
            CHECK(c2.known(i, j) == (j >= 2 * n));
            CHECK(d2.known(i, j) == (j < 2 * n));
            CHECK(tsq.known(i, j) == (i < 3 * n && j >= n));
            CHECK(tre.known(i, j) == (i < 2 * n && j >= n));
        }
    CHECK_THROWS_AS(custom_mask(n, {{0, 12}}), ConfigError);
}

TEST_CASE("Cauchy sets from masks") {
    const SquareLattice l(10);
    const Vec g = generate_truth(l);
    const Mat lam = dtn_matrix(l, g);
    const CauchySet full = build_cauchy_set(lam, build_mask("full", 10));
    CHECK(full.size() == 40);
    const CauchySet c3 = build_cauchy_set(lam, build_mask("C3n", 10));
    REQUIRE(c3.size() == 30);
    for (int k = 0; k < 30; ++k) CHECK(c3.dirichlet.col(k) == Vec::Unit(40, 10 + k));

    const SquareLattice l3(3);
    const Vec g3 = generate_truth(l3);
    const Mat lam3 = dtn_matrix(l3, g3);
    const WeightState truth = weights_from_conductivity(l3, g3);
    for (const std::string& name : mask_names()) {
        const CauchySet data = build_cauchy_set(lam3, build_mask(name, 3));
        CHECK(loss(l3, truth, data) < 1e-28);
    }
    const CauchySet tre = build_cauchy_set(lam3, build_mask("Tre", 3));
    CHECK(tre.size() == 9);
    CHECK(tre.mask.col(0).sum() == 6.0);
}

TEST_CASE("metrics") {
    const SquareLattice l(3);
    const Vec g = generate_truth(l);
    const ErrorMetrics zero = metrics(l, g, g);
    CHECK(zero.l2 == 0.0);
    CHECK(zero.linf == 0.0);
    Vec off = g;
    off[4] += 0.5;
    const ErrorMetrics one = metrics(l, off, g);
    CHECK(one.linf == doctest::Approx(0.5));
    CHECK(one.l2 == doctest::Approx(0.5));
    CHECK((one.error - (off - g)).norm() == 0.0);
    CHECK_THROWS_AS(metrics(l, Vec::Ones(3), g), ShapeError);

    const SquareLattice l10(10);
    CHECK(boundary_layer_edges(l10).size() == 40);
    for (int e : central_region_edges(l10)) {
        const auto [a, b] = l10.edge_nodes(e);
        CHECK(std::min(l10.ring(a), l10.ring(b)) >= 4);
    }
}

TEST_CASE("config JSON") {
    nlohmann::json j = {{"n", 4}, {"method", "nn"}, {"mask", "Tsq"}, {"noise", 1e-4}, {"alpha", 2.5}, {"seed", 9},
                        {"trainer", {{"max_iters", 500}, {"stagnation_window", 100}}},
                        {"fixed_edges", {{{"from", {2, 2}}, {"to", {2, 1}}}}}};
    const ExperimentConfig c = config_from_json(j);
    CHECK(c.n == 4);
    CHECK(c.trainer.max_iters == 500);
    CHECK(c.alpha == 2.5);
    CHECK(c.fixed_edges.size() == 1);
    CHECK_FALSE(c.fixed_edges[0].value.has_value());
    CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));

    const ExperimentConfig inf = config_from_json({{"n", 4}, {"alpha", "inf"}});
    CHECK(inf.method == Method::NeuralNetworkAlphaInf);
    CHECK(std::isinf(inf.alpha));

    CHECK_THROWS_AS(config_from_json({{"n", 4}, {"typo", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"noise", -1.0}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"alpha", 0.0}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"mask", "nope"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"method", "svm"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"n", "four"}}), ConfigError);
}

TEST_CASE("experiments are deterministic and write their bundle") {
    for (const char* method : {"nn", "nn-alpha-inf", "curtis-morrow"}) {
        ExperimentConfig c = config_from_json({{"n", 3}, {"method", method}, {"mask", "C3n"}, {"noise", 1e-4}, {"seed", 4},
                                               {"trainer", {{"max_iters", 300}}}, {"sensitivity", true}});
        c.output_dir = scratch_dir(std::string("det_") + method);
        const ExperimentResult a = run_experiment(c);
        INFO(method << ": " << a.failure_message);
        CHECK(a.ok);
        const std::string first = io::read_json(c.output_dir / "result.json").dump();
        const ExperimentResult b = run_experiment(c);
        CHECK(result_to_json(c, b).dump() == result_to_json(c, a).dump());
        CHECK(io::read_json(c.output_dir / "result.json").dump() == first);
        CHECK(fs::exists(c.output_dir / "gamma_hat_horizontal.csv"));
        CHECK(fs::exists(c.output_dir / "error_log10_vertical.csv"));
        CHECK(fs::exists(c.output_dir / "sensitivity_abs_horizontal.csv"));
        CHECK(fs::exists(c.output_dir / "timing.json"));
        CHECK(fs::exists(c.output_dir / "loss_history.csv") == (std::string(method) == "nn"));
        CHECK((a.errors.error - (a.gamma_hat - a.gamma_true)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("module errors are captured with a failure record") {
    std::vector<std::pair<int, int>> column;
    for (int i = 0; i < 12; ++i) column.emplace_back(i, 11);
    ExperimentConfig c;
    c.n = 3;
    c.method = Method::CurtisMorrow;
    c.mask = "custom";
    c.custom_entries = column;
    c.output_dir = scratch_dir("failure");
    const ExperimentResult r = run_experiment(c);
    CHECK_FALSE(r.ok);
    CHECK(r.failure_kind == "completion_failure");
    const auto failure = io::read_json(c.output_dir / "failure.json");
    CHECK(failure.at("kind") == "completion_failure");
    CHECK(io::read_json(c.output_dir / "result.json").at("status") == "error");
}

TEST_CASE("alpha = infinity pipeline: error scales linearly with small noise") {
    double ratio_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig c;
        c.n = 4;
        c.method = Method::NeuralNetworkAlphaInf;
        c.seed = seed;
        c.noise = 2e-6;
        const double big = run_experiment(c).errors.l2;
        c.noise = 1e-6;
        const double small = run_experiment(c).errors.l2;
        ratio_sum += small / big;
    }
    const double ratio = ratio_sum / 5;
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 0.7);
}

TEST_CASE("file formats round trip") {
    const fs::path dir = scratch_dir("io");
    const SquareLattice l(3);
    const Vec g = generate_truth(l);
    const Mat lam = dtn_matrix(l, g);
    io::write_dtn(dir / "lam", lam);
    CHECK(io::read_dtn(dir / "lam.csv") == lam);
    CHECK(io::read_dtn(dir / "lam.json") == lam);
    io::write_json(dir / "g.json", io::conductivity_to_json(3, g));
    int n = 0;
    CHECK(io::read_conductivity(dir / "g.json", &n) == g);
    CHECK(n == 3);
    const WeightState w = init_weights(l, 4, {InitScheme::WarmStartGreen, 0.3, 1.0});
    const WeightState back = io::weights_from_json(io::weights_to_json(w));
    CHECK(back.green_block == w.green_block);
    CHECK(back.edge_weights == w.edge_weights);
    CHECK(back.scheme == w.scheme);
    const io::EdgeGrids grids = io::edge_grids(l, g);
    CHECK(grids.horizontal.rows() == 3);
    CHECK(grids.horizontal.cols() == 4);
    CHECK(grids.vertical.rows() == 4);
    CHECK(grids.vertical.cols() == 3);
    CHECK(grids.horizontal(0, 0) == g[l.edge_index(dtn::Edge{Orientation::Horizontal, {1, 1}})]);
    CHECK_THROWS_AS(io::read_dtn(dir / "missing.csv"), ConfigError);
    CHECK_THROWS_AS(io::dtn_from_json({{"n", 3}, {"values", {1, 2}}}), ShapeError);
}
