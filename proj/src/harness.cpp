#include "dtn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "dtn/error.hpp"
#include "dtn/io.hpp"
#include "dtn/linalg.hpp"

namespace dtn {

using nlohmann::json;

Vec generate_truth(const SquareLattice& lattice) {
    Vec gamma(lattice.edge_count());
    for (int e = 0; e < lattice.edge_count(); ++e) {
        const Edge& edge = lattice.edge(e);
        const double i = edge.anchor.i;
        const double j = edge.anchor.j;
        const double s = edge.orientation == Orientation::Horizontal ? std::sin(0.2 * i + 0.4 * j)
                                                                     : std::sin(2.0 * i / 11.0 + 4.0 * j / 11.0);
        gamma[e] = (2.0 * s * s + 1.0) / 3.0;
    }
    return gamma;
}

Mat add_noise(const Mat& lambda, double eps, std::mt19937_64& rng, bool symmetrize) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("noise level must be finite and >= 0");
    if (eps == 0.0) return lambda;
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat out = lambda;
    for (Eigen::Index j = 0; j < lambda.cols(); ++j)
        for (Eigen::Index i = 0; i < lambda.rows(); ++i) out(i, j) += eps * normal(rng) * lambda(i, j);
    if (symmetrize) out = (0.5 * (out + out.transpose())).eval();
    return out;
}

CauchySet build_cauchy_set(const Mat& lambda, const DataMask& mask) {
    const Eigen::Index m = lambda.rows();
    if (lambda.cols() != m || mask.known.rows() != m || mask.known.cols() != m)
        throw ShapeError("DtN matrix and mask must be square and of equal size");
    std::vector<int> columns;
    for (int j = 0; j < m; ++j)
        if (mask.known.col(j).any()) columns.push_back(j);
    if (columns.empty()) throw ConfigError("mask '" + mask.name + "' observes no entries");

    CauchySet data;
    const auto count = static_cast<Eigen::Index>(columns.size());
    data.dirichlet = Mat::Zero(m, count);
    data.neumann = Mat::Zero(m, count);
    data.mask = Mat::Zero(m, count);
    for (Eigen::Index c = 0; c < count; ++c) {
        const int j = columns[static_cast<std::size_t>(c)];
        data.dirichlet(j, c) = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (!mask.known(i, j)) continue;
            data.neumann(i, c) = lambda(i, j);
            data.mask(i, c) = 1.0;
        }
    }
    return data;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream) { return std::mt19937_64(derive_seed(seed, stream)); }

std::vector<int> boundary_layer_edges(const SquareLattice& lattice) {
    std::vector<int> out;
    for (int e = 0; e < lattice.edge_count(); ++e) {
        const auto [a, b] = lattice.edge_nodes(e);
        if (lattice.is_boundary(a) || lattice.is_boundary(b)) out.push_back(e);
    }
    return out;
}

std::vector<int> central_region_edges(const SquareLattice& lattice) {
    const int depth = (lattice.n() + 3) / 4 + 1;
    std::vector<int> out;
    for (int e = 0; e < lattice.edge_count(); ++e) {
        const auto [a, b] = lattice.edge_nodes(e);
        if (lattice.ring(a) >= depth && lattice.ring(b) >= depth) out.push_back(e);
    }
    return out;
}

ErrorMetrics metrics(const SquareLattice& lattice, const Vec& gamma_hat, const Vec& gamma_true) {
    if (gamma_hat.size() != gamma_true.size() || gamma_true.size() != lattice.edge_count())
        throw ShapeError("conductivity vectors must both have 2n(n+1) entries");
    ErrorMetrics m;
    m.error = gamma_hat - gamma_true;
    m.l2 = m.error.norm();
    m.linf = m.error.size() ? m.error.cwiseAbs().maxCoeff() : 0.0;
    for (int e : boundary_layer_edges(lattice)) m.boundary_linf = std::max(m.boundary_linf, std::abs(m.error[e]));
    for (int e : central_region_edges(lattice)) m.central_linf = std::max(m.central_linf, std::abs(m.error[e]));
    m.nonpositive = static_cast<int>((gamma_hat.array() <= 0.0).count());
    return m;
}

std::string to_string(Method method) {
    switch (method) {
        case Method::NeuralNetwork: return "nn";
        case Method::NeuralNetworkAlphaInf: return "nn-alpha-inf";
        case Method::CurtisMorrow: return "curtis-morrow";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "nn") return Method::NeuralNetwork;
    if (name == "nn-alpha-inf") return Method::NeuralNetworkAlphaInf;
    if (name == "curtis-morrow") return Method::CurtisMorrow;
    throw ConfigError("unknown method '" + name + "' (expected nn, nn-alpha-inf or curtis-morrow)");
}

std::string to_string(LeastSquaresStart start) {
    switch (start) {
        case LeastSquaresStart::Random: return "random";
        case LeastSquaresStart::Truth: return "truth";
        case LeastSquaresStart::NoisePath: return "noise-path";
    }
    return "unknown";
}

LeastSquaresStart parse_least_squares_start(const std::string& name) {
    if (name == "random") return LeastSquaresStart::Random;
    if (name == "truth") return LeastSquaresStart::Truth;
    if (name == "noise-path") return LeastSquaresStart::NoisePath;
    throw ConfigError("unknown least-squares start '" + name + "' (expected random, truth or noise-path)");
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

Node node_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("a node must be written as [i, j]");
    return {j[0].get<int>(), j[1].get<int>()};
}

AdamConfig trainer_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"initial_step", "beta1_schedule", "beta2_schedule", "epsilon_hat", "stagnation_window",
                         "stagnation_rel_drop", "max_iters", "loss_floor", "min_step", "clamp_positive", "clamp_epsilon",
                         "checkpoint_every"},
                        "trainer");
    AdamConfig c;
    c.initial_step = j.value("initial_step", c.initial_step);
    c.beta1_schedule = j.value("beta1_schedule", c.beta1_schedule);
    c.beta2_schedule = j.value("beta2_schedule", c.beta2_schedule);
    c.epsilon_hat = j.value("epsilon_hat", c.epsilon_hat);
    c.stagnation_window = j.value("stagnation_window", c.stagnation_window);
    c.stagnation_rel_drop = j.value("stagnation_rel_drop", c.stagnation_rel_drop);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.loss_floor = j.value("loss_floor", c.loss_floor);
    c.min_step = j.value("min_step", c.min_step);
    c.clamp_positive = j.value("clamp_positive", c.clamp_positive);
    c.clamp_epsilon = j.value("clamp_epsilon", c.clamp_epsilon);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    return c;
}

json trainer_to_json(const AdamConfig& c) {
    return json{{"initial_step", c.initial_step},       {"beta1_schedule", c.beta1_schedule},
                {"beta2_schedule", c.beta2_schedule},   {"epsilon_hat", c.epsilon_hat},
                {"stagnation_window", c.stagnation_window}, {"stagnation_rel_drop", c.stagnation_rel_drop},
                {"max_iters", c.max_iters},             {"loss_floor", c.loss_floor},
                {"min_step", c.min_step},               {"clamp_positive", c.clamp_positive},
                {"clamp_epsilon", c.clamp_epsilon},     {"checkpoint_every", c.checkpoint_every}};
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    try {
        reject_unknown_keys(j,
                            {"n", "method", "mask", "mask_entries", "noise", "noise_percent", "symmetrize_noise", "alpha", "seed", "trainer",
                             "init", "fixed_edges", "least_squares", "sensitivity", "output_dir"},
                            "experiment config");
        ExperimentConfig c;
        c.n = j.value("n", c.n);
        if (c.n < 1) throw ConfigError("n must be >= 1");
        if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
        c.mask = j.value("mask", c.mask);
        if (j.contains("mask_entries")) c.custom_entries = j.at("mask_entries").get<std::vector<std::pair<int, int>>>();
        if (c.mask == "custom" && c.custom_entries.empty()) throw ConfigError("custom mask needs mask_entries");
        if (c.mask != "custom") build_mask(c.mask, c.n);
        c.noise = j.value("noise", c.noise);
        if (!(c.noise >= 0.0) || !std::isfinite(c.noise)) throw ConfigError("noise must be finite and >= 0");
        c.symmetrize_noise = j.value("symmetrize_noise", c.symmetrize_noise);
        if (j.contains("alpha")) {
            const auto& a = j.at("alpha");
            if (a.is_string()) {
                if (a.get<std::string>() != "inf") throw ConfigError("alpha must be a positive number or \"inf\"");
                c.alpha = std::numeric_limits<double>::infinity();
                c.method = Method::NeuralNetworkAlphaInf;
            } else {
                c.alpha = a.get<double>();
            }
        }
        if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
        if (c.method == Method::NeuralNetworkAlphaInf) c.alpha = std::numeric_limits<double>::infinity();
        c.seed = j.value("seed", c.seed);
        if (j.contains("trainer")) c.trainer = trainer_from_json(j.at("trainer"));
        c.trainer.seed = c.seed;
        if (std::isfinite(c.alpha)) c.trainer.alpha = c.alpha;
        validate(c.trainer);
        if (j.contains("init")) {
            const auto& ji = j.at("init");
            reject_unknown_keys(ji, {"scheme", "gamma_low", "gamma_high"}, "init");
            if (ji.contains("scheme")) c.init.scheme = parse_init_scheme(ji.at("scheme").get<std::string>());
            c.init.gamma_low = ji.value("gamma_low", c.init.gamma_low);
            c.init.gamma_high = ji.value("gamma_high", c.init.gamma_high);
        }
        if (!(c.init.gamma_low > 0.0 && c.init.gamma_high > c.init.gamma_low))
            throw ConfigError("init range must satisfy 0 < gamma_low < gamma_high");
        if (j.contains("fixed_edges")) {
            for (const auto& fe : j.at("fixed_edges")) {
                reject_unknown_keys(fe, {"from", "to", "value"}, "fixed_edges entry");
                FixedEdge edge{node_from_json(fe.at("from")), node_from_json(fe.at("to")), std::nullopt};
                if (fe.contains("value") && !fe.at("value").is_null()) edge.value = fe.at("value").get<double>();
                c.fixed_edges.push_back(edge);
            }
        }
        if (j.contains("least_squares")) {
            const auto& jl = j.at("least_squares");
            reject_unknown_keys(jl, {"start", "steps", "max_iters", "gradient_tol"}, "least_squares");
            if (jl.contains("start")) c.ls_start = parse_least_squares_start(jl.at("start").get<std::string>());
            c.ls_steps = jl.value("steps", c.ls_steps);
            c.ls.max_iters = jl.value("max_iters", c.ls.max_iters);
            c.ls.gradient_tol = jl.value("gradient_tol", c.ls.gradient_tol);
            if (c.ls_steps < 1 || c.ls.max_iters < 0) throw ConfigError("least_squares steps/max_iters out of range");
        }
        c.sensitivity = j.value("sensitivity", c.sensitivity);
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    }
}

json config_to_json(const ExperimentConfig& c) {
    json fixed = json::array();
    for (const auto& fe : c.fixed_edges)
        fixed.push_back({{"from", {fe.a.i, fe.a.j}}, {"to", {fe.b.i, fe.b.j}}, {"value", fe.value ? json(*fe.value) : json(nullptr)}});
    json j{{"n", c.n},
           {"method", to_string(c.method)},
           {"mask", c.mask},
           {"noise", c.noise},
           {"noise_percent", c.noise * 100.0},
           {"symmetrize_noise", c.symmetrize_noise},
           {"alpha", std::isfinite(c.alpha) ? json(c.alpha) : json("inf")},
           {"seed", c.seed},
           {"trainer", trainer_to_json(c.trainer)},
           {"init", {{"scheme", to_string(c.init.scheme)}, {"gamma_low", c.init.gamma_low}, {"gamma_high", c.init.gamma_high}}},
           {"fixed_edges", fixed},
           {"least_squares",
            {{"start", to_string(c.ls_start)}, {"steps", c.ls_steps}, {"max_iters", c.ls.max_iters}, {"gradient_tol", c.ls.gradient_tol}}},
           {"sensitivity", c.sensitivity}};
    if (c.mask == "custom") j["mask_entries"] = c.custom_entries;
    return j;
}

namespace {

std::vector<double> to_vector(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

DataMask experiment_mask(const ExperimentConfig& c) {
    return c.mask == "custom" ? custom_mask(c.n, c.custom_entries) : build_mask(c.mask, c.n);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result;
    try {
        const SquareLattice lattice(config.n);
        result.gamma_true = generate_truth(lattice);
        const Mat exact = dtn_matrix(lattice, result.gamma_true);
        std::mt19937_64 noise_rng = make_stream(config.seed, 1);
        const Mat noisy = add_noise(exact, config.noise, noise_rng, config.symmetrize_noise);
        result.noise_asymmetry = (noisy - noisy.transpose()).cwiseAbs().maxCoeff();
        const DataMask mask = experiment_mask(config);

        if (config.method != Method::NeuralNetwork && !config.fixed_edges.empty())
            throw ConfigError("fixed edges are supported by the nn method only");

        switch (config.method) {
            case Method::NeuralNetwork: {
                const CauchySet data = build_cauchy_set(noisy, mask);
                const WeightState initial = init_weights(lattice, derive_seed(config.seed, 2), config.init);
                AdamConfig trainer = config.trainer;
                trainer.alpha = config.alpha;
                for (const auto& fe : config.fixed_edges) {
                    const int e = lattice.edge_index(fe.a, fe.b);
                    trainer.fixed_edges.emplace_back(e, fe.value ? *fe.value : result.gamma_true[e]);
                }
                if (!config.output_dir.empty() && trainer.checkpoint_every > 0) {
                    const auto path = config.output_dir / "checkpoint.json";
                    result.training = train(lattice, data, initial, trainer, [&](long t, const WeightState& w, double l) {
                        auto j = io::weights_to_json(w);
                        j["iteration"] = t;
                        j["loss"] = l;
                        io::write_json(path, j);
                    });
                } else {
                    result.training = train(lattice, data, initial, trainer);
                }
                result.gamma_hat = extract_conductivity(result.training->weights);
                if (result.training->status == TrainStatus::NonFiniteLoss)
                    throw NumericalFailure(result.training->message, NAN);
                break;
            }
            case Method::NeuralNetworkAlphaInf: {
                if (config.ls_start == LeastSquaresStart::NoisePath) {
                    result.least_squares =
                        noise_path_least_squares(lattice, exact, noisy - exact, mask, result.gamma_true, config.ls_steps, config.ls);
                } else {
                    Vec gamma0 = result.gamma_true;
                    if (config.ls_start == LeastSquaresStart::Random) {
                        std::mt19937_64 rng(derive_seed(config.seed, 2));
                        std::uniform_real_distribution<double> dist(config.init.gamma_low, config.init.gamma_high);
                        for (Eigen::Index e = 0; e < gamma0.size(); ++e) gamma0[e] = dist(rng);
                    }
                    result.least_squares = masked_least_squares(lattice, noisy, mask, gamma0, config.ls);
                }
                result.gamma_hat = result.least_squares->gamma;
                break;
            }
            case Method::CurtisMorrow: {
                const Mat full = mask.known.all() ? noisy : complete_dtn(lattice, noisy, mask).lambda;
                ReconstructionResult rec = reconstruct(lattice, full);
                result.gamma_hat = rec.gamma;
                result.degenerate = std::move(rec.degenerate);
                break;
            }
        }
        result.errors = metrics(lattice, result.gamma_hat, result.gamma_true);

        if (config.sensitivity) {
            SensitivityReport report;
            report.mask = mask.name;
            const Mat s = restrict_rows(jacobian(lattice, result.gamma_true), mask);
            report.rank = rank_report(s);
            const Vec v = restrict_values(noisy - exact, mask);
            try {
                report.prediction = first_order_prediction(s, v);
            } catch (const RankDeficiency&) {
                report.rank_deficient = true;
                report.prediction = pseudo_inverse(s, kPinvCutoff).matrix * v;
            }
            report.prediction_norm = report.prediction.norm();
            report.derivative_norm = config.noise > 0.0 ? report.prediction_norm / config.noise : 0.0;
            result.sensitivity = std::move(report);
        }
    } catch (const Error& e) {
        result.ok = false;
        result.failure_kind = e.kind();
        result.failure_message = e.what();
    } catch (const std::exception& e) {
        result.ok = false;
        result.failure_kind = "internal";
        result.failure_message = e.what();
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!config.output_dir.empty()) write_result_bundle(config, result);
    return result;
}

json result_to_json(const ExperimentConfig& config, const ExperimentResult& r) {
    json j{{"config", config_to_json(config)}, {"status", r.ok ? "ok" : "error"}};
    if (!r.ok) j["failure"] = {{"kind", r.failure_kind}, {"message", r.failure_message}};
    if (r.gamma_hat.size()) {
        j["gamma_hat"] = to_vector(r.gamma_hat);
        j["error"] = {{"l2", r.errors.l2},
                      {"linf", r.errors.linf},
                      {"boundary_linf", r.errors.boundary_linf},
                      {"central_linf", r.errors.central_linf},
                      {"nonpositive_edges", r.errors.nonpositive},
                      {"per_edge", to_vector(r.errors.error)}};
        j["noise_asymmetry"] = r.noise_asymmetry;
    }
    if (r.training) {
        const TrainReport& t = *r.training;
        json schedule = json::array();
        for (const auto& s : t.schedule)
            schedule.push_back({{"iteration", s.iteration}, {"step", s.step}, {"beta1", s.beta1}, {"beta2", s.beta2}});
        j["training"] = {{"iterations", t.loss_history.size()},
                         {"final_loss", t.final_loss},
                         {"status", to_string(t.status)},
                         {"message", t.message},
                         {"schedule", schedule}};
    }
    if (r.least_squares)
        j["least_squares"] = {{"residual", r.least_squares->residual},
                              {"iterations", r.least_squares->iterations},
                              {"converged", r.least_squares->converged}};
    if (config.method == Method::CurtisMorrow) {
        json flags = json::array();
        for (const auto& d : r.degenerate) flags.push_back({{"edge", d.edge}, {"reason", d.reason}});
        j["degenerate_edges"] = flags;
    }
    if (r.sensitivity) {
        const SensitivityReport& s = *r.sensitivity;
        j["sensitivity"] = {{"mask", s.mask},
                            {"rank", s.rank.rank},
                            {"columns", s.rank.columns},
                            {"sigma_max", s.rank.sigma_max},
                            {"sigma_min", s.rank.sigma_min},
                            {"sigma_ratio", s.rank.ratio()},
                            {"pinv_cutoff", kPinvCutoff},
                            {"rank_deficient", s.rank_deficient},
                            {"prediction_norm", s.prediction_norm},
                            {"derivative_norm", s.derivative_norm}};
    }
    return j;
}

void write_result_bundle(const ExperimentConfig& config, const ExperimentResult& r) {
    namespace fs = std::filesystem;
    const fs::path& dir = config.output_dir;
    fs::create_directories(dir);
    io::write_json(dir / "result.json", result_to_json(config, r));

    json timing{{"wall_seconds", r.wall_seconds}};
    if (r.training && !r.training->loss_history.empty())
        timing["seconds_per_1e4_iterations"] =
            r.training->wall_seconds * 1e4 / static_cast<double>(r.training->loss_history.size());
    io::write_json(dir / "timing.json", timing);

    if (!r.ok) io::write_json(dir / "failure.json", {{"status", "error"}, {"kind", r.failure_kind}, {"message", r.failure_message}});
    if (r.gamma_hat.size() == 0) return;

    const SquareLattice lattice(config.n);
    io::write_json(dir / "gamma_hat.json", io::conductivity_to_json(config.n, r.gamma_hat));
    io::write_edge_grids(dir / "gamma_hat", lattice, r.gamma_hat);
    const Vec log_error = r.errors.error.cwiseAbs().unaryExpr([](double x) { return std::log10(std::max(x, 1e-300)); });
    io::write_edge_grids(dir / "error_log10", lattice, log_error);
    if (r.training) io::write_training_log(dir / "loss_history.csv", *r.training, config.trainer);
    if (r.sensitivity) io::write_edge_grids(dir / "sensitivity_abs", lattice, r.sensitivity->prediction.cwiseAbs());
}

}  // namespace dtn
