// Command line front end for the resistor-network DtN toolkit.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtn/curtis_morrow.hpp"
#include "dtn/error.hpp"
#include "dtn/forward.hpp"
#include "dtn/harness.hpp"
#include "dtn/io.hpp"
#include "dtn/linalg.hpp"
#include "dtn/sensitivity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path default_output_dir() {
    const char* env = std::getenv("DTN_OUTPUT_DIR");
    return env && *env ? fs::path(env) : fs::path("dtn_out");
}

dtn::DataMask load_mask(const std::string& name, const std::string& mask_file, int n) {
    if (mask_file.empty()) return dtn::build_mask(name, n);
    const json j = dtn::io::read_json(mask_file);
    try {
        return dtn::custom_mask(n, j.at("entries").get<std::vector<std::pair<int, int>>>());
    } catch (const json::exception& e) {
        throw dtn::ConfigError(std::string("mask file needs an \"entries\" list of [row, col]: ") + e.what());
    }
}

int fail(const fs::path& out_dir, const std::string& kind, const std::string& message) {
    const json record{{"status", "error"}, {"kind", kind}, {"message", message}};
    std::cerr << record.dump() << '\n';
    try {
        dtn::io::write_json(out_dir / "failure.json", record);
    } catch (...) {
    }
    return kind == "config_error" || kind == "invalid_argument" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conductivity recovery on square resistor networks"};
    app.require_subcommand(1);
    app.fallthrough();

    fs::path out_dir = default_output_dir();
    app.add_option("-o,--out", out_dir, "Output directory (default $DTN_OUTPUT_DIR or ./dtn_out)");

    std::string gamma_file, dtn_file, config_file, mask_name = "full", mask_file, init_name = "warm-start-green";
    int n = 10;
    double eps = 0.0, alpha = 1.0;
    std::uint64_t seed = 0;
    bool symmetrize = false, schur = false;
    long max_iters = 100000;

    auto* forward = app.add_subcommand("forward", "DtN matrix of a conductivity file");
    forward->add_option("gamma", gamma_file, "Conductivity JSON")->required()->check(CLI::ExistingFile);
    forward->add_flag("--schur", schur, "Use the dense Schur complement route");

    auto* truth = app.add_subcommand("truth", "Write the smooth reference conductivity");
    truth->add_option("-n", n, "Interior side length")->check(CLI::PositiveNumber);

    auto* noise = app.add_subcommand("noise", "Multiplicative Gaussian noise on a DtN matrix");
    noise->add_option("dtn", dtn_file, "DtN matrix (.json or .csv)")->required()->check(CLI::ExistingFile);
    noise->add_option("--eps", eps, "Relative noise level (1e-5 is 0.001%)")->required()->check(CLI::NonNegativeNumber);
    noise->add_option("--seed", seed, "RNG seed");
    noise->add_flag("--symmetrize", symmetrize, "Symmetrize the perturbed matrix");

    auto* train_cmd = app.add_subcommand("train", "Train the network on (masked) DtN data");
    train_cmd->add_option("dtn", dtn_file, "DtN matrix (.json or .csv)")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--mask", mask_name, "Named mask");
    train_cmd->add_option("--mask-file", mask_file, "JSON file with 0-based \"entries\"");
    train_cmd->add_option("--alpha", alpha, "Interior residual weight")->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", seed, "Initialization seed");
    train_cmd->add_option("--max-iters", max_iters, "Iteration budget")->check(CLI::PositiveNumber);
    train_cmd->add_option("--init", init_name, "random-positive or warm-start-green");

    auto* cm_rec = app.add_subcommand("cm-reconstruct", "Layer peeling from a full DtN matrix");
    cm_rec->add_option("dtn", dtn_file, "DtN matrix (.json or .csv)")->required()->check(CLI::ExistingFile);

    auto* cm_comp = app.add_subcommand("cm-complete", "Complete a DtN matrix from masked entries");
    cm_comp->add_option("dtn", dtn_file, "DtN matrix (.json or .csv); unmasked entries are ignored")
        ->required()
        ->check(CLI::ExistingFile);
    cm_comp->add_option("--mask", mask_name, "Named mask");
    cm_comp->add_option("--mask-file", mask_file, "JSON file with 0-based \"entries\"");

    auto* sens = app.add_subcommand("sensitivity", "Rank report and first-order error prediction");
    sens->add_option("gamma", gamma_file, "Conductivity JSON")->required()->check(CLI::ExistingFile);
    sens->add_option("--mask", mask_name, "Named mask");
    sens->add_option("--mask-file", mask_file, "JSON file with 0-based \"entries\"");
    sens->add_option("--noisy", dtn_file, "Perturbed DtN matrix; prediction uses its difference to the exact map")
        ->check(CLI::ExistingFile);

    auto* experiment = app.add_subcommand("experiment", "Run a configured pipeline and write the result bundle");
    experiment->add_option("config", config_file, "Experiment config JSON")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (forward->parsed()) {
            int side = 0;
            const dtn::Vec gamma = dtn::io::read_conductivity(gamma_file, &side);
            const dtn::SquareLattice lattice(side);
            const dtn::Mat lambda = schur ? dtn::dtn_matrix_schur(lattice, gamma) : dtn::dtn_matrix(lattice, gamma);
            dtn::io::write_dtn(out_dir / "dtn", lambda);
        } else if (truth->parsed()) {
            const dtn::SquareLattice lattice(n);
            const dtn::Vec gamma = dtn::generate_truth(lattice);
            dtn::io::write_json(out_dir / "gamma_true.json", dtn::io::conductivity_to_json(n, gamma));
            dtn::io::write_edge_grids(out_dir / "gamma_true", lattice, gamma);
        } else if (noise->parsed()) {
            const dtn::Mat lambda = dtn::io::read_dtn(dtn_file);
            std::mt19937_64 rng = dtn::make_stream(seed, 1);
            const dtn::Mat noisy = dtn::add_noise(lambda, eps, rng, symmetrize);
            dtn::io::write_dtn(out_dir / "dtn_noisy", noisy);
            dtn::io::write_json(out_dir / "noise.json",
                                {{"eps", eps},
                                 {"percent", eps * 100.0},
                                 {"seed", seed},
                                 {"symmetrized", symmetrize},
                                 {"asymmetry", (noisy - noisy.transpose()).cwiseAbs().maxCoeff()}});
        } else if (train_cmd->parsed()) {
            const dtn::Mat lambda = dtn::io::read_dtn(dtn_file);
            const dtn::SquareLattice lattice(static_cast<int>(lambda.rows() / 4));
            const dtn::DataMask mask = load_mask(mask_name, mask_file, lattice.n());
            const dtn::CauchySet data = dtn::build_cauchy_set(lambda, mask);
            dtn::AdamConfig config;
            config.alpha = alpha;
            config.max_iters = max_iters;
            config.seed = seed;
            dtn::validate(config);
            dtn::InitOptions init{dtn::parse_init_scheme(init_name), 0.3, 1.0};
            const auto initial = dtn::init_weights(lattice, dtn::derive_seed(seed, 2), init);
            const dtn::TrainReport report = dtn::train(lattice, data, initial, config);
            const dtn::Vec gamma = dtn::extract_conductivity(report.weights);
            dtn::io::write_json(out_dir / "weights.json", dtn::io::weights_to_json(report.weights));
            dtn::io::write_json(out_dir / "gamma_hat.json", dtn::io::conductivity_to_json(lattice.n(), gamma));
            dtn::io::write_edge_grids(out_dir / "gamma_hat", lattice, gamma);
            dtn::io::write_training_log(out_dir / "loss_history.csv", report, config);
            dtn::io::write_json(out_dir / "train.json", {{"status", to_string(report.status)},
                                                         {"iterations", report.loss_history.size()},
                                                         {"final_loss", report.final_loss},
                                                         {"message", report.message}});
            if (report.status == dtn::TrainStatus::NonFiniteLoss)
                return fail(out_dir, "numerical_failure", report.message);
        } else if (cm_rec->parsed()) {
            const dtn::Mat lambda = dtn::io::read_dtn(dtn_file);
            const dtn::SquareLattice lattice(static_cast<int>(lambda.rows() / 4));
            const dtn::ReconstructionResult rec = dtn::reconstruct(lattice, lambda);
            json flags = json::array();
            for (const auto& d : rec.degenerate) flags.push_back({{"edge", d.edge}, {"reason", d.reason}});
            json out = dtn::io::conductivity_to_json(lattice.n(), rec.gamma);
            out["degenerate_edges"] = flags;
            dtn::io::write_json(out_dir / "gamma_cm.json", out);
            dtn::io::write_edge_grids(out_dir / "gamma_cm", lattice, rec.gamma);
        } else if (cm_comp->parsed()) {
            const dtn::Mat lambda = dtn::io::read_dtn(dtn_file);
            const dtn::SquareLattice lattice(static_cast<int>(lambda.rows() / 4));
            const dtn::DataMask mask = load_mask(mask_name, mask_file, lattice.n());
            const dtn::CompletionResult completed = dtn::complete_dtn(lattice, lambda, mask);
            dtn::io::write_dtn(out_dir / "dtn_completed", completed.lambda);
        } else if (sens->parsed()) {
            int side = 0;
            const dtn::Vec gamma = dtn::io::read_conductivity(gamma_file, &side);
            const dtn::SquareLattice lattice(side);
            const dtn::DataMask mask = load_mask(mask_name, mask_file, side);
            const dtn::Mat s = dtn::restrict_rows(dtn::jacobian(lattice, gamma), mask);
            const dtn::RankReport rank = dtn::rank_report(s);
            json report{{"mask", mask.name},
                        {"rank", rank.rank},
                        {"columns", rank.columns},
                        {"sigma_max", rank.sigma_max},
                        {"sigma_min", rank.sigma_min},
                        {"sigma_ratio", rank.ratio()},
                        {"pinv_cutoff", dtn::kPinvCutoff}};
            if (!dtn_file.empty()) {
                const dtn::Mat noisy = dtn::io::read_dtn(dtn_file);
                const dtn::Vec v = dtn::restrict_values(noisy - dtn::dtn_matrix(lattice, gamma), mask);
                const dtn::Vec pred = dtn::pseudo_inverse(s, dtn::kPinvCutoff).matrix * v;
                report["prediction_norm"] = pred.norm();
                report["rank_deficient"] = rank.rank < rank.columns;
                dtn::io::write_edge_grids(out_dir / "sensitivity_abs", lattice, pred.cwiseAbs());
            }
            dtn::io::write_json(out_dir / "sensitivity.json", report);
        } else if (experiment->parsed()) {
            dtn::ExperimentConfig config = dtn::config_from_json(dtn::io::read_json(config_file));
            if (app.get_option("--out")->count() > 0 || config.output_dir.empty()) config.output_dir = out_dir;
            out_dir = config.output_dir;
            const dtn::ExperimentResult result = dtn::run_experiment(config);
            if (!result.ok) {
                std::cerr << json{{"status", "error"}, {"kind", result.failure_kind}, {"message", result.failure_message}}.dump()
                          << '\n';
                return result.failure_kind == "config_error" ? 2 : 1;
            }
            std::cout << "linf " << result.errors.linf << "  l2 " << result.errors.l2 << "  -> " << out_dir.string() << '\n';
        }
    } catch (const dtn::Error& e) {
        return fail(out_dir, e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(out_dir, "internal", e.what());
    }
    return 0;
}
