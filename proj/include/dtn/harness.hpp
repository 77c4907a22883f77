#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtn/curtis_morrow.hpp"
#include "dtn/mask.hpp"
#include "dtn/nn_model.hpp"
#include "dtn/sensitivity.hpp"
#include "dtn/trainer.hpp"

namespace dtn {

/// Smooth reference profile with values in [1/3, 1]: horizontal edges
/// (2 sin^2(0.2 i + 0.4 j) + 1) / 3, vertical edges
/// (2 sin^2(2i/11 + 4j/11) + 1) / 3, where (i, j) is the edge anchor.
Vec generate_truth(const SquareLattice& lattice);

/// Multiplicative noise Lambda_ij (1 + eps X_ij) with X_ij i.i.d. standard
/// normal, drawn column by column. Not symmetrized unless asked.
Mat add_noise(const Mat& lambda, double eps, std::mt19937_64& rng, bool symmetrize = false);

/// Samples are the basis vectors of every column with at least one observed
/// entry; unobserved rows of a sample are masked out of the loss.
CauchySet build_cauchy_set(const Mat& lambda, const DataMask& mask);

/// Independent RNG stream for (seed, stream id).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream);

/// Edges with a boundary endpoint.
std::vector<int> boundary_layer_edges(const SquareLattice& lattice);
/// Edges whose endpoints both have ring depth >= ceil(n/4) + 1.
std::vector<int> central_region_edges(const SquareLattice& lattice);

struct ErrorMetrics {
    Vec error;  // gamma_hat - gamma_true
    double l2 = 0.0;
    double linf = 0.0;
    double boundary_linf = 0.0;
    double central_linf = 0.0;
    int nonpositive = 0;
};

ErrorMetrics metrics(const SquareLattice& lattice, const Vec& gamma_hat, const Vec& gamma_true);

enum class Method { NeuralNetwork, NeuralNetworkAlphaInf, CurtisMorrow };
std::string to_string(Method method);
Method parse_method(const std::string& name);

/// Starting point of the alpha = infinity least-squares pipeline.
enum class LeastSquaresStart { Random, Truth, NoisePath };
std::string to_string(LeastSquaresStart start);
LeastSquaresStart parse_least_squares_start(const std::string& name);

struct FixedEdge {
    Node a;
    Node b;
    std::optional<double> value;  // empty: use the reference value
};

struct ExperimentConfig {
    int n = 10;
    Method method = Method::NeuralNetwork;
    std::string mask = "full";
    std::vector<std::pair<int, int>> custom_entries;
    double noise = 0.0;
    bool symmetrize_noise = false;
    double alpha = 1.0;  // +inf selects the least-squares pipeline
    std::uint64_t seed = 0;
    AdamConfig trainer;
    InitOptions init{InitScheme::WarmStartGreen, 0.3, 1.0};
    std::vector<FixedEdge> fixed_edges;
    LeastSquaresStart ls_start = LeastSquaresStart::NoisePath;
    int ls_steps = 5;
    LeastSquaresOptions ls;
    bool sensitivity = false;
    std::filesystem::path output_dir;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct SensitivityReport {
    std::string mask;
    RankReport rank;
    double prediction_norm = 0.0;   // || pinv(S_T') (Lambda_eps - Lambda) ||_2
    double derivative_norm = 0.0;   // prediction_norm / eps
    Vec prediction;                 // per edge
    bool rank_deficient = false;
};

struct ExperimentResult {
    bool ok = true;
    std::string failure_kind;
    std::string failure_message;

    Vec gamma_true;
    Vec gamma_hat;
    ErrorMetrics errors;
    double noise_asymmetry = 0.0;  // || Lambda_eps - Lambda_eps^T ||_inf

    std::optional<TrainReport> training;
    std::optional<LeastSquaresResult> least_squares;
    std::vector<DegenerateEdge> degenerate;
    std::optional<SensitivityReport> sensitivity;
    double wall_seconds = 0.0;
};

/// Runs one configured pipeline end to end. Module errors are captured in the
/// result. When output_dir is set the result bundle is written there.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Deterministic part of the result (no timing).
nlohmann::json result_to_json(const ExperimentConfig& config, const ExperimentResult& result);

void write_result_bundle(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace dtn
