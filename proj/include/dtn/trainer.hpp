#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dtn/nn_model.hpp"

namespace dtn {

struct AdamConfig {
    double initial_step = 0.002;
    std::vector<double> beta1_schedule{0.9, 0.99, 0.999};
    std::vector<double> beta2_schedule{0.999, 0.9999};
    double epsilon_hat = 1e-8;
    long stagnation_window = 2000;
    double stagnation_rel_drop = 1e-2;
    long max_iters = 100000;
    double loss_floor = 1e-18;
    double min_step = 1e-10;
    std::uint64_t seed = 0;

    double alpha = 1.0;
    /// Project edge weights onto [clamp_epsilon, inf) after every step.
    bool clamp_positive = false;
    double clamp_epsilon = 1e-8;
    /// Edges held at a prescribed value for the whole run.
    std::vector<std::pair<int, double>> fixed_edges;
    /// Call on_checkpoint every this many iterations (0 disables).
    long checkpoint_every = 0;
};

/// Throws ConfigError when the configuration violates its invariants.
void validate(const AdamConfig& config);

/// First and second moment estimates for one flat parameter block.
struct AdamMoments {
    Vec m;
    Vec v;
};

/// One bias-corrected Adam update at iteration t (t >= 1). Throws
/// NumericalFailure on a non-finite gradient.
void adam_step(Eigen::Ref<Vec> params, const Vec& grad, AdamMoments& moments, long t, double step, double beta1,
               double beta2, double epsilon_hat);

/// True when the best loss of the last `window` entries improves on the best
/// loss before them by less than `rel_drop` (relative).
/// Stagnation window used in a stage: at least the averaging horizon
/// 1 / (1 - beta2) of the second moment estimate.
long stage_window(long window, double beta2);

bool detect_stagnation(std::span<const double> history, long window, double rel_drop);

struct ScheduleChange {
    long iteration = 0;
    double step = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
};

/// Stalled: stagnation detected again after the step size hit min_step.
enum class TrainStatus { MaxIters, LossFloor, Stalled, NonFiniteLoss };

std::string to_string(TrainStatus status);

struct TrainReport {
    WeightState weights;
    std::vector<double> loss_history;
    std::vector<ScheduleChange> schedule;
    double final_loss = 0.0;
    double wall_seconds = 0.0;
    TrainStatus status = TrainStatus::MaxIters;
    std::string message;
};

using CheckpointFn = std::function<void(long iteration, const WeightState& weights, double loss)>;

/// Trains from `initial` with Adam and the stagnation-driven schedule.
/// Deterministic for equal inputs.
TrainReport train(const SquareLattice& lattice, const CauchySet& data, WeightState initial, const AdamConfig& config,
                  const CheckpointFn& on_checkpoint = {});

}  // namespace dtn
