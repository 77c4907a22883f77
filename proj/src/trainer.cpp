#include "dtn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dtn/error.hpp"

namespace dtn {

namespace {

double schedule_value(const std::vector<double>& schedule, std::size_t stage) {
    return schedule[std::min(stage, schedule.size() - 1)];
}

void check_beta_schedule(const std::vector<double>& schedule, const char* name) {
    if (schedule.empty()) throw ConfigError(std::string(name) + " schedule is empty");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] >= 0.0 && schedule[i] < 1.0))
            throw ConfigError(std::string(name) + " values must lie in [0, 1)");
        if (i > 0 && schedule[i] < schedule[i - 1])
            throw ConfigError(std::string(name) + " schedule must be non-decreasing");
    }
}

}  // namespace

void validate(const AdamConfig& c) {
    if (!(c.initial_step > 0.0)) throw ConfigError("initial_step must be positive");
    check_beta_schedule(c.beta1_schedule, "beta1");
    check_beta_schedule(c.beta2_schedule, "beta2");
    if (!(c.epsilon_hat > 0.0)) throw ConfigError("epsilon_hat must be positive");
    if (c.stagnation_window < 2) throw ConfigError("stagnation_window must be at least 2");
    if (!(c.stagnation_rel_drop > 0.0)) throw ConfigError("stagnation_rel_drop must be positive");
    if (c.max_iters < 0) throw ConfigError("max_iters must be non-negative");
    if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) throw ConfigError("alpha must be finite and positive");
    if (c.checkpoint_every < 0) throw ConfigError("checkpoint_every must be non-negative");
}

void adam_step(Eigen::Ref<Vec> params, const Vec& grad, AdamMoments& moments, long t, double step, double beta1,
               double beta2, double epsilon_hat) {
    if (t < 1) throw InvalidArgument("Adam iteration counter must start at 1");
    if (grad.size() != params.size()) throw ShapeError("gradient and parameter sizes differ");
    if (!grad.allFinite()) throw NumericalFailure("non-finite gradient in Adam step", NAN);
    if (moments.m.size() != params.size()) {
        moments.m = Vec::Zero(params.size());
        moments.v = Vec::Zero(params.size());
    }
    moments.m = beta1 * moments.m + (1.0 - beta1) * grad;
    moments.v = beta2 * moments.v + (1.0 - beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    params.array() -= step * (moments.m.array() / c1) / ((moments.v.array() / c2).sqrt() + epsilon_hat);
}

long stage_window(long window, double beta2) {
    return std::max(window, std::lround(1.0 / (1.0 - beta2)));
}

bool detect_stagnation(std::span<const double> history, long window, double rel_drop) {
    if (window < 1 || history.size() <= static_cast<std::size_t>(window)) return false;
    const auto split = history.end() - window;
    const double best_before = *std::min_element(history.begin(), split);
    const double best_last = *std::min_element(split, history.end());
    if (!(best_before > 0.0)) return best_last >= best_before;
    return (best_before - best_last) / best_before < rel_drop;
}

std::string to_string(TrainStatus status) {
    switch (status) {
        case TrainStatus::MaxIters: return "max_iters";
        case TrainStatus::LossFloor: return "loss_floor";
        case TrainStatus::Stalled: return "stalled";
        case TrainStatus::NonFiniteLoss: return "non_finite_loss";
    }
    return "unknown";
}

TrainReport train(const SquareLattice& lattice, const CauchySet& data, WeightState initial, const AdamConfig& config,
                  const CheckpointFn& on_checkpoint) {
    validate(config);
    check_weights(lattice, initial);
    check_cauchy_set(lattice, data);
    for (const auto& [edge, value] : config.fixed_edges) {
        if (edge < 0 || edge >= lattice.edge_count())
            throw ConfigError("fixed edge id " + std::to_string(edge) + " out of range");
        initial.edge_weights[edge] = value;
    }

    const auto start = std::chrono::steady_clock::now();
    TrainReport report;
    WeightState w = std::move(initial);
    WeightState last_good = w;

    AdamMoments green_moments, edge_moments;
    std::size_t stage = 0;
    double step = config.initial_step;
    double beta1 = schedule_value(config.beta1_schedule, 0);
    double beta2 = schedule_value(config.beta2_schedule, 0);
    std::size_t stage_start = 0;  // index into loss_history where the current stage began
    long window = stage_window(config.stagnation_window, beta2);

    report.status = TrainStatus::MaxIters;
    for (long t = 1; t <= config.max_iters; ++t) {
        LossGradient lg = loss_and_gradient(lattice, w, data, config.alpha);
        if (!std::isfinite(lg.loss)) {
            report.status = TrainStatus::NonFiniteLoss;
            report.message = "non-finite loss at iteration " + std::to_string(t) + "; returning last finite weights";
            w = last_good;
            break;
        }
        report.loss_history.push_back(lg.loss);
        if (lg.loss <= config.loss_floor) {
            report.status = TrainStatus::LossFloor;
            break;
        }
        last_good = w;

        for (const auto& fixed : config.fixed_edges) lg.edge_weights[fixed.first] = 0.0;

        Eigen::Map<Vec> green(w.green_block.data(), w.green_block.size());
        const Eigen::Map<const Vec> green_grad(lg.green_block.data(), lg.green_block.size());
        adam_step(green, green_grad, green_moments, t, step, beta1, beta2, config.epsilon_hat);
        adam_step(w.edge_weights, lg.edge_weights, edge_moments, t, step, beta1, beta2, config.epsilon_hat);
        if (config.clamp_positive) w.edge_weights = w.edge_weights.cwiseMax(config.clamp_epsilon);

        if (config.checkpoint_every > 0 && on_checkpoint && t % config.checkpoint_every == 0)
            on_checkpoint(t, w, lg.loss);

        const long in_stage = static_cast<long>(report.loss_history.size() - stage_start);
        if (in_stage >= 2 * window && t % std::max<long>(1, window / 20) == 0) {
            const std::span<const double> recent(report.loss_history.data() + stage_start,
                                                 report.loss_history.size() - stage_start);
            if (detect_stagnation(recent, window, config.stagnation_rel_drop)) {
                if (step <= config.min_step) {
                    report.status = TrainStatus::Stalled;
                    break;
                }
                ++stage;
                step = std::max(step / 10.0, config.min_step);
                beta1 = schedule_value(config.beta1_schedule, stage);
                beta2 = schedule_value(config.beta2_schedule, stage);
                window = stage_window(config.stagnation_window, beta2);
                stage_start = report.loss_history.size();
                report.schedule.push_back({t, step, beta1, beta2});
            }
        }
    }

    report.final_loss = loss(lattice, w, data, config.alpha);
    report.weights = std::move(w);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (report.message.empty())
        report.message = report.status == TrainStatus::LossFloor ? "loss floor reached"
                         : report.status == TrainStatus::Stalled ? "stagnated at the minimum step size"
                                                                 : "iteration budget exhausted";
    return report;
}

}  // namespace dtn
