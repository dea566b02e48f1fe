#pragma once

#include "tqd/model.hpp"
#include "tqd/quality.hpp"
#include "tqd/sampler.hpp"
#include "tqd/video.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tqd {

struct TrainerConfig {
    std::size_t steps = 500;
    AdamConfig adam{};
    ModelConfig model{};
    /// Seeds the x1 noise stream.
    std::uint64_t seed = 0;
    /// Disable dropout and use Beta(kappa_base/2, kappa_base/2) for every sample.
    bool baseline = false;
};

struct TrainLogRow {
    std::size_t step = 0;
    double loss = 0.0;
    double mean_t = 0.0;
    double acceptance_rate = 0.0;
};

struct TrainState {
    VelocityModel model;
    AdamOptimizer optimizer;
    std::size_t step = 0;
    double learning_rate = 0.0;
    std::vector<double> loss_history;
    std::vector<TrainLogRow> log;
};

TrainState initial_state(const TrainerConfig& config);

/// Flow-matching training loop. Each step draws a batch through the TQD sampler
/// (or the baseline law), interpolates x_t = t*x1 + (1-t)*x0 with fresh Gaussian
/// x1, and applies one optimizer update. `videos[i]` is the datum for `dataset[i]`.
TrainState train(std::span<const QualityRecord> dataset, std::span<const ToyVideo> videos,
                 const SamplerConfig& sampler_config, const TrainerConfig& config);

/// Flow-matching gradient at a fixed timestep, averaged over `n_noise` x1 draws
/// taken from `noise_seed` (so equal seeds give common random numbers).
Eigen::VectorXd grad_at_timestep(const VelocityModel& model, std::span<const double> x0, double t,
                                 std::uint64_t noise_seed, std::size_t n_noise);

/// Mean flow-matching loss over every (video, t) pair with `n_noise` fixed x1 draws each.
double evaluate_loss(const VelocityModel& model, std::span<const ToyVideo> videos, std::span<const double> t_grid,
                     std::uint64_t noise_seed, std::size_t n_noise);

/// Mean of the last `window` logged losses.
double tail_mean_loss(const TrainState& state, std::size_t window);

std::string format_train_log(const TrainState& state);

std::vector<ToyVideo> resolve_videos(std::span<const QualityRecord> records, const GeneratorOptions& options,
                                     const std::filesystem::path& base_dir = {});

}  // namespace tqd
