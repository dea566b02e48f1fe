#include "tqd/trainer.hpp"

#include "tqd/error.hpp"
#include "tqd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tqd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

void fill_normal(MatrixXd& m, Rng& rng) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
}

}  // namespace

TrainState initial_state(const TrainerConfig& config) {
    TrainState s;
    s.model = VelocityModel(config.model);
    s.optimizer = AdamOptimizer(config.model.parameter_count(), config.adam);
    s.learning_rate = config.adam.learning_rate;
    return s;
}

TrainState train(std::span<const QualityRecord> dataset, std::span<const ToyVideo> videos,
                 const SamplerConfig& sampler_config, const TrainerConfig& config) {
    sampler_config.validate();
    TrainState state = initial_state(config);
    if (videos.size() != dataset.size()) throw Error(ErrorKind::Data, "one video per record required");
    const auto d = static_cast<Eigen::Index>(config.model.video_dim());
    for (const auto& v : videos) {
        if (v.shape != config.model.shape) throw Error(ErrorKind::Data, "video shape does not match the model");
    }
    const TqdSampler sampler(dataset, sampler_config,
                             TqdSampler::Options{.dropout = !config.baseline, .adaptive_timesteps = !config.baseline});
    Rng batch_rng = Rng::split(sampler_config.seed, kBatchStream);
    Rng noise_rng = Rng::split(config.seed, kNoiseStream);

    const auto bs = static_cast<Eigen::Index>(sampler_config.batch_size);
    MatrixXd x0(d, bs), x1(d, bs);
    std::vector<double> ts(static_cast<std::size_t>(bs));
    for (std::size_t k = 0; k < config.steps; ++k) {
        const Batch batch = sampler.prepare_batch(batch_rng);
        fill_normal(x1, noise_rng);
        double t_sum = 0.0;
        for (Eigen::Index j = 0; j < bs; ++j) {
            const auto& m = batch.members[static_cast<std::size_t>(j)];
            const auto& px = videos[m.index].pixels;
            for (Eigen::Index i = 0; i < d; ++i) x0(i, j) = px[static_cast<std::size_t>(i)];
            ts[static_cast<std::size_t>(j)] = m.t;
            t_sum += m.t;
        }
        VelocityModel::LossGrad lg;
        try {
            lg = state.model.loss_and_grad(x0, x1, ts);
        } catch (const Error& e) {
            throw Error(ErrorKind::Numeric, "step " + std::to_string(state.step + 1) + ": " + e.what());
        }
        if (!std::isfinite(lg.loss)) throw Error(ErrorKind::Numeric, "NaN loss at step " + std::to_string(state.step + 1));
        state.optimizer.step(state.model.parameters(), lg.grad);
        ++state.step;
        state.loss_history.push_back(lg.loss);
        state.log.push_back({state.step, lg.loss, t_sum / static_cast<double>(bs), batch.acceptance_rate()});
    }
    return state;
}

VectorXd grad_at_timestep(const VelocityModel& model, std::span<const double> x0, double t, std::uint64_t noise_seed,
                          std::size_t n_noise) {
    if (n_noise == 0) throw Error(ErrorKind::Usage, "n_noise must be positive");
    if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::Usage, "probe timestep must lie in (0, 1)");
    const auto d = static_cast<Eigen::Index>(x0.size());
    const auto n = static_cast<Eigen::Index>(n_noise);
    MatrixXd x0m(d, n), x1(d, n);
    const Eigen::Map<const VectorXd> src(x0.data(), d);
    for (Eigen::Index j = 0; j < n; ++j) x0m.col(j) = src;
    Rng rng(noise_seed);
    fill_normal(x1, rng);
    const std::vector<double> ts(n_noise, t);
    // The batch loss is the mean over draws, so its gradient is the averaged gradient.
    return model.loss_and_grad(x0m, x1, ts).grad;
}

double evaluate_loss(const VelocityModel& model, std::span<const ToyVideo> videos, std::span<const double> t_grid,
                     std::uint64_t noise_seed, std::size_t n_noise) {
    if (videos.empty() || t_grid.empty() || n_noise == 0) throw Error(ErrorKind::Usage, "empty evaluation set");
    const auto d = static_cast<Eigen::Index>(model.config().video_dim());
    const auto n = static_cast<Eigen::Index>(t_grid.size() * n_noise);
    Rng rng(noise_seed);
    double total = 0.0;
    MatrixXd x0(d, n), x1(d, n);
    std::vector<double> ts(static_cast<std::size_t>(n));
    for (const auto& v : videos) {
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) x0(i, j) = v.pixels[static_cast<std::size_t>(i)];
            ts[static_cast<std::size_t>(j)] = t_grid[static_cast<std::size_t>(j) / n_noise];
        }
        fill_normal(x1, rng);
        total += model.loss(x0, x1, ts);
    }
    return total / static_cast<double>(videos.size());
}

double tail_mean_loss(const TrainState& state, std::size_t window) {
    const auto& h = state.loss_history;
    if (h.empty()) return NAN;
    const std::size_t w = std::min(window, h.size());
    double s = 0.0;
    for (std::size_t i = h.size() - w; i < h.size(); ++i) s += h[i];
    return s / static_cast<double>(w);
}

std::string format_train_log(const TrainState& state) {
    std::string out = "step,loss,mean_t,batch_acceptance_rate\n";
    char buf[160];
    for (const auto& r : state.log) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.step, r.loss, r.mean_t, r.acceptance_rate);
        out += buf;
    }
    return out;
}

std::vector<ToyVideo> resolve_videos(std::span<const QualityRecord> records, const GeneratorOptions& options,
                                     const std::filesystem::path& base_dir) {
    std::vector<ToyVideo> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        try {
            out.push_back(resolve_payload(r.payload, options, base_dir));
        } catch (const Error& e) {
            throw Error(e.kind(), "record '" + r.id + "': " + e.what());
        }
    }
    return out;
}

}  // namespace tqd
