#pragma once

#include "tqd/quality.hpp"
#include "tqd/rng.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tqd {

struct SamplerConfig {
    double kappa_base = 2.0;
    double kappa_max = 20.0;
    /// Floor applied to both Beta shape parameters.
    double min_shape = 0.05;
    std::size_t batch_size = 8;
    /// Total draw cap per batch; 0 means 1000 * batch_size.
    std::size_t max_rejection_attempts = 0;
    std::uint64_t seed = 0;

    std::size_t attempt_cap() const { return max_rejection_attempts ? max_rejection_attempts : 1000 * batch_size; }

    /// Throws Error(Usage) when a field is out of range.
    void validate() const;
};

/// Per-sample Beta timestep distribution. `mu` and `kappa` are kept for diagnostics;
/// `alpha` and `beta` are the floored shapes actually sampled.
struct TimestepLaw {
    double mu = 0.5;
    double kappa = 2.0;
    double alpha = 1.0;
    double beta = 1.0;

    double mean() const { return alpha / (alpha + beta); }
    double variance() const {
        const double s = alpha + beta;
        return alpha * beta / (s * s * (s + 1.0));
    }
};

/// Relative-quality center: 0.5 + 0.5 * (mq - vq).
double compute_mu(double mq_norm, double vq_norm);

/// Concentration: kappa_base + (kappa_max - kappa_base) * |mq - vq|.
double compute_kappa(double mq_norm, double vq_norm, const SamplerConfig& config);

TimestepLaw make_law(double mu, double kappa, double min_shape);
TimestepLaw make_law(const QualityRecord& record, const SamplerConfig& config);

/// Law used when timestep specialization is switched off: Beta(kappa_base/2, kappa_base/2).
TimestepLaw baseline_law(const SamplerConfig& config);

/// Gamma(shape, 1) variate, Marsaglia-Tsang squeeze; shapes below 1 use the
/// U^(1/shape) boost. Returned in log space so tiny shapes do not underflow.
double sample_log_gamma(double shape, Rng& rng);

/// One Beta draw as G1 / (G1 + G2). Always strictly inside (0, 1).
double sample_timestep(const TimestepLaw& law, Rng& rng);

/// Sample-level retention probability max(vq_norm, mq_norm).
double retention_probability(const QualityRecord& record);

struct BatchMember {
    std::size_t index = 0;  // position in the dataset
    double t = 0.0;
};

struct Batch {
    std::vector<BatchMember> members;
    std::size_t attempts = 0;

    std::size_t size() const { return members.size(); }
    double acceptance_rate() const {
        return attempts ? static_cast<double>(members.size()) / static_cast<double>(attempts) : 0.0;
    }
};

/// Precomputed per-record retention weights and laws for one dataset.
class TqdSampler {
public:
    struct Options {
        bool dropout = true;
        bool adaptive_timesteps = true;
    };

    TqdSampler(std::span<const QualityRecord> dataset, SamplerConfig config);
    TqdSampler(std::span<const QualityRecord> dataset, SamplerConfig config, Options options);

    /// Rejection-samples `config.batch_size` records (uniform pick, accept with the
    /// retention probability), then draws a timestep for each accepted record.
    Batch prepare_batch(Rng& rng) const;

    const SamplerConfig& config() const { return config_; }
    std::size_t dataset_size() const { return retention_.size(); }
    double retention(std::size_t i) const { return retention_[i]; }
    const TimestepLaw& law(std::size_t i) const { return laws_[i]; }

private:
    SamplerConfig config_;
    Options options_;
    std::vector<double> retention_;
    std::vector<TimestepLaw> laws_;
};

Batch prepare_batch(std::span<const QualityRecord> dataset, const SamplerConfig& config, Rng& rng);

/// Beta pdf on the open grid t_i = i / (n + 1), i = 1..n.
std::vector<std::pair<double, double>> density_curve(const TimestepLaw& law, std::size_t grid_points);

/// Probability mass of the law on [lo, hi].
double bin_mass(const TimestepLaw& law, double lo, double hi);

}  // namespace tqd
