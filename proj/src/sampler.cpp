#include "tqd/sampler.hpp"

#include "tqd/error.hpp"
#include "tqd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tqd {

namespace {

void require_unit(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) {
        std::ostringstream msg;
        msg << name << " must lie in [0, 1], got " << x;
        throw Error(ErrorKind::Data, msg.str());
    }
}

const QualityRecord& require_normalized(const QualityRecord& r) {
    if (!r.normalized()) throw Error(ErrorKind::Data, "record '" + r.id + "' is not normalized");
    return r;
}

}  // namespace

void SamplerConfig::validate() const {
    if (!(kappa_base > 0.0) || !std::isfinite(kappa_base)) throw Error(ErrorKind::Usage, "kappa_base must be > 0");
    if (!(kappa_max >= kappa_base) || !std::isfinite(kappa_max)) {
        throw Error(ErrorKind::Usage, "kappa_max must be >= kappa_base");
    }
    if (!(min_shape > 0.0)) throw Error(ErrorKind::Usage, "min_shape must be > 0");
    if (batch_size == 0) throw Error(ErrorKind::Usage, "batch_size must be positive");
}

double compute_mu(double mq_norm, double vq_norm) {
    require_unit(mq_norm, "mq_norm");
    require_unit(vq_norm, "vq_norm");
    return 0.5 + 0.5 * (mq_norm - vq_norm);
}

double compute_kappa(double mq_norm, double vq_norm, const SamplerConfig& config) {
    config.validate();
    require_unit(mq_norm, "mq_norm");
    require_unit(vq_norm, "vq_norm");
    return config.kappa_base + (config.kappa_max - config.kappa_base) * std::abs(mq_norm - vq_norm);
}

TimestepLaw make_law(double mu, double kappa, double min_shape) {
    TimestepLaw law;
    law.mu = mu;
    law.kappa = kappa;
    law.alpha = std::max(mu * kappa, min_shape);
    law.beta = std::max((1.0 - mu) * kappa, min_shape);
    return law;
}

TimestepLaw make_law(const QualityRecord& record, const SamplerConfig& config) {
    require_normalized(record);
    const double mq = *record.mq_norm;
    const double vq = *record.vq_norm;
    return make_law(compute_mu(mq, vq), compute_kappa(mq, vq, config), config.min_shape);
}

TimestepLaw baseline_law(const SamplerConfig& config) {
    config.validate();
    return make_law(0.5, config.kappa_base, config.min_shape);
}

double sample_log_gamma(double shape, Rng& rng) {
    if (shape < 1.0) {
        // G(a) = G(a + 1) * U^(1/a)
        double u = 0.0;
        while (u == 0.0) u = rng.uniform();
        return sample_log_gamma(shape + 1.0, rng) + std::log(u) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
        if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
}

double sample_timestep(const TimestepLaw& law, Rng& rng) {
    const double l1 = sample_log_gamma(law.alpha, rng);
    const double l2 = sample_log_gamma(law.beta, rng);
    double t;
    if (l1 >= l2) {
        t = 1.0 / (1.0 + std::exp(l2 - l1));
    } else {
        const double e = std::exp(l1 - l2);
        t = e / (1.0 + e);
    }
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    if (t <= 0.0) t = kEps;
    if (t >= 1.0) t = 1.0 - kEps / 2.0;
    return t;
}

double retention_probability(const QualityRecord& record) {
    require_normalized(record);
    return std::max(*record.vq_norm, *record.mq_norm);
}

TqdSampler::TqdSampler(std::span<const QualityRecord> dataset, SamplerConfig config)
    : TqdSampler(dataset, config, Options{}) {}

TqdSampler::TqdSampler(std::span<const QualityRecord> dataset, SamplerConfig config, Options options)
    : config_(config), options_(options) {
    config_.validate();
    if (dataset.empty()) throw Error(ErrorKind::Data, "empty dataset");
    retention_.reserve(dataset.size());
    laws_.reserve(dataset.size());
    const TimestepLaw flat = baseline_law(config_);
    bool any = false;
    for (const auto& r : dataset) {
        const double p = options_.dropout ? retention_probability(r) : 1.0;
        any = any || p > 0.0;
        retention_.push_back(p);
        laws_.push_back(options_.adaptive_timesteps ? make_law(r, config_) : flat);
    }
    if (!any) throw Error(ErrorKind::Data, "no retainable samples");
}

Batch TqdSampler::prepare_batch(Rng& rng) const {
    Batch batch;
    batch.members.reserve(config_.batch_size);
    const std::size_t cap = config_.attempt_cap();
    while (batch.members.size() < config_.batch_size) {
        if (batch.attempts >= cap) {
            std::ostringstream msg;
            msg << "rejection cap of " << cap << " draws exceeded with " << batch.members.size()
                << " accepted (acceptance rate " << batch.acceptance_rate() << ")";
            throw Error(ErrorKind::Data, msg.str());
        }
        ++batch.attempts;
        const std::size_t i = rng.index(retention_.size());
        if (rng.uniform() < retention_[i]) batch.members.push_back({i, 0.0});
    }
    for (auto& m : batch.members) m.t = sample_timestep(laws_[m.index], rng);
    return batch;
}

Batch prepare_batch(std::span<const QualityRecord> dataset, const SamplerConfig& config, Rng& rng) {
    return TqdSampler(dataset, config).prepare_batch(rng);
}

std::vector<std::pair<double, double>> density_curve(const TimestepLaw& law, std::size_t grid_points) {
    if (grid_points < 2) throw Error(ErrorKind::Usage, "density curve needs at least 2 grid points");
    std::vector<std::pair<double, double>> out;
    out.reserve(grid_points);
    const double step = 1.0 / static_cast<double>(grid_points + 1);
    for (std::size_t i = 1; i <= grid_points; ++i) {
        const double t = static_cast<double>(i) * step;
        out.emplace_back(t, stats::beta_pdf(t, law.alpha, law.beta));
    }
    return out;
}

double bin_mass(const TimestepLaw& law, double lo, double hi) {
    return stats::beta_cdf(hi, law.alpha, law.beta) - stats::beta_cdf(lo, law.alpha, law.beta);
}

}  // namespace tqd
