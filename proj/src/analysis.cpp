#include "tqd/analysis.hpp"

#include "tqd/error.hpp"
#include "tqd/parallel.hpp"
#include "tqd/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tqd {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over a combined key
    std::uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e019ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::vector<double> default_t_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 9; ++i) g.push_back(i / 10.0);
    return g;
}

std::vector<DegradationSpec> default_probe_degradations(std::uint64_t seed) {
    return {{DegradationKind::Blur, 2.0, seed},
            {DegradationKind::Compression, 8.0, seed + 1},
            {DegradationKind::Noise, 0.1, seed + 2},
            {DegradationKind::Shuffle, 1.0, seed + 3}};
}

std::vector<GradientProbeCurve> gradient_probe(const VelocityModel& model, std::span<const ToyVideo> samples,
                                               std::span<const DegradationSpec> degradations,
                                               std::span<const double> t_grid, std::size_t n_noise,
                                               std::uint64_t noise_seed) {
    if (samples.empty()) throw Error(ErrorKind::Usage, "gradient probe needs at least one sample");
    for (double t : t_grid) {
        if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::Usage, "probe timesteps must lie in (0, 1)");
    }
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > t_grid[k - 1])) throw Error(ErrorKind::Usage, "probe timesteps must be strictly increasing");
    }
    const std::size_t nd = degradations.size();
    const std::size_t nt = t_grid.size();
    // dist[sample][degradation * nt + t]
    std::vector<std::vector<double>> dist(samples.size(), std::vector<double>(nd * nt, 0.0));

    parallel_for(samples.size(), [&](std::size_t i) {
        const auto original = samples[i].as_doubles();
        std::vector<std::vector<double>> degraded;
        degraded.reserve(nd);
        for (const auto& spec : degradations) {
            DegradationSpec s = spec;
            s.seed = mix(spec.seed, i);
            degraded.push_back(degrade(samples[i], s).as_doubles());
        }
        for (std::size_t k = 0; k < nt; ++k) {
            const std::uint64_t seed = mix(mix(noise_seed, i), k);
            const Eigen::VectorXd g0 = grad_at_timestep(model, original, t_grid[k], seed, n_noise);
            for (std::size_t d = 0; d < nd; ++d) {
                if (degraded[d] == original) continue;  // identity degradation: distance is exactly 0
                const Eigen::VectorXd g1 = grad_at_timestep(model, degraded[d], t_grid[k], seed, n_noise);
                dist[i][d * nt + k] = (g0 - g1).norm();
            }
        }
    });

    std::vector<GradientProbeCurve> curves(nd);
    for (std::size_t d = 0; d < nd; ++d) {
        curves[d].degradation = degradations[d];
        curves[d].n_samples = samples.size();
        for (std::size_t k = 0; k < nt; ++k) {
            double sum = 0.0;
            for (std::size_t i = 0; i < samples.size(); ++i) sum += dist[i][d * nt + k];
            curves[d].points.emplace_back(t_grid[k], sum / static_cast<double>(samples.size()));
        }
    }
    return curves;
}

std::string format_probe_csv(const GradientProbeCurve& curve) {
    std::string out = "t,mean_l2_distance\n";
    char buf[96];
    for (const auto& [t, d] : curve.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, d);
        out += buf;
    }
    return out;
}

std::vector<ToyVideo> probe_samples(std::size_t count, double motion_speed, double texture_noise, std::uint64_t seed,
                                    const GeneratorOptions& options) {
    std::vector<ToyVideo> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(generate_moving_shape(motion_speed, texture_noise, mix(seed, i), options));
    return out;
}

std::vector<ToyVideo> pretraining_corpus(std::size_t count, std::uint64_t seed, const GeneratorOptions& options) {
    Rng rng(seed);
    std::vector<ToyVideo> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double speed = std::round(3.0 * rng.uniform());
        out.push_back(generate_moving_shape(speed, 0.0, mix(seed, i), options));
    }
    return out;
}

// ---------------------------------------------------------------------------

HistogramReport timestep_histogram(std::span<const QualityRecord> dataset, const SamplerConfig& config,
                                   std::size_t n_draws, std::size_t n_bins, TqdSampler::Options options) {
    if (n_draws < 1000) throw Error(ErrorKind::Usage, "timestep histogram needs at least 1000 draws");
    if (n_bins < 2) throw Error(ErrorKind::Usage, "timestep histogram needs at least 2 bins");
    const TqdSampler sampler(dataset, config, options);
    Rng rng = Rng::split(config.seed, 1);

    std::vector<double> draws;
    draws.reserve(n_draws);
    while (draws.size() < n_draws) {
        const Batch b = sampler.prepare_batch(rng);
        for (const auto& m : b.members) {
            if (draws.size() == n_draws) break;
            draws.push_back(m.t);
        }
    }

    HistogramReport rep;
    rep.n_draws = n_draws;
    rep.bins.resize(n_bins);
    const double width = 1.0 / static_cast<double>(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        rep.bins[k].lo = static_cast<double>(k) * width;
        rep.bins[k].hi = k + 1 == n_bins ? 1.0 : static_cast<double>(k + 1) * width;
    }
    for (double t : draws) {
        const auto k = std::min(static_cast<std::size_t>(t * static_cast<double>(n_bins)), n_bins - 1);
        rep.bins[k].observed += 1.0;
    }

    double weight_sum = 0.0;
    for (std::size_t r = 0; r < sampler.dataset_size(); ++r) weight_sum += sampler.retention(r);
    for (std::size_t r = 0; r < sampler.dataset_size(); ++r) {
        const double w = sampler.retention(r) / weight_sum;
        if (w == 0.0) continue;
        for (auto& bin : rep.bins) bin.expected += static_cast<double>(n_draws) * w * bin_mass(sampler.law(r), bin.lo, bin.hi);
    }

    std::vector<double> obs, exp;
    for (const auto& b : rep.bins) {
        obs.push_back(b.observed);
        exp.push_back(b.expected);
    }
    rep.chi_square = stats::chi_square_test(obs, exp);

    std::sort(draws.begin(), draws.end());
    rep.ks_statistic = stats::ks_statistic(draws, [&](double t) {
        double f = 0.0;
        for (std::size_t r = 0; r < sampler.dataset_size(); ++r) {
            const double w = sampler.retention(r);
            if (w > 0.0) f += w * stats::beta_cdf(t, sampler.law(r).alpha, sampler.law(r).beta);
        }
        return f / weight_sum;
    });
    rep.ks_critical = stats::ks_critical_1pct(n_draws);
    return rep;
}

std::string format_histogram_csv(const HistogramReport& report) {
    std::string out = "t_bin_lo,t_bin_hi,count,expected\n";
    char buf[128];
    for (const auto& b : report.bins) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.0f,%.17g\n", b.lo, b.hi, b.observed, b.expected);
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------

RobustnessReport robustness_sweep(std::span<const QualityRecord> raw_records, std::span<const ToyVideo> videos,
                                  std::span<const double> noise_levels, const SamplerConfig& sampler_config,
                                  const TrainerConfig& trainer_config, std::uint64_t noise_seed,
                                  std::size_t loss_window) {
    const auto clean = normalize_scores(raw_records);
    std::vector<double> clean_mu;
    clean_mu.reserve(clean.records.size());
    for (const auto& r : clean.records) clean_mu.push_back(compute_mu(*r.mq_norm, *r.vq_norm));

    RobustnessReport rep;
    for (double level : noise_levels) {
        if (!(level >= 0.0)) throw Error(ErrorKind::Usage, "noise levels must be >= 0");
        const auto noisy = normalize_scores(inject_score_noise(raw_records, level, noise_seed));
        double shift = 0.0;
        for (std::size_t i = 0; i < noisy.records.size(); ++i) {
            const auto& r = noisy.records[i];
            shift += std::abs(compute_mu(*r.mq_norm, *r.vq_norm) - clean_mu[i]);
        }
        RobustnessRow row;
        row.noise_level = level;
        row.mean_mu_shift = shift / static_cast<double>(noisy.records.size());
        const TrainState state = train(noisy.records, videos, sampler_config, trainer_config);
        row.final_loss = tail_mean_loss(state, loss_window);
        row.loss_history = state.loss_history;
        rep.rows.push_back(std::move(row));
    }
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        if (rep.rows[i].noise_level >= rep.rows[i - 1].noise_level &&
            rep.rows[i].mean_mu_shift < rep.rows[i - 1].mean_mu_shift) {
            rep.mu_shift_monotone = false;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

QuadrantReport quadrant_report(std::span<const QualityRecord> records,
                               std::optional<std::pair<double, double>> thresholds) {
    if (records.empty()) throw Error(ErrorKind::Data, "quadrant report on an empty record set");
    const auto [mq_t, vq_t] = thresholds ? *thresholds : median_thresholds(records);
    QuadrantReport rep;
    rep.partition = partition_quadrants(records, mq_t, vq_t);
    try {
        rep.stats = pearson_correlation(records);
    } catch (const Error&) {
        rep.stats.reset();
    }
    return rep;
}

std::string QuadrantReport::to_json() const {
    nlohmann::json j;
    j["mq_threshold"] = partition.mq_threshold;
    j["vq_threshold"] = partition.vq_threshold;
    j["n"] = partition.total();
    for (int q = 0; q < 4; ++q) {
        const std::string name(quadrant_name(static_cast<Quadrant>(q)));
        j["counts"][name] = partition.counts[static_cast<std::size_t>(q)];
        j["fractions"][name] = partition.fractions[static_cast<std::size_t>(q)];
    }
    if (stats) {
        j["pearson_r"] = stats->pearson_r;
        j["p_value"] = stats->p_value;
    } else {
        j["pearson_r"] = nullptr;
        j["p_value"] = nullptr;
    }
    return j.dump(2) + "\n";
}

std::string QuadrantReport::to_table() const {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "thresholds  MQ > %.4f  VQ > %.4f  (n = %zu)\n", partition.mq_threshold,
                  partition.vq_threshold, partition.total());
    out << buf;
    out << "quadrant   count      fraction\n";
    for (int q = 0; q < 4; ++q) {
        std::snprintf(buf, sizeof buf, "%-8s %8zu %12.4f\n", std::string(quadrant_name(static_cast<Quadrant>(q))).c_str(),
                      partition.counts[static_cast<std::size_t>(q)], partition.fractions[static_cast<std::size_t>(q)]);
        out << buf;
    }
    if (stats) {
        std::snprintf(buf, sizeof buf, "pearson r = %.4f  p = %.3g\n", stats->pearson_r, stats->p_value);
    } else {
        std::snprintf(buf, sizeof buf, "pearson r undefined (fewer than 3 records or constant scores)\n");
    }
    out << buf;
    return out.str();
}

}  // namespace tqd
