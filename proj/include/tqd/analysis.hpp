#pragma once

#include "tqd/model.hpp"
#include "tqd/quality.hpp"
#include "tqd/sampler.hpp"
#include "tqd/stats.hpp"
#include "tqd/trainer.hpp"
#include "tqd/video.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tqd {

// ---------------------------------------------------------------------------
// Gradient-alignment probe

struct GradientProbeCurve {
    DegradationSpec degradation;
    std::vector<std::pair<double, double>> points;  // (t, mean L2 gradient distance)
    std::size_t n_samples = 0;
};

/// 0.1, 0.2, ..., 0.9
std::vector<double> default_t_grid();

/// blur radius 2, 8 quantization levels, noise std 0.1, full frame shuffle.
std::vector<DegradationSpec> default_probe_degradations(std::uint64_t seed = 0);

/// For every degradation and t, the mean over samples of
/// ||grad(original, t) - grad(degraded, t)||_2, with both gradients taken on the
/// same x1 draws. Degradation seeds are offset per sample.
std::vector<GradientProbeCurve> gradient_probe(const VelocityModel& model, std::span<const ToyVideo> samples,
                                               std::span<const DegradationSpec> degradations,
                                               std::span<const double> t_grid, std::size_t n_noise,
                                               std::uint64_t noise_seed = 0);

std::string format_probe_csv(const GradientProbeCurve& curve);

/// Fixed recipe for probe inputs: `count` moving-square videos at `motion_speed`.
std::vector<ToyVideo> probe_samples(std::size_t count, double motion_speed, double texture_noise, std::uint64_t seed,
                                    const GeneratorOptions& options = {});

/// Clean synthetic corpus with a spread of speeds, used to pre-train probe models.
std::vector<ToyVideo> pretraining_corpus(std::size_t count, std::uint64_t seed, const GeneratorOptions& options = {});

// ---------------------------------------------------------------------------
// Timestep histogram

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    double observed = 0.0;
    double expected = 0.0;
};

struct HistogramReport {
    std::vector<HistogramBin> bins;
    std::size_t n_draws = 0;
    stats::ChiSquareResult chi_square;
    double ks_statistic = 0.0;
    double ks_critical = 0.0;  // 1% level

    bool passes(double level = 0.01) const { return chi_square.p_value > level && ks_statistic < ks_critical; }
};

/// Draws `n_draws` timesteps through the full batch-preparation path and compares
/// them with the retention-weighted Beta mixture.
HistogramReport timestep_histogram(std::span<const QualityRecord> dataset, const SamplerConfig& config,
                                   std::size_t n_draws, std::size_t n_bins = 50,
                                   TqdSampler::Options options = {});

std::string format_histogram_csv(const HistogramReport& report);

// ---------------------------------------------------------------------------
// Scorer-noise robustness

struct RobustnessRow {
    double noise_level = 0.0;
    double final_loss = 0.0;
    double mean_mu_shift = 0.0;
    std::vector<double> loss_history;
};

struct RobustnessReport {
    std::vector<RobustnessRow> rows;
    bool mu_shift_monotone = true;
};

/// For each level: inject score noise into the raw scores (same noise seed at every
/// level), re-normalize, retrain with identical seeds and report the final loss
/// (mean of the last `loss_window` steps) plus mean |mu - mu_clean|.
RobustnessReport robustness_sweep(std::span<const QualityRecord> raw_records, std::span<const ToyVideo> videos,
                                  std::span<const double> noise_levels, const SamplerConfig& sampler_config,
                                  const TrainerConfig& trainer_config, std::uint64_t noise_seed,
                                  std::size_t loss_window = 50);

// ---------------------------------------------------------------------------
// Quadrant report

struct QuadrantReport {
    QuadrantPartition partition;
    std::optional<PopulationStats> stats;  // absent when correlation is undefined

    std::string to_json() const;
    std::string to_table() const;
};

/// Quadrant fractions and Pearson statistics. Thresholds default to the medians.
QuadrantReport quadrant_report(std::span<const QualityRecord> records,
                               std::optional<std::pair<double, double>> thresholds = std::nullopt);

}  // namespace tqd
