#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tqd {

/// One training sample's motion-quality (MQ) and visual-quality (VQ) scores.
/// Normalized scores are empty until `normalize_scores` has run.
struct QualityRecord {
    std::string id;
    double mq_raw = 0.0;
    double vq_raw = 0.0;
    std::optional<double> mq_norm;
    std::optional<double> vq_norm;
    std::string payload;

    bool normalized() const { return mq_norm.has_value() && vq_norm.has_value(); }

    bool operator==(const QualityRecord&) const = default;
};

/// Min-max constants, persisted next to a manifest so held-out data maps identically.
struct NormalizationConstants {
    double mq_min = 0.0;
    double mq_max = 0.0;
    double vq_min = 0.0;
    double vq_max = 0.0;

    bool operator==(const NormalizationConstants&) const = default;
};

struct NormalizedDataset {
    std::vector<QualityRecord> records;
    NormalizationConstants constants;
};

/// Fits min-max constants over all records and fills mq_norm / vq_norm.
/// A metric whose raw values are all equal normalizes to 0.5.
NormalizedDataset normalize_scores(std::span<const QualityRecord> records);

/// Normalizes with previously fitted constants; results are clamped into [0, 1].
std::vector<QualityRecord> apply_normalization(std::span<const QualityRecord> records,
                                               const NormalizationConstants& constants);

double normalize_value(double raw, double lo, double hi);

enum class Quadrant : int { HMHV = 0, HMLV = 1, LMHV = 2, LMLV = 3 };

std::string_view quadrant_name(Quadrant q);
std::optional<Quadrant> parse_quadrant(std::string_view name);

/// A score strictly above its threshold is "high"; ties go to "low".
Quadrant classify(const QualityRecord& record, double mq_threshold, double vq_threshold);

struct QuadrantPartition {
    double mq_threshold = 0.0;
    double vq_threshold = 0.0;
    std::array<std::size_t, 4> counts{};  // indexed by Quadrant
    std::array<double, 4> fractions{};

    std::size_t total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

QuadrantPartition partition_quadrants(std::span<const QualityRecord> records, double mq_threshold,
                                      double vq_threshold);

/// Median raw (mq, vq) over the records.
std::pair<double, double> median_thresholds(std::span<const QualityRecord> records);

struct PopulationStats {
    double pearson_r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Sample Pearson correlation between raw MQ and raw VQ with a two-sided t-test p-value.
PopulationStats pearson_correlation(std::span<const QualityRecord> records);
PopulationStats pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Affine map from standard-normal draws into raw score units.
struct PopulationShape {
    double mq_mean = 2.5;
    double mq_std = 0.5;
    double vq_mean = 2.7;
    double vq_std = 0.5;
};

/// Bivariate-normal (mq, vq) population with correlation `target_r`.
/// Payloads reference synthetic toy videos whose motion/cleanliness follow the scores.
std::vector<QualityRecord> synth_population(std::size_t n, double target_r, std::uint64_t seed,
                                            const PopulationShape& shape = {});

/// Synthetic payload reference for a record with the given raw scores.
std::string synth_payload_for_scores(double mq_raw, double vq_raw, std::uint64_t seed);

/// Adds N(0, (noise_level * range)^2) to every raw score, where range is the
/// per-metric raw max - min over `records`. Normalized fields are left as they were;
/// re-normalizing is up to the caller.
std::vector<QualityRecord> inject_score_noise(std::span<const QualityRecord> records, double noise_level,
                                              std::uint64_t seed);

// Score manifest: JSON lines {"id", "mq", "vq", optional "payload"}.
std::vector<QualityRecord> read_manifest(const std::filesystem::path& path);
std::vector<QualityRecord> parse_manifest(std::string_view text);
void write_manifest(const std::filesystem::path& path, std::span<const QualityRecord> records);
std::string format_manifest(std::span<const QualityRecord> records);

// Normalization sidecar: {"mq_min", "mq_max", "vq_min", "vq_max"}.
NormalizationConstants read_sidecar(const std::filesystem::path& path);
void write_sidecar(const std::filesystem::path& path, const NormalizationConstants& constants);
std::filesystem::path sidecar_path_for(const std::filesystem::path& manifest);

}  // namespace tqd
