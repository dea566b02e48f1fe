#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tqd {

struct VideoShape {
    int frames = 8;
    int height = 16;
    int width = 16;

    std::size_t size() const {
        return static_cast<std::size_t>(frames) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    std::size_t frame_size() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }

    bool operator==(const VideoShape&) const = default;
};

/// Generator parameters and derived quality analogs recorded with each video.
struct VideoMeta {
    double motion_speed = 0.0;
    double texture_noise = 0.0;
    std::uint64_t seed = 0;
    int square_size = 0;
    int start_row = 0;
    int start_col = 0;
    int dir_row = 0;
    int dir_col = 0;
    double mq_score = 0.0;  // grows with motion speed
    double vq_score = 0.0;  // shrinks with texture noise
    std::vector<std::string> degradations;
};

/// F x H x W grid sequence, row-major (frame, row, column), values in [0, 1].
struct ToyVideo {
    VideoShape shape;
    std::vector<float> pixels;
    VideoMeta meta;

    ToyVideo() = default;
    explicit ToyVideo(VideoShape s) : shape(s), pixels(s.size(), 0.0f) {}

    float& at(int f, int r, int c) { return pixels[index(f, r, c)]; }
    float at(int f, int r, int c) const { return pixels[index(f, r, c)]; }

    std::span<float> frame(int f) {
        return std::span<float>(pixels).subspan(static_cast<std::size_t>(f) * shape.frame_size(), shape.frame_size());
    }
    std::span<const float> frame(int f) const {
        return std::span<const float>(pixels).subspan(static_cast<std::size_t>(f) * shape.frame_size(),
                                                      shape.frame_size());
    }

    std::vector<double> as_doubles() const { return {pixels.begin(), pixels.end()}; }

private:
    std::size_t index(int f, int r, int c) const {
        return (static_cast<std::size_t>(f) * static_cast<std::size_t>(shape.height) + static_cast<std::size_t>(r)) *
                   static_cast<std::size_t>(shape.width) +
               static_cast<std::size_t>(c);
    }
};

struct GeneratorOptions {
    VideoShape shape{};
    int square_size = 4;
    float background = 0.1f;
    float foreground = 0.9f;
};

/// Bright square translating `motion_speed` pixels per frame along an axis
/// (direction and start picked from `seed`), wrapping at the borders, plus
/// additive Gaussian texture noise. Values are clamped to [0, 1].
ToyVideo generate_moving_shape(double motion_speed, double texture_noise, std::uint64_t seed,
                               const GeneratorOptions& options = {});

enum class DegradationKind { Blur, Compression, Noise, Shuffle };

std::string_view degradation_name(DegradationKind kind);
std::optional<DegradationKind> parse_degradation(std::string_view name);

/// strength: blur radius (pixels), quantization levels, noise std, or shuffled
/// frame fraction. Zero strength is the identity for every kind.
struct DegradationSpec {
    DegradationKind kind = DegradationKind::Blur;
    double strength = 0.0;
    std::uint64_t seed = 0;
};

ToyVideo degrade(const ToyVideo& video, const DegradationSpec& spec);

/// t * x1 + (1 - t) * x0, elementwise and unclamped.
std::vector<double> flow_interpolate(std::span<const double> x0, std::span<const double> x1, double t);
std::vector<double> flow_interpolate(const ToyVideo& x0, std::span<const double> x1, double t);
void flow_interpolate_into(std::span<const double> x0, std::span<const double> x1, double t, std::span<double> out);

// Binary layout: magic, F, H, W (int32 LE), then F*H*W float32 LE.
inline constexpr std::uint32_t kVideoMagic = 0x56445154;  // "TQDV"

std::string encode_video(const ToyVideo& video);
ToyVideo decode_video(std::string_view bytes);
void save_video(const std::filesystem::path& path, const ToyVideo& video, bool with_meta = true);
ToyVideo load_video(const std::filesystem::path& path);

std::string meta_to_json(const VideoMeta& meta);

/// Synthetic payload reference: "synth:speed=S,noise=N,seed=K".
struct SynthPayload {
    double speed = 0.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

std::optional<SynthPayload> parse_synth_payload(std::string_view payload);
std::string format_synth_payload(const SynthPayload& p);

/// Resolves a manifest payload to a video: synthetic references are generated,
/// anything else is a video file path (relative paths resolve against `base_dir`).
ToyVideo resolve_payload(std::string_view payload, const GeneratorOptions& options,
                         const std::filesystem::path& base_dir = {});

}  // namespace tqd
