#include "tqd/video.hpp"

#include "tqd/error.hpp"
#include "tqd/io.hpp"
#include "tqd/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

namespace tqd {

namespace {

int wrap(long v, int n) {
    const long m = v % n;
    return static_cast<int>(m < 0 ? m + n : m);
}

// Half-sample symmetric extension: ... x1 x0 | x0 x1 ... x(n-1) | x(n-1) x(n-2) ...
int reflect(int i, int n) {
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

void box_blur_1d(std::span<const double> in, std::span<double> out, int n, int stride, int radius) {
    const double norm = 1.0 / static_cast<double>(2 * radius + 1);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += in[static_cast<std::size_t>(reflect(i + k, n) * stride)];
        out[static_cast<std::size_t>(i * stride)] = acc * norm;
    }
}

void check_video(const ToyVideo& v) {
    if (v.shape.frames < 1 || v.shape.height < 1 || v.shape.width < 1 || v.pixels.size() != v.shape.size()) {
        throw Error(ErrorKind::Data, "malformed toy video");
    }
}

std::string describe(const DegradationSpec& spec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s:%g", std::string(degradation_name(spec.kind)).c_str(), spec.strength);
    return buf;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

}  // namespace

ToyVideo generate_moving_shape(double motion_speed, double texture_noise, std::uint64_t seed,
                               const GeneratorOptions& options) {
    if (!std::isfinite(motion_speed) || !std::isfinite(texture_noise) || motion_speed < 0.0 || texture_noise < 0.0) {
        throw Error(ErrorKind::Usage, "motion speed and texture noise must be finite and non-negative");
    }
    const VideoShape s = options.shape;
    if (s.frames < 1 || s.height < 1 || s.width < 1) throw Error(ErrorKind::Usage, "video dimensions must be positive");
    ToyVideo v(s);
    Rng rng(seed);

    static constexpr int kDirs[4][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
    const auto& dir = kDirs[rng.index(4)];
    const int side = std::clamp(options.square_size, 1, std::min(s.height, s.width));
    const int r0 = static_cast<int>(rng.index(static_cast<std::size_t>(s.height)));
    const int c0 = static_cast<int>(rng.index(static_cast<std::size_t>(s.width)));

    for (int f = 0; f < s.frames; ++f) {
        const long shift = std::lround(motion_speed * f);
        const int top = wrap(r0 + dir[0] * shift, s.height);
        const int left = wrap(c0 + dir[1] * shift, s.width);
        auto frame = v.frame(f);
        std::fill(frame.begin(), frame.end(), options.background);
        for (int dr = 0; dr < side; ++dr) {
            for (int dc = 0; dc < side; ++dc) {
                v.at(f, wrap(top + dr, s.height), wrap(left + dc, s.width)) = options.foreground;
            }
        }
    }
    if (texture_noise > 0.0) {
        for (auto& p : v.pixels) {
            p = static_cast<float>(std::clamp(static_cast<double>(p) + texture_noise * rng.normal(), 0.0, 1.0));
        }
    }

    auto& m = v.meta;
    m.motion_speed = motion_speed;
    m.texture_noise = texture_noise;
    m.seed = seed;
    m.square_size = side;
    m.start_row = r0;
    m.start_col = c0;
    m.dir_row = dir[0];
    m.dir_col = dir[1];
    m.mq_score = motion_speed;
    m.vq_score = 1.0 / (1.0 + 10.0 * texture_noise);
    return v;
}

std::string_view degradation_name(DegradationKind kind) {
    switch (kind) {
        case DegradationKind::Blur: return "blur";
        case DegradationKind::Compression: return "compression";
        case DegradationKind::Noise: return "noise";
        case DegradationKind::Shuffle: return "shuffle";
    }
    return "?";
}

std::optional<DegradationKind> parse_degradation(std::string_view name) {
    for (auto k : {DegradationKind::Blur, DegradationKind::Compression, DegradationKind::Noise, DegradationKind::Shuffle}) {
        if (degradation_name(k) == name) return k;
    }
    if (name == "quantization") return DegradationKind::Compression;
    return std::nullopt;
}

ToyVideo degrade(const ToyVideo& video, const DegradationSpec& spec) {
    check_video(video);
    if (!std::isfinite(spec.strength) || spec.strength < 0.0) {
        throw Error(ErrorKind::Usage, "degradation strength must be finite and >= 0");
    }
    if (spec.kind == DegradationKind::Compression && spec.strength != 0.0 && spec.strength < 2.0) {
        throw Error(ErrorKind::Usage, "compression needs at least 2 quantization levels");
    }
    if (spec.kind == DegradationKind::Shuffle && spec.strength > 1.0) {
        throw Error(ErrorKind::Usage, "shuffle fraction must lie in [0, 1]");
    }
    ToyVideo out = video;
    if (spec.strength == 0.0) return out;
    out.meta.degradations.push_back(describe(spec));

    const VideoShape s = video.shape;
    Rng rng(spec.seed);
    switch (spec.kind) {
        case DegradationKind::Blur: {
            const int radius = static_cast<int>(std::lround(spec.strength));
            if (radius == 0) break;
            std::vector<double> a(s.frame_size()), b(s.frame_size());
            for (int f = 0; f < s.frames; ++f) {
                auto frame = out.frame(f);
                std::copy(frame.begin(), frame.end(), a.begin());
                for (int r = 0; r < s.height; ++r) {
                    const auto off = static_cast<std::size_t>(r * s.width);
                    box_blur_1d(std::span<const double>(a).subspan(off), std::span<double>(b).subspan(off), s.width, 1,
                                radius);
                }
                for (int c = 0; c < s.width; ++c) {
                    const auto off = static_cast<std::size_t>(c);
                    box_blur_1d(std::span<const double>(b).subspan(off), std::span<double>(a).subspan(off), s.height,
                                s.width, radius);
                }
                for (std::size_t i = 0; i < frame.size(); ++i) {
                    frame[i] = static_cast<float>(std::clamp(a[i], 0.0, 1.0));
                }
            }
            break;
        }
        case DegradationKind::Compression: {
            const double levels = static_cast<double>(std::lround(spec.strength));
            for (auto& p : out.pixels) {
                const double bin = std::min(std::floor(static_cast<double>(p) * levels), levels - 1.0);
                p = static_cast<float>((bin + 0.5) / levels);
            }
            break;
        }
        case DegradationKind::Noise: {
            for (auto& p : out.pixels) {
                p = static_cast<float>(std::clamp(static_cast<double>(p) + spec.strength * rng.normal(), 0.0, 1.0));
            }
            break;
        }
        case DegradationKind::Shuffle: {
            const auto k = static_cast<std::size_t>(std::lround(spec.strength * s.frames));
            if (k < 2) break;
            std::vector<int> idx(static_cast<std::size_t>(s.frames));
            std::iota(idx.begin(), idx.end(), 0);
            // choose k frame slots, then permute their contents
            for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
            std::vector<int> slots(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
            std::vector<int> perm = slots;
            while (perm == slots) std::shuffle(perm.begin(), perm.end(), rng.engine());
            for (std::size_t i = 0; i < k; ++i) {
                const auto src = video.frame(perm[i]);
                auto dst = out.frame(slots[i]);
                std::copy(src.begin(), src.end(), dst.begin());
            }
            break;
        }
    }
    return out;
}

void flow_interpolate_into(std::span<const double> x0, std::span<const double> x1, double t, std::span<double> out) {
    if (x0.size() != x1.size() || out.size() != x0.size()) {
        throw Error(ErrorKind::Data, "flow interpolation shape mismatch");
    }
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::Data, "timestep must lie in [0, 1]");
    const double s = 1.0 - t;
    for (std::size_t i = 0; i < x0.size(); ++i) out[i] = t * x1[i] + s * x0[i];
}

std::vector<double> flow_interpolate(std::span<const double> x0, std::span<const double> x1, double t) {
    std::vector<double> out(x0.size());
    flow_interpolate_into(x0, x1, t, out);
    return out;
}

std::vector<double> flow_interpolate(const ToyVideo& x0, std::span<const double> x1, double t) {
    return flow_interpolate(x0.as_doubles(), x1, t);
}

std::string encode_video(const ToyVideo& video) {
    check_video(video);
    std::string out;
    out.reserve(16 + 4 * video.pixels.size());
    put_u32(out, kVideoMagic);
    put_u32(out, static_cast<std::uint32_t>(video.shape.frames));
    put_u32(out, static_cast<std::uint32_t>(video.shape.height));
    put_u32(out, static_cast<std::uint32_t>(video.shape.width));
    for (float p : video.pixels) put_u32(out, std::bit_cast<std::uint32_t>(p));
    return out;
}

ToyVideo decode_video(std::string_view bytes) {
    if (bytes.size() < 16 || get_u32(bytes, 0) != kVideoMagic) {
        throw Error(ErrorKind::Artifact, "not a toy video file (bad magic)");
    }
    VideoShape s;
    s.frames = static_cast<int>(get_u32(bytes, 4));
    s.height = static_cast<int>(get_u32(bytes, 8));
    s.width = static_cast<int>(get_u32(bytes, 12));
    if (s.frames < 1 || s.height < 1 || s.width < 1 || s.frames > 4096 || s.height > 4096 || s.width > 4096) {
        throw Error(ErrorKind::Artifact, "toy video header has invalid dimensions");
    }
    if (bytes.size() != 16 + 4 * s.size()) throw Error(ErrorKind::Artifact, "toy video payload size mismatch");
    ToyVideo v(s);
    for (std::size_t i = 0; i < v.pixels.size(); ++i) v.pixels[i] = std::bit_cast<float>(get_u32(bytes, 16 + 4 * i));
    return v;
}

std::string meta_to_json(const VideoMeta& m) {
    nlohmann::json j = {{"motion_speed", m.motion_speed}, {"texture_noise", m.texture_noise},
                        {"seed", m.seed},                 {"square_size", m.square_size},
                        {"start_row", m.start_row},       {"start_col", m.start_col},
                        {"dir_row", m.dir_row},           {"dir_col", m.dir_col},
                        {"mq_score", m.mq_score},         {"vq_score", m.vq_score},
                        {"degradations", m.degradations}};
    return j.dump(2) + "\n";
}

void save_video(const std::filesystem::path& path, const ToyVideo& video, bool with_meta) {
    io::write_text(path, encode_video(video));
    if (with_meta) {
        auto meta_path = path;
        meta_path += ".json";
        io::write_text(meta_path, meta_to_json(video.meta));
    }
}

ToyVideo load_video(const std::filesystem::path& path) { return decode_video(io::read_text(path)); }

std::optional<SynthPayload> parse_synth_payload(std::string_view payload) {
    constexpr std::string_view kPrefix = "synth:";
    if (payload.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
    payload.remove_prefix(kPrefix.size());
    SynthPayload p;
    bool have_speed = false, have_noise = false, have_seed = false;
    while (!payload.empty()) {
        const auto comma = payload.find(',');
        const auto item = payload.substr(0, comma);
        payload = comma == std::string_view::npos ? std::string_view{} : payload.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        const std::string key(item.substr(0, eq));
        const std::string value(item.substr(eq + 1));
        char* end = nullptr;
        if (key == "speed") {
            p.speed = std::strtod(value.c_str(), &end);
            have_speed = end && *end == '\0';
        } else if (key == "noise") {
            p.noise = std::strtod(value.c_str(), &end);
            have_noise = end && *end == '\0';
        } else if (key == "seed") {
            p.seed = std::strtoull(value.c_str(), &end, 10);
            have_seed = end && *end == '\0';
        } else {
            return std::nullopt;
        }
    }
    if (!have_speed || !have_noise || !have_seed) return std::nullopt;
    return p;
}

std::string format_synth_payload(const SynthPayload& p) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "synth:speed=%.4f,noise=%.4f,seed=%llu", p.speed, p.noise,
                  static_cast<unsigned long long>(p.seed));
    return buf;
}

ToyVideo resolve_payload(std::string_view payload, const GeneratorOptions& options,
                         const std::filesystem::path& base_dir) {
    if (payload.empty()) throw Error(ErrorKind::Data, "record has no payload");
    if (payload.substr(0, 6) == "synth:") {
        const auto p = parse_synth_payload(payload);
        if (!p) throw Error(ErrorKind::Data, "unparseable synthetic payload '" + std::string(payload) + "'");
        return generate_moving_shape(p->speed, p->noise, p->seed, options);
    }
    std::filesystem::path path(payload);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    ToyVideo v = load_video(path);
    if (v.shape != options.shape) throw Error(ErrorKind::Artifact, "video " + path.string() + " has unexpected shape");
    return v;
}

}  // namespace tqd
