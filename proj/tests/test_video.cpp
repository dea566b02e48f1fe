#include "tqd/error.hpp"
#include "tqd/video.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

using namespace tqd;

namespace {

// Circular centre of mass of the foreground along one axis (wrap-aware).
double circular_centroid(const ToyVideo& v, int f, bool along_rows) {
    const int n = along_rows ? v.shape.height : v.shape.width;
    double cx = 0, cy = 0;
    for (int r = 0; r < v.shape.height; ++r) {
        for (int c = 0; c < v.shape.width; ++c) {
            const double w = v.at(f, r, c) - 0.1;
            const double a = 2.0 * std::numbers::pi * (along_rows ? r : c) / n;
            cx += w * std::cos(a);
            cy += w * std::sin(a);
        }
    }
    return std::atan2(cy, cx) * n / (2.0 * std::numbers::pi);
}

double travelled(const ToyVideo& v, bool along_rows) {
    const int n = along_rows ? v.shape.height : v.shape.width;
    double total = 0;
    for (int f = 1; f < v.shape.frames; ++f) {
        double d = circular_centroid(v, f, along_rows) - circular_centroid(v, f - 1, along_rows);
        d -= n * std::round(d / n);
        total += d;
    }
    return total;
}

std::vector<std::vector<float>> sorted_frames(const ToyVideo& v) {
    std::vector<std::vector<float>> out;
    for (int f = 0; f < v.shape.frames; ++f) out.emplace_back(v.frame(f).begin(), v.frame(f).end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("moving square generator") {
    SUBCASE("static video") {
        const auto v = generate_moving_shape(0.0, 0.0, 3);
        for (int f = 1; f < v.shape.frames; ++f) CHECK(std::equal(v.frame(f).begin(), v.frame(f).end(), v.frame(0).begin()));
    }
    SUBCASE("centroid displacement for speed 2 over 8 frames") {
        for (std::uint64_t seed = 0; seed < 12; ++seed) {
            const auto v = generate_moving_shape(2.0, 0.0, seed);
            const bool rows = v.meta.dir_row != 0;
            const double d = travelled(v, rows) * (rows ? v.meta.dir_row : v.meta.dir_col);
            CHECK(d == doctest::Approx(14.0).epsilon(1e-9));
        }
    }
    SUBCASE("clean video has exactly two levels") {
        const auto v = generate_moving_shape(1.5, 0.0, 4);
        const std::set<float> levels(v.pixels.begin(), v.pixels.end());
        CHECK(levels == std::set<float>{0.1f, 0.9f});
    }
    SUBCASE("noise stays in range and quality analogs are monotone") {
        const auto a = generate_moving_shape(1.0, 0.3, 5);
        for (float p : a.pixels) REQUIRE((p >= 0.0f && p <= 1.0f));
        CHECK(generate_moving_shape(2.0, 0.0, 1).meta.mq_score > generate_moving_shape(1.0, 0.0, 1).meta.mq_score);
        CHECK(generate_moving_shape(1.0, 0.1, 1).meta.vq_score > generate_moving_shape(1.0, 0.2, 1).meta.vq_score);
        CHECK(generate_moving_shape(1.0, 0.2, 9).pixels == generate_moving_shape(1.0, 0.2, 9).pixels);
    }
}

TEST_CASE("degradations") {
    const auto v = generate_moving_shape(2.0, 0.05, 7);
    SUBCASE("zero strength is the identity") {
        for (auto k : {DegradationKind::Blur, DegradationKind::Compression, DegradationKind::Noise, DegradationKind::Shuffle}) {
            CHECK(degrade(v, {k, 0.0, 1}).pixels == v.pixels);
        }
    }
    SUBCASE("single-frame shuffle is the identity") {
        GeneratorOptions o;
        o.shape.frames = 1;
        const auto one = generate_moving_shape(1.0, 0.0, 2, o);
        CHECK(degrade(one, {DegradationKind::Shuffle, 1.0, 3}).pixels == one.pixels);
    }
    SUBCASE("two-level quantizer") {
        const auto clean = generate_moving_shape(1.0, 0.0, 8);
        const auto q = degrade(clean, {DegradationKind::Compression, 2, 0});
        for (std::size_t i = 0; i < q.pixels.size(); ++i) {
            // q(x) = (floor(2x) + 0.5) / 2: 0.1 -> 0.25, 0.9 -> 0.75
            REQUIRE(q.pixels[i] == (clean.pixels[i] < 0.5f ? 0.25f : 0.75f));
        }
        CHECK_THROWS_AS(degrade(clean, {DegradationKind::Compression, 1.5, 0}), Error);
    }
    SUBCASE("blur keeps every frame mean") {
        for (double radius : {1.0, 2.0, 3.0, 5.0}) {
            const auto b = degrade(v, {DegradationKind::Blur, radius, 0});
            for (int f = 0; f < v.shape.frames; ++f) {
                double m0 = 0, m1 = 0;
                for (float p : v.frame(f)) m0 += p;
                for (float p : b.frame(f)) m1 += p;
                CHECK(std::abs(m0 - m1) / v.shape.frame_size() < 1e-6);
            }
        }
    }
    SUBCASE("shuffle permutes whole frames") {
        const auto s = degrade(v, {DegradationKind::Shuffle, 1.0, 4});
        CHECK(s.pixels != v.pixels);
        CHECK(sorted_frames(s) == sorted_frames(v));
        const auto half = degrade(v, {DegradationKind::Shuffle, 0.5, 4});
        CHECK(sorted_frames(half) == sorted_frames(v));
        int moved = 0;
        for (int f = 0; f < v.shape.frames; ++f) moved += !std::equal(v.frame(f).begin(), v.frame(f).end(), half.frame(f).begin());
        CHECK(moved <= 4);
        CHECK_THROWS_AS(degrade(v, {DegradationKind::Shuffle, 1.5, 0}), Error);
    }
    SUBCASE("noise is clamped") {
        const auto n = degrade(v, {DegradationKind::Noise, 0.5, 2});
        for (float p : n.pixels) REQUIRE((p >= 0.0f && p <= 1.0f));
        CHECK(n.pixels != v.pixels);
    }
    SUBCASE("names") {
        CHECK(parse_degradation("blur") == DegradationKind::Blur);
        CHECK(parse_degradation("quantization") == DegradationKind::Compression);
        CHECK(degradation_name(DegradationKind::Shuffle) == "shuffle");
        CHECK_FALSE(parse_degradation("jpeg").has_value());
    }
}

TEST_CASE("flow interpolation") {
    const std::vector<double> x0{0.0, 0.2, 0.4}, x1{1.0, -1.0, 3.0};
    CHECK(flow_interpolate(x0, x1, 0.0) == x0);
    CHECK(flow_interpolate(x0, x1, 1.0) == x1);
    const std::vector<double> zeros(4, 0.0), ones(4, 1.0);
    for (double x : flow_interpolate(zeros, ones, 0.5)) CHECK(x == 0.5);
    const auto a = flow_interpolate(x0, x1, 0.3);
    std::vector<double> s0, s1;
    for (double x : x0) s0.push_back(2.5 * x);
    for (double x : x1) s1.push_back(2.5 * x);
    const auto b = flow_interpolate(s0, s1, 0.3);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(2.5 * a[i]));
    CHECK_THROWS_AS(flow_interpolate(x0, ones, 0.5), Error);
}

TEST_CASE("video file format") {
    const auto v = generate_moving_shape(1.0, 0.1, 12);
    const auto bytes = encode_video(v);
    CHECK(bytes.size() == 16 + 4 * v.pixels.size());
    CHECK(static_cast<unsigned char>(bytes[4]) == 8);  // F, little-endian
    const auto back = decode_video(bytes);
    CHECK(back.shape == v.shape);
    CHECK(back.pixels == v.pixels);

    std::string bad = bytes;
    bad[0] = 'X';
    try {
        decode_video(bad);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Artifact);
    }
    CHECK_THROWS_AS(decode_video(bytes.substr(0, bytes.size() - 3)), Error);

    const auto dir = std::filesystem::temp_directory_path() / "tqd_test_video";
    std::filesystem::remove_all(dir);
    save_video(dir / "clip.tqv", v);
    CHECK(load_video(dir / "clip.tqv").pixels == v.pixels);
    CHECK(resolve_payload("clip.tqv", {}, dir).pixels == v.pixels);
    std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic payload references") {
    const SynthPayload p{1.25, 0.05, 42};
    const auto text = format_synth_payload(p);
    const auto back = parse_synth_payload(text);
    REQUIRE(back.has_value());
    CHECK(back->speed == 1.25);
    CHECK(back->noise == 0.05);
    CHECK(back->seed == 42);
    CHECK(resolve_payload(text, {}).pixels == generate_moving_shape(1.25, 0.05, 42).pixels);
    CHECK_FALSE(parse_synth_payload("videos/a.tqv").has_value());
}
