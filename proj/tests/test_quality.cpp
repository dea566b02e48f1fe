#include "oracles.hpp"

#include "tqd/error.hpp"
#include "tqd/quality.hpp"
#include "tqd/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace tqd;

namespace {

std::vector<QualityRecord> make(std::initializer_list<std::pair<double, double>> scores) {
    std::vector<QualityRecord> out;
    int i = 0;
    for (auto [mq, vq] : scores) {
        QualityRecord r;
        r.id = "r" + std::to_string(i++);
        r.mq_raw = mq;
        r.vq_raw = vq;
        out.push_back(r);
    }
    return out;
}

std::string error_text(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

// 20 fixed (mq, vq) pairs for the correlation fixture
const std::vector<double> kFixtureX{2.31, 2.87, 1.95, 3.12, 2.44, 2.78, 3.05, 1.88, 2.66, 2.19,
                                   2.93, 2.51, 3.27, 2.05, 2.72, 2.38, 1.99, 3.01, 2.58, 2.84};
const std::vector<double> kFixtureY{2.90, 2.41, 3.02, 2.55, 2.71, 2.66, 2.38, 3.15, 2.49, 2.83,
                                   2.77, 2.60, 2.29, 2.95, 2.52, 2.88, 2.70, 2.47, 2.81, 2.35};

}  // namespace

TEST_CASE("min-max normalization") {
    SUBCASE("endpoints and midpoint") {
        const auto n = normalize_scores(make({{2, 0}, {3, 0}, {4, 1}}));
        CHECK(*n.records[0].mq_norm == 0.0);
        CHECK(*n.records[1].mq_norm == 0.5);
        CHECK(*n.records[2].mq_norm == 1.0);
        CHECK(n.constants.mq_min == 2.0);
        CHECK(n.constants.mq_max == 4.0);
    }
    SUBCASE("degenerate range maps to one half") {
        const auto n = normalize_scores(make({{2.5, 1}, {2.5, 2}, {2.5, 3}}));
        for (const auto& r : n.records) CHECK(*r.mq_norm == 0.5);
    }
    SUBCASE("hand-computed (x - 1) / 4") {
        const auto n = normalize_scores(make({{1, 0}, {2, 0}, {2, 0}, {5, 1}}));
        for (std::size_t i = 0; i < n.records.size(); ++i) {
            CHECK(*n.records[i].mq_norm == doctest::Approx((n.records[i].mq_raw - 1.0) / 4.0));
        }
    }
    SUBCASE("range invariants and idempotence") {
        const auto pop = synth_population(500, -0.3, 4);
        const auto n = normalize_scores(pop);
        double lo = 1, hi = 0;
        std::vector<QualityRecord> again;
        for (const auto& r : n.records) {
            lo = std::min(lo, *r.mq_norm);
            hi = std::max(hi, *r.mq_norm);
            QualityRecord c = r;
            c.mq_raw = *r.mq_norm;
            c.vq_raw = *r.vq_norm;
            again.push_back(c);
        }
        CHECK(lo == 0.0);
        CHECK(hi == 1.0);
        const auto twice = normalize_scores(again);
        for (std::size_t i = 0; i < again.size(); ++i) {
            CHECK(*twice.records[i].mq_norm == doctest::Approx(*n.records[i].mq_norm).epsilon(1e-15));
            CHECK(*twice.records[i].vq_norm == doctest::Approx(*n.records[i].vq_norm).epsilon(1e-15));
        }
    }
    SUBCASE("errors") {
        CHECK(error_text([] { normalize_scores({}); }).find("empty dataset") != std::string::npos);
        auto bad = make({{1, 1}, {std::numeric_limits<double>::quiet_NaN(), 2}});
        bad[1].id = "clip-17";
        CHECK(error_text([&] { normalize_scores(bad); }).find("clip-17") != std::string::npos);
    }
    SUBCASE("held-out records reuse constants and clamp") {
        const auto n = normalize_scores(make({{1, 1}, {3, 5}}));
        const auto held = apply_normalization(make({{2, 3}, {10, -4}}), n.constants);
        CHECK(*held[0].mq_norm == 0.5);
        CHECK(*held[0].vq_norm == 0.5);
        CHECK(*held[1].mq_norm == 1.0);
        CHECK(*held[1].vq_norm == 0.0);
    }
}

TEST_CASE("quadrant partition") {
    SUBCASE("one point per quadrant") {
        const auto p = partition_quadrants(make({{3, 3}, {3, 2}, {2, 3}, {2, 2}}), 2.5, 2.7);
        CHECK(p.counts == std::array<std::size_t, 4>{1, 1, 1, 1});
        CHECK(classify(make({{3, 2}})[0], 2.5, 2.7) == Quadrant::HMLV);
        CHECK(classify(make({{2, 3}})[0], 2.5, 2.7) == Quadrant::LMHV);
    }
    SUBCASE("all above both thresholds") {
        const auto p = partition_quadrants(make({{5, 5}, {6, 7}}), 2.5, 2.7);
        CHECK(p.fractions[0] == 1.0);
    }
    SUBCASE("ties count as low") {
        CHECK(classify(make({{2.5, 2.7}})[0], 2.5, 2.7) == Quadrant::LMLV);
    }
    SUBCASE("totality over arbitrary thresholds") {
        const auto pop = synth_population(1000, -0.22, 9);
        for (double th : {-10.0, 2.0, 2.6, 100.0}) {
            const auto p = partition_quadrants(pop, th, th);
            CHECK(p.total() == pop.size());
            CHECK(p.fractions[0] + p.fractions[1] + p.fractions[2] + p.fractions[3] == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    SUBCASE("median thresholds reproduce the bivariate-normal quadrant mass") {
        const auto pop = synth_population(100000, -0.22, 21);
        const auto [mq, vq] = median_thresholds(pop);
        const auto p = partition_quadrants(pop, mq, vq);
        CHECK(std::abs(p.fractions[0] - oracle::bvn_positive_quadrant(-0.22)) < 0.02);
        CHECK(parse_quadrant("HMLV") == Quadrant::HMLV);
        CHECK_FALSE(parse_quadrant("XX").has_value());
    }
}

TEST_CASE("pearson correlation") {
    CHECK(pearson_correlation(make({{0, 0}, {1, -1}, {2, -2}})).pearson_r == doctest::Approx(-1.0));
    CHECK(pearson_correlation(make({{0, 0}, {1, 1}, {2, 2}})).pearson_r == doctest::Approx(1.0));

    const auto s = pearson_correlation(kFixtureX, kFixtureY);
    CHECK(std::abs(s.pearson_r - oracle::pearson(kFixtureX, kFixtureY)) < 1e-6);
    CHECK(s.n == 20);
    // p-value from the t statistic with n - 2 dof
    const double t = s.pearson_r * std::sqrt(18.0 / (1.0 - s.pearson_r * s.pearson_r));
    CHECK(s.p_value == doctest::Approx(stats::student_t_two_sided_p(t, 18.0)));
    CHECK(s.p_value < 0.001);

    CHECK(pearson_correlation(kFixtureX, kFixtureX).pearson_r == doctest::Approx(1.0));
    CHECK(error_text([] { pearson_correlation(make({{1, 1}, {1, 2}, {1, 3}})); }).find("constant score sequence") !=
          std::string::npos);
    CHECK_THROWS_AS(pearson_correlation(make({{1, 1}, {2, 2}})), Error);
}

TEST_CASE("synthetic population") {
    CHECK(std::abs(pearson_correlation(synth_population(100000, 0.0, 1)).pearson_r) < 0.02);
    const double r = pearson_correlation(synth_population(100000, -0.22, 2)).pearson_r;
    CHECK(r >= -0.24);
    CHECK(r <= -0.20);
    CHECK(synth_population(2, 0.5, 3).size() == 2);
    CHECK_THROWS_AS(synth_population(10, 1.0, 3), Error);
    CHECK_THROWS_AS(synth_population(10, -1.5, 3), Error);
    CHECK(synth_population(50, -0.22, 8) == synth_population(50, -0.22, 8));
}

TEST_CASE("score noise injection") {
    // raw scores spread uniformly over a range of exactly 2
    std::vector<QualityRecord> base;
    for (int i = 0; i < 100000; ++i) {
        QualityRecord r;
        r.id = std::to_string(i);
        r.mq_raw = 1.0 + 2.0 * i / 99999.0;
        r.vq_raw = 3.0 - 2.0 * i / 99999.0;
        base.push_back(r);
    }
    auto diff_std = [&](double level) {
        const auto noisy = inject_score_noise(base, level, 77);
        std::vector<double> d;
        for (std::size_t i = 0; i < base.size(); ++i) d.push_back(noisy[i].mq_raw - base[i].mq_raw);
        return std::sqrt(stats::moments(d).variance);
    };
    CHECK(inject_score_noise(base, 0.0, 5) == base);
    const double s1 = diff_std(0.1);
    CHECK(s1 >= 0.195);
    CHECK(s1 <= 0.205);
    CHECK(diff_std(0.2) / s1 == doctest::Approx(2.0).epsilon(0.03));
    CHECK_THROWS_AS(inject_score_noise(base, -0.1, 5), Error);
}

TEST_CASE("manifest and sidecar files") {
    auto recs = synth_population(25, -0.22, 6);
    recs[3].payload.clear();
    recs[4].mq_raw = 0.1 + 0.2;  // not exactly representable in short decimal
    const auto text = format_manifest(recs);
    CHECK(parse_manifest(text) == recs);
    const auto norm = normalize_scores(recs).records;
    CHECK(parse_manifest(format_manifest(norm)) == norm);

    const auto dir = std::filesystem::temp_directory_path() / "tqd_test_quality";
    std::filesystem::remove_all(dir);
    write_manifest(dir / "m.jsonl", recs);
    CHECK(read_manifest(dir / "m.jsonl") == recs);

    const NormalizationConstants c{1.0 / 3.0, 2.5, -1.0, 7.25};
    write_sidecar(sidecar_path_for(dir / "m.jsonl"), c);
    CHECK(read_sidecar(dir / "m.jsonl.norm.json") == c);

    try {
        parse_manifest("{\"id\":\"a\",\"mq\":1,\"vq\":2}\n{not json}\n");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    const auto nan = parse_manifest("{\"id\":\"a\",\"mq\":NaN,\"vq\":2}\n");
    CHECK(std::isnan(nan[0].mq_raw));
    CHECK_THROWS_AS(read_manifest(dir / "missing.jsonl"), Error);
    std::filesystem::remove_all(dir);
}
