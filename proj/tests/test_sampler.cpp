#include "oracles.hpp"

#include "tqd/error.hpp"
#include "tqd/rng.hpp"
#include "tqd/sampler.hpp"
#include "tqd/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace tqd;

namespace {

QualityRecord rec(double mq, double vq, std::string id = "r") {
    QualityRecord r;
    r.id = std::move(id);
    r.mq_raw = mq;
    r.vq_raw = vq;
    r.mq_norm = mq;
    r.vq_norm = vq;
    return r;
}

SamplerConfig cfg(double base = 2, double max = 20) {
    SamplerConfig c;
    c.kappa_base = base;
    c.kappa_max = max;
    return c;
}

std::vector<double> draws(const TimestepLaw& law, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& t : out) t = sample_timestep(law, rng);
    return out;
}

}  // namespace

TEST_CASE("mu") {
    CHECK(compute_mu(1.0, 0.0) == 1.0);
    for (double x : {0.0, 0.3, 1.0}) CHECK(compute_mu(x, x) == 0.5);
    CHECK(compute_mu(0.8, 0.3) == doctest::Approx(0.75));
    CHECK_THROWS_AS(compute_mu(1.2, 0.0), Error);
    CHECK_THROWS_AS(compute_mu(0.5, -0.1), Error);
}

TEST_CASE("kappa") {
    CHECK(compute_kappa(0.4, 0.4, cfg(4, 30)) == 4.0);
    CHECK(compute_kappa(1.0, 0.0, cfg(2, 20)) == 20.0);
    CHECK(compute_kappa(0.25, 0.75, cfg(2, 30)) == doctest::Approx(16.0));
    SamplerConfig bad = cfg(5, 3);
    CHECK_THROWS_AS(compute_kappa(0.1, 0.2, bad), Error);
    bad = cfg(0, 3);
    CHECK_THROWS_AS(compute_kappa(0.1, 0.2, bad), Error);
}

TEST_CASE("monotone specialization over a grid") {
    const auto c = cfg(2, 30);
    for (double vq = 0.0; vq <= 1.0; vq += 0.125) {
        for (double mq = 0.0; mq + 0.125 <= 1.0; mq += 0.125) {
            CHECK(compute_mu(mq + 0.125, vq) > compute_mu(mq, vq));
            if (mq >= vq) CHECK(compute_kappa(mq + 0.125, vq, c) >= compute_kappa(mq, vq, c));
        }
    }
}

TEST_CASE("law construction") {
    const auto flat = make_law(rec(0.6, 0.6), cfg(2, 20));
    CHECK(flat.alpha == 1.0);
    CHECK(flat.beta == 1.0);

    const auto edge = make_law(rec(1.0, 0.0), cfg(2, 20));
    CHECK(edge.mu == 1.0);
    CHECK(edge.kappa == 20.0);
    CHECK(edge.alpha == 20.0);
    CHECK(edge.beta == 0.05);

    const auto mid = make_law(rec(0.9, 0.4), cfg(4, 30));
    CHECK(mid.mu == doctest::Approx(0.75));
    CHECK(mid.kappa == doctest::Approx(17.0));
    CHECK(mid.alpha == doctest::Approx(12.75));
    CHECK(mid.beta == doctest::Approx(4.25));
    CHECK(mid.alpha + mid.beta == doctest::Approx(mid.kappa));
    CHECK(mid.mean() == doctest::Approx(0.75));

    QualityRecord raw;
    raw.mq_raw = 1;
    raw.vq_raw = 2;
    CHECK_THROWS_AS(make_law(raw, cfg()), Error);
    CHECK_THROWS_AS(retention_probability(raw), Error);
}

TEST_CASE("Beta(1,1) draws are uniform") {
    const auto xs = draws(make_law(0.5, 2.0, 0.05), 1000000, 1);
    CHECK(stats::moments(xs).mean == doctest::Approx(0.5).epsilon(0.004));
    CHECK(oracle::ks_statistic(xs, [](double t) { return t; }) < oracle::ks_critical_1pct(1e6));
}

TEST_CASE("Beta(15,5) moments") {
    const auto law = make_law(0.75, 20.0, 0.05);
    const auto m = stats::moments(draws(law, 1000000, 2));
    CHECK(std::abs(m.mean - 0.75) < 0.003);
    CHECK(m.variance == doctest::Approx(0.75 * 0.25 / 21.0).epsilon(0.10));
}

TEST_CASE("concentrated law stays near one half") {
    // Beta(500,500) has sd ~0.0158, so (0.4, 0.6) is more than 6 sd each side
    const auto xs = draws(make_law(0.5, 1000.0, 0.05), 100000, 3);
    CHECK(*std::min_element(xs.begin(), xs.end()) > 0.4);
    CHECK(*std::max_element(xs.begin(), xs.end()) < 0.6);
}

TEST_CASE("support is the open unit interval") {
    for (auto law : {make_law(1.0, 20.0, 0.05), make_law(0.0, 20.0, 0.05), make_law(0.5, 0.1, 0.05)}) {
        for (double t : draws(law, 200000, 4)) {
            REQUIRE(t > 0.0);
            REQUIRE(t < 1.0);
        }
    }
}

TEST_CASE("retention") {
    CHECK(retention_probability(rec(1.0, 0.2)) == 1.0);
    CHECK(retention_probability(rec(0.0, 0.0)) == 0.0);
    CHECK(retention_probability(rec(0.3, 0.7)) == 0.7);
}

TEST_CASE("batch preparation") {
    SUBCASE("always-retained record fills the batch at once") {
        const std::vector<QualityRecord> ds{rec(1.0, 0.5)};
        Rng rng(1);
        const auto b = prepare_batch(ds, cfg(), rng);
        CHECK(b.size() == 8);
        CHECK(b.acceptance_rate() == 1.0);
    }
    SUBCASE("acceptance rate of a half-retained dataset") {
        const std::vector<QualityRecord> ds{rec(0.5, 0.2, "a"), rec(0.1, 0.5, "b"), rec(0.5, 0.5, "c")};
        const TqdSampler s(ds, cfg());
        Rng rng(2);
        std::size_t attempts = 0, accepted = 0;
        while (attempts < 100000) {
            const auto b = s.prepare_batch(rng);
            attempts += b.attempts;
            accepted += b.size();
        }
        CHECK(std::abs(static_cast<double>(accepted) / static_cast<double>(attempts) - 0.5) < 0.01);
    }
    SUBCASE("zero-retention records never appear") {
        const std::vector<QualityRecord> ds{rec(1.0, 0.0, "keep"), rec(0.0, 0.0, "drop")};
        const TqdSampler s(ds, cfg());
        Rng rng(3);
        for (int k = 0; k < 200; ++k) {
            for (const auto& m : s.prepare_batch(rng).members) REQUIRE(m.index == 0);
        }
    }
    SUBCASE("errors") {
        const std::vector<QualityRecord> none{rec(0, 0), rec(0, 0)};
        Rng rng(4);
        try {
            prepare_batch(none, cfg(), rng);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("no retainable samples") != std::string::npos);
        }
        const std::vector<QualityRecord> rare{rec(0.001, 0.0)};
        SamplerConfig c = cfg();
        c.max_rejection_attempts = 50;
        try {
            prepare_batch(rare, c, rng);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("acceptance rate") != std::string::npos);
        }
    }
    SUBCASE("determinism") {
        const std::vector<QualityRecord> ds{rec(0.9, 0.1, "a"), rec(0.2, 0.7, "b"), rec(0.4, 0.4, "c")};
        const TqdSampler s(ds, cfg());
        Rng r1(9), r2(9);
        for (int k = 0; k < 50; ++k) {
            const auto a = s.prepare_batch(r1);
            const auto b = s.prepare_batch(r2);
            REQUIRE(a.attempts == b.attempts);
            for (std::size_t i = 0; i < a.size(); ++i) {
                REQUIRE(a.members[i].index == b.members[i].index);
                REQUIRE(a.members[i].t == b.members[i].t);
            }
        }
    }
}

TEST_CASE("joint (record, t-bin) frequencies factorize") {
    // small-sample version of the acceptance check; shapes all >= 1 so the
    // Simpson oracle is well conditioned
    const std::vector<QualityRecord> ds{rec(0.8, 0.2, "a"), rec(0.3, 0.6, "b"), rec(0.5, 0.5, "c")};
    const auto c = cfg(2, 20);
    const TqdSampler s(ds, c);
    const int bins = 10;
    std::vector<double> obs(ds.size() * bins, 0.0);
    Rng rng(11);
    std::size_t n = 0;
    while (n < 200000) {
        for (const auto& m : s.prepare_batch(rng).members) {
            obs[m.index * bins + std::min(bins - 1, static_cast<int>(m.t * bins))] += 1;
            ++n;
        }
    }
    double wsum = 0;
    for (const auto& r : ds) wsum += std::max(*r.mq_norm, *r.vq_norm);
    std::vector<double> exp;
    for (const auto& r : ds) {
        const double w = std::max(*r.mq_norm, *r.vq_norm) / wsum;
        const double mu = 0.5 + 0.5 * (*r.mq_norm - *r.vq_norm);
        const double kappa = 2 + 18 * std::abs(*r.mq_norm - *r.vq_norm);
        for (int b = 0; b < bins; ++b) {
            exp.push_back(n * w * oracle::beta_mass(mu * kappa, (1 - mu) * kappa, b / double(bins), (b + 1) / double(bins)));
        }
    }
    CHECK(stats::chi_square_test(obs, exp).p_value > 0.01);
}

TEST_CASE("density curves") {
    for (const auto& [t, d] : density_curve(make_law(0.5, 2.0, 0.05), 64)) CHECK(d == doctest::Approx(1.0));

    const auto c22 = density_curve(make_law(0.5, 4.0, 0.05), 199);
    const auto peak = std::max_element(c22.begin(), c22.end(), [](auto a, auto b) { return a.second < b.second; });
    CHECK(peak->first == doctest::Approx(0.5));
    CHECK(peak->second == doctest::Approx(1.5));

    const auto c155 = density_curve(make_law(0.75, 20.0, 0.05), 512);
    const auto m = std::max_element(c155.begin(), c155.end(), [](auto a, auto b) { return a.second < b.second; });
    CHECK(std::abs(m->first - 14.0 / 18.0) <= 1.0 / 513.0);

    for (const auto& law : {make_law(0.75, 20.0, 0.05), make_law(0.3, 6.0, 0.05), make_law(0.5, 4.0, 0.05)}) {
        const auto curve = density_curve(law, 512);
        double area = 0;
        for (std::size_t i = 1; i < curve.size(); ++i) {
            area += 0.5 * (curve[i].second + curve[i - 1].second) * (curve[i].first - curve[i - 1].first);
            REQUIRE(curve[i].second >= 0.0);
        }
        CHECK(std::abs(area - 1.0) < 0.01);
    }
    CHECK(bin_mass(make_law(0.75, 20.0, 0.05), 0.5, 0.7) ==
          doctest::Approx(oracle::beta_mass(15, 5, 0.5, 0.7)).epsilon(1e-8));
}
