#include "tqd/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace tqd::stats {

double beta_pdf(double t, double a, double b) {
    if (t < 0.0 || t > 1.0) return 0.0;
    const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    if (t == 0.0) return a < 1.0 ? INFINITY : (a == 1.0 ? std::exp(log_norm) : 0.0);
    if (t == 1.0) return b < 1.0 ? INFINITY : (b == 1.0 ? std::exp(log_norm) : 0.0);
    return std::exp(log_norm + (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t));
}

double beta_cdf(double t, double a, double b) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return boost::math::ibeta(a, b, t);
}

double student_t_two_sided_p(double t_stat, double dof) {
    if (!std::isfinite(t_stat)) return 0.0;
    const double x = dof / (dof + t_stat * t_stat);
    return std::clamp(boost::math::ibeta(0.5 * dof, 0.5, x), 0.0, 1.0);
}

double chi_square_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected,
                                double min_expected) {
    ChiSquareResult r;
    double pooled_obs = 0.0;
    double pooled_exp = 0.0;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] < min_expected) {
            pooled_obs += observed[i];
            pooled_exp += expected[i];
            continue;
        }
        const double d = observed[i] - expected[i];
        r.statistic += d * d / expected[i];
        ++cells;
    }
    if (pooled_exp > 0.0) {
        const double d = pooled_obs - pooled_exp;
        r.statistic += d * d / pooled_exp;
        ++cells;
    } else if (pooled_obs > 0.0) {
        // observations where none were expected
        r.statistic = INFINITY;
    }
    r.dof = cells > 1 ? static_cast<double>(cells - 1) : 1.0;
    r.p_value = std::isfinite(r.statistic) ? chi_square_sf(r.statistic, r.dof) : 0.0;
    return r;
}

Moments moments(std::span<const double> xs) {
    Moments m;
    if (xs.empty()) return m;
    // Welford
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double x : xs) {
        ++k;
        const double d = x - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (x - mean);
    }
    m.mean = mean;
    m.variance = k > 1 ? m2 / static_cast<double>(k - 1) : 0.0;
    return m;
}

}  // namespace tqd::stats
