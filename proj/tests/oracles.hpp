#pragma once

// Reference computations the tests compare the library against. Each one is
// written from the textbook formula, without calling into the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// P(X > 0, Y > 0) for a standard bivariate normal with correlation rho.
inline double bvn_positive_quadrant(double rho) { return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi); }

inline double beta_pdf(double t, double a, double b) {
    const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    return std::exp(log_norm) * std::pow(t, a - 1.0) * std::pow(1.0 - t, b - 1.0);
}

// Composite Simpson rule; n is rounded up to even.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 4000) {
    if (n % 2) ++n;
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return s * h / 3.0;
}

// Beta mass of [lo, hi]. Only valid where the pdf is bounded on [lo, hi]
// (shapes >= 1, or an interval away from a singular endpoint).
inline double beta_mass(double a, double b, double lo, double hi, int n = 4000) {
    return simpson([&](double t) { return beta_pdf(t, a, b); }, lo, hi, n);
}

// Two-pass covariance formula.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Kolmogorov-Smirnov critical value at the 1% level, large-n asymptotic (tables: 1.628).
inline double ks_critical_1pct(double n) { return 1.628 / std::sqrt(n); }

// D = sup |F_n - F| for a sample against a continuous cdf.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
