#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tqd::stats {

/// Beta(a, b) density. The normalizing constant is evaluated through log-gamma.
double beta_pdf(double t, double a, double b);

/// Regularized incomplete beta I_t(a, b).
double beta_cdf(double t, double a, double b);

/// Two-sided p-value of a Student-t statistic with `dof` degrees of freedom.
double student_t_two_sided_p(double t_stat, double dof);

/// Upper tail P(X > x) of a chi-square variable.
double chi_square_sf(double x, double dof);

/// Asymptotic Kolmogorov-Smirnov critical value at the 1% level (1.628 / sqrt(n)).
double ks_critical_1pct(std::size_t n);

/// One-sample KS statistic sup |F_n - F|. `sorted` must be ascending.
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf);

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Pearson chi-square goodness of fit. Cells whose expected count falls below
/// `min_expected` are pooled into a single extra cell before testing.
ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected,
                                double min_expected = 5.0);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
};

Moments moments(std::span<const double> xs);

}  // namespace tqd::stats
