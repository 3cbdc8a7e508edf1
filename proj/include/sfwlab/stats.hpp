// Small statistics toolkit used by the evaluation module: binomial
// confidence intervals, a paired t-test, and the chi-square quantile that
// sizes the harm-oracle ball.
#pragma once

#include <cstddef>
#include <vector>

namespace sfwlab::stats {

double normal_cdf(double z);

// Regularized incomplete gamma P(a, x) and incomplete beta I_x(a, b).
double gamma_p(double a, double x);
double incomplete_beta(double a, double b, double x);

// Survival function of Student's t with `dof` degrees of freedom.
double student_t_sf(double t, double dof);

// Quantile of the chi-square distribution (inverse of gamma_p in x).
double chi2_quantile(double p, double dof);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Wilson score interval for a binomial proportion.
Interval binomial_ci(std::size_t successes, std::size_t n, double confidence = 0.95);

struct PairedTest {
    double mean_diff = 0.0;
    double t_stat = 0.0;
    double p_one_sided = 1.0;  // H1: mean(a - b) < 0
    std::size_t n = 0;
};

// Paired t-test of a vs b; p-value is one-sided for mean(a) < mean(b).
PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& v);
double median(std::vector<double> v);

}  // namespace sfwlab::stats
