#include "sfwlab/stats.hpp"

#include "sfwlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sfwlab::stats {

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

namespace {

// Lentz continued fraction for the upper incomplete gamma Q(a, x), x > a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Series expansion for P(a, x), x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

}  // namespace

double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double dof) {
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
    return t >= 0.0 ? tail : 1.0 - tail;
}

double chi2_quantile(double p, double dof) {
    require(p > 0.0 && p < 1.0, "chi2_quantile: p must be in (0,1)");
    double lo = 0.0;
    double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
    while (gamma_p(dof / 2.0, hi / 2.0) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_p(dof / 2.0, mid / 2.0) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

Interval binomial_ci(std::size_t successes, std::size_t n, double confidence) {
    require(n > 0, "binomial_ci: empty sample");
    // z for the two-sided confidence level, via bisection on the normal cdf.
    const double target = 0.5 + confidence / 2.0;
    double zlo = 0.0, zhi = 10.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (zlo + zhi);
        if (normal_cdf(mid) < target)
            zlo = mid;
        else
            zhi = mid;
    }
    const double z = 0.5 * (zlo + zhi);
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (phat + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && a.size() >= 2, "paired_t_test: need paired samples, n >= 2");
    const std::size_t n = a.size();
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += a[i] - b[i];
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - m;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    PairedTest out;
    out.n = n;
    out.mean_diff = m;
    if (sd == 0.0) {
        out.t_stat = m == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), m);
        out.p_one_sided = m < 0.0 ? 0.0 : (m == 0.0 ? 0.5 : 1.0);
        return out;
    }
    out.t_stat = m / (sd / std::sqrt(static_cast<double>(n)));
    out.p_one_sided = 1.0 - student_t_sf(out.t_stat, static_cast<double>(n - 1));
    return out;
}

double mean(const std::vector<double>& v) {
    require(!v.empty(), "mean: empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
    require(!v.empty(), "median: empty vector");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace sfwlab::stats
