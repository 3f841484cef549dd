#pragma once

// Statistical oracles used by the tests. Kept independent of the library
// under test on purpose: these compute p-values and moments from first
// principles so that frequency checks have their own ground truth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace teststats {

// Lower regularized incomplete gamma P(s, x), series + continued fraction.
inline double gamma_p(double s, double x) {
    if (x < 0.0 || s <= 0.0) return 0.0;
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) {
        double term = 1.0 / s;
        double sum = term;
        double ap = s;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
    // Lentz's continued fraction for Q(s, x)
    double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    double q = std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
    return 1.0 - q;
}

// Survival function of the chi-square distribution with df degrees of freedom.
inline double chi_square_sf(double statistic, double df) {
    return 1.0 - gamma_p(df / 2.0, statistic / 2.0);
}

// Pearson chi-square statistic for observed counts against uniform expectation.
inline double chi_square_uniform_stat(const std::vector<std::size_t>& counts, std::size_t total) {
    double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (std::size_t c : counts) {
        double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

inline double chi_square_uniform_p(const std::vector<std::size_t>& counts, std::size_t total) {
    return chi_square_sf(chi_square_uniform_stat(counts, total),
                         static_cast<double>(counts.size() - 1));
}

// Kolmogorov-Smirnov p-value for samples against the uniform [0, hi] CDF.
inline double ks_uniform_p(std::vector<double> samples, double hi) {
    std::sort(samples.begin(), samples.end());
    double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double cdf = std::clamp(samples[i] / hi, 0.0, 1.0);
        double lo_step = static_cast<double>(i) / n;
        double hi_step = static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(cdf - lo_step), std::abs(cdf - hi_step)});
    }
    double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        p += sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
        sign = -sign;
    }
    return std::clamp(p, 0.0, 1.0);
}

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double variance_of(const std::vector<double>& xs) {
    double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

// Independent Pearson correlation, cross-checking the library's own.
inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = mean_of(xs), my = mean_of(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace teststats
