#pragma once

// Descriptive statistics over replicate vectors and the standard normal
// distribution functions used for intervals and normality diagnostics.

#include "gsc/errors.hpp"
#include "gsc/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

namespace gsc {

inline double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Population-normalized variance (divisor = count).
inline double variance_pop(std::span<const double> x) {
    if (x.empty()) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

/// Sample variance (divisor = count - 1).
inline double variance_sample(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    return variance_pop(x) * static_cast<double>(x.size()) / static_cast<double>(x.size() - 1);
}

inline double sd_sample(std::span<const double> x) { return std::sqrt(variance_sample(x)); }

/// Linear-interpolation quantile on sorted data (Hyndman-Fan type 7).
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ParameterError("quantile of empty sample");
    if (sorted.size() == 1) return sorted.front();
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> x, double p) {
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    return quantile_sorted(s, p);
}

inline double iqr(std::span<const double> x) {
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    return quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

/// Inverse standard normal CDF: Acklam's rational approximation refined by
/// one Halley step against erfc.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal quantile requires 0 < p < 1");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

/// Upper quantile of chi-square with one degree of freedom.
inline double chi2_1_upper_quantile(double alpha) {
    const double z = normal_quantile(1.0 - alpha / 2.0);
    return z * z;
}

struct NormalityResult {
    double statistic = 0.0;  // Lilliefors D
    double p_value = 1.0;
    std::size_t sample_size = 0;
    std::size_t reference_draws = 0;
};

namespace detail {

inline double lilliefors_d(std::vector<double> x) {
    const auto n = static_cast<double>(x.size());
    const double m = mean(x);
    const double s = sd_sample(x);
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = normal_cdf((x[i] - m) / s);
        d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
    }
    return d;
}

}  // namespace detail

inline constexpr std::size_t kLillieforsReferenceDraws = 2000;
inline constexpr std::uint64_t kLillieforsTableSeed = 0x4c696c6c6965ULL;

/// Sorted null distribution of the Lilliefors statistic for sample size n,
/// simulated once per n from a fixed seed and cached for the process.
inline const std::vector<double>& lilliefors_reference(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::vector<double>> cache;
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    std::vector<double> table(kLillieforsReferenceDraws);
    std::vector<double> sample(n);
    for (std::size_t r = 0; r < table.size(); ++r) {
        Engine rng = child_engine(child_seed(kLillieforsTableSeed, n), r);
        std::normal_distribution<double> z;
        for (auto& v : sample) v = z(rng);
        table[r] = detail::lilliefors_d(sample);
    }
    std::sort(table.begin(), table.end());
    std::lock_guard lock(mu);
    return cache.emplace(n, std::move(table)).first->second;
}

/// Lilliefors test of normality with estimated mean and sd. The p-value is
/// (1 + #{D_ref >= D}) / (1 + draws) against a simulated reference table.
inline NormalityResult lilliefors_test(std::span<const double> x) {
    if (x.size() < 20) throw ParameterError("normality diagnostic needs at least 20 values");
    std::vector<double> v(x.begin(), x.end());
    if (sd_sample(v) <= 0.0) throw ParameterError("normality diagnostic: sample has zero spread");
    NormalityResult r;
    r.sample_size = v.size();
    r.statistic = detail::lilliefors_d(v);
    const auto& ref = lilliefors_reference(v.size());
    auto it = std::lower_bound(ref.begin(), ref.end(), r.statistic);
    const auto exceed = static_cast<double>(ref.end() - it);
    r.reference_draws = ref.size();
    r.p_value = (1.0 + exceed) / (1.0 + static_cast<double>(ref.size()));
    return r;
}

}  // namespace gsc
