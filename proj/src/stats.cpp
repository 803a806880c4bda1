#include "hubsim/stats.hpp"

#include <algorithm>
#include <cmath>

#include "hubsim/errors.hpp"
#include "hubsim/phi.hpp"

namespace hubsim {

double mean(const std::vector<double>& v) {
    if (v.empty()) throw ConfigError("mean of empty sample");
    DD s;
    for (double x : v) s.add(x);
    return s.value() / double(v.size());
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw ConfigError("variance needs at least two samples");
    double m = mean(v);
    DD s;
    for (double x : v) s.add((x - m) * (x - m));
    return s.value() / double(v.size() - 1);
}

double median(std::vector<double> v) {
    if (v.empty()) throw ConfigError("median of empty sample");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::pair<double, double> median_ci95(std::vector<double> v) {
    if (v.size() < 8) throw ConfigError("median CI needs at least 8 samples");
    std::sort(v.begin(), v.end());
    double n = double(v.size());
    double half = 1.959963984540054 * 0.5 * std::sqrt(n);
    auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(0.5 * n - half) - 1));
    auto hi = static_cast<std::size_t>(std::min(n - 1, std::ceil(0.5 * n + half)));
    return {v[lo], v[hi]};
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw ConfigError("correlation needs matched samples");
    double ma = mean(a), mb = mean(b);
    DD sxy, sxx, syy;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sxy.add((a[i] - ma) * (b[i] - mb));
        sxx.add((a[i] - ma) * (a[i] - ma));
        syy.add((b[i] - mb) * (b[i] - mb));
    }
    double d = std::sqrt(sxx.value() * syy.value());
    return d > 0 ? sxy.value() / d : 0.0;
}

namespace {

double tv_from_counts(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                      double n_a, double n_b) {
    double tv = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        tv += std::abs(double(a[i]) / n_a - double(b[i]) / n_b);
    return 0.5 * tv;
}

// multinomial draw by inverse CDF, deterministic given the stream
std::vector<std::int64_t> multinomial(const std::vector<double>& cdf, std::int64_t n,
                                      RngStream& rng) {
    std::vector<std::int64_t> counts(cdf.size(), 0);
    for (std::int64_t i = 0; i < n; ++i) {
        double u = rng.u01() * cdf.back();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t idx = std::min(cdf.size() - 1, std::size_t(it - cdf.begin()));
        ++counts[idx];
    }
    return counts;
}

}  // namespace

TvEstimate tv_debiased(const std::map<std::int64_t, std::int64_t>& counts_a,
                       const std::map<std::int64_t, std::int64_t>& counts_b,
                       std::int64_t n_a, std::int64_t n_b, int bootstrap_rounds,
                       RngStream& rng) {
    // align supports
    std::vector<std::int64_t> keys;
    for (const auto& [k, _] : counts_a) keys.push_back(k);
    for (const auto& [k, _] : counts_b) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<std::int64_t> a(keys.size(), 0), b(keys.size(), 0);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (auto it = counts_a.find(keys[i]); it != counts_a.end()) a[i] = it->second;
        if (auto it = counts_b.find(keys[i]); it != counts_b.end()) b[i] = it->second;
    }

    TvEstimate est;
    est.plug_in = tv_from_counts(a, b, double(n_a), double(n_b));

    if (bootstrap_rounds > 0) {
        std::vector<double> pooled_cdf(keys.size());
        double run = 0;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            run += double(a[i] + b[i]);
            pooled_cdf[i] = run;
        }
        double acc = 0;
        for (int r = 0; r < bootstrap_rounds; ++r) {
            auto ra = multinomial(pooled_cdf, n_a, rng);
            auto rb = multinomial(pooled_cdf, n_b, rng);
            acc += tv_from_counts(ra, rb, double(n_a), double(n_b));
        }
        est.null_bias = acc / double(bootstrap_rounds);
    }
    est.debiased = std::max(0.0, est.plug_in - est.null_bias);
    return est;
}

}  // namespace hubsim
