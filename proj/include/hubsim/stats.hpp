#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "hubsim/rng.hpp"

namespace hubsim {

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased
double median(std::vector<double> v);
double correlation(const std::vector<double>& a, const std::vector<double>& b);

// 95% CI for the median from binomial order statistics
std::pair<double, double> median_ci95(std::vector<double> v);

// Total variation between two empirical distributions over a shared finite
// support.  The plug-in estimator carries an O(sum sqrt(p)/sqrt(n)) positive
// bias under equality, which at our pinned sample sizes can exceed the
// tolerances being tested; null_bias estimates that offset by parametric
// bootstrap from the pooled law, and debiased = max(0, plug_in - null_bias).
struct TvEstimate {
    double plug_in = 0;
    double null_bias = 0;
    double debiased = 0;
};

TvEstimate tv_debiased(const std::map<std::int64_t, std::int64_t>& counts_a,
                       const std::map<std::int64_t, std::int64_t>& counts_b,
                       std::int64_t n_a, std::int64_t n_b, int bootstrap_rounds,
                       RngStream& rng);

}  // namespace hubsim
