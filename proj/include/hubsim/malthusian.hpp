#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hubsim/attachment.hpp"
#include "hubsim/phi.hpp"

namespace hubsim {

// Laplace transform of the offspring intensity of a newly arrived vertex.
// A vertex enters the tree with degree 1, so its degree clock runs at rates
// f(1), f(2), ...:
//
//   rho_hat(lambda) = sum_{k>=1} prod_{i=1}^{k} f(i) / (lambda + f(i)).
//
// This is the transform whose unit root is the Malthusian rate of the
// embedded branching process; it reproduces lambda* = 2 + a for f(k) = k + a
// and lambda* = 1 for f == 1.  (The same series over f(0..k-1) would give
// 1 + a, which contradicts the known maximal-degree exponent 1/(2+a).)
struct RhoHatResult {
    double value = 0;       // accumulated partial sum (a lower bound for the series)
    double tail_bound = 0;  // bound on the omitted tail at truncation
    bool diverged = false;  // partial sums passed the divergence cap
    bool converged = false; // tail_bound < tol was reached
    std::int64_t terms = 0;
};

RhoHatResult rho_hat(const AttachmentFunction& f, double lambda, double tol,
                     std::int64_t max_terms = 40'000'000);

// one-sided comparison against a threshold, with early exit; used by the solver
enum class RhoCompare { Above, Below, Unknown };
RhoCompare rho_hat_compare(const AttachmentFunction& f, double lambda, double threshold,
                           std::int64_t max_terms = 40'000'000);

struct MalthusianResult {
    bool found = false;
    double lambda_star = 0;
    double lo = 0, hi = 0;          // final bracket, rho(lo) > 1 > rho(hi)
    double rho_at_lo = 0, rho_at_hi = 0;
    std::int64_t truncation_k = 0;  // series terms used for the bracket evaluations
    double tail_bound = 0;
    std::string note;
};

MalthusianResult solve_lambda_star(const AttachmentFunction& f, double tol);

enum class TriState { True, False, Unknown };

struct C2Sample {
    double delta, t, ratio;
};

struct AssumptionReport {
    TriState c1 = TriState::Unknown;                  // Phi2(inf) = inf
    std::vector<C2Sample> c2_surface;                 // K((1+delta)t)/K(t) over the grid
    bool c2_verdict = false;                          // smallest delta, largest decade, 5% slack
    double c3_estimate = 0;                           // max K(3t)/K(t) over the grid
    double c3_tprime = 0;                             // smallest grid t backing the estimate
    TriState prop_under_lamb = TriState::Unknown;
    double underline_lambda = 0;                      // estimate of inf{lambda : rho finite}
    double d_bar = 0;                                 // max f(i)/i over the top table decade
    std::optional<double> rho_at_d_bar;
};

struct AssumptionGrid {
    std::vector<double> deltas = {0.5, 0.2, 0.1, 0.05, 0.01};
    int decades = 5;  // t spaced by powers of 10 below the largest covered t
};

AssumptionReport check_assumptions(const AttachmentFunction& f, const PhiTable& table,
                                   const AssumptionGrid& grid = {});

struct AsymptoticPrediction {
    double pred_log_index = 0;   // (lambda*^2/2) K(log n / lambda*)
    double pred_phi1_dmax = 0;   // log n / lambda* + (lambda*/2) K(log n / lambda*)
    bool applies = true;
    std::string flag;
};

// Predicted hub-index and max-degree centerings in the non-persistent regime.
// Throws ModelError when Phi2(inf) is finite (persistent regime).
AsymptoticPrediction predict_asymptotics(const AttachmentFunction& f, const PhiTable& table,
                                         const MalthusianResult& lambda, double n);

struct UniformTreeConstants {
    double u_hat;      // argmax of Psi on [0,1)
    double max_slope;  // Psi(u_hat)
};

// Maximizes Psi(u) = (1-u)(1 + w^{-1}(-u/(1-u))) with w(t) = t - (1+t)log(1+t);
// the maximizer is 1 - 1/(2 ln 2) with value 1/ln 2.
UniformTreeConstants uniform_tree_constants();

double uniform_tree_w(double theta);
double uniform_tree_w_inv(double y);
double uniform_tree_psi(double u);

}  // namespace hubsim
