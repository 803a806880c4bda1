#pragma once

#include <cstdint>
#include <vector>

#include "hubsim/attachment.hpp"

namespace hubsim {

enum class Phi2Class { Finite, Infinite, Unknown };

// Error-free accumulation pair: hi + lo represents the running sum to ~2^-106.
// Stored per node so adjacent differences recover each term exactly.
struct DD {
    double hi = 0.0, lo = 0.0;
    void add(double x) {
        double s = hi + x;
        double bb = s - hi;
        double err = (hi - (s - bb)) + (x - bb);
        double l = lo + err;
        hi = s + l;
        lo = l - (hi - s);
    }
    double value() const { return hi + lo; }
};

// Prefix sums Phi_k(l) = sum_{i<l} f(i)^{-k} for k = 1,2,3, with linear
// interpolation between integer nodes and monotone inverses.  The interpolated
// Phi_k equals the integral of f^{-k} for the step-extended f, so on the cell
// [l, l+1): Phi_k(l+x) = Phi_k(l) + x / f(l)^k.
class PhiTable {
  public:
    PhiTable(AttachmentFunction fun, std::int64_t horizon);

    const AttachmentFunction& fun() const { return fun_; }
    std::int64_t horizon() const { return horizon_; }

    double phi1(std::int64_t l) const { return h1_[idx(l)] + l1_[idx(l)]; }
    double phi2(std::int64_t l) const { return h2_[idx(l)] + l2_[idx(l)]; }
    double phi3(std::int64_t l) const { return h3_[idx(l)] + l3_[idx(l)]; }

    // exact node-to-node increment, for checks against eval_f
    double increment(int k, std::int64_t l) const;

    double phi1_at(double x) const;
    double phi2_at(double x) const;
    double phi3_at(double x) const;

    // inverse of the interpolated Phi_1; throws TableRangeError beyond coverage
    double phi1_inv(double t) const;
    double phi2_inv(double t) const;

    // K(t) = Phi_2(Phi_1^{-1}(t)); exact inverse of the interpolated K
    double K(double t) const;
    double K_inv(double y) const;

    double phi1_max() const { return phi1(horizon_); }
    double phi2_max() const { return phi2(horizon_); }

    Phi2Class phi2_class() const { return phi2_class_; }
    // only meaningful when phi2_class() == Finite
    double phi2_infinity() const { return phi2_inf_; }
    double phi2_tail_bound() const { return phi2_tail_bound_; }

  private:
    std::size_t idx(std::int64_t l) const;
    void classify_phi2();

    AttachmentFunction fun_;
    std::int64_t horizon_;
    std::vector<double> h1_, l1_, h2_, l2_, h3_, l3_;
    Phi2Class phi2_class_ = Phi2Class::Unknown;
    double phi2_inf_ = 0;
    double phi2_tail_bound_ = 0;
};

inline PhiTable build_phi_table(const AttachmentFunction& fun, std::int64_t horizon) {
    return PhiTable(fun, horizon);
}

}  // namespace hubsim
