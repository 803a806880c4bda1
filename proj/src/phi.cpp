#include "hubsim/phi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hubsim/errors.hpp"

namespace hubsim {

namespace {

// smallest horizon whose Phi_k coverage reaches `target`, found by direct
// summation; capped so error paths stay cheap
std::int64_t sufficient_horizon(const AttachmentFunction& f, int k, double target,
                                std::int64_t start, double reached) {
    const std::int64_t cap = start + 100'000'000;
    DD acc;
    acc.add(reached);
    std::int64_t l = start;
    while (acc.value() < target && l < cap) {
        double v = f(l);
        double r = 1.0 / v;
        for (int i = 1; i < k; ++i) r /= v;
        acc.add(r);
        ++l;
    }
    return l + 1;
}

// strictly increasing node array: find l with a[l] <= t < a[l+1]
std::int64_t locate(const std::vector<double>& hi, const std::vector<double>& lo, double t) {
    std::int64_t n = static_cast<std::int64_t>(hi.size()) - 1;
    std::int64_t a = 0, b = n;
    while (b - a > 1) {
        std::int64_t m = (a + b) / 2;
        if (hi[std::size_t(m)] + lo[std::size_t(m)] <= t)
            a = m;
        else
            b = m;
    }
    return a;
}

}  // namespace

PhiTable::PhiTable(AttachmentFunction fun, std::int64_t horizon)
    : fun_(std::move(fun)), horizon_(horizon) {
    if (horizon < 1) throw ConfigError("phi table horizon must be >= 1");
    const std::size_t n = static_cast<std::size_t>(horizon) + 1;
    h1_.resize(n); l1_.resize(n);
    h2_.resize(n); l2_.resize(n);
    h3_.resize(n); l3_.resize(n);
    DD s1, s2, s3;
    h1_[0] = l1_[0] = h2_[0] = l2_[0] = h3_[0] = l3_[0] = 0;
    for (std::int64_t l = 0; l < horizon; ++l) {
        double f = fun_(l);
        if (!(f > 0) || !std::isfinite(f))
            throw ModelError("non-positive attachment value f(" + std::to_string(l) +
                             ") while building phi table");
        double r = 1.0 / f;
        s1.add(r);
        s2.add(r * r);
        s3.add(r * r * r);
        std::size_t j = std::size_t(l) + 1;
        h1_[j] = s1.hi; l1_[j] = s1.lo;
        h2_[j] = s2.hi; l2_[j] = s2.lo;
        h3_[j] = s3.hi; l3_[j] = s3.lo;
    }
    classify_phi2();
}

std::size_t PhiTable::idx(std::int64_t l) const {
    if (l < 0 || l > horizon_)
        throw TableRangeError("phi node " + std::to_string(l) + " outside table (horizon " +
                              std::to_string(horizon_) + ")", l);
    return static_cast<std::size_t>(l);
}

double PhiTable::increment(int k, std::int64_t l) const {
    idx(l + 1);
    const std::vector<double>*hi, *lo;
    switch (k) {
        case 1: hi = &h1_; lo = &l1_; break;
        case 2: hi = &h2_; lo = &l2_; break;
        case 3: hi = &h3_; lo = &l3_; break;
        default: throw ConfigError("phi increment: k must be 1, 2 or 3");
    }
    std::size_t j = std::size_t(l);
    // hi parts differ by roughly the term; the lo parts carry the rounding
    return ((*hi)[j + 1] - (*hi)[j]) + ((*lo)[j + 1] - (*lo)[j]);
}

static double interp_at(const std::vector<double>& hi, const std::vector<double>& lo,
                        const AttachmentFunction& f, int k, double x, std::int64_t horizon) {
    if (!(x >= 0)) throw ModelError("phi evaluated at negative point");
    if (x > double(horizon))
        throw TableRangeError("phi evaluated at " + std::to_string(x) + " beyond horizon " +
                              std::to_string(horizon),
                              static_cast<std::int64_t>(std::ceil(x)) + 1);
    std::int64_t l = std::min(horizon - 1, static_cast<std::int64_t>(std::floor(x)));
    double frac = x - double(l);
    double fl = f(l);
    double slope = 1.0;
    for (int i = 0; i < k; ++i) slope /= fl;
    return hi[std::size_t(l)] + lo[std::size_t(l)] + frac * slope;
}

double PhiTable::phi1_at(double x) const { return interp_at(h1_, l1_, fun_, 1, x, horizon_); }
double PhiTable::phi2_at(double x) const { return interp_at(h2_, l2_, fun_, 2, x, horizon_); }
double PhiTable::phi3_at(double x) const { return interp_at(h3_, l3_, fun_, 3, x, horizon_); }

double PhiTable::phi1_inv(double t) const {
    if (!(t >= 0)) throw ModelError("phi1_inv at negative value");
    double tmax = phi1(horizon_);
    if (t > tmax) {
        auto needed = sufficient_horizon(fun_, 1, t, horizon_, tmax);
        throw TableRangeError("phi1_inv(" + std::to_string(t) + ") beyond table coverage " +
                              std::to_string(tmax) + "; need horizon >= " + std::to_string(needed),
                              needed);
    }
    std::int64_t l = locate(h1_, l1_, t);
    return double(l) + (t - phi1(l)) * fun_(l);
}

double PhiTable::phi2_inv(double t) const {
    if (!(t >= 0)) throw ModelError("phi2_inv at negative value");
    double tmax = phi2(horizon_);
    if (t > tmax) {
        auto needed = sufficient_horizon(fun_, 2, t, horizon_, tmax);
        throw TableRangeError("phi2_inv(" + std::to_string(t) + ") beyond table coverage " +
                              std::to_string(tmax) + "; need horizon >= " + std::to_string(needed),
                              needed);
    }
    std::int64_t l = locate(h2_, l2_, t);
    double fl = fun_(l);
    return double(l) + (t - phi2(l)) * fl * fl;
}

double PhiTable::K(double t) const { return phi2_at(phi1_inv(t)); }
double PhiTable::K_inv(double y) const { return phi1_at(phi2_inv(y)); }

void PhiTable::classify_phi2() {
    const double H = double(horizon_);
    switch (fun_.kind()) {
        case FunKind::Constant:
            phi2_class_ = Phi2Class::Infinite;
            return;
        case FunKind::Affine: {
            // sum (k+a)^-2 converges; integral bracket for the tail
            double a = fun_.param();
            double lo = 1.0 / (H + a);
            double hi = lo + std::pow(H + a, -2.0);
            phi2_inf_ = phi2(horizon_) + 0.5 * (lo + hi);
            phi2_tail_bound_ = 0.5 * (hi - lo) + 1e-15 * phi2_inf_;
            phi2_class_ = Phi2Class::Finite;
            return;
        }
        case FunKind::Power: {
            double a = fun_.param();
            if (2 * a <= 1.0) {
                phi2_class_ = Phi2Class::Infinite;
                return;
            }
            double p = 2 * a;
            double lo = std::pow(H + 1.0, 1.0 - p) / (p - 1.0);
            double hi = lo + std::pow(H + 1.0, -p);
            phi2_inf_ = phi2(horizon_) + 0.5 * (lo + hi);
            phi2_tail_bound_ = 0.5 * (hi - lo) + 1e-15 * phi2_inf_;
            phi2_class_ = Phi2Class::Finite;
            return;
        }
        case FunKind::Table:
            phi2_class_ = (fun_.growth() == Growth::Bounded) ? Phi2Class::Infinite
                                                             : Phi2Class::Unknown;
            return;
        case FunKind::Product:
        case FunKind::Sum:
            break;
    }
    // composite: estimate the tail exponent of f over the last decade and only
    // classify when the fit is unambiguous
    std::int64_t lo_i = std::max<std::int64_t>(2, horizon_ / 10);
    int m = 64;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs, ys;
    for (int j = 0; j < m; ++j) {
        double frac = double(j) / double(m - 1);
        auto i = static_cast<std::int64_t>(double(lo_i) * std::pow(double(horizon_ - 1) / double(lo_i), frac));
        double x = std::log(double(i) + 1.0);
        double y = std::log(fun_(i));
        xs.push_back(x); ys.push_back(y);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double denom = double(m) * sxx - sx * sx;
    if (denom <= 0) { phi2_class_ = Phi2Class::Unknown; return; }
    double slope = (double(m) * sxy - sx * sy) / denom;
    double icept = (sy - slope * sx) / double(m);
    double dev = 0;
    for (int j = 0; j < m; ++j) dev = std::max(dev, std::abs(ys[std::size_t(j)] - (icept + slope * xs[std::size_t(j)])));
    double span = xs.back() - xs.front();
    double slope_lo = slope - 2 * dev / span, slope_hi = slope + 2 * dev / span;
    if (2 * slope_lo > 1.05) {
        // clearly summable tail: extrapolate with the fitted power law
        double p = 2 * slope_lo;
        double c = std::exp(2 * icept);  // f(i)^2 ~ c * i^{2 slope}
        double tail = std::pow(H, 1.0 - p) / (c * (p - 1.0));
        phi2_inf_ = phi2(horizon_) + tail;
        phi2_tail_bound_ = 2 * tail;
        phi2_class_ = Phi2Class::Finite;
    } else if (2 * slope_hi < 0.95) {
        phi2_class_ = Phi2Class::Infinite;
    } else {
        phi2_class_ = Phi2Class::Unknown;
    }
}

}  // namespace hubsim
