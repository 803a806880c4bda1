#include "hubsim/malthusian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hubsim/errors.hpp"

namespace hubsim {

namespace {

constexpr double kDivergenceCap = 1e12;

// Tracks the maximum single-step factor over the current and previous decades
// of the term index, so truncation can use a factor bound from recent terms
// rather than early ones.
struct DecadeMax {
    double cur = 0, prev = 0;
    std::int64_t next_boundary = 10;
    void update(std::int64_t k, double factor) {
        if (k >= next_boundary) {
            prev = cur;
            cur = 0;
            next_boundary *= 10;
        }
        cur = std::max(cur, factor);
    }
    double value() const { return std::max(cur, prev); }
};

struct TailBounds {
    // valid upper bound on the omitted tail (inf when no certificate applies)
    double certified = std::numeric_limits<double>::infinity();
    // the decade-max geometric estimate; only sound when future factors cannot
    // exceed the observed ones (bounded f), so it is reported, never trusted,
    // for growing f
    double heuristic = std::numeric_limits<double>::infinity();
    double best() const { return std::min(certified, heuristic); }
};

TailBounds tail_bounds(double term, std::int64_t k, double r_decade,
                       const AttachmentFunction& f, double lambda) {
    TailBounds b;
    if (r_decade < 1.0) b.heuristic = term * r_decade / (1.0 - r_decade);
    if (auto sup = f.upper_bound()) {
        double r = *sup / (lambda + *sup);
        b.certified = term * r / (1.0 - r);
    }
    if (auto cf = f.linear_bound_cf()) {
        double lp = lambda / *cf;
        // future rates f(k+m) <= cf*(k+m+1) bound each factor by
        // (k+m+1)/(k+m+1+lp); the series of such products sums to (k+2)/(lp-1)
        if (lp > 1.0) b.certified = std::min(b.certified, term * (double(k) + 2.0) / (lp - 1.0));
    }
    return b;
}

// The constant and affine families admit exact transforms (telescoping gamma
// ratios), which the bisection needs because their series tails thin out only
// polynomially near lambda*:
//   f = c:      rho(lambda) = c / lambda
//   f = k + a:  rho(lambda) = (1 + a) / (lambda - 1)   for lambda > 1
bool closed_form_rho(const AttachmentFunction& f, double lambda, RhoHatResult& out) {
    if (f.kind() == FunKind::Constant) {
        out.value = f.param() / lambda;
        out.converged = true;
        return true;
    }
    if (f.kind() == FunKind::Affine) {
        if (lambda <= 1.0) {
            out.diverged = true;
            out.value = std::numeric_limits<double>::infinity();
        } else {
            out.value = (1.0 + f.param()) / (lambda - 1.0);
            out.converged = true;
        }
        return true;
    }
    return false;
}

}  // namespace

RhoHatResult rho_hat(const AttachmentFunction& f, double lambda, double tol,
                     std::int64_t max_terms) {
    if (!(lambda > 0)) throw ModelError("rho_hat requires lambda > 0");
    RhoHatResult out;
    if (closed_form_rho(f, lambda, out)) return out;
    DD sum;
    double term = 1.0;
    DecadeMax dm;
    // terms that stop decaying signal sum(1/f) < inf, where the series is +inf
    double term_at_boundary = 1.0;
    std::int64_t next_boundary = 10;
    for (std::int64_t k = 1; k <= max_terms; ++k) {
        double fk = f(k);
        if (!(fk > 0)) throw ModelError("rho_hat: non-positive f at k=" + std::to_string(k));
        double factor = fk / (lambda + fk);
        term *= factor;
        sum.add(term);
        dm.update(k, factor);
        out.terms = k;
        if (k == next_boundary) {
            if (k >= 10'000 && term > 0.9 * term_at_boundary && term > 1e-300) {
                out.diverged = true;
                out.value = std::numeric_limits<double>::infinity();
                return out;
            }
            term_at_boundary = term;
            next_boundary *= 10;
        }
        if (sum.value() > kDivergenceCap) {
            out.diverged = true;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        double tb = tail_bounds(term, k, dm.value(), f, lambda).best();
        if (tb < tol) {
            out.value = sum.value();
            out.tail_bound = tb;
            out.converged = true;
            return out;
        }
    }
    out.value = sum.value();
    out.tail_bound = tail_bounds(term, max_terms, dm.value(), f, lambda).best();
    return out;
}

RhoCompare rho_hat_compare(const AttachmentFunction& f, double lambda, double threshold,
                           std::int64_t max_terms) {
    if (!(lambda > 0)) throw ModelError("rho_hat_compare requires lambda > 0");
    {
        RhoHatResult cf;
        if (closed_form_rho(f, lambda, cf))
            return cf.diverged || cf.value > threshold ? RhoCompare::Above : RhoCompare::Below;
    }
    DD sum;
    double term = 1.0;
    DecadeMax dm;
    for (std::int64_t k = 1; k <= max_terms; ++k) {
        double fk = f(k);
        if (!(fk > 0)) throw ModelError("rho_hat: non-positive f at k=" + std::to_string(k));
        double factor = fk / (lambda + fk);
        term *= factor;
        sum.add(term);
        dm.update(k, factor);
        if (sum.value() > threshold) return RhoCompare::Above;
        // only a certified tail may rule the threshold out
        double tb = tail_bounds(term, k, dm.value(), f, lambda).certified;
        if (sum.value() + tb < threshold) return RhoCompare::Below;
    }
    return RhoCompare::Unknown;
}

MalthusianResult solve_lambda_star(const AttachmentFunction& f, double tol) {
    if (!(tol > 0)) throw ConfigError("solve_lambda_star requires tol > 0");
    MalthusianResult res;

    double lo = 1e-6;
    switch (rho_hat_compare(f, lo, 1.0)) {
        case RhoCompare::Above: break;
        case RhoCompare::Below:
            res.note = "no Malthusian rate under truncation: rho_hat(1e-6) < 1";
            return res;
        case RhoCompare::Unknown:
            res.note = "no Malthusian rate under truncation: rho_hat(1e-6) unresolved";
            return res;
    }

    double hi = 1.0;
    int doublings = 0;
    while (rho_hat_compare(f, hi, 1.0) != RhoCompare::Below) {
        hi *= 2.0;
        if (++doublings > 60) {
            res.note = "rho_hat stayed above 1 after 60 doublings of lambda";
            return res;
        }
    }

    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        switch (rho_hat_compare(f, mid, 1.0)) {
            case RhoCompare::Above: lo = mid; break;
            case RhoCompare::Below: hi = mid; break;
            case RhoCompare::Unknown:
                res.note = "bisection stopped early: rho_hat comparison unresolved at bracket width " +
                           std::to_string(hi - lo);
                goto done;
        }
    }
done:
    res.found = true;
    res.lambda_star = 0.5 * (lo + hi);
    res.lo = lo;
    res.hi = hi;
    auto rl = rho_hat(f, lo, tol * 1e-2);
    auto rh = rho_hat(f, hi, tol * 1e-2);
    res.rho_at_lo = rl.value;
    res.rho_at_hi = rh.value;
    res.truncation_k = std::max(rl.terms, rh.terms);
    res.tail_bound = std::max(rl.tail_bound, rh.tail_bound);
    return res;
}

AssumptionReport check_assumptions(const AttachmentFunction& f, const PhiTable& table,
                                   const AssumptionGrid& grid) {
    AssumptionReport rep;
    switch (table.phi2_class()) {
        case Phi2Class::Infinite: rep.c1 = TriState::True; break;
        case Phi2Class::Finite: rep.c1 = TriState::False; break;
        case Phi2Class::Unknown: rep.c1 = TriState::Unknown; break;
    }

    // C2/C3 surfaces over t decades below the largest t the table covers; the
    // C3 constant is read off the top two decades (it concerns t >= t')
    double t_top = table.phi1_max() / 3.05;
    for (int d = grid.decades - 1; d >= 0; --d) {
        double t = t_top / std::pow(10.0, d);
        if (!(t > 0)) continue;
        for (double delta : grid.deltas) {
            double ratio = table.K((1 + delta) * t) / table.K(t);
            rep.c2_surface.push_back({delta, t, ratio});
        }
        if (d <= 1) {
            double r3 = table.K(3 * t) / table.K(t);
            if (r3 > rep.c3_estimate) rep.c3_estimate = r3;
            if (rep.c3_tprime == 0) rep.c3_tprime = t;
        }
    }
    double smallest_delta = *std::min_element(grid.deltas.begin(), grid.deltas.end());
    double worst = 1.0;
    for (const auto& s : rep.c2_surface)
        if (s.delta == smallest_delta && s.t == t_top) worst = std::max(worst, s.ratio);
    rep.c2_verdict = worst <= 1.05;

    // D-bar = limsup f(i)/i, estimated over the top decade of the table
    std::int64_t h = table.horizon();
    std::int64_t lo_i = std::max<std::int64_t>(1, h / 10);
    double dbar = 0;
    for (int j = 0; j < 256; ++j) {
        auto i = lo_i + (h - 1 - lo_i) * j / 255;
        if (i < 1) continue;
        dbar = std::max(dbar, f(i) / double(i));
    }
    rep.d_bar = dbar;
    if (dbar > 0) {
        auto r = rho_hat(f, dbar, 1e-10, 2'000'000);
        if (r.converged || r.diverged) rep.rho_at_d_bar = r.value;
    }

    // Assumption (prop-under-lamb): a finite lambda with rho in (1, inf) certifies it
    auto solved = solve_lambda_star(f, 1e-6);
    if (solved.found) {
        rep.prop_under_lamb = TriState::True;
    } else if (solved.note.find("< 1") != std::string::npos) {
        rep.prop_under_lamb = TriState::False;
    } else {
        rep.prop_under_lamb = TriState::Unknown;
    }

    // crude underline-lambda estimate: smallest lambda where the series looks summable
    {
        double lo2 = 1e-9, hi2 = solved.found ? std::max(solved.lambda_star, 1e-6) : 64.0;
        for (int it = 0; it < 60; ++it) {
            double mid = std::sqrt(lo2 * hi2);
            auto r = rho_hat(f, mid, 1e-8, 500'000);
            if (r.diverged || (!r.converged && r.value > 1e6))
                lo2 = mid;
            else
                hi2 = mid;
        }
        rep.underline_lambda = hi2;
    }
    return rep;
}

AsymptoticPrediction predict_asymptotics(const AttachmentFunction& f, const PhiTable& table,
                                         const MalthusianResult& lambda, double n) {
    if (table.phi2_class() == Phi2Class::Finite)
        throw ModelError(
            "predict_asymptotics: Phi2(inf) < inf (persistent regime); the maxasper expansion "
            "applies instead");
    if (!lambda.found) throw ModelError("predict_asymptotics: no Malthusian rate available");
    if (!(n > 1)) throw ConfigError("predict_asymptotics requires n > 1");
    double ls = lambda.lambda_star;
    double t = std::log(n) / ls;
    double k = table.K(t);
    AsymptoticPrediction out;
    out.pred_log_index = 0.5 * ls * ls * k;
    out.pred_phi1_dmax = t + 0.5 * ls * k;
    if (f.growth() != Growth::Unbounded) {
        out.applies = false;
        out.flag = "formula does not apply: f does not diverge (index asymptotics need f(k) -> inf)";
    } else if (table.phi2_class() == Phi2Class::Unknown) {
        out.applies = false;
        out.flag = "C1 could not be verified from the table";
    }
    return out;
}

double uniform_tree_w(double theta) { return theta - (1 + theta) * std::log1p(theta); }

double uniform_tree_w_inv(double y) {
    if (y > 0) throw ModelError("w^{-1} defined on (-inf, 0]");
    if (y == 0) return 0;
    // w is strictly decreasing from 0; bracket then bisect
    double hi = 1.0;
    while (uniform_tree_w(hi) > y) hi *= 2;
    double lo = 0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (uniform_tree_w(mid) > y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double uniform_tree_psi(double u) {
    if (!(u >= 0) || !(u < 1)) throw ModelError("Psi defined on [0,1)");
    return (1 - u) * (1 + uniform_tree_w_inv(-u / (1 - u)));
}

UniformTreeConstants uniform_tree_constants() {
    // golden-section maximization on [0, 0.999]
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 0.0, b = 0.999;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = uniform_tree_psi(c), fd = uniform_tree_psi(d);
    for (int i = 0; i < 200 && b - a > 1e-13; ++i) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = uniform_tree_psi(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = uniform_tree_psi(d);
        }
    }
    double u = 0.5 * (a + b);
    return {u, uniform_tree_psi(u)};
}

}  // namespace hubsim
