#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hubsim {

enum class FunKind { Constant, Affine, Power, Table, Product, Sum };
enum class TableTail { Error, HoldLast };
enum class Growth { Bounded, Unbounded, Unknown };

// An attachment rule f : N0 -> (0, inf) together with the structural facts the
// theory needs (monotonicity, a linear bound f(i) <= Cf*(i+1), inf f).
// Kinds:
//   Constant(c)   f(k) = c
//   Affine(a)     f(k) = k + a           (a = 1 is classic linear preferential attachment)
//   Power(a)      f(k) = (k+1)^a
//   Table(v,tail) f(k) = v[k], tail rule for k >= v.size()
//   Product/Sum   composites of the above
//
// Affine(0) is degenerate at k = 0 (f(0) = 0): it is accepted so the Malthusian
// machinery (which never probes f(0)) can handle f(k) = k, but any operation
// that needs global positivity rejects it.
class AttachmentFunction {
  public:
    static AttachmentFunction constant(double c);
    static AttachmentFunction affine(double alpha);
    static AttachmentFunction power(double alpha);
    static AttachmentFunction table(std::vector<double> values, TableTail tail);
    static AttachmentFunction product(std::vector<AttachmentFunction> parts);
    static AttachmentFunction sum(std::vector<AttachmentFunction> parts);

    double operator()(std::int64_t k) const;
    // step extension f(x) = f(floor(x)) for real x >= 0
    double at_real(double x) const;

    FunKind kind() const { return kind_; }
    double param() const { return a_; }
    bool is_constant_one() const { return kind_ == FunKind::Constant && a_ == 1.0; }

    bool monotone() const { return monotone_; }
    std::optional<double> linear_bound_cf() const { return cf_; }
    Growth growth() const { return growth_; }

    AttachmentFunction& declare_monotone(bool m) { monotone_ = m; return *this; }
    AttachmentFunction& declare_linear_bound(double cf) { cf_ = cf; return *this; }

    // inf_{0 <= i} f(i), evaluated on a prefix plus kind-specific tail knowledge;
    // exact for monotone kinds, a prefix estimate for general composites
    double f_star(std::int64_t probe_horizon = 1 << 14) const;

    // certified sup of f where derivable from the kind (bounded kinds only)
    std::optional<double> upper_bound() const;

    // checks positivity plus any declared facts on [0, h); throws ModelError
    void validate_prefix(std::int64_t h) const;

    std::string describe() const;

  private:
    AttachmentFunction() = default;
    FunKind kind_ = FunKind::Constant;
    double a_ = 1.0;
    std::vector<double> table_;
    TableTail tail_ = TableTail::Error;
    std::vector<AttachmentFunction> parts_;
    bool monotone_ = false;
    std::optional<double> cf_;
    Growth growth_ = Growth::Unknown;
};

// Degree-indexed value cache for hot simulation loops (pow() per edge adds up).
class FValueCache {
  public:
    explicit FValueCache(const AttachmentFunction& f) : f_(&f) {}
    double operator()(std::int64_t k) {
        if (k >= static_cast<std::int64_t>(vals_.size())) extend(k);
        return vals_[static_cast<std::size_t>(k)];
    }

  private:
    void extend(std::int64_t k);
    const AttachmentFunction* f_;
    std::vector<double> vals_;
};

}  // namespace hubsim
