#include "hubsim/attachment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hubsim/errors.hpp"

namespace hubsim {

AttachmentFunction AttachmentFunction::constant(double c) {
    if (!(c > 0)) throw ConfigError("constant attachment requires c > 0");
    AttachmentFunction f;
    f.kind_ = FunKind::Constant;
    f.a_ = c;
    f.monotone_ = true;
    f.cf_ = c;
    f.growth_ = Growth::Bounded;
    return f;
}

AttachmentFunction AttachmentFunction::affine(double alpha) {
    if (!(alpha >= 0)) throw ConfigError("affine attachment requires alpha >= 0");
    AttachmentFunction f;
    f.kind_ = FunKind::Affine;
    f.a_ = alpha;
    f.monotone_ = true;
    f.cf_ = std::max(1.0, alpha);
    f.growth_ = Growth::Unbounded;
    return f;
}

AttachmentFunction AttachmentFunction::power(double alpha) {
    if (!(alpha >= 0) || !(alpha <= 2.0)) throw ConfigError("power attachment requires alpha in [0, 2]");
    AttachmentFunction f;
    f.kind_ = FunKind::Power;
    f.a_ = alpha;
    f.monotone_ = true;
    if (alpha <= 1.0) f.cf_ = 1.0;
    f.growth_ = alpha == 0 ? Growth::Bounded : Growth::Unbounded;
    return f;
}

AttachmentFunction AttachmentFunction::table(std::vector<double> values, TableTail tail) {
    if (values.empty()) throw ConfigError("table attachment requires at least one value");
    for (double v : values)
        if (!(v > 0) || !std::isfinite(v)) throw ConfigError("table attachment values must be positive finite");
    AttachmentFunction f;
    f.kind_ = FunKind::Table;
    f.table_ = std::move(values);
    f.tail_ = tail;
    f.monotone_ = std::is_sorted(f.table_.begin(), f.table_.end());
    double cf = 0;
    for (std::size_t i = 0; i < f.table_.size(); ++i) cf = std::max(cf, f.table_[i] / double(i + 1));
    f.cf_ = cf;  // with HoldLast the tail ratio f(i)/(i+1) only decreases
    f.growth_ = tail == TableTail::HoldLast ? Growth::Bounded : Growth::Unknown;
    return f;
}

AttachmentFunction AttachmentFunction::product(std::vector<AttachmentFunction> parts) {
    if (parts.empty()) throw ConfigError("composite attachment requires parts");
    AttachmentFunction f;
    f.kind_ = FunKind::Product;
    f.parts_ = std::move(parts);
    f.monotone_ = std::all_of(f.parts_.begin(), f.parts_.end(),
                              [](const auto& p) { return p.monotone(); });
    bool any_unbounded = false, all_known = true;
    for (const auto& p : f.parts_) {
        if (p.growth() == Growth::Unbounded) any_unbounded = true;
        if (p.growth() == Growth::Unknown) all_known = false;
    }
    // product of monotone factors: unbounded iff some factor is
    f.growth_ = !f.monotone_ ? Growth::Unknown
                             : (any_unbounded ? Growth::Unbounded
                                              : (all_known ? Growth::Bounded : Growth::Unknown));
    return f;
}

AttachmentFunction AttachmentFunction::sum(std::vector<AttachmentFunction> parts) {
    if (parts.empty()) throw ConfigError("composite attachment requires parts");
    AttachmentFunction f;
    f.kind_ = FunKind::Sum;
    f.parts_ = std::move(parts);
    f.monotone_ = std::all_of(f.parts_.begin(), f.parts_.end(),
                              [](const auto& p) { return p.monotone(); });
    bool any_unbounded = false, all_known = true;
    double cf = 0;
    bool cf_ok = true;
    for (const auto& p : f.parts_) {
        if (p.growth() == Growth::Unbounded) any_unbounded = true;
        if (p.growth() == Growth::Unknown) all_known = false;
        if (p.linear_bound_cf())
            cf += *p.linear_bound_cf();
        else
            cf_ok = false;
    }
    if (cf_ok) f.cf_ = cf;
    f.growth_ = any_unbounded ? Growth::Unbounded : (all_known ? Growth::Bounded : Growth::Unknown);
    return f;
}

double AttachmentFunction::operator()(std::int64_t k) const {
    if (k < 0) throw ModelError("attachment function evaluated at negative degree");
    switch (kind_) {
        case FunKind::Constant: return a_;
        case FunKind::Affine: return double(k) + a_;
        case FunKind::Power: return std::pow(double(k) + 1.0, a_);
        case FunKind::Table: {
            if (k < static_cast<std::int64_t>(table_.size())) return table_[std::size_t(k)];
            if (tail_ == TableTail::HoldLast) return table_.back();
            throw ModelError("table attachment evaluated beyond table (" +
                             std::to_string(k) + " >= " + std::to_string(table_.size()) +
                             ") and no tail rule");
        }
        case FunKind::Product: {
            double v = 1.0;
            for (const auto& p : parts_) v *= p(k);
            return v;
        }
        case FunKind::Sum: {
            double v = 0.0;
            for (const auto& p : parts_) v += p(k);
            return v;
        }
    }
    return 0;  // unreachable
}

double AttachmentFunction::at_real(double x) const {
    if (!(x >= 0)) throw ModelError("attachment function evaluated at negative point");
    return (*this)(static_cast<std::int64_t>(std::floor(x)));
}

double AttachmentFunction::f_star(std::int64_t probe_horizon) const {
    if (monotone_) return (*this)(0);
    if (kind_ == FunKind::Table) {
        double m = *std::min_element(table_.begin(), table_.end());
        return m;  // HoldLast tail repeats an existing value; Error tail has no points beyond
    }
    double m = (*this)(0);
    for (std::int64_t i = 1; i < probe_horizon; ++i) m = std::min(m, (*this)(i));
    return m;
}

std::optional<double> AttachmentFunction::upper_bound() const {
    switch (kind_) {
        case FunKind::Constant: return a_;
        case FunKind::Power: return a_ == 0 ? std::optional<double>(1.0) : std::nullopt;
        case FunKind::Affine: return std::nullopt;
        case FunKind::Table:
            return *std::max_element(table_.begin(), table_.end());
        case FunKind::Product: {
            double v = 1;
            for (const auto& p : parts_) {
                auto b = p.upper_bound();
                if (!b) return std::nullopt;
                v *= *b;
            }
            return v;
        }
        case FunKind::Sum: {
            double v = 0;
            for (const auto& p : parts_) {
                auto b = p.upper_bound();
                if (!b) return std::nullopt;
                v += *b;
            }
            return v;
        }
    }
    return std::nullopt;
}

void AttachmentFunction::validate_prefix(std::int64_t h) const {
    double prev = -1;
    for (std::int64_t i = 0; i < h; ++i) {
        double v = (*this)(i);
        if (!(v > 0) || !std::isfinite(v))
            throw ModelError("attachment function not positive at k=" + std::to_string(i));
        if (monotone_ && v < prev)
            throw ModelError("declared-monotone attachment function decreases at k=" + std::to_string(i));
        if (cf_ && v > *cf_ * double(i + 1) * (1 + 1e-12))
            throw ModelError("declared linear bound violated at k=" + std::to_string(i));
        prev = v;
    }
}

std::string AttachmentFunction::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case FunKind::Constant: os << "constant(" << a_ << ")"; break;
        case FunKind::Affine: os << "affine(" << a_ << ")"; break;
        case FunKind::Power: os << "power(" << a_ << ")"; break;
        case FunKind::Table: os << "table[" << table_.size() << "]"; break;
        case FunKind::Product:
        case FunKind::Sum: {
            os << (kind_ == FunKind::Product ? "product(" : "sum(");
            for (std::size_t i = 0; i < parts_.size(); ++i)
                os << (i ? "," : "") << parts_[i].describe();
            os << ")";
            break;
        }
    }
    return os.str();
}

void FValueCache::extend(std::int64_t k) {
    std::size_t old = vals_.size();
    vals_.resize(static_cast<std::size_t>(k) + 1);
    for (std::size_t i = old; i < vals_.size(); ++i) vals_[i] = (*f_)(std::int64_t(i));
}

}  // namespace hubsim
