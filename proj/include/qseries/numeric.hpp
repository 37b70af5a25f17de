#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bigfloat.hpp"
#include "formal_series.hpp"
#include "qkernel.hpp"

namespace qseries {

// Exact rational values for the parameters of a numeric evaluation,
// including q.
struct PointAssignment {
    std::map<std::string, Rational> values;

    PointAssignment() = default;
    explicit PointAssignment(std::map<std::string, Rational> v) : values(std::move(v)) { validate(); }

    void validate() const
    {
        auto it = values.find("q");
        if (it == values.end()) throw precondition_error("point assignment has no value for q");
        if (it->second == 0 || abs(it->second) >= 1) throw precondition_error("point assignment needs 0 < |q| < 1");
    }

    const Rational& q() const { return at("q"); }
    bool has(const std::string& name) const { return values.count(name) != 0; }
    const Rational& at(const std::string& name) const
    {
        auto it = values.find(name);
        if (it == values.end()) throw precondition_error("no value assigned to '" + name + "'");
        return it->second;
    }
};

// Stop rule for infinite sums and products: min_consecutive terms in a row
// below tol_tail (scaled by any enclosing prefactor), with the last ratio
// |t_{n+1}/t_n| at most ratio_cap. Terms below tol_tail/8 are rounding
// noise (a difference of two equal limits, say) and skip the ratio test.
// Exceeding max_terms is an error.
struct TailPolicy {
    std::optional<BigFloat> tol_tail; // default 2^-(P-10)
    int min_consecutive = 5;
    Rational ratio_cap{99, 100};
    int max_terms = 10000;
};

struct SumDiagnostics {
    std::size_t terms = 0;
    double last_ratio = 0;
};

template <class T>
T dual_eps_part(const T&)
{
    throw precondition_error("epsilon projection needs dual-number evaluation");
}
template <class T>
Dual<T> dual_eps_part(const Dual<T>& x)
{
    return Dual<T>(x.eps);
}

inline const BigFloat& value_part(const BigFloat& x) { return x; }
template <class T>
const T& value_part(const Dual<T>& x)
{
    return x.val;
}

// Multiprecision evaluation; S is BigFloat or Dual<BigFloat>. Construct
// under a PrecisionScope of the same precision.
template <class S>
class NumericBackend {
public:
    using value_type = S;
    static constexpr bool is_formal = false;

    NumericBackend(long precision, const Rational& q, TailPolicy policy = {})
        : prec_(precision), policy_(std::move(policy)), q_(BigFloat(q)), scale_(1L),
          pole_(BigFloat::pow2(-precision / 2)), cap_(policy_.ratio_cap)
    {
        if (q == 0 || abs(q) >= 1) throw precondition_error("numeric evaluation needs 0 < |q| < 1");
        if (!policy_.tol_tail) policy_.tol_tail = BigFloat::pow2(-(precision - 10));
        if (policy_.min_consecutive < 1 || policy_.max_terms < 1 || policy_.ratio_cap >= 1 || policy_.ratio_cap <= 0)
            throw precondition_error("invalid tail policy");
    }

    long precision() const { return prec_; }
    std::size_t terms_evaluated() const { return terms_; }
    const SumDiagnostics& last_diagnostics() const { return diag_; }

    S zero() const { return S(0L); }
    S one() const { return S(1L); }
    S lit(const Rational& r) const { return S(r); }
    S q() const { return S(q_); }
    S q_pow(int k) const { return S(pow(q_, k)); }

    void bind(const std::string& name, S v) { params_[name] = std::move(v); }
    const S& param(const std::string& name) const
    {
        auto it = params_.find(name);
        if (it == params_.end()) throw precondition_error("parameter '" + name + "' is not bound");
        return it->second;
    }

    S inv(const S& x) const
    {
        if (abs(value_part(x)) < pole_) throw precondition_error("pole: a denominator factor vanishes at this point");
        return 1L / x;
    }
    S q_shift(const S& x, int k) const { return x * q_pow(k); }
    S eps_part(const S& x) const { return dual_eps_part(x); }

    S poch_inf(const S& a, int step = 1)
    {
        if (step < 1) throw precondition_error("Pochhammer step must be positive");
        S r = one(), x = a;
        const BigFloat qs = pow(q_, step);
        int small = 0;
        for (int k = 0; k < policy_.max_terms; ++k) {
            if (magnitude(x) < tol()) {
                if (++small >= policy_.min_consecutive) return r;
            } else {
                small = 0;
            }
            r = r * (1L - x);
            x = x * qs;
            ++terms_;
        }
        throw convergence_error("infinite product did not converge within " + std::to_string(policy_.max_terms) +
                                " factors");
    }

    S inv_poch_inf(const S& a, int step = 1)
    {
        if (step < 1) throw precondition_error("Pochhammer step must be positive");
        S r = one(), x = a;
        const BigFloat qs = pow(q_, step);
        int small = 0;
        for (int k = 0; k < policy_.max_terms; ++k) {
            if (magnitude(x) < tol()) {
                if (++small >= policy_.min_consecutive) return inv(r);
            } else {
                small = 0;
            }
            S f = 1L - x;
            if (abs(value_part(f)) < pole_) throw precondition_error("pole: an infinite-product factor vanishes");
            r = r * f;
            x = x * qs;
            ++terms_;
        }
        throw convergence_error("infinite product did not converge within " + std::to_string(policy_.max_terms) +
                                " factors");
    }

    template <class Bound, class Term>
    S sum(int start, Bound&&, Term&& term)
    {
        S acc = zero();
        BigFloat prev(-1L);
        int small = 0;
        diag_ = {};
        for (int n = start; n < start + policy_.max_terms; ++n) {
            S t = term(n);
            acc += t;
            ++terms_;
            ++diag_.terms;
            BigFloat m = magnitude(t);
            bool decaying = true;
            if (prev.sign() > 0) {
                BigFloat ratio = m / prev;
                diag_.last_ratio = ratio.to_double();
                decaying = ratio <= cap_;
            }
            if (m < tol()) {
                ++small;
                if (small >= policy_.min_consecutive && (decaying || m < tol() / 8L)) return acc;
            } else {
                small = 0;
            }
            prev = m;
        }
        throw convergence_error("series did not converge within " + std::to_string(policy_.max_terms) + " terms");
    }

    template <std::size_t K, class Bound, class Term>
    S sum_multi(const std::array<int, K>& starts, Bound&& bound, Term&& term)
    {
        std::array<int, K> idx = starts;
        auto rec = [&](auto&& self, std::size_t level) -> S {
            if (level == K) return term(idx);
            return sum(starts[level], [](int) { return 0L; }, [&](int i) {
                idx[level] = i;
                for (std::size_t j = level + 1; j < K; ++j) idx[j] = starts[j];
                return self(self, level + 1);
            });
        };
        (void)bound;
        return rec(rec, 0);
    }

    // Evaluates f() with the tail tolerance divided by |prefactor|, for an
    // inner sum that the caller multiplies by prefactor.
    template <class F>
    S scaled(const S& prefactor, F&& f)
    {
        BigFloat m = magnitude(prefactor);
        if (m.is_zero()) return zero();
        BigFloat saved = scale_;
        scale_ = scale_ / m;
        try {
            S v = f();
            scale_ = saved;
            return v;
        } catch (...) {
            scale_ = saved;
            throw;
        }
    }

    // Evaluates f() at the base tolerance, for values cached across
    // differently scaled uses.
    template <class F>
    S unscaled(F&& f)
    {
        BigFloat saved = scale_;
        scale_ = BigFloat(1L);
        try {
            S v = f();
            scale_ = saved;
            return v;
        } catch (...) {
            scale_ = saved;
            throw;
        }
    }

    int valuation(const S&) const { return 1; }

private:
    BigFloat tol() const { return *policy_.tol_tail * scale_; }

    long prec_;
    TailPolicy policy_;
    BigFloat q_, scale_, pole_, cap_;
    std::map<std::string, S> params_;
    std::size_t terms_ = 0;
    SumDiagnostics diag_;
};

// (a; q)_inf at a point.
inline BigFloat eval_poch_inf(const PointAssignment& pt, const Rational& a, long precision, const TailPolicy& policy = {},
                              int step = 1)
{
    pt.validate();
    PrecisionScope scope(precision);
    NumericBackend<BigFloat> be(precision, pt.q(), policy);
    return be.poch_inf(BigFloat(a), step);
}

template <class Term>
std::pair<BigFloat, SumDiagnostics> eval_qsum(Term&& term, long precision, const TailPolicy& policy = {}, int start = 0)
{
    PrecisionScope scope(precision);
    NumericBackend<BigFloat> be(precision, Rational(1, 2), policy);
    BigFloat v = be.sum(start, [](int) { return 0L; }, term);
    return {v, be.last_diagnostics()};
}

inline BigFloat eval_phi(const PointAssignment& pt, const std::vector<Rational>& nums, const std::vector<Rational>& dens,
                         const Rational& arg, long precision, const TailPolicy& policy = {}, int step = 1)
{
    pt.validate();
    PrecisionScope scope(precision);
    NumericBackend<BigFloat> be(precision, pt.q(), policy);
    std::vector<BigFloat> a, b;
    for (const auto& x : nums) a.emplace_back(x);
    for (const auto& x : dens) b.emplace_back(x);
    return phi(be, a, b, BigFloat(arg), step);
}

// Evaluates the truncated polynomial; every context variable must be assigned.
inline BigFloat eval_formal_at(const FormalSeries& a, const PointAssignment& pt, long precision)
{
    PrecisionScope scope(precision);
    const SeriesContext& ctx = *a.context();
    std::vector<BigFloat> vals;
    for (const auto& v : ctx.variables()) {
        if (!pt.has(v.name)) throw precondition_error("no value assigned to '" + v.name + "'");
        if (v.weight == 0 && pt.at(v.name) != 0)
            throw precondition_error("weight-0 variable '" + v.name + "' must be assigned 0");
        vals.emplace_back(pt.at(v.name));
    }
    BigFloat acc;
    for (std::size_t i = 0; i < a.num_terms(); ++i) {
        const auto r = a.rank_at(i);
        BigFloat t(a.coefficient_at(i));
        for (std::size_t v = 0; v < vals.size(); ++v)
            if (unsigned e = ctx.exponent(r, v)) t *= pow(vals[v], static_cast<long>(e));
        acc += t;
    }
    return acc;
}

} // namespace qseries
