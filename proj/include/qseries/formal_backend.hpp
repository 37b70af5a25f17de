#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "formal_series.hpp"

namespace qseries {

// Series arithmetic in one context, as seen by the generic q-series code.
// Sums run over indices whose declared lower bound is within the
// truncation order, and every included term is checked against its bound.
class FormalBackend {
public:
    using value_type = FormalSeries;
    static constexpr bool is_formal = true;

    explicit FormalBackend(ContextPtr ctx) : ctx_(std::move(ctx)) {}

    const ContextPtr& context() const { return ctx_; }
    int order() const { return ctx_->order(); }
    std::size_t terms_evaluated() const { return terms_; }

    FormalSeries zero() const { return FormalSeries(ctx_); }
    FormalSeries one() const { return FormalSeries::constant(ctx_, 1); }
    FormalSeries lit(const Rational& r) const { return FormalSeries::constant(ctx_, r); }
    FormalSeries q() const { return FormalSeries::q_power(ctx_, 1); }
    FormalSeries q_pow(int k) const { return FormalSeries::q_power(ctx_, k); }
    FormalSeries var(const std::string& name) const { return FormalSeries::variable(ctx_, name); }

    void bind(const std::string& name, FormalSeries v) { params_[name] = std::move(v); }
    const FormalSeries& param(const std::string& name) const
    {
        auto it = params_.find(name);
        if (it == params_.end()) throw precondition_error("parameter '" + name + "' is not bound");
        requested_.insert(name);
        return it->second;
    }
    const std::set<std::string>& requested() const { return requested_; }

    FormalSeries inv(const FormalSeries& x) const { return invert(x); }
    FormalSeries q_shift(const FormalSeries& x, int k) const { return shift_q(x, k); }
    FormalSeries eps_part(const FormalSeries& x) const { return project_epsilon(x).second; }

    // Least weight present, or a value past the order for zero.
    int valuation(const FormalSeries& x) const
    {
        auto v = x.valuation();
        return v ? static_cast<int>(*v) : order() + 1;
    }

    FormalSeries poch_inf(const FormalSeries& a, int step = 1)
    {
        if (step < 1) throw precondition_error("Pochhammer step must be positive");
        FormalSeries r = one();
        if (a.is_zero()) return r;
        const int v = valuation(a);
        FormalSeries x = a;
        for (int k = 0; v + k * step <= order(); ++k) {
            r *= 1L - x;
            x = shift_q(x, step);
        }
        return r;
    }

    // 1/(a; q^step)_inf as a product of inverted binomials.
    FormalSeries inv_poch_inf(const FormalSeries& a, int step = 1)
    {
        if (step < 1) throw precondition_error("Pochhammer step must be positive");
        FormalSeries r = one();
        if (a.is_zero()) return r;
        const int v = valuation(a);
        FormalSeries x = a;
        for (int k = 0; v + k * step <= order(); ++k) {
            r *= invert(1L - x);
            x = shift_q(x, step);
        }
        return r;
    }

    template <class Bound, class Term>
    FormalSeries sum(int start, Bound&& bound, Term&& term)
    {
        FormalSeries acc = zero();
        for (int n = start;; ++n) {
            const long lb = bound(n);
            if (lb > order()) break;
            if (n - start > 1'000'000) throw bound_violation("summation bound does not grow");
            FormalSeries t = term(n);
            check_bound(t, lb, n);
            acc += t;
            ++terms_;
        }
        return acc;
    }

    // Multi-index sum. `bound` must be nondecreasing in every index; the
    // iteration stops a level as soon as the bound with all deeper indices
    // at their starts exceeds the order.
    template <std::size_t K, class Bound, class Term>
    FormalSeries sum_multi(const std::array<int, K>& starts, Bound&& bound, Term&& term)
    {
        FormalSeries acc = zero();
        std::array<int, K> idx = starts;
        auto rec = [&](auto&& self, std::size_t level) -> void {
            if (level == K) {
                const long lb = bound(idx);
                FormalSeries t = term(idx);
                check_bound(t, lb, idx[0]);
                acc += t;
                ++terms_;
                return;
            }
            for (idx[level] = starts[level];; ++idx[level]) {
                for (std::size_t j = level + 1; j < K; ++j) idx[j] = starts[j];
                if (bound(idx) > order()) break;
                self(self, level + 1);
            }
            idx[level] = starts[level];
        };
        rec(rec, 0);
        return acc;
    }

    // Formal sums are exact up to the order, so no tolerance to rescale.
    template <class F>
    FormalSeries scaled(const FormalSeries&, F&& f)
    {
        return f();
    }
    template <class F>
    FormalSeries unscaled(F&& f)
    {
        return f();
    }

private:
    void check_bound(const FormalSeries& t, long lb, int n) const
    {
        if (!t.is_zero() && static_cast<long>(*t.valuation()) < lb)
            throw bound_violation("term " + std::to_string(n) + " has weight " + std::to_string(*t.valuation()) +
                                  " below its declared bound " + std::to_string(lb));
    }

    ContextPtr ctx_;
    std::map<std::string, FormalSeries> params_;
    mutable std::set<std::string> requested_;
    std::size_t terms_ = 0;
};

} // namespace qseries
