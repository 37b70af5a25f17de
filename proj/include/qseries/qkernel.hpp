#pragma once

#include <array>
#include <vector>

#include "formal_backend.hpp"

// q-series building blocks written once against a backend B, which is
// either FormalBackend (truncated exact series) or NumericBackend
// (multiprecision values). A backend supplies constants, q powers,
// parameters, inversion, infinite products and summation; everything here
// is expressed through those.
namespace qseries {

template <class B>
using value_t = typename B::value_type;

// (a; q^step)_n for n >= 0.
template <class B>
value_t<B> poch(B& be, const value_t<B>& a, int n, int step = 1)
{
    if (n < 0) throw precondition_error("poch needs n >= 0; use poch_int");
    value_t<B> r = be.one(), x = a;
    const value_t<B> qs = be.q_pow(step);
    for (int k = 0; k < n; ++k) {
        r = r * (1L - x);
        if (k + 1 < n) x = x * qs;
    }
    return r;
}

// prod_{k<n} (den - num q^k) = den^n (num/den)_n, without dividing by den.
template <class B>
value_t<B> poch_scaled(B& be, const value_t<B>& num, const value_t<B>& den, int n)
{
    value_t<B> r = be.one(), x = num;
    const value_t<B> q = be.q();
    for (int k = 0; k < n; ++k) {
        r = r * (den - x);
        x = x * q;
    }
    return r;
}

// 1/(a; q^step)_n, inverting each factor separately.
template <class B>
value_t<B> inv_poch(B& be, const value_t<B>& a, int n, int step = 1)
{
    value_t<B> r = be.one(), x = a;
    const value_t<B> qs = be.q_pow(step);
    for (int k = 0; k < n; ++k) {
        r = r * be.inv(1L - x);
        x = x * qs;
    }
    return r;
}

template <class B>
value_t<B> poch_inf(B& be, const value_t<B>& a, int step = 1)
{
    return be.poch_inf(a, step);
}

// (a)_n for any integer n; for n < 0 this is 1/prod_{k=1}^{|n|}(1 - a q^-k).
template <class B>
value_t<B> poch_int(B& be, const value_t<B>& a, int n)
{
    if (n >= 0) return poch(be, a, n);
    value_t<B> d = be.one();
    for (int k = 1; k <= -n; ++k) d = d * (1L - be.q_shift(a, -k));
    return be.inv(d);
}

// prod (num_i)_inf / prod (den_j)_inf
template <class B>
value_t<B> inf_ratio(B& be, const std::vector<value_t<B>>& nums, const std::vector<value_t<B>>& dens, int step = 1)
{
    value_t<B> r = be.one();
    for (const auto& a : nums) r = r * be.poch_inf(a, step);
    for (const auto& b : dens) r = r * be.inv_poch_inf(b, step);
    return r;
}

// Basic hypergeometric series
//   sum_n prod (a_i; q^s)_n / ((q^s; q^s)_n prod (b_j; q^s)_n) * arg^n.
template <class B>
value_t<B> phi(B& be, const std::vector<value_t<B>>& nums, const std::vector<value_t<B>>& dens, const value_t<B>& arg,
               int step = 1)
{
    long w = 1;
    if constexpr (B::is_formal) {
        if (arg.is_zero()) return be.one();
        w = be.valuation(arg);
        if (w < 1) throw precondition_error("phi needs an argument of positive weight in the formal backend");
    }
    const value_t<B> qs = be.q_pow(step);
    std::vector<value_t<B>> an = nums, bn = dens;
    value_t<B> qn1 = qs; // q^{s(n+1)}
    value_t<B> t = be.one();
    return be.sum(
        0, [w](int n) { return n * w; },
        [&](int n) {
            if (n > 0) {
                value_t<B> num = arg, den = 1L - qn1;
                for (auto& x : an) {
                    num = num * (1L - x);
                    x = x * qs;
                }
                for (auto& x : bn) {
                    den = den * (1L - x);
                    x = x * qs;
                }
                t = t * num * be.inv(den);
                qn1 = qn1 * qs;
            }
            return t;
        });
}

template <class B>
value_t<B> qsum(B& be, int start, auto&& bound, auto&& term)
{
    return be.sum(start, bound, term);
}

template <class B, std::size_t K>
value_t<B> qsum_multi(B& be, const std::array<int, K>& starts, auto&& bound, auto&& term)
{
    return be.sum_multi(starts, bound, term);
}

// S(q) = (-q)_inf
template <class B>
value_t<B> s_series(B& be)
{
    return be.poch_inf(-be.q());
}

// D(q^step) = -1/2 + sum_{n>=1} q^{step n}/(1 - q^{step n})
template <class B>
value_t<B> d_series(B& be, int step = 1)
{
    value_t<B> s = be.sum(
        1, [step](int n) { return static_cast<long>(n) * step; },
        [&](int n) {
            value_t<B> x = be.q_pow(n * step);
            return x * be.inv(1L - x);
        });
    return s - be.lit(Rational(1, 2));
}

// (1 + 1/b) sum_n (c)_n (-1)^n q^{n(n+1)/2} a^n b^-n / ((-aq)_n (-c/b)_{n+1})
template <class B>
value_t<B> rho3(B& be, const value_t<B>& a, const value_t<B>& b, const value_t<B>& c)
{
    const value_t<B> binv = be.inv(b);
    const value_t<B> q = be.q();
    const value_t<B> ab = a * binv, cb = c * binv;
    value_t<B> cn = be.one(), aqn = be.one(), cbn = be.inv(1L + cb), pw = be.one(), qk = be.one();
    value_t<B> s = be.sum(
        0, [](int n) { return static_cast<long>(n) * (n + 1) / 2; },
        [&](int n) {
            if (n > 0) {
                // advance (c)_n, (-aq)_n, (-c/b)_{n+1}, (-a/b)^n q^{n(n+1)/2}
                cn = cn * (1L - c * qk);
                qk = qk * q;
                aqn = aqn * (1L + a * qk);
                cbn = cbn * be.inv(1L + cb * qk);
                pw = pw * (-ab) * qk;
            }
            return cn * pw * be.inv(aqn) * cbn;
        });
    return (1L + binv) * s;
}

// (1 + 1/b) sum_n (c, d, cd/(ab))_n (1 + cd q^{2n}/b) (-1)^n q^{n(n+1)/2} a^n b^-n
//             / ((-aq)_n (-c/b, -d/b)_{n+1})
template <class B>
value_t<B> rho4(B& be, const value_t<B>& a, const value_t<B>& b, const value_t<B>& c, const value_t<B>& d)
{
    const value_t<B> binv = be.inv(b);
    const value_t<B> q = be.q();
    const value_t<B> ab = a * binv, cb = c * binv, db = d * binv, e = c * d * be.inv(a) * binv;
    value_t<B> num = be.one(), aqn = be.one(), den = be.inv((1L + cb) * (1L + db)), pw = be.one(), qk = be.one();
    value_t<B> s = be.sum(
        0, [](int n) { return static_cast<long>(n) * (n + 1) / 2; },
        [&](int n) {
            if (n > 0) {
                num = num * (1L - c * qk) * (1L - d * qk) * (1L - e * qk);
                qk = qk * q;
                aqn = aqn * (1L + a * qk);
                den = den * be.inv((1L + cb * qk) * (1L + db * qk));
                pw = pw * (-ab) * qk;
            }
            return num * (1L + c * db * qk * qk) * pw * be.inv(aqn) * den;
        });
    return (1L + binv) * s;
}

// Formal entry points taking a context.
inline FormalSeries poch(const ContextPtr& ctx, const FormalSeries& a, int n, int step = 1)
{
    FormalBackend be(ctx);
    return poch(be, a, n, step);
}

inline FormalSeries poch_inf(const ContextPtr& ctx, const FormalSeries& a, int step = 1)
{
    FormalBackend be(ctx);
    return be.poch_inf(a, step);
}

inline FormalSeries poch_int(const ContextPtr& ctx, const FormalSeries& a, int n)
{
    FormalBackend be(ctx);
    return poch_int(be, a, n);
}

inline FormalSeries phi(const ContextPtr& ctx, const std::vector<FormalSeries>& nums,
                        const std::vector<FormalSeries>& dens, const FormalSeries& arg, int step = 1)
{
    FormalBackend be(ctx);
    return phi(be, nums, dens, arg, step);
}

inline FormalSeries s_series(const ContextPtr& ctx)
{
    FormalBackend be(ctx);
    return s_series(be);
}

inline FormalSeries d_series(const ContextPtr& ctx, int step = 1)
{
    FormalBackend be(ctx);
    return d_series(be, step);
}

inline FormalSeries rho3(const ContextPtr& ctx, const FormalSeries& a, const FormalSeries& b, const FormalSeries& c)
{
    FormalBackend be(ctx);
    return rho3(be, a, b, c);
}

inline FormalSeries rho4(const ContextPtr& ctx, const FormalSeries& a, const FormalSeries& b, const FormalSeries& c,
                         const FormalSeries& d)
{
    FormalBackend be(ctx);
    return rho4(be, a, b, c, d);
}

template <class Bound, class Term>
FormalSeries qsum(const ContextPtr& ctx, int start, Bound&& bound, Term&& term)
{
    FormalBackend be(ctx);
    return be.sum(start, bound, term);
}

template <std::size_t K, class Bound, class Term>
FormalSeries qsum_multi(const ContextPtr& ctx, const std::array<int, K>& starts, Bound&& bound, Term&& term)
{
    FormalBackend be(ctx);
    return be.sum_multi(starts, bound, term);
}

} // namespace qseries
