#pragma once

#include <cstdint>
#include <vector>

#include "qkernel.hpp"

namespace qseries {

// sigma(q) = sum_n q^{n(n+1)/2} / (-q)_n
template <class B>
value_t<B> sigma(B& be)
{
    const value_t<B> q = be.q();
    value_t<B> qn = be.one(), pw = be.one(), den = be.one();
    return be.sum(
        0, [](int n) { return static_cast<long>(n) * (n + 1) / 2; },
        [&](int n) {
            if (n > 0) {
                qn = qn * q;
                pw = pw * qn;
                den = den * be.inv(1L + qn);
            }
            return pw * den;
        });
}

// sigma*(q) = 2 sum_{n>=1} (-1)^n q^{n^2} / (q; q^2)_n
template <class B>
value_t<B> sigma_star(B& be)
{
    const value_t<B> q = be.q(), q2 = be.q_pow(2);
    value_t<B> odd = q, den = be.one(), pw = be.one(), step = q; // step = q^{2n-1}
    value_t<B> s = be.sum(
        1, [](int n) { return static_cast<long>(n) * n; },
        [&](int n) {
            if (n > 1) step = step * q2;
            pw = -(pw * step);
            den = den * be.inv(1L - odd);
            odd = odd * q2;
            return pw * den;
        });
    return 2L * s;
}

// sigma(c, q) = sum_n q^{n(n+1)/2} / ((-q)_n (1 - c q^n))
template <class B>
value_t<B> sigma_c(B& be, const value_t<B>& c)
{
    const value_t<B> q = be.q();
    value_t<B> qn = be.one(), pw = be.one(), den = be.one();
    return be.sum(
        0, [](int n) { return static_cast<long>(n) * (n + 1) / 2; },
        [&](int n) {
            if (n > 0) {
                qn = qn * q;
                pw = pw * qn;
                den = den * be.inv(1L + qn);
            }
            return pw * den * be.inv(1L - c * qn);
        });
}

// sigma(c, d, q) = sum_n (-cd)_n (1 - cd q^{2n}) q^{n(n+1)/2}
//                        / ((-q)_n (1 - c q^n)(1 - d q^n))
template <class B>
value_t<B> sigma_cd(B& be, const value_t<B>& c, const value_t<B>& d)
{
    const value_t<B> q = be.q(), cd = c * d;
    value_t<B> qn = be.one(), pw = be.one(), ratio = be.one();
    return be.sum(
        0, [](int n) { return static_cast<long>(n) * (n + 1) / 2; },
        [&](int n) {
            if (n > 0) {
                ratio = ratio * (1L + cd * qn);
                qn = qn * q;
                pw = pw * qn;
                ratio = ratio * be.inv(1L + qn);
            }
            return ratio * (1L - cd * qn * qn) * pw * be.inv((1L - c * qn) * (1L - d * qn));
        });
}

inline FormalSeries sigma_series(const ContextPtr& ctx)
{
    FormalBackend be(ctx);
    return sigma(be);
}

inline FormalSeries sigma_star_series(const ContextPtr& ctx)
{
    FormalBackend be(ctx);
    return sigma_star(be);
}

inline FormalSeries sigma_c(const ContextPtr& ctx, const FormalSeries& c)
{
    FormalBackend be(ctx);
    return sigma_c(be, c);
}

inline FormalSeries sigma_cd(const ContextPtr& ctx, const FormalSeries& c, const FormalSeries& d)
{
    FormalBackend be(ctx);
    return sigma_cd(be, c, d);
}

// Partitions of n into distinct parts, counted with sign (-1)^rank where
// rank = largest part - number of parts.
inline long sigma_oracle_coeff(int n)
{
    if (n < 0) throw precondition_error("sigma_oracle_coeff needs n >= 0");
    if (n == 0) return 1;
    long total = 0;
    auto rec = [&](auto&& self, int remaining, int max_part, int largest, int parts) -> void {
        if (remaining == 0) {
            total += ((largest - parts) % 2 == 0) ? 1 : -1;
            return;
        }
        for (int p = std::min(remaining, max_part); p >= 1; --p)
            self(self, remaining - p, p - 1, largest == 0 ? p : largest, parts + 1);
    };
    rec(rec, n, n, 0, 0);
    return total;
}

struct SigmaCoefficients {
    std::vector<long> values;      // s_0 .. s_N
    std::vector<long> star_values; // s*_1 .. s*_N
};

inline long integer_coefficient(const Rational& r)
{
    if (r.get_den() != 1 || !r.get_num().fits_slong_p())
        throw error("expected an integer coefficient, got " + r.get_str());
    return r.get_num().get_si();
}

inline SigmaCoefficients sigma_coefficients(int N)
{
    if (N < 0) throw precondition_error("sigma_coefficients needs N >= 0");
    auto ctx = make_context({}, N);
    auto s = sigma_series(ctx), t = sigma_star_series(ctx);
    SigmaCoefficients out;
    for (int n = 0; n <= N; ++n) {
        Monomial m = n ? Monomial{{"q", static_cast<unsigned>(n)}} : Monomial{};
        out.values.push_back(integer_coefficient(s.coefficient(m)));
        if (n > 0) out.star_values.push_back(integer_coefficient(t.coefficient(m)));
    }
    return out;
}

// Coefficient T(n) of q^{|n|/24} in q^{1/24} sigma(q) + q^{-1/24} sigma*(q):
// n = 24m+1 gives s_m, n = 1-24m (m >= 1) gives s*_m.
inline long t_coefficient(long n)
{
    if (((n - 1) % 24 + 24) % 24 != 0) throw precondition_error("T(n) needs n = 1 (mod 24)");
    if (n >= 1) {
        const long m = (n - 1) / 24;
        return sigma_coefficients(static_cast<int>(m)).values[m];
    }
    const long m = (1 - n) / 24;
    return sigma_coefficients(static_cast<int>(m)).star_values[m - 1];
}

} // namespace qseries
