#pragma once

#include <map>
#include <string>
#include <vector>

#include "qkernel.hpp"
#include "sigma.hpp"

// Both sides of every registered identity, written once against a backend.
// Sums carry weight lower bounds valid for the formal parameter modes used
// by the registry (free parameters weight 1, z = 1 + eps weight 0).
namespace qseries::builders {

template <class V>
struct Sides {
    V lhs, rhs;
};

// (a; q^step)_n for increasing n without recomputing the product.
template <class B>
class PochRun {
public:
    PochRun(B& be, value_t<B> a, int step = 1, bool inverse = false)
        : be_(be), prod_(be.one()), x_(std::move(a)), qs_(be.q_pow(step)), inverse_(inverse)
    {
    }
    const value_t<B>& at(int n)
    {
        for (; n_ < n; ++n_) {
            prod_ = prod_ * (inverse_ ? be_.inv(1L - x_) : 1L - x_);
            x_ = x_ * qs_;
        }
        return prod_;
    }

private:
    B& be_;
    value_t<B> prod_, x_, qs_;
    bool inverse_;
    int n_ = 0;
};

template <class B>
PochRun<B> inv_run(B& be, value_t<B> a, int step = 1)
{
    return PochRun<B>(be, std::move(a), step, true);
}

// base^n for increasing n.
template <class B>
class PowRun {
public:
    PowRun(B& be, value_t<B> base) : pow_(be.one()), base_(std::move(base)) {}
    const value_t<B>& at(int n)
    {
        for (; n_ < n; ++n_) pow_ = pow_ * base_;
        return pow_;
    }

private:
    value_t<B> pow_, base_;
    int n_ = 0;
};

inline long tri(long n) { return n * (n + 1) / 2; }

// pref * inner(), letting a numeric backend loosen the inner tolerance.
template <class B, class F>
value_t<B> nest(B& be, const value_t<B>& pref, F&& inner)
{
    return pref * be.scaled(pref, inner);
}

template <class B>
value_t<B> P(B& be, const std::vector<value_t<B>>& nums, const std::vector<value_t<B>>& dens, int step = 1)
{
    return inf_ratio(be, nums, dens, step);
}

// sum_{n>=start} t_n with t_start = first and t_{n+1} = t_n * ratio(n).
template <class B, class Bound, class Ratio>
value_t<B> ratio_sum(B& be, int start, Bound&& bound, value_t<B> first, Ratio&& ratio)
{
    value_t<B> t = std::move(first);
    return be.sum(start, bound, [&](int n) {
        if (n > start) t = t * ratio(n - 1);
        return t;
    });
}

// ---------------------------------------------------------------- preliminaries

template <class B>
Sides<value_t<B>> qbin(B& be)
{
    auto a = be.param("a"), z = be.param("z");
    return {phi(be, {a}, {}, z), be.poch_inf(a * z) * be.inv_poch_inf(z)};
}

template <class B>
Sides<value_t<B>> heine(B& be)
{
    auto a = be.param("a"), b = be.param("b"), c = be.param("c"), t = be.param("t");
    const auto q = be.q();
    auto lhs = phi(be, {a, b}, {c}, t);
    // 2phi1(c/b, t; at; q, b) with (c/b)_n b^n = prod (b - c q^k)
    value_t<B> qn = be.one();
    auto s = ratio_sum(be, 0, [](int n) { return long(n); }, be.one(), [&](int) {
        auto r = (b - c * qn) * (1L - t * qn) * be.inv((1L - qn * q) * (1L - a * t * qn));
        qn = qn * q;
        return r;
    });
    return {lhs, P(be, {b, a * t}, {c, t}) * s};
}

template <class B>
Sides<value_t<B>> heine2(B& be)
{
    auto a = be.param("a"), b = be.param("b"), c = be.param("c"), t = be.param("t");
    const auto q = be.q();
    const auto binv = be.inv(b);
    auto lhs = phi(be, {a, b}, {c}, t);
    // 2phi1(b, abt/c; bt; q, c/b) with (abt/c)_n (c/b)^n = prod (c - abt q^k) / b^n
    value_t<B> qn = be.one();
    auto s = ratio_sum(be, 0, [](int n) { return long(n); }, be.one(), [&](int) {
        auto r = (1L - b * qn) * (c - a * b * t * qn) * binv * be.inv((1L - qn * q) * (1L - b * t * qn));
        qn = qn * q;
        return r;
    });
    return {lhs, P(be, {c * binv, b * t}, {c, t}) * s};
}

template <class B>
Sides<value_t<B>> fine1551(B& be)
{
    auto b = be.param("b"), t = be.param("t");
    const auto q = be.q();
    value_t<B> qn = q;
    auto lhs = ratio_sum(be, 0, [](int n) { return long(n); }, be.one(), [&](int) {
        auto r = t * be.inv(1L - b * qn);
        qn = qn * q;
        return r;
    });
    PowRun<B> mt(be, -t), qq(be, q);
    auto qp = inv_run(be, q);
    value_t<B> pw = be.one();
    auto s = be.sum(0, [](int n) { return n + tri(n); }, [&](int n) {
        if (n > 0) pw = pw * qq.at(n);
        return mt.at(n) * pw * qp.at(n) * be.inv(1L - b * qq.at(n));
    });
    return {lhs, (1L - b) * be.inv_poch_inf(t) * s};
}

// 2phi1(q, q/t; beta q/(alpha t); q, q/alpha) - 1
template <class B>
value_t<B> agarwal_F(B& be, const value_t<B>& al, const value_t<B>& beta, const value_t<B>& t)
{
    const auto q = be.q();
    return phi(be, {q, q * be.inv(t)}, {q * beta * be.inv(al * t)}, q * be.inv(al)) - 1L;
}

template <class B>
Sides<value_t<B>> agarwal(B& be)
{
    auto al = be.param("alpha"), beta = be.param("beta"), ga = be.param("gamma"), de = be.param("delta"),
         t = be.param("t");
    const auto q = be.q();
    const auto ib = be.inv(beta), ig = be.inv(ga), iat = be.inv(al * t);
    auto lhs = phi(be, {al, ga, q}, {beta, de}, t);
    auto r1 = P(be, {q * iat, ga, al * t, beta * be.inv(al), q}, {beta * iat, de, t, q * be.inv(al), beta}) *
              phi(be, {de * ig, t}, {q * al * t * ib}, ga * q * ib);
    auto lead = P(be, {ga}, {de}) * (1L - q * ib);
    auto r2 = lead * phi(be, {de * ig, t}, {al * t * q * ib}, q * ga * ib) * be.inv(1L - al * t * ib) *
              agarwal_F(be, al, beta, t);
    PowRun<B> gp(be, ga);
    PochRun<B> dg(be, de * ig);
    auto qp = inv_run(be, q);
    auto r3 = lead * be.sum(0, [](int p) { return long(p); }, [&](int p) {
        auto pref = gp.at(p) * dg.at(p) * qp.at(p);
        return nest(be, pref, [&] {
            auto qp1 = be.q_pow(p);
            return phi(be, {de * qp1 * ig, t * qp1, q}, {qp1 * q, al * t * qp1 * q * ib}, q * ga * ib) *
                   be.inv(1L - al * t * qp1 * ib);
        });
    });
    return {lhs, r1 + r2 + r3};
}

template <class B>
Sides<value_t<B>> adsy3(B& be)
{
    auto al = be.param("alpha"), beta = be.param("beta"), ga = be.param("gamma"), de = be.param("delta"),
         e = be.param("e"), f = be.param("f"), t = be.param("t");
    const auto q = be.q();
    const auto ib = be.inv(beta), ig = be.inv(ga), ie = be.inv(e), iat = be.inv(al * t), qb = q * ib;
    auto lhs = phi(be, {al, ga, e, q}, {beta, de, f}, t);
    auto p32 = phi(be, {al * qb, ga * qb, e * qb}, {de * qb, f * qb}, t);
    auto r1 = P(be, {e, ga, beta * be.inv(al), q, al * t, q * iat, de * qb, f * qb},
                {f, de, q * be.inv(al), beta, beta * iat, al * t * qb, ga * qb, e * qb}) *
              p32;
    auto F = agarwal_F(be, al, beta, t);
    auto r2 = (1L - qb) * P(be, {e, ga, t, de * qb, f * qb}, {f, de, al * t * ib, ga * qb, e * qb}) * p32 * F;

    PochRun<B> dg(be, de * ig), atb(be, al * t * ib);
    PowRun<B> gp(be, ga);
    auto tp = inv_run(be, t);
    auto qp = inv_run(be, q);
    auto s3 = be.sum(0, [](int p) { return long(p); }, [&](int p) {
        auto pref = dg.at(p) * atb.at(p) * gp.at(p) * tp.at(p) * qp.at(p);
        return nest(be, pref, [&] {
            const auto qpp = be.q_pow(p);
            PochRun<B> dk(be, de * qpp * ig);
            PowRun<B> gk(be, ga * qb);
            auto qk = inv_run(be, qpp * q);
            return be.sum(0, [](int k) { return long(k); }, [&](int k) {
                auto pk = dk.at(k) * gk.at(k) * qk.at(k);
                return nest(be, pk, [&] { return phi(be, {al * qb, e * qb}, {f * qb}, t * be.q_pow(k + p)); });
            });
        });
    });
    auto r3 = (1L - qb) * P(be, {e, ga, t, f * qb}, {f, de, al * t * ib, e * qb}) * s3;

    PochRun<B> fe(be, f * ie);
    PowRun<B> ep(be, e);
    auto qp4 = inv_run(be, q);
    auto s4 = be.sum(1, [](int p) { return long(p); }, [&](int p) {
        auto pref = fe.at(p) * ep.at(p) * qp4.at(p);
        return nest(be, pref, [&] {
            PochRun<B> dk(be, de * ig);
            PowRun<B> gk(be, ga);
            auto qk = inv_run(be, q);
            return be.sum(0, [](int k) { return long(k); }, [&](int k) {
                auto pk = dk.at(k) * gk.at(k) * qk.at(k);
                return nest(be, pk, [&] {
                    const auto qpk = be.q_pow(p + k), qpp = be.q_pow(p);
                    return phi(be, {f * qpp * ie, t * qpk, q}, {qpp * q, al * t * qpk * q * ib}, e * qb) *
                           be.inv(1L - al * t * qpk * ib);
                });
            });
        });
    });
    auto r4 = (1L - qb) * P(be, {e, ga}, {f, de}) * s4;
    return {lhs, r1 + r2 + r3 + r4};
}

template <class B>
Sides<value_t<B>> nineparam(B& be)
{
    auto al = be.param("alpha"), beta = be.param("beta"), ga = be.param("gamma"), de = be.param("delta"),
         e = be.param("e"), f = be.param("f"), g = be.param("g"), h = be.param("h"), t = be.param("t");
    const auto q = be.q();
    const auto ib = be.inv(beta), ig = be.inv(ga), ie = be.inv(e), igg = be.inv(g), iat = be.inv(al * t),
               qb = q * ib;
    auto lhs = phi(be, {al, ga, e, g, q}, {beta, de, f, h}, t);
    auto p43 = phi(be, {al * qb, ga * qb, e * qb, g * qb}, {de * qb, f * qb, h * qb}, t);
    auto r1 = P(be, {g, e, ga, beta * be.inv(al), q, al * t, q * iat, de * qb, f * qb, h * qb},
                {h, f, de, q * be.inv(al), beta, beta * iat, al * t * qb, ga * qb, e * qb, g * qb}) *
              p43;
    auto F = agarwal_F(be, al, beta, t);
    auto r2 = (1L - qb) * P(be, {g, e, ga, t, de * qb, f * qb, h * qb}, {h, f, de, al * t * ib, ga * qb, e * qb, g * qb}) *
              p43 * F;

    PochRun<B> dg(be, de * ig), atb(be, al * t * ib);
    PowRun<B> gp(be, ga);
    auto tp = inv_run(be, t);
    auto qp = inv_run(be, q);
    auto s3 = be.sum(0, [](int p) { return long(p); }, [&](int p) {
        auto pref = dg.at(p) * atb.at(p) * gp.at(p) * tp.at(p) * qp.at(p);
        return nest(be, pref, [&] {
            const auto qpp = be.q_pow(p);
            PochRun<B> dk(be, de * qpp * ig);
            PowRun<B> gk(be, ga * qb);
            auto qk = inv_run(be, qpp * q);
            return be.sum(0, [](int k) { return long(k); }, [&](int k) {
                auto pk = dk.at(k) * gk.at(k) * qk.at(k);
                return nest(be, pk,
                            [&] { return phi(be, {al * qb, e * qb, g * qb}, {f * qb, h * qb}, t * be.q_pow(p + k)); });
            });
        });
    });
    auto r3 = (1L - qb) * P(be, {g, e, ga, t, f * qb, h * qb}, {h, f, de, al * t * ib, e * qb, g * qb}) * s3;

    PochRun<B> fe(be, f * ie), atb4(be, al * t * ib);
    PowRun<B> ep(be, e);
    auto tp4 = inv_run(be, t);
    auto qp4 = inv_run(be, q);
    auto s4 = be.sum(1, [](int p) { return long(p); }, [&](int p) {
        auto pref = fe.at(p) * atb4.at(p) * ep.at(p) * tp4.at(p) * qp4.at(p);
        return nest(be, pref, [&] {
            const auto qpp = be.q_pow(p);
            PochRun<B> dk(be, de * ig), ak(be, al * t * qpp * ib);
            PowRun<B> gk(be, ga);
            auto qk = inv_run(be, q);
            auto tk = inv_run(be, t * qpp);
            return be.sum(0, [](int k) { return long(k); }, [&](int k) {
                auto pk = dk.at(k) * ak.at(k) * gk.at(k) * qk.at(k) * tk.at(k);
                return nest(be, pk, [&] {
                    PochRun<B> fj(be, f * qpp * ie);
                    PowRun<B> ej(be, e * qb);
                    auto qj = inv_run(be, qpp * q);
                    return be.sum(0, [](int j) { return long(j); }, [&](int j) {
                        auto pj = fj.at(j) * ej.at(j) * qj.at(j);
                        return nest(be, pj, [&] {
                            return phi(be, {al * qb, g * qb}, {h * qb}, t * be.q_pow(p + k + j));
                        });
                    });
                });
            });
        });
    });
    auto r4 = (1L - qb) * P(be, {g, e, ga, t, h * qb}, {h, f, de, al * t * ib, g * qb}) * s4;

    PochRun<B> hg(be, h * igg);
    PowRun<B> gp5(be, g);
    auto qp5 = inv_run(be, q);
    auto s5 = be.sum(1, [](int p) { return long(p); }, [&](int p) {
        auto pref = hg.at(p) * gp5.at(p) * qp5.at(p);
        return nest(be, pref, [&] {
            const auto qpp = be.q_pow(p);
            PochRun<B> fj(be, f * ie);
            PowRun<B> ej(be, e);
            auto qj = inv_run(be, q);
            return be.sum(0, [](int j) { return long(j); }, [&](int j) {
                auto pj = fj.at(j) * ej.at(j) * qj.at(j);
                return nest(be, pj, [&] {
                    PochRun<B> dk(be, de * ig);
                    PowRun<B> gk(be, ga);
                    auto qk = inv_run(be, q);
                    return be.sum(0, [](int k) { return long(k); }, [&](int k) {
                        auto pk = dk.at(k) * gk.at(k) * qk.at(k);
                        return nest(be, pk, [&] {
                            const auto qs = be.q_pow(p + k + j);
                            return phi(be, {h * qpp * igg, t * qs, q}, {qpp * q, al * t * qs * q * ib}, g * qb) *
                                   be.inv(1L - al * t * qs * ib);
                        });
                    });
                });
            });
        });
    });
    auto r5 = (1L - qb) * P(be, {g, e, ga}, {h, f, de}) * s5;
    return {lhs, r1 + r2 + r3 + r4 + r5};
}

// ---------------------------------------------------------------- reciprocity

template <class B>
Sides<value_t<B>> recip3(B& be)
{
    auto a = be.param("a"), b = be.param("b"), c = be.param("c");
    const auto q = be.q();
    const auto ia = be.inv(a), ib = be.inv(b);
    return {rho3(be, a, b, c) - rho3(be, b, a, c),
            (ib - ia) * P(be, {c, a * q * ib, b * q * ia, q}, {-c * ia, -c * ib, -a * q, -b * q})};
}

template <class B>
Sides<value_t<B>> recip4(B& be)
{
    auto a = be.param("a"), b = be.param("b"), c = be.param("c"), d = be.param("d");
    const auto q = be.q();
    const auto ia = be.inv(a), ib = be.inv(b);
    return {rho4(be, a, b, c, d) - rho4(be, b, a, c, d),
            (ib - ia) * P(be, {d, c, c * d * ia * ib, a * q * ib, b * q * ia, q},
                          {-d * ia, -d * ib, -c * ia, -c * ib, -a * q, -b * q})};
}

template <class B>
Sides<value_t<B>> kang75(B& be)
{
    auto c = be.param("c");
    const auto q = be.q();
    value_t<B> qn = be.one();
    auto lhs = ratio_sum(be, 0, tri, be.one(), [&](int) {
        auto qn1 = qn * q;
        auto r = (1L - c * qn) * qn1 * be.inv((1L - qn1) * (1L + c * qn1));
        qn = qn1;
        return r;
    });
    return {lhs, be.poch_inf(-q) * be.inv_poch_inf(-c * q)};
}

// rho3(-z, 1, c) - (c, -zq, -1/z, q)_inf / (c/z, -c, zq, -q)_inf, which vanishes at z = 1.
template <class B>
value_t<B> rcq_f(B& be, const value_t<B>& z, const value_t<B>& c)
{
    const auto q = be.q(), iz = be.inv(z);
    return rho3(be, -z, be.one(), c) - P(be, {c, -z * q, -iz, q}, {c * iz, -c, z * q, -q});
}

template <class B>
Sides<value_t<B>> rcq(B& be)
{
    auto c = be.param("c"), z = be.param("z");
    return {sigma_c(be, c), be.eps_part(rcq_f(be, z, c))};
}

// 2 sum (c)_n z^n q^{n(n+1)/2} / ((zq)_n (-c)_{n+1})
template <class B>
value_t<B> aftagar_sum(B& be, const value_t<B>& z, const value_t<B>& c)
{
    const auto q = be.q();
    value_t<B> qn = be.one();
    return 2L * ratio_sum(be, 0, tri, be.inv(1L + c), [&](int) {
               auto qn1 = qn * q;
               auto r = (1L - c * qn) * z * qn1 * be.inv((1L - z * qn1) * (1L + c * qn1));
               qn = qn1;
               return r;
           });
}

template <class B>
Sides<value_t<B>> aftagar(B& be)
{
    auto c = be.param("c"), z = be.param("z");
    const auto q = be.q(), iz = be.inv(z);
    auto pre = P(be, {c}, {-c, c * iz}) * (1L - iz);
    auto t1 = P(be, {-iz, c, -z * q, q}, {-q, -c, z * q, c * iz});
    PowRun<B> zj(be, iz), qq(be, q);
    auto mq = inv_run(be, -q);
    value_t<B> pw = be.one();
    auto t2 = be.sum(1, tri, [&](int j) {
        pw = pw * qq.at(j);
        return pw * zj.at(j) * mq.at(j);
    });
    PochRun<B> mqp(be, -q);
    auto qp = inv_run(be, q);
    PowRun<B> cp(be, c);
    auto t4 = be.sum(1, [](int p) { return long(p); }, [&](int p) {
        auto pref = mqp.at(p - 1) * qp.at(p - 1) * cp.at(p);
        return nest(be, pref, [&] {
            PowRun<B> cz(be, -c * iz), qn(be, q);
            auto qn_inv = inv_run(be, q);
            value_t<B> tp = be.one();
            return be.sum(0, [](int n) { return n + tri(n); }, [&](int n) {
                if (n > 0) tp = tp * qn.at(n);
                return cz.at(n) * tp * qn_inv.at(n) * be.inv(1L - be.q_pow(n + p));
            });
        });
    });
    return {aftagar_sum(be, z, c), t1 + pre * t2 + pre + 2L * pre * t4};
}

// sum_m (-q)_m/(q)_m c^{m+1} sum_n (-c)^n q^{n(n+1)/2} / ((q)_n (1 - q^{n+m+1}))
template <class B>
value_t<B> sigma1_double(B& be, const value_t<B>& c)
{
    const auto q = be.q();
    PochRun<B> mq(be, -q);
    auto qm = inv_run(be, q);
    PowRun<B> cm(be, c);
    return be.sum(0, [](int m) { return long(m) + 1; }, [&](int m) {
        auto pref = mq.at(m) * qm.at(m) * cm.at(m + 1);
        return nest(be, pref, [&] {
            PowRun<B> cn(be, -c), qq(be, q);
            auto qn = inv_run(be, q);
            value_t<B> tp = be.one();
            return be.sum(0, [](int n) { return n + tri(n); }, [&](int n) {
                if (n > 0) tp = tp * qq.at(n);
                return cn.at(n) * tp * qn.at(n) * be.inv(1L - be.q_pow(n + m + 1));
            });
        });
    });
}

template <class B>
Sides<value_t<B>> sigma1(B& be)
{
    auto c = be.param("c");
    return {sigma(be), be.poch_inf(-c) * sigma_c(be, c) - 2L * sigma1_double(be, c)};
}

template <class B>
Sides<value_t<B>> remark1(B& be)
{
    auto c = be.param("c"), z = be.param("z");
    const auto q = be.q();
    auto S = be.poch_inf(-q) * be.inv_poch_inf(-c);
    auto sc = be.sum(0, [](int n) { return long(n) + 1; }, [&](int n) {
        auto x = c * be.q_pow(n);
        return x * be.inv(1L - x);
    });
    auto sq = be.sum(1, [](int n) { return long(n); }, [&](int n) {
        auto x = be.q_pow(n);
        return x * be.inv(1L - x);
    });
    return {sigma_c(be, c), be.eps_part(aftagar_sum(be, z, c)) + S + 2L * S * (sc - sq)};
}

template <class B>
Sides<value_t<B>> lemma4heine(B& be)
{
    auto c = be.param("c"), d = be.param("d");
    const auto q = be.q(), cd = c * d;
    value_t<B> qn = be.one(), r = be.one();
    auto lhs = be.sum(0, tri, [&](int n) {
        if (n > 0) {
            auto qn1 = qn * q;
            r = r * (1L - c * qn) * (1L - d * qn) * (1L + cd * qn) * qn1 *
                be.inv((1L + c * qn1) * (1L + d * qn1) * (1L - qn1));
            qn = qn1;
        }
        return r * (1L + cd * qn * qn);
    });
    return {lhs, P(be, {-cd, -q}, {-c * q, -d * q})};
}

template <class B>
Sides<value_t<B>> chuzhang(B& be)
{
    auto x = be.param("x"), y = be.param("y"), b = be.param("b"), c = be.param("c"), d = be.param("d");
    const auto q = be.q(), iq = be.inv(q), ix = be.inv(x), iy = be.inv(y);
    auto one_side = [&](const value_t<B>& u, const value_t<B>& v, const std::vector<value_t<B>>& den_next,
                        const value_t<B>& extra_den) {
        // sum (1 - q^{2n+1} v/u) (q/(bu), q/(cu), q/(du))_n / (den_next)_{n+1} (extra)_n
        //     (-bcd u v^2/q)^n q^{n(n+1)/2}
        const auto iu = be.inv(u);
        PochRun<B> n1(be, q * iu * be.inv(b)), n2(be, q * iu * be.inv(c)), n3(be, q * iu * be.inv(d));
        std::vector<PochRun<B>> dn;
        for (const auto& a : den_next) dn.push_back(inv_run(be, a));
        auto ex = inv_run(be, extra_den);
        PowRun<B> pw(be, -b * c * d * u * v * v * iq), qq(be, q);
        value_t<B> tp = be.one();
        return be.sum(0, tri, [&](int n) {
            if (n > 0) tp = tp * qq.at(n);
            value_t<B> t = (1L - be.q_pow(2 * n + 1) * v * iu) * n1.at(n) * n2.at(n) * n3.at(n) * ex.at(n) *
                           pw.at(n) * tp;
            for (auto& r : dn) t = t * r.at(n + 1);
            return t;
        });
    };
    auto l1 = y * one_side(x, y, {b * y, d * y}, c * y * q);
    auto l2 = x * (1L - c * y) * one_side(y, x, {b * x, c * x, d * x}, be.zero());
    auto rhs = (y - x) * P(be, {q, q * y * ix, q * x * iy, b * c * x * y, c * d * x * y, b * d * x * y},
                           {b * x, b * y, c * x, c * y * q, d * x, d * y});
    return {l1 - l2, rhs};
}

// rho4(-z, 1, c, d): 2 sum (d, c, -cd/z)_n (1 + cd q^{2n}) z^n q^{n(n+1)/2} / ((zq)_n (-c, -d)_{n+1})
template <class B>
value_t<B> bbt_sum(B& be, const value_t<B>& z, const value_t<B>& c, const value_t<B>& d)
{
    return rho4(be, -z, be.one(), c, d);
}

template <class B>
value_t<B> bbt_f(B& be, const value_t<B>& z, const value_t<B>& c, const value_t<B>& d)
{
    const auto q = be.q(), iz = be.inv(z);
    return bbt_sum(be, z, c, d) - P(be, {d, c, -c * d * iz, -z * q, -iz, q}, {d * iz, -d, c * iz, -c, z * q, -q});
}

template <class B>
Sides<value_t<B>> bbt(B& be)
{
    auto c = be.param("c"), d = be.param("d"), z = be.param("z");
    return {sigma_cd(be, c, d), be.eps_part(bbt_f(be, z, c, d))};
}

// ---------------------------------------------------------------- Lambda pieces
//
// The multi-sums below appear in the two-parameter representation both
// directly and, in the transformed four-variable function, with some
// arguments divided by z.

// sum_n (c1, d1, x)_n / (-c1 q, -d1 q, q)_n q^{n(n+1)/2 + 2n}
template <class B>
value_t<B> lam_single(B& be, const value_t<B>& c1, const value_t<B>& d1, const value_t<B>& x)
{
    const auto q = be.q();
    PochRun<B> a1(be, c1), a2(be, d1), a3(be, x);
    auto b1 = inv_run(be, -c1 * q), b2 = inv_run(be, -d1 * q), b3 = inv_run(be, q);
    PowRun<B> qq(be, q);
    value_t<B> tp = be.one();
    return be.sum(0, [](int n) { return tri(n) + 2L * n; }, [&](int n) {
        if (n > 0) tp = tp * qq.at(n + 2);
        return a1.at(n) * a2.at(n) * a3.at(n) * b1.at(n) * b2.at(n) * b3.at(n) * tp;
    });
}

// Values f(s) computed once at the base tolerance.
template <class B, class F>
class Memo {
public:
    Memo(B& be, F f) : be_(be), f_(std::move(f)) {}
    const value_t<B>& at(int s)
    {
        auto it = cache_.find(s);
        if (it == cache_.end()) it = cache_.emplace(s, be_.unscaled([&] { return f_(s); })).first;
        return it->second;
    }

private:
    B& be_;
    F f_;
    std::map<int, value_t<B>> cache_;
};

template <class B, class F>
Memo<B, F> memo(B& be, F f)
{
    return Memo<B, F>(be, std::move(f));
}

// sum_p (-q)_p (-1)_p cp^p/(q)_p sum_k (-q^{p+1})_k ck^k/(q^{p+1})_k
//   sum_n (x, d1)_n/(-d1 q, q)_n q^{n(n+1)/2+(p+k)n} (1 + cdf q^{2n}(1+q^p)(1+q^{p+1}))
// The n-sum is G(p+k) + cdf (1+q^p)(1+q^{p+1}) G(p+k+2).
template <class B>
value_t<B> lam_triple(B& be, const value_t<B>& cp, const value_t<B>& ck, const value_t<B>& x, const value_t<B>& d1,
                      const value_t<B>& cdf)
{
    const auto q = be.q();
    auto G = memo(be, [&](int s) {
        PochRun<B> xn(be, x), dn(be, d1);
        auto e1 = inv_run(be, -d1 * q), e2 = inv_run(be, q);
        return be.sum(0, [s](int n) { return tri(n) + long(s) * n; }, [&](int n) {
            return xn.at(n) * dn.at(n) * e1.at(n) * e2.at(n) * be.q_pow(int(tri(n)) + s * n);
        });
    });
    PochRun<B> mq(be, -q), m1(be, -be.one());
    auto qp = inv_run(be, q);
    PowRun<B> cpp(be, cp);
    return be.sum(0, [](int p) { return long(p); }, [&](int p) {
        auto pref = mq.at(p) * m1.at(p) * qp.at(p) * cpp.at(p);
        return nest(be, pref, [&] {
            const auto qp1 = be.q_pow(p + 1);
            PochRun<B> a(be, -qp1);
            auto bq = inv_run(be, qp1);
            PowRun<B> ckk(be, ck);
            const auto tail = (1L + be.q_pow(p)) * (1L + qp1) * cdf;
            return be.sum(0, [](int k) { return long(k); }, [&](int k) {
                return a.at(k) * bq.at(k) * ckk.at(k) * (G.at(p + k) + tail * G.at(p + k + 2));
            });
        });
    });
}

// sum_{p>=1} (-q)_p (-1)_p dp^p/(q)_p sum_k (-q)_k (-q^p)_k ck^k/(q)_k
//   sum_j (-q^{p+1})_j dj^j/(q^{p+1})_j
//   sum_n (x)_n/(q)_n q^{n(n+1)/2+(p+k+j)n} (1 + cdf q^{2n}(1+q^{p+k})(1+q^{p+k+1}))
// The n-sum is A(s) + cdf (1+q^{p+k})(1+q^{p+k+1}) A(s+2) with s = p+k+j.
template <class B>
value_t<B> lam_quad(B& be, const value_t<B>& dp, const value_t<B>& ck, const value_t<B>& dj, const value_t<B>& x,
                    const value_t<B>& cdf)
{
    const auto q = be.q();
    auto A = memo(be, [&](int s) {
        PochRun<B> xn(be, x);
        auto qn = inv_run(be, q);
        return be.sum(0, [s](int n) { return tri(n) + long(s) * n; },
                      [&](int n) { return xn.at(n) * qn.at(n) * be.q_pow(int(tri(n)) + s * n); });
    });
    PochRun<B> mq(be, -q), m1(be, -be.one());
    auto qp = inv_run(be, q);
    PowRun<B> dpp(be, dp);
    return be.sum(1, [](int p) { return long(p); }, [&](int p) {
        auto pref = mq.at(p) * m1.at(p) * qp.at(p) * dpp.at(p);
        return nest(be, pref, [&] {
            PochRun<B> a1(be, -q), a2(be, -be.q_pow(p));
            auto bq = inv_run(be, q);
            PowRun<B> ckk(be, ck);
            return be.sum(0, [](int k) { return long(k); }, [&](int k) {
                auto pk = a1.at(k) * a2.at(k) * bq.at(k) * ckk.at(k);
                return nest(be, pk, [&] {
                    const auto qp1 = be.q_pow(p + 1);
                    PochRun<B> c1(be, -qp1);
                    auto c2 = inv_run(be, qp1);
                    PowRun<B> djj(be, dj);
                    const auto tail = (1L + be.q_pow(p + k)) * (1L + be.q_pow(p + k + 1)) * cdf;
                    return be.sum(0, [](int j) { return long(j); }, [&](int j) {
                        const int s = p + k + j;
                        return c1.at(j) * c2.at(j) * djj.at(j) * (A.at(s) + tail * A.at(s + 2));
                    });
                });
            });
        });
    });
}

// sum_{p>=1} y^p/(q)_p sum_j (-q)_j dj^j/(q)_j sum_k (-q)_k ck^k/(q)_k
//   sum_m mb^m / ((q^{p+1})_m (-q^s)_{m+1})
//         (1 + cdf (1+q^s)(1+q^{s+1}) / ((1+q^{s+m+1})(1+q^{s+m+2}))),   s = p+j+k
// The m-sum depends on (p, s) only, so the j and k sums fold into the
// convolution C_u = sum_{j+k=u} of their summands.
template <class B>
value_t<B> lam_last(B& be, const value_t<B>& y, const value_t<B>& dj, const value_t<B>& ck, const value_t<B>& mb,
                    const value_t<B>& cdf)
{
    const auto q = be.q();
    std::vector<value_t<B>> E, F, C;
    PochRun<B> ej(be, -q), fk(be, -q);
    auto eq = inv_run(be, q), fq = inv_run(be, q);
    PowRun<B> djj(be, dj), ckk(be, ck);
    auto conv = [&](int u) -> const value_t<B>& {
        while (int(C.size()) <= u) {
            const int n = int(C.size());
            E.push_back(ej.at(n) * eq.at(n) * djj.at(n));
            F.push_back(fk.at(n) * fq.at(n) * ckk.at(n));
            value_t<B> c = be.zero();
            for (int j = 0; j <= n; ++j) c = c + E[j] * F[n - j];
            C.push_back(c);
        }
        return C[u];
    };
    auto qp = inv_run(be, q);
    PowRun<B> yp(be, y);
    return be.sum(1, [](int p) { return 2L * p; }, [&](int p) {
        auto pref = yp.at(p) * qp.at(p);
        return nest(be, pref, [&] {
            return be.sum(0, [](int u) { return long(u); }, [&](int u) {
                const auto& cu = conv(u);
                return nest(be, cu, [&] {
                    const int s = p + u;
                    const auto qs = be.q_pow(s);
                    const auto tail = cdf * (1L + qs) * (1L + qs * q);
                    auto m1 = inv_run(be, be.q_pow(p + 1)), m2 = inv_run(be, -qs);
                    PowRun<B> mbm(be, mb);
                    return be.sum(0, [](int m) { return 2L * m; }, [&](int m) {
                        auto corr = 1L + tail * be.inv((1L + be.q_pow(s + m + 1)) * (1L + be.q_pow(s + m + 2)));
                        return mbm.at(m) * m1.at(m) * m2.at(m + 1) * corr;
                    });
                });
            });
        });
    });
}

// Lambda(c, d, q) of the two-parameter representation.
template <class B>
value_t<B> lambda_cd(B& be, const value_t<B>& c, const value_t<B>& d)
{
    const auto q = be.q(), cd = c * d;
    auto l1 = 3L * cd * P(be, {-c * q, -d * q}, {-cd, -q}) * lam_single(be, c, d, -cd);
    auto l2 = P(be, {-d * q, c}, {-cd, -q}) * lam_triple(be, c, c, -cd, d, cd);
    auto l3 = P(be, {d, c}, {-cd, -q}) * lam_quad(be, d, c, d, -cd, cd);
    auto l4 = 2L * P(be, {d, c}, {}) * lam_last(be, -cd, d, c, -cd, cd);
    return 1L - l1 - l2 - l3 - l4;
}

template <class B>
Sides<value_t<B>> bts2(B& be)
{
    auto c = be.param("c"), d = be.param("d"), z = be.param("z");
    const auto q = be.q(), iz = be.inv(z), iz2 = iz * iz, cd = c * d;
    const auto w = 1L - iz;
    auto t1 = P(be, {-cd * iz, d, c, q, -z * q, -iz}, {-d, -c, z * q, -q, c * iz, d * iz});
    PowRun<B> zj(be, iz), qq(be, q);
    auto mq = inv_run(be, -q);
    value_t<B> pw = be.one();
    auto t2 = P(be, {-cd * iz, d, c}, {-d, -c, c * iz, d * iz}) * w * be.sum(1, tri, [&](int j) {
                  pw = pw * qq.at(j);
                  return pw * zj.at(j) * mq.at(j);
              });
    auto t3 = cd * (1L + 2L * z) * iz2 * w *
              P(be, {-cd * iz, d, c, -c * q * iz, -d * q * iz}, {-d, -c, -q, c * iz, d * iz, -cd * iz2}) *
              lam_single(be, c * iz, d * iz, -cd * iz2);
    auto t4 = P(be, {-cd * iz, d, c, -d * q * iz}, {-d, -c, -q, d * iz, -cd * iz2}) * w *
              lam_triple(be, c, c * iz, -cd * iz2, d * iz, cd);
    auto t5 = P(be, {-cd * iz, d, c}, {-d, -c, -q, -cd * iz2}) * w * lam_quad(be, d, c, d * iz, -cd * iz2, cd);
    auto t6 = 2L * P(be, {-cd * iz, d, c}, {-d, -c}) * w * lam_last(be, -cd * iz, d, c, -cd * iz2, cd);
    return {bbt_sum(be, z, c, d), t1 + t2 + t3 + t4 + t5 + t6};
}

template <class B>
Sides<value_t<B>> sigma2(B& be)
{
    auto c = be.param("c"), d = be.param("d");
    return {sigma(be), P(be, {-c, -d}, {-c * d}) * sigma_cd(be, c, d) + lambda_cd(be, c, d)};
}

template <class B>
Sides<value_t<B>> lambdad0(B& be)
{
    auto c = be.param("c");
    return {lambda_cd(be, c, be.zero()), -2L * sigma1_double(be, c)};
}

template <class B>
Sides<value_t<B>> remark2(B& be)
{
    auto c = be.param("c"), d = be.param("d"), z = be.param("z");
    const auto q = be.q(), cd = c * d;
    auto S = P(be, {-cd, -q}, {-d, -c});
    auto geo = [&](const value_t<B>& x, long w0, long sign) {
        return be.sum(0, [w0](int n) { return w0 + n; }, [&](int n) {
            auto y = x * be.q_pow(n);
            return y * be.inv(1L + sign * y);
        });
    };
    auto scd = geo(cd, 2, 1), sd = geo(d, 1, -1), sc = geo(c, 1, -1);
    auto sq = be.sum(1, [](int n) { return long(n); }, [&](int n) {
        auto x = be.q_pow(n);
        return x * be.inv(1L - x);
    });
    return {sigma_cd(be, c, d),
            be.eps_part(bbt_sum(be, z, c, d)) + S * (1L + 2L * scd) + 2L * S * (sd + sc - sq)};
}

// ---------------------------------------------------------------- sums of tails, classical

template <class B>
Sides<value_t<B>> rsi1(B& be)
{
    const auto q = be.q();
    auto S = s_series(be);
    PochRun<B> mq(be, -q);
    auto lhs = be.sum(0, [](int n) { return long(n) + 1; }, [&](int n) { return S - mq.at(n); });
    return {lhs, S * d_series(be) + sigma(be) * Rational(1, 2)};
}

template <class B>
Sides<value_t<B>> rsi2(B& be)
{
    const auto q = be.q();
    auto S = s_series(be);
    auto odd = inv_run(be, q, 2);
    auto lhs = be.sum(0, [](int n) { return 2L * n + 3; }, [&](int n) { return S - odd.at(n + 1); });
    return {lhs, S * d_series(be, 2) + sigma(be) * Rational(1, 2)};
}

template <class B>
Sides<value_t<B>> euler(B& be)
{
    auto w = be.param("w");
    const auto q = be.q();
    value_t<B> qn = be.one();
    auto lhs = ratio_sum(be, 0, [](int n) { return long(n); }, be.one(), [&](int) {
        auto qn1 = qn * q;
        auto r = w * qn * be.inv(1L - qn1);
        qn = qn1;
        return r;
    });
    return {lhs, be.poch_inf(-w)};
}

template <class B>
Sides<value_t<B>> lebesgue(B& be)
{
    auto a = be.param("a");
    const auto q = be.q();
    value_t<B> qn = be.one();
    auto lhs = ratio_sum(be, 0, tri, be.one(), [&](int) {
        auto qn1 = qn * q;
        auto r = (1L - a * qn) * qn1 * be.inv(1L - qn1);
        qn = qn1;
        return r;
    });
    return {lhs, s_series(be) * be.poch_inf(a * q, 2)};
}

template <class B>
Sides<value_t<B>> jtp(B& be)
{
    auto z = be.param("z");
    const auto q = be.q(), iz = be.inv(z);
    PowRun<B> zp(be, z), zm(be, iz);
    auto sq = [](int n) { return long(n) * n; };
    auto lhs = be.sum(0, sq, [&](int n) { return zp.at(n) * be.q_pow(n * n); }) +
               be.sum(1, sq, [&](int n) { return zm.at(n) * be.q_pow(n * n); });
    return {lhs, be.poch_inf(q * q, 2) * be.poch_inf(-z * q, 2) * be.poch_inf(-q * iz, 2)};
}

// ---------------------------------------------------------------- z-expressions
//
// Pieces of the two derivative identities, as functions of z; used to test
// the epsilon projection against finite differences.

inline const std::vector<std::string>& z_expression_names()
{
    static const std::vector<std::string> names{
        "rcq:rho3(-z,1,c)",  "rcq:product",  "rcq:(-1/z)_inf", "rcq:1/(c/z)_inf", "rcq:(zq)_inf",
        "rcq:difference",    "bbt:rho4(-z,1,c,d)", "bbt:product", "bbt:(-cd/z)_inf", "bbt:1/(d/z)_inf",
        "bbt:(-zq)_inf",     "bbt:difference"};
    return names;
}

template <class B>
value_t<B> z_expression(B& be, std::size_t which)
{
    auto c = be.param("c"), d = be.param("d"), z = be.param("z");
    const auto q = be.q(), iz = be.inv(z);
    switch (which) {
    case 0: return rho3(be, -z, be.one(), c);
    case 1: return P(be, {c, -z * q, -iz, q}, {c * iz, -c, z * q, -q});
    case 2: return be.poch_inf(-iz);
    case 3: return be.inv_poch_inf(c * iz);
    case 4: return be.poch_inf(z * q);
    case 5: return rcq_f(be, z, c);
    case 6: return bbt_sum(be, z, c, d);
    case 7: return P(be, {d, c, -c * d * iz, -z * q, -iz, q}, {d * iz, -d, c * iz, -c, z * q, -q});
    case 8: return be.poch_inf(-c * d * iz);
    case 9: return be.inv_poch_inf(d * iz);
    case 10: return be.poch_inf(-z * q);
    case 11: return bbt_f(be, z, c, d);
    }
    throw precondition_error("no z-expression " + std::to_string(which));
}

} // namespace qseries::builders
