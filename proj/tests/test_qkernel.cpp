#include <gtest/gtest.h>

#include <random>

#include "qseries/qkernel.hpp"

using namespace qseries;

namespace {

FormalSeries Q(const ContextPtr& ctx, int k = 1) { return FormalSeries::q_power(ctx, k); }
FormalSeries V(const ContextPtr& ctx, const char* n) { return FormalSeries::variable(ctx, n); }
FormalSeries K(const ContextPtr& ctx, Rational r) { return FormalSeries::constant(ctx, r); }

// Coefficients of a q-only series as a vector.
std::vector<Rational> qcoeffs(const FormalSeries& s)
{
    std::vector<Rational> out;
    for (int n = 0; n <= s.context()->order(); ++n)
        out.push_back(s.coefficient(n ? Monomial{{"q", static_cast<unsigned>(n)}} : Monomial{}));
    return out;
}

std::vector<Rational> ints(std::initializer_list<long> v) { return {v.begin(), v.end()}; }

// Distinct partitions of n with parts <= n, by direct enumeration.
long distinct_partitions(int n, int max_part)
{
    if (n == 0) return 1;
    long t = 0;
    for (int p = std::min(n, max_part); p >= 1; --p) t += distinct_partitions(n - p, p - 1);
    return t;
}

} // namespace

TEST(Poch, FiniteProducts)
{
    auto ctx = make_context({{"a", 1, {}}}, 10);
    EXPECT_EQ(poch(ctx, V(ctx, "a"), 0), K(ctx, 1));
    EXPECT_EQ(poch(ctx, Q(ctx), 2), 1L - Q(ctx) - Q(ctx, 2) + Q(ctx, 3));
    auto m1 = poch(ctx, K(ctx, -1), 3);
    EXPECT_EQ(m1.coefficient({}), 2);
    EXPECT_EQ(m1, 2L * (1L + Q(ctx)) * (1L + Q(ctx, 2)));
}

TEST(Poch, SplitsAtAnyIndex)
{
    auto ctx = make_context({{"a", 1, {}}}, 14);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        int m = static_cast<int>(rng() % 7), n = static_cast<int>(rng() % 7);
        FormalSeries a = trial % 2 ? V(ctx, "a") * Rational(static_cast<long>(rng() % 5) + 1, 3)
                                   : K(ctx, Rational(static_cast<long>(rng() % 9) - 4, 5));
        EXPECT_EQ(poch(ctx, a, m + n), poch(ctx, a, m) * poch(ctx, a * Q(ctx, m), n));
    }
}

TEST(PochInf, Expansions)
{
    auto ctx = make_context({}, 5);
    EXPECT_EQ(poch_inf(ctx, FormalSeries(ctx)), K(ctx, 1));
    EXPECT_EQ(qcoeffs(poch_inf(ctx, Q(ctx))), ints({1, -1, -1, 0, 0, 1}));
    EXPECT_EQ(qcoeffs(poch_inf(ctx, -Q(ctx))), ints({1, 1, 1, 2, 2, 3}));
}

TEST(PochInf, FactorsThroughFinitePart)
{
    auto ctx = make_context({{"a", 1, {}}}, 12);
    auto a = V(ctx, "a");
    for (int K = 0; K <= 14; K += 2)
        EXPECT_EQ(poch_inf(ctx, a), poch(ctx, a, K) * poch_inf(ctx, a * Q(ctx, K)));
    auto r = K(ctx, Rational(2, 3));
    for (int K = 0; K <= 6; ++K) EXPECT_EQ(poch_inf(ctx, r), poch(ctx, r, K) * poch_inf(ctx, r * Q(ctx, K)));
}

TEST(PochInt, NegativeIndex)
{
    auto ctx = make_context({{"a", 1, {}}}, 10);
    auto a = V(ctx, "a");
    EXPECT_EQ(poch_int(ctx, a, 3), poch(ctx, a, 3));
    EXPECT_EQ(poch_int(ctx, a, 0), K(ctx, 1));
    EXPECT_EQ(poch_int(ctx, Q(ctx, 2), -1), invert(1L - Q(ctx)));
    EXPECT_EQ(poch_int(ctx, Q(ctx, 5), -2), invert((1L - Q(ctx, 4)) * (1L - Q(ctx, 3))));
    EXPECT_THROW(poch_int(ctx, Q(ctx), -2), precondition_error);
}

TEST(QSum, GeometricAndBoundCheck)
{
    auto ctx = make_context({}, 9);
    auto g = qsum(ctx, 0, [](int n) { return long(n); }, [&](int n) { return Q(ctx, n); });
    EXPECT_EQ(g, invert(1L - Q(ctx)));
    EXPECT_THROW(qsum(ctx, 0, [](int n) { return long(n + 1); }, [&](int n) { return Q(ctx, n); }), bound_violation);
}

TEST(QSum, MultiMatchesNestedLoops)
{
    auto ctx = make_context({{"c", 1, {}}}, 10);
    auto c = V(ctx, "c");
    // sum_{m,n} c^{m+n+1} q^{n(n+1)/2} / (1 - q^{n+m+1})
    auto term = [&](const std::array<int, 2>& i) {
        FormalSeries cp = K(ctx, 1);
        for (int k = 0; k < i[0] + i[1] + 1; ++k) cp *= c;
        return cp * Q(ctx, i[1] * (i[1] + 1) / 2) * invert(1L - Q(ctx, i[0] + i[1] + 1));
    };
    auto multi = qsum_multi<2>(ctx, {0, 0}, [](const std::array<int, 2>& i) { return long(i[0] + i[1] + 1); }, term);
    FormalSeries direct(ctx);
    for (int m = 0; m <= 12; ++m)
        for (int n = 0; n <= 12; ++n) direct += term({m, n});
    EXPECT_EQ(multi, direct);
    auto only0 = qsum_multi<2>(ctx, {0, 0}, [](const std::array<int, 2>& i) { return long(11 * (i[0] + i[1])); },
                               [&](const std::array<int, 2>&) { return K(ctx, 7); });
    EXPECT_EQ(only0, K(ctx, 7));
}

TEST(Phi, ReducesAndMatchesLoop)
{
    auto ctx = make_context({{"b", 1, {}}, {"t", 1, {}}}, 10);
    auto b = V(ctx, "b"), t = V(ctx, "t");
    EXPECT_EQ(phi(ctx, {b}, {}, FormalSeries(ctx)), K(ctx, 1));
    auto c = K(ctx, Rational(1, 3));
    auto lhs = phi(ctx, {FormalSeries(ctx), b}, {c}, t);
    FormalSeries direct(ctx);
    for (int n = 0; n <= 10; ++n) {
        FormalSeries tn = K(ctx, 1);
        for (int k = 0; k < n; ++k) tn *= t;
        direct += poch(ctx, b, n) * tn * invert(poch(ctx, Q(ctx), n) * poch(ctx, c, n));
    }
    EXPECT_EQ(lhs, direct);
    EXPECT_THROW(phi(ctx, {b}, {}, K(ctx, Rational(1, 2))), precondition_error);
}

TEST(Phi, HeineTransformation)
{
    // 2phi1(a,b;c;q,t) = (b,at)_inf/(c,t)_inf 2phi1(c/b,t;at;q,b) with a = 1/2 and
    // b, c, t formal; (c/b)_n b^n is expanded as prod (b - c q^k).
    auto ctx = make_context({{"b", 1, {}}, {"c", 1, {}}, {"t", 1, {}}}, 12);
    FormalBackend be(ctx);
    auto a = K(ctx, Rational(1, 2));
    auto b = V(ctx, "b"), c = V(ctx, "c"), t = V(ctx, "t");
    auto lhs = phi(be, {a, b}, {c}, t);
    auto sum = be.sum(0, [](int n) { return long(n); }, [&](int n) {
        return poch_scaled(be, c, b, n) * poch(be, t, n) * invert(poch(be, Q(ctx), n) * poch(be, a * t, n));
    });
    auto rhs = inf_ratio(be, {b, a * t}, {c, t}) * sum;
    EXPECT_TRUE(equal_up_to(lhs, rhs, 12).equal);
}

TEST(Named, SAndD)
{
    auto ctx = make_context({}, 12);
    auto s = qcoeffs(s_series(ctx));
    for (int n = 0; n <= 12; ++n) EXPECT_EQ(s[n], distinct_partitions(n, n)) << n;
    auto d = qcoeffs(d_series(ctx));
    EXPECT_EQ(d[0], Rational(-1, 2));
    for (int n = 1; n <= 12; ++n) {
        long divisors = 0;
        for (int k = 1; k <= n; ++k) divisors += n % k == 0;
        EXPECT_EQ(d[n], divisors) << n;
    }
    auto d2 = qcoeffs(d_series(ctx, 2));
    for (int n = 0; n <= 12; ++n) EXPECT_EQ(d2[n], n % 2 ? Rational(0) : d[n / 2]);
    // S(q) (q;q^2)_inf = 1 by Euler
    FormalBackend be(ctx);
    EXPECT_EQ(s_series(ctx) * be.poch_inf(Q(ctx), 2), K(ctx, 1));
}

TEST(Named, Rho3AtCZeroMatchesLoop)
{
    auto ctx = make_context({}, 15);
    auto a = K(ctx, Rational(1, 2)), b = K(ctx, Rational(1, 3));
    FormalSeries direct(ctx);
    for (int n = 0; n * (n + 1) / 2 <= 15; ++n) {
        Rational ab = 1;
        for (int k = 0; k < n; ++k) ab *= Rational(-3, 2);
        FormalSeries den = K(ctx, 1);
        for (int k = 1; k <= n; ++k) den *= 1L + a * Q(ctx, k);
        direct += ab * Q(ctx, n * (n + 1) / 2) * invert(den);
    }
    EXPECT_EQ(rho3(ctx, a, b, FormalSeries(ctx)), Rational(4) * direct);
}

TEST(Named, ThreeVariableReciprocity)
{
    auto ctx = make_context({}, 20);
    FormalBackend be(ctx);
    auto a = K(ctx, Rational(1, 2)), b = K(ctx, Rational(1, 3)), c = K(ctx, Rational(1, 5));
    auto lhs = rho3(ctx, a, b, c) - rho3(ctx, b, a, c);
    auto rhs = (invert(b) - invert(a)) *
               inf_ratio(be, {c, a * Q(ctx) / b, b * Q(ctx) / a, Q(ctx)}, {-c / a, -c / b, -a * Q(ctx), -b * Q(ctx)});
    EXPECT_EQ(lhs, rhs);
    EXPECT_TRUE((rho3(ctx, a, a, c) - rho3(ctx, a, a, c)).is_zero());
}

TEST(Named, FourVariableReciprocity)
{
    auto ctx = make_context({}, 20);
    FormalBackend be(ctx);
    auto a = K(ctx, Rational(1, 2)), b = K(ctx, Rational(1, 3)), c = K(ctx, Rational(1, 7)), d = K(ctx, Rational(1, 11));
    auto q = Q(ctx);
    EXPECT_EQ(rho4(ctx, a, b, c, FormalSeries(ctx)), rho3(ctx, a, b, c));
    auto lhs = rho4(ctx, a, b, c, d) - rho4(ctx, b, a, c, d);
    auto rhs = (invert(b) - invert(a)) *
               inf_ratio(be, {c, d, c * d / (a * b), a * q / b, b * q / a, q},
                         {-c / a, -d / a, -c / b, -d / b, -a * q, -b * q});
    EXPECT_EQ(lhs, rhs);
}

TEST(Classical, QBinomialRandomA)
{
    auto ctx = make_context({{"z", 1, {}}}, 14);
    FormalBackend be(ctx);
    auto z = V(ctx, "z");
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Rational ar(static_cast<long>(rng() % 41) - 20, static_cast<long>(rng() % 13) + 1);
        ar.canonicalize();
        auto a = K(ctx, ar);
        EXPECT_EQ(phi(be, {a}, {}, z), be.poch_inf(a * z) * be.inv_poch_inf(z)) << ar.get_str();
    }
}

TEST(Classical, Euler)
{
    auto ctx = make_context({{"w", 1, {}}}, 16);
    FormalBackend be(ctx);
    auto w = V(ctx, "w");
    auto lhs = be.sum(0, [](int n) { return long(n); }, [&](int n) {
        FormalSeries wn = K(ctx, 1);
        for (int k = 0; k < n; ++k) wn *= w;
        return wn * Q(ctx, n * (n - 1) / 2) * invert(poch(be, Q(ctx), n));
    });
    EXPECT_EQ(lhs, be.poch_inf(-w));
}

TEST(Classical, JacobiTripleProduct)
{
    auto ctx = make_context({}, 30);
    FormalBackend be(ctx);
    for (Rational zr : {Rational(1, 2), Rational(-3, 1), Rational(5, 7)}) {
        auto z = K(ctx, zr), zi = K(ctx, 1 / zr);
        auto lhs = be.sum(0, [](int n) { return long(n) * n; }, [&](int n) {
            FormalSeries p = K(ctx, 1);
            for (int k = 0; k < n; ++k) p *= z;
            return p * Q(ctx, n * n);
        }) + be.sum(1, [](int n) { return long(n) * n; }, [&](int n) {
            FormalSeries p = K(ctx, 1);
            for (int k = 0; k < n; ++k) p *= zi;
            return p * Q(ctx, n * n);
        });
        auto rhs = be.poch_inf(Q(ctx, 2), 2) * be.poch_inf(-z * Q(ctx), 2) * be.poch_inf(-zi * Q(ctx), 2);
        EXPECT_EQ(lhs, rhs) << zr.get_str();
    }
}

TEST(Classical, Lebesgue)
{
    auto ctx = make_context({{"a", 1, {}}}, 16);
    FormalBackend be(ctx);
    auto a = V(ctx, "a");
    auto lhs = be.sum(0, [](int n) { return long(n) * (n + 1) / 2; }, [&](int n) {
        return poch(be, a, n) * Q(ctx, n * (n + 1) / 2) * invert(poch(be, Q(ctx), n));
    });
    EXPECT_EQ(lhs, s_series(ctx) * be.poch_inf(a * Q(ctx), 2));
}
