#include <gtest/gtest.h>

#include <map>
#include <random>
#include <vector>

#include "qseries/formal_series.hpp"

using namespace qseries;

namespace {

ContextPtr ctx_qc(int n) { return make_context({{"c", 1, {}}}, n); }
ContextPtr ctx_qce(int n) { return make_context({{"c", 1, {}}, {"eps", 0, 2}}, n); }

// Naive reference arithmetic: map from exponent vector to rational.
using Ref = std::map<std::vector<unsigned>, Rational>;

Ref to_ref(const FormalSeries& s)
{
    Ref r;
    const auto& ctx = *s.context();
    for (std::size_t i = 0; i < s.num_terms(); ++i) {
        std::vector<unsigned> e;
        for (std::size_t v = 0; v < ctx.num_variables(); ++v) e.push_back(ctx.exponent(s.rank_at(i), v));
        r[e] = s.coefficient_at(i);
    }
    return r;
}

Ref ref_mul(const Ref& a, const Ref& b, const SeriesContext& ctx)
{
    Ref out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            std::vector<unsigned> e(ea.size());
            unsigned w = 0;
            bool ok = true;
            for (std::size_t v = 0; v < e.size(); ++v) {
                e[v] = ea[v] + eb[v];
                w += e[v] * ctx.variables()[v].weight;
                if (auto nil = ctx.variables()[v].nilpotency; nil && e[v] >= *nil) ok = false;
            }
            if (!ok || w > static_cast<unsigned>(ctx.order())) continue;
            out[e] += ca * cb;
        }
    for (auto it = out.begin(); it != out.end();)
        it = it->second == 0 ? out.erase(it) : std::next(it);
    return out;
}

FormalSeries random_series(const ContextPtr& ctx, std::mt19937_64& rng, int terms, bool unit)
{
    FormalSeries s(ctx);
    for (int i = 0; i < terms; ++i) {
        auto r = static_cast<std::uint32_t>(rng() % ctx->size());
        Rational c(static_cast<long>(rng() % 19) - 9, static_cast<long>(rng() % 7) + 1);
        c.canonicalize();
        s += FormalSeries::monomial(ctx, ctx->monomial(r), c);
    }
    if (unit) s = s - s.coefficient(Monomial{}) + Rational(static_cast<long>(rng() % 5) + 1, 3);
    return s;
}

FormalSeries var(const ContextPtr& ctx, const char* n) { return FormalSeries::variable(ctx, n); }

} // namespace

TEST(Context, PrependsQAndEnumeratesGraded)
{
    auto ctx = ctx_qc(3);
    ASSERT_EQ(ctx->num_variables(), 2u);
    EXPECT_EQ(ctx->variables()[0].name, "q");
    // monomials q^i c^j with i + j <= 3
    EXPECT_EQ(ctx->size(), 10u);
    for (std::uint32_t r = 1; r < ctx->size(); ++r) EXPECT_LE(ctx->weight(r - 1), ctx->weight(r));
    EXPECT_EQ(ctx->format(0), "1");
    EXPECT_EQ(ctx->rank_of(Monomial{{"q", 2}, {"c", 1}}), ctx->rank_of(parse_monomial("q^2*c")));
}

TEST(Context, RejectsBadSpecs)
{
    EXPECT_THROW(make_context({{"e", 0, {}}}, 5), context_error);
    EXPECT_THROW(make_context({{"c", 1, {}}, {"c", 1, {}}}, 5), context_error);
    EXPECT_THROW(make_context({{"q", 2, {}}}, 5), context_error);
    EXPECT_THROW(make_context({{"e", 0, 1}}, 5), context_error);
    EXPECT_THROW(make_context({}, -1), context_error);
}

TEST(FormalSeries, GeometricSeriesInverse)
{
    auto ctx = make_context({}, 12);
    auto q = FormalSeries::q_power(ctx, 1);
    auto g = invert(1L - q);
    for (unsigned k = 0; k <= 12; ++k) EXPECT_EQ(g.coefficient(Monomial{{"q", k}}), 1) << k;
}

TEST(FormalSeries, EulerPentagonal)
{
    const int N = 40;
    auto ctx = make_context({}, N);
    auto q = FormalSeries::q_power(ctx, 1);
    FormalSeries p = FormalSeries::constant(ctx, 1);
    for (int k = 1; k <= N; ++k) p *= 1L - FormalSeries::q_power(ctx, k);
    std::map<int, int> expect;
    for (int k = -10; k <= 10; ++k) {
        int e = k * (3 * k - 1) / 2;
        if (e <= N) expect[e] = (k % 2 == 0) ? 1 : -1;
    }
    for (int n = 0; n <= N; ++n) {
        int want = expect.count(n) ? expect[n] : 0;
        EXPECT_EQ(p.coefficient(Monomial{{"q", static_cast<unsigned>(n)}}), want) << n;
    }
}

TEST(FormalSeries, MultiplicationMatchesNaiveReference)
{
    std::mt19937_64 rng(7);
    for (auto ctx : {ctx_qc(9), ctx_qce(8), make_context({{"c", 1, {}}, {"d", 2, 3}}, 10)}) {
        for (int trial = 0; trial < 20; ++trial) {
            auto a = random_series(ctx, rng, 1 + static_cast<int>(rng() % 15), false);
            auto b = random_series(ctx, rng, 1 + static_cast<int>(rng() % 15), false);
            EXPECT_EQ(to_ref(a * b), ref_mul(to_ref(a), to_ref(b), *ctx));
        }
    }
}

TEST(FormalSeries, RingAxioms)
{
    std::mt19937_64 rng(11);
    auto ctx = ctx_qce(7);
    for (int trial = 0; trial < 25; ++trial) {
        auto a = random_series(ctx, rng, 8, false);
        auto b = random_series(ctx, rng, 8, false);
        auto c = random_series(ctx, rng, 8, false);
        EXPECT_EQ(a + b, b + a);
        EXPECT_EQ(a * b, b * a);
        EXPECT_EQ((a * b) * c, a * (b * c));
        EXPECT_EQ(a * (b + c), a * b + a * c);
        EXPECT_TRUE((a - a).is_zero());
    }
}

TEST(FormalSeries, InverseOfUnits)
{
    std::mt19937_64 rng(13);
    for (auto ctx : {ctx_qc(10), ctx_qce(9)}) {
        auto one = FormalSeries::constant(ctx, 1);
        for (int trial = 0; trial < 20; ++trial) {
            auto a = random_series(ctx, rng, 12, true);
            EXPECT_EQ(a * invert(a), one);
        }
    }
}

TEST(FormalSeries, NonUnitInversionFails)
{
    auto ctx = ctx_qce(5);
    EXPECT_THROW(invert(var(ctx, "c")), precondition_error);
    EXPECT_THROW(invert(var(ctx, "eps")), precondition_error);
    EXPECT_THROW(invert(FormalSeries(ctx)), precondition_error);
}

TEST(FormalSeries, EpsilonIsNilpotent)
{
    auto ctx = ctx_qce(4);
    auto e = var(ctx, "eps");
    EXPECT_TRUE((e * e).is_zero());
    // (1+eps)^5 = 1 + 5 eps
    auto z = 1L + e, p = FormalSeries::constant(ctx, 1);
    for (int i = 0; i < 5; ++i) p *= z;
    auto [f1, fe] = project_epsilon(p);
    EXPECT_EQ(f1, FormalSeries::constant(ctx, 1));
    EXPECT_EQ(fe, FormalSeries::constant(ctx, 5));
    // 1/(1+eps) = 1 - eps
    EXPECT_EQ(invert(z), 1L - e);
}

TEST(FormalSeries, EpsilonProjectionIsADerivative)
{
    // f(z) = 1/(1 - z q): f(1+eps) = f(1) + eps * q/(1-q)^2
    auto ctx = ctx_qce(10);
    auto q = FormalSeries::q_power(ctx, 1);
    auto z = 1L + var(ctx, "eps");
    auto [f1, fe] = project_epsilon(invert(1L - z * q));
    EXPECT_EQ(f1, invert(1L - q));
    EXPECT_EQ(fe, q * invert((1L - q) * (1L - q)));
    EXPECT_THROW(project_epsilon(q, "c"), precondition_error);
}

TEST(FormalSeries, TruncationOverflowDropsTerms)
{
    auto ctx = ctx_qc(5);
    auto q3 = FormalSeries::q_power(ctx, 3);
    EXPECT_TRUE((q3 * q3).is_zero());
    EXPECT_TRUE(FormalSeries::q_power(ctx, 6).is_zero());
}

TEST(FormalSeries, CoefficientQueries)
{
    auto ctx = ctx_qc(5);
    auto s = Rational(1, 2) * var(ctx, "c") + Rational(-3, 4) * FormalSeries::q_power(ctx, 2);
    EXPECT_EQ(s.coefficient(parse_monomial("c")), Rational(1, 2));
    EXPECT_EQ(s.coefficient(parse_monomial("q^2")), Rational(-3, 4));
    EXPECT_EQ(s.coefficient(parse_monomial("q")), 0);
    EXPECT_THROW(s.coefficient(parse_monomial("x")), context_error);
    EXPECT_THROW(s.coefficient(parse_monomial("q^6")), context_error);
    EXPECT_THROW(parse_monomial("q^"), context_error);
}

TEST(FormalSeries, ForeignContextRejected)
{
    auto a = FormalSeries::q_power(ctx_qc(5), 1);
    auto b = FormalSeries::q_power(ctx_qc(6), 1);
    EXPECT_THROW(a + b, context_error);
    // Same shape, different object: allowed.
    auto c = FormalSeries::q_power(ctx_qc(5), 2);
    EXPECT_EQ((a * a), c);
}

TEST(FormalSeries, SubstituteQPower)
{
    auto ctx = make_context({}, 20);
    auto q = FormalSeries::q_power(ctx, 1);
    auto g = substitute_q_power(invert(1L - q), 3);
    EXPECT_EQ(g, invert(1L - FormalSeries::q_power(ctx, 3)));
    auto ctx2 = ctx_qc(6);
    EXPECT_THROW(substitute_q_power(var(ctx2, "c"), 2), precondition_error);
}

TEST(FormalSeries, SubstituteVariable)
{
    auto ctx = ctx_qc(8);
    auto c = var(ctx, "c");
    auto q = FormalSeries::q_power(ctx, 1);
    auto f = invert(1L - c * q) * (1L + c);
    auto zero = FormalSeries(ctx);
    EXPECT_EQ(substitute_var(f, "c", zero), FormalSeries::constant(ctx, 1));
    // c -> q/2 is weight preserving
    auto g = substitute_var(f, "c", q * Rational(1, 2));
    EXPECT_EQ(g, invert(1L - q * q * Rational(1, 2)) * (1L + q * Rational(1, 2)));
    EXPECT_THROW(substitute_var(f, "c", FormalSeries::constant(ctx, 1)), precondition_error);
    // substitution is a ring homomorphism
    auto h = (1L + c * c * q) * invert(1L + c);
    auto r = q * q + c * q;
    EXPECT_EQ(substitute_var(f * h, "c", r), substitute_var(f, "c", r) * substitute_var(h, "c", r));
}

TEST(FormalSeries, EqualUpToReportsLeastWitness)
{
    auto ctx = ctx_qc(6);
    auto c = var(ctx, "c");
    auto q = FormalSeries::q_power(ctx, 1);
    auto a = invert(1L - c * q);
    auto b = a + q * q * q + Rational(2) * c * c * c;
    auto rep = equal_up_to(a, b, 6);
    ASSERT_FALSE(rep.equal);
    // c^3 and q^3 share weight 3; smaller q-exponent sorts first.
    EXPECT_EQ(rep.first_mismatch->monomial_text, "c^3");
    EXPECT_EQ(rep.first_mismatch->lhs, 0);
    EXPECT_EQ(rep.first_mismatch->rhs, 2);
    EXPECT_TRUE(equal_up_to(a, b, 2).equal);
    EXPECT_THROW(equal_up_to(a, b, 7), precondition_error);
}

TEST(FormalSeries, TruncationIsMonotone)
{
    // Truncating a product at M agrees with the product computed at order M.
    auto big = ctx_qc(12), small = ctx_qc(7);
    auto build = [](const ContextPtr& ctx) {
        auto c = FormalSeries::variable(ctx, "c");
        auto q = FormalSeries::q_power(ctx, 1);
        return invert((1L - c * q) * (1L + q * q)) * (1L - c);
    };
    auto a = build(big).truncated(7), b = build(small);
    for (const auto& [m, coef] : b.terms()) EXPECT_EQ(a.coefficient(m), coef);
    EXPECT_EQ(a.num_terms(), b.num_terms());
}

TEST(FormalSeries, ShiftQ)
{
    auto ctx = ctx_qc(6);
    auto q = FormalSeries::q_power(ctx, 1);
    auto c = var(ctx, "c");
    EXPECT_EQ(shift_q(q * q * c + q * q * q, -2), c + q);
    EXPECT_THROW(shift_q(q + c, -1), precondition_error);
}
