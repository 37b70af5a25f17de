#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "context.hpp"
#include "errors.hpp"
#include "rational.hpp"

namespace qseries {

// Truncated multivariate series with exact rational coefficients.
//
// Stored as numerators over one positive common denominator, terms sorted
// by rank (hence by weight), no zero numerators, and gcd(den, nums) == 1.
// That form is canonical, so structural equality is coefficient equality.
class FormalSeries {
public:
    FormalSeries() = default;
    explicit FormalSeries(ContextPtr ctx) : ctx_(std::move(ctx)) {}

    static FormalSeries constant(ContextPtr ctx, const Rational& c)
    {
        FormalSeries s(std::move(ctx));
        if (c != 0) {
            s.ranks_.push_back(0);
            s.nums_.push_back(c.get_num());
            s.den_ = c.get_den();
        }
        return s;
    }

    static FormalSeries monomial(ContextPtr ctx, const Monomial& m, const Rational& c = 1)
    {
        auto r = ctx->try_rank_of(m);
        FormalSeries s(std::move(ctx));
        if (r && c != 0) {
            s.ranks_.push_back(*r);
            s.nums_.push_back(c.get_num());
            s.den_ = c.get_den();
        }
        return s;
    }

    static FormalSeries variable(ContextPtr ctx, const std::string& name)
    {
        ctx->index_or_throw(name);
        return monomial(std::move(ctx), Monomial{{name, 1}});
    }

    // q^k; zero when k exceeds the truncation order.
    static FormalSeries q_power(ContextPtr ctx, int k)
    {
        if (k < 0) throw precondition_error("negative power of q in a formal series");
        if (k == 0) return constant(std::move(ctx), 1);
        return monomial(std::move(ctx), Monomial{{"q", static_cast<unsigned>(k)}});
    }

    const ContextPtr& context() const { return ctx_; }
    bool is_zero() const { return ranks_.empty(); }
    std::size_t num_terms() const { return ranks_.size(); }

    // Least total weight of a monomial present; nullopt for zero.
    std::optional<unsigned> valuation() const
    {
        if (ranks_.empty()) return std::nullopt;
        return ctx_->weight(ranks_.front());
    }

    std::uint32_t rank_at(std::size_t i) const { return ranks_[i]; }
    Rational coefficient_at(std::size_t i) const
    {
        Rational r(nums_[i], den_);
        r.canonicalize();
        return r;
    }

    Rational coefficient(const Monomial& m) const
    {
        require_context();
        return coefficient_of_rank(ctx_->rank_of(m));
    }

    Rational coefficient_of_rank(std::uint32_t rank) const
    {
        auto it = std::lower_bound(ranks_.begin(), ranks_.end(), rank);
        if (it == ranks_.end() || *it != rank) return 0;
        return coefficient_at(static_cast<std::size_t>(it - ranks_.begin()));
    }

    std::vector<std::pair<Monomial, Rational>> terms() const
    {
        std::vector<std::pair<Monomial, Rational>> out;
        out.reserve(ranks_.size());
        for (std::size_t i = 0; i < ranks_.size(); ++i) out.emplace_back(ctx_->monomial(ranks_[i]), coefficient_at(i));
        return out;
    }

    // Drops every monomial of weight greater than m.
    FormalSeries truncated(int m) const
    {
        FormalSeries s(ctx_);
        for (std::size_t i = 0; i < ranks_.size(); ++i) {
            if (static_cast<int>(ctx_->weight(ranks_[i])) > m) break;
            s.ranks_.push_back(ranks_[i]);
            s.nums_.push_back(nums_[i]);
        }
        s.den_ = den_;
        s.normalize();
        return s;
    }

    FormalSeries operator-() const
    {
        FormalSeries s = *this;
        for (auto& n : s.nums_) n = -n;
        return s;
    }

    FormalSeries& operator+=(const FormalSeries& o) { return *this = add(*this, o, false); }
    FormalSeries& operator-=(const FormalSeries& o) { return *this = add(*this, o, true); }
    FormalSeries& operator*=(const FormalSeries& o) { return *this = mul(*this, o); }
    FormalSeries& operator*=(const Rational& c) { return *this = scale(*this, c); }

    friend FormalSeries operator+(const FormalSeries& a, const FormalSeries& b) { return add(a, b, false); }
    friend FormalSeries operator-(const FormalSeries& a, const FormalSeries& b) { return add(a, b, true); }
    friend FormalSeries operator*(const FormalSeries& a, const FormalSeries& b) { return mul(a, b); }
    friend FormalSeries operator/(const FormalSeries& a, const FormalSeries& b) { return mul(a, invert(b)); }

    friend FormalSeries operator*(const FormalSeries& a, const Rational& c) { return scale(a, c); }
    friend FormalSeries operator*(const Rational& c, const FormalSeries& a) { return scale(a, c); }
    friend FormalSeries operator/(const FormalSeries& a, const Rational& c)
    {
        if (c == 0) throw precondition_error("division of a series by zero");
        return scale(a, 1 / c);
    }
    friend FormalSeries operator+(const FormalSeries& a, const Rational& c) { return a + constant(a.ctx_, c); }
    friend FormalSeries operator+(const Rational& c, const FormalSeries& a) { return constant(a.ctx_, c) + a; }
    friend FormalSeries operator-(const FormalSeries& a, const Rational& c) { return a - constant(a.ctx_, c); }
    friend FormalSeries operator-(const Rational& c, const FormalSeries& a) { return constant(a.ctx_, c) - a; }
    friend FormalSeries operator*(const FormalSeries& a, long c) { return scale(a, Rational(c)); }
    friend FormalSeries operator*(long c, const FormalSeries& a) { return scale(a, Rational(c)); }
    friend FormalSeries operator+(const FormalSeries& a, long c) { return a + Rational(c); }
    friend FormalSeries operator+(long c, const FormalSeries& a) { return Rational(c) + a; }
    friend FormalSeries operator-(const FormalSeries& a, long c) { return a - Rational(c); }
    friend FormalSeries operator-(long c, const FormalSeries& a) { return Rational(c) - a; }
    friend FormalSeries operator/(long c, const FormalSeries& a) { return scale(invert(a), Rational(c)); }

    friend bool operator==(const FormalSeries& a, const FormalSeries& b)
    {
        check_same(a, b);
        return a.den_ == b.den_ && a.ranks_ == b.ranks_ && a.nums_ == b.nums_;
    }
    friend bool operator!=(const FormalSeries& a, const FormalSeries& b) { return !(a == b); }

    friend FormalSeries invert(const FormalSeries& a);
    friend FormalSeries substitute_q_power(const FormalSeries& a, int k);
    friend FormalSeries substitute_var(const FormalSeries& a, const std::string& name, const FormalSeries& repl);
    friend std::pair<FormalSeries, FormalSeries> project_epsilon(const FormalSeries& a, const std::string& name);
    friend FormalSeries shift_q(const FormalSeries& a, int k);

    static void check_same(const FormalSeries& a, const FormalSeries& b)
    {
        a.require_context();
        b.require_context();
        if (a.ctx_ != b.ctx_ && !a.ctx_->same_shape(*b.ctx_))
            throw context_error("operands belong to different series contexts");
    }

private:
    void require_context() const
    {
        if (!ctx_) throw context_error("series has no context");
    }

    void normalize()
    {
        if (ranks_.empty()) {
            den_ = 1;
            return;
        }
        if (sgn(den_) < 0) {
            den_ = -den_;
            for (auto& n : nums_) n = -n;
        }
        if (den_ == 1) return;
        mpz_class g = den_;
        for (const auto& n : nums_) {
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
            if (g == 1) return;
        }
        mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
        for (auto& n : nums_) mpz_divexact(n.get_mpz_t(), n.get_mpz_t(), g.get_mpz_t());
    }

    static FormalSeries scale(const FormalSeries& a, const Rational& c)
    {
        a.require_context();
        FormalSeries s(a.ctx_);
        if (c == 0 || a.is_zero()) return s;
        s.ranks_ = a.ranks_;
        s.nums_.reserve(a.nums_.size());
        for (const auto& n : a.nums_) s.nums_.push_back(n * c.get_num());
        s.den_ = a.den_ * c.get_den();
        s.normalize();
        return s;
    }

    static FormalSeries add(const FormalSeries& a, const FormalSeries& b, bool subtract)
    {
        check_same(a, b);
        if (b.is_zero()) return a;
        if (a.is_zero()) return subtract ? -b : b;
        FormalSeries s(a.ctx_);
        mpz_class fa = 1, fb = 1;
        if (a.den_ != b.den_) {
            mpz_lcm(s.den_.get_mpz_t(), a.den_.get_mpz_t(), b.den_.get_mpz_t());
            mpz_divexact(fa.get_mpz_t(), s.den_.get_mpz_t(), a.den_.get_mpz_t());
            mpz_divexact(fb.get_mpz_t(), s.den_.get_mpz_t(), b.den_.get_mpz_t());
        } else {
            s.den_ = a.den_;
        }
        if (subtract) fb = -fb;
        s.ranks_.reserve(a.ranks_.size() + b.ranks_.size());
        s.nums_.reserve(a.ranks_.size() + b.ranks_.size());
        std::size_t i = 0, j = 0;
        while (i < a.ranks_.size() || j < b.ranks_.size()) {
            if (j == b.ranks_.size() || (i < a.ranks_.size() && a.ranks_[i] < b.ranks_[j])) {
                s.ranks_.push_back(a.ranks_[i]);
                s.nums_.push_back(a.nums_[i] * fa);
                ++i;
            } else if (i == a.ranks_.size() || b.ranks_[j] < a.ranks_[i]) {
                s.ranks_.push_back(b.ranks_[j]);
                s.nums_.push_back(b.nums_[j] * fb);
                ++j;
            } else {
                mpz_class v = a.nums_[i] * fa;
                mpz_addmul(v.get_mpz_t(), b.nums_[j].get_mpz_t(), fb.get_mpz_t());
                if (v != 0) {
                    s.ranks_.push_back(a.ranks_[i]);
                    s.nums_.push_back(std::move(v));
                }
                ++i;
                ++j;
            }
        }
        s.normalize();
        return s;
    }

    struct Scratch {
        std::vector<mpz_class> acc;
        std::vector<std::uint8_t> used;
        std::vector<std::uint32_t> touched;
    };

    static Scratch& scratch(std::uint32_t size)
    {
        thread_local Scratch s;
        if (s.acc.size() < size) {
            s.acc.resize(size);
            s.used.resize(size, 0);
        }
        return s;
    }

    static FormalSeries mul(const FormalSeries& a, const FormalSeries& b)
    {
        check_same(a, b);
        const SeriesContext& ctx = *a.ctx_;
        FormalSeries s(a.ctx_);
        if (a.is_zero() || b.is_zero()) return s;
        if (a.ranks_.size() == 1 && a.ranks_[0] == 0) return scale(b, Rational(a.nums_[0], a.den_));
        if (b.ranks_.size() == 1 && b.ranks_[0] == 0) return scale(a, Rational(b.nums_[0], b.den_));

        const unsigned N = static_cast<unsigned>(ctx.order());
        // end_b[w]: number of terms of b with weight <= w.
        std::vector<std::uint32_t> end_b(N + 1, 0);
        {
            std::size_t j = 0;
            for (unsigned w = 0; w <= N; ++w) {
                while (j < b.ranks_.size() && ctx.weight(b.ranks_[j]) <= w) ++j;
                end_b[w] = static_cast<std::uint32_t>(j);
            }
        }
        Scratch& sc = scratch(ctx.size());
        sc.touched.clear();
        for (std::size_t i = 0; i < a.ranks_.size(); ++i) {
            const std::uint32_t ra = a.ranks_[i];
            const unsigned wa = ctx.weight(ra);
            if (wa > N) break;
            const std::uint64_t ka = ctx.key(ra);
            const std::uint32_t jend = end_b[N - wa];
            mpz_srcptr na = a.nums_[i].get_mpz_t();
            for (std::uint32_t j = 0; j < jend; ++j) {
                const std::uint32_t rb = b.ranks_[j];
                if (!ctx.nil_compatible(ra, rb)) continue;
                const auto r = static_cast<std::uint32_t>(ctx.rank_of_key(ka + ctx.key(rb)));
                if (!sc.used[r]) {
                    sc.used[r] = 1;
                    sc.touched.push_back(r);
                }
                mpz_addmul(sc.acc[r].get_mpz_t(), na, b.nums_[j].get_mpz_t());
            }
        }
        std::sort(sc.touched.begin(), sc.touched.end());
        s.ranks_.reserve(sc.touched.size());
        s.nums_.reserve(sc.touched.size());
        for (std::uint32_t r : sc.touched) {
            sc.used[r] = 0;
            if (sgn(sc.acc[r]) != 0) {
                s.ranks_.push_back(r);
                s.nums_.emplace_back();
                mpz_swap(s.nums_.back().get_mpz_t(), sc.acc[r].get_mpz_t());
                sc.acc[r] = 0;
            }
        }
        s.den_ = a.den_ * b.den_;
        s.normalize();
        return s;
    }

    ContextPtr ctx_;
    mpz_class den_ = 1;
    std::vector<std::uint32_t> ranks_;
    std::vector<mpz_class> nums_;
};

// Multiplicative inverse. Defined when the coefficient of the empty
// monomial is nonzero; everything else lies in a nilpotent ideal modulo the
// truncation, so Newton's iteration b <- b + b(1 - ab) terminates exactly.
inline FormalSeries invert(const FormalSeries& a)
{
    a.require_context();
    if (a.is_zero() || a.ranks_[0] != 0)
        throw precondition_error("series is not a unit: its constant term is zero");
    const ContextPtr& ctx = a.ctx_;
    FormalSeries b = FormalSeries::constant(ctx, Rational(a.den_, a.nums_[0]));
    if (a.ranks_.size() == 1) return b;
    for (int guard = 0; guard < 64; ++guard) {
        FormalSeries e = 1L - a * b;
        if (e.is_zero()) return b;
        b += b * e;
    }
    throw error("series inversion did not terminate");
}

// Replaces q by q^k in a series that involves q only.
inline FormalSeries substitute_q_power(const FormalSeries& a, int k)
{
    a.require_context();
    if (k < 1) throw precondition_error("q -> q^k needs k >= 1");
    const SeriesContext& ctx = *a.ctx_;
    const std::size_t qi = *ctx.index_of("q");
    FormalSeries s(a.ctx_);
    for (std::size_t i = 0; i < a.ranks_.size(); ++i) {
        const auto r = a.ranks_[i];
        for (std::size_t v = 0; v < ctx.num_variables(); ++v)
            if (v != qi && ctx.exponent(r, v) != 0)
                throw precondition_error("q -> q^k applies to series in q alone");
        const long e = static_cast<long>(ctx.exponent(r, qi)) * k;
        if (e > ctx.order()) continue;
        s.ranks_.push_back(static_cast<std::uint32_t>(ctx.rank_of_key(ctx.stride(qi) * static_cast<std::uint64_t>(e))));
        s.nums_.push_back(a.nums_[i]);
    }
    s.den_ = a.den_;
    s.normalize();
    return s;
}

// Multiplies by q^k for any integer k; every monomial must keep a
// non-negative q-exponent.
inline FormalSeries shift_q(const FormalSeries& a, int k)
{
    a.require_context();
    if (k >= 0) return a * FormalSeries::q_power(a.ctx_, k);
    const SeriesContext& ctx = *a.ctx_;
    const std::size_t qi = *ctx.index_of("q");
    FormalSeries s(a.ctx_);
    for (std::size_t i = 0; i < a.ranks_.size(); ++i) {
        const auto r = a.ranks_[i];
        if (ctx.exponent(r, qi) < static_cast<unsigned>(-k))
            throw precondition_error("division by q^" + std::to_string(-k) + " leaves a negative power of q");
        s.ranks_.push_back(static_cast<std::uint32_t>(ctx.rank_of_key(ctx.key(r) - ctx.stride(qi) * static_cast<std::uint64_t>(-k))));
        s.nums_.push_back(a.nums_[i]);
    }
    // Lowering weights can reorder ranks.
    std::vector<std::size_t> idx(s.ranks_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return s.ranks_[x] < s.ranks_[y]; });
    FormalSeries t(a.ctx_);
    for (auto i : idx) {
        t.ranks_.push_back(s.ranks_[i]);
        t.nums_.push_back(std::move(s.nums_[i]));
    }
    t.den_ = a.den_;
    t.normalize();
    return t;
}

// Replaces variable `name` by `repl`. Requires repl to have no monomial of
// lower weight than the variable, and repl^nilpotency == 0 when the
// variable is nilpotent.
inline FormalSeries substitute_var(const FormalSeries& a, const std::string& name, const FormalSeries& repl)
{
    FormalSeries::check_same(a, repl);
    const SeriesContext& ctx = *a.ctx_;
    const std::size_t vi = ctx.index_or_throw(name);
    const auto& spec = ctx.variables()[vi];
    if (auto v = repl.valuation(); v && *v < spec.weight)
        throw precondition_error("replacement for '" + name + "' has weight below the variable's weight");
    unsigned max_e = 0;
    for (auto r : a.ranks_) max_e = std::max(max_e, ctx.exponent(r, vi));
    std::vector<FormalSeries> powers{FormalSeries::constant(a.ctx_, 1)};
    for (unsigned e = 1; e <= max_e; ++e) powers.push_back(powers.back() * repl);
    if (spec.nilpotency) {
        FormalSeries p = FormalSeries::constant(a.ctx_, 1);
        for (unsigned e = 0; e < *spec.nilpotency; ++e) p *= repl;
        if (!p.is_zero())
            throw precondition_error("replacement for nilpotent '" + name + "' is not nilpotent of the same order");
    }
    std::vector<std::vector<std::pair<std::uint32_t, mpz_class>>> raw(max_e + 1);
    for (std::size_t i = 0; i < a.ranks_.size(); ++i) {
        const auto r = a.ranks_[i];
        const unsigned e = ctx.exponent(r, vi);
        const auto rr = static_cast<std::uint32_t>(ctx.rank_of_key(ctx.key(r) - ctx.stride(vi) * e));
        raw[e].emplace_back(rr, a.nums_[i]);
    }
    FormalSeries out(a.ctx_);
    for (unsigned e = 0; e <= max_e; ++e) {
        if (raw[e].empty()) continue;
        std::sort(raw[e].begin(), raw[e].end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        FormalSeries p(a.ctx_);
        for (auto& [r, n] : raw[e]) {
            p.ranks_.push_back(r);
            p.nums_.push_back(std::move(n));
        }
        p.den_ = a.den_;
        p.normalize();
        out += p * powers[e];
    }
    return out;
}

// Splits f = f1 + eps * f_eps for a variable with nilpotency 2.
inline std::pair<FormalSeries, FormalSeries> project_epsilon(const FormalSeries& a, const std::string& name = "eps")
{
    a.require_context();
    const SeriesContext& ctx = *a.ctx_;
    auto vi = ctx.index_of(name);
    if (!vi) throw precondition_error("context has no variable '" + name + "'");
    if (ctx.variables()[*vi].nilpotency != 2u)
        throw precondition_error("'" + name + "' must have nilpotency 2 for an epsilon projection");
    FormalSeries f1(a.ctx_), fe(a.ctx_);
    std::vector<std::pair<std::uint32_t, mpz_class>> rest;
    for (std::size_t i = 0; i < a.ranks_.size(); ++i) {
        const auto r = a.ranks_[i];
        if (ctx.exponent(r, *vi) == 0) {
            f1.ranks_.push_back(r);
            f1.nums_.push_back(a.nums_[i]);
        } else {
            rest.emplace_back(static_cast<std::uint32_t>(ctx.rank_of_key(ctx.key(r) - ctx.stride(*vi))), a.nums_[i]);
        }
    }
    std::sort(rest.begin(), rest.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [r, n] : rest) {
        fe.ranks_.push_back(r);
        fe.nums_.push_back(std::move(n));
    }
    f1.den_ = a.den_;
    fe.den_ = a.den_;
    f1.normalize();
    fe.normalize();
    return {std::move(f1), std::move(fe)};
}

struct Mismatch {
    Monomial monomial;
    std::string monomial_text;
    Rational lhs, rhs;
};

struct EqualityReport {
    bool equal = true;
    std::optional<Mismatch> first_mismatch;
};

// Compares coefficients of weight <= order and reports the graded-lex
// least monomial where they differ.
inline EqualityReport equal_up_to(const FormalSeries& a, const FormalSeries& b, int order)
{
    FormalSeries::check_same(a, b);
    const SeriesContext& ctx = *a.context();
    if (order > ctx.order()) throw precondition_error("comparison order exceeds the truncation order");
    FormalSeries d = (a - b).truncated(order);
    EqualityReport rep;
    if (d.is_zero()) return rep;
    const auto r = d.rank_at(0);
    rep.equal = false;
    rep.first_mismatch = Mismatch{ctx.monomial(r), ctx.format(r), a.coefficient_of_rank(r), b.coefficient_of_rank(r)};
    return rep;
}

} // namespace qseries
