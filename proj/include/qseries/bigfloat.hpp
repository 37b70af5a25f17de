#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>

#include "rational.hpp"

namespace qseries {

// RAII wrapper over mpfr_t. New values take the calling thread's current
// precision in bits (see PrecisionScope); rounding is to nearest.
class BigFloat {
public:
    static mpfr_prec_t& current_precision()
    {
        thread_local mpfr_prec_t p = 256;
        return p;
    }

    BigFloat() { mpfr_init2(v_, current_precision()); mpfr_set_zero(v_, 1); }
    BigFloat(long x) { mpfr_init2(v_, current_precision()); mpfr_set_si(v_, x, MPFR_RNDN); }
    BigFloat(int x) : BigFloat(static_cast<long>(x)) {}
    BigFloat(const Rational& r) { mpfr_init2(v_, current_precision()); mpfr_set_q(v_, r.get_mpq_t(), MPFR_RNDN); }
    explicit BigFloat(double x) { mpfr_init2(v_, current_precision()); mpfr_set_d(v_, x, MPFR_RNDN); }
    BigFloat(const BigFloat& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    BigFloat(BigFloat&& o) noexcept
    {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    BigFloat& operator=(const BigFloat& o)
    {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat& operator=(BigFloat&& o) noexcept
    {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~BigFloat() { mpfr_clear(v_); }

    static BigFloat pow2(long e)
    {
        BigFloat r(1L);
        mpfr_mul_2si(r.v_, r.v_, e, MPFR_RNDN);
        return r;
    }

    mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
    mpfr_srcptr get() const { return v_; }
    mpfr_ptr get() { return v_; }

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    // Scientific notation with `digits` significant digits.
    std::string to_string(int digits = 20) const
    {
        if (mpfr_nan_p(v_)) return "nan";
        char* buf = nullptr;
        std::string fmt = "%." + std::to_string(std::max(digits - 1, 0)) + "Re";
        mpfr_asprintf(&buf, fmt.c_str(), v_);
        std::string s(buf);
        mpfr_free_str(buf);
        return s;
    }

    BigFloat operator-() const
    {
        BigFloat r(*this);
        mpfr_neg(r.v_, r.v_, MPFR_RNDN);
        return r;
    }

#define QSERIES_BF_OP(op, fn)                                                                   \
    BigFloat& operator op##=(const BigFloat& o)                                                 \
    {                                                                                           \
        fn(v_, v_, o.v_, MPFR_RNDN);                                                            \
        return *this;                                                                           \
    }                                                                                           \
    friend BigFloat operator op(const BigFloat& a, const BigFloat& b)                           \
    {                                                                                           \
        BigFloat r;                                                                             \
        fn(r.v_, a.v_, b.v_, MPFR_RNDN);                                                        \
        return r;                                                                               \
    }                                                                                           \
    friend BigFloat operator op(const BigFloat& a, long b) { return a op BigFloat(b); }         \
    friend BigFloat operator op(long a, const BigFloat& b) { return BigFloat(a) op b; }         \
    friend BigFloat operator op(const BigFloat& a, const Rational& b) { return a op BigFloat(b); } \
    friend BigFloat operator op(const Rational& a, const BigFloat& b) { return BigFloat(a) op b; }

    QSERIES_BF_OP(+, mpfr_add)
    QSERIES_BF_OP(-, mpfr_sub)
    QSERIES_BF_OP(*, mpfr_mul)
    QSERIES_BF_OP(/, mpfr_div)
#undef QSERIES_BF_OP

    friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_); }
    friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_greater_p(a.v_, b.v_); }
    friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.v_, b.v_); }
    friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_greaterequal_p(a.v_, b.v_); }
    friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_); }

    friend BigFloat abs(const BigFloat& a)
    {
        BigFloat r(a);
        mpfr_abs(r.v_, r.v_, MPFR_RNDN);
        return r;
    }

    friend BigFloat pow(const BigFloat& a, long n)
    {
        BigFloat r;
        mpfr_pow_si(r.v_, a.v_, n, MPFR_RNDN);
        return r;
    }

private:
    mpfr_t v_;
};

// Sets the thread's BigFloat precision for the lifetime of the scope.
class PrecisionScope {
public:
    explicit PrecisionScope(long bits) : saved_(BigFloat::current_precision())
    {
        if (bits < MPFR_PREC_MIN || bits > 1 << 20) throw precondition_error("unsupported precision " + std::to_string(bits));
        BigFloat::current_precision() = static_cast<mpfr_prec_t>(bits);
    }
    ~PrecisionScope() { BigFloat::current_precision() = saved_; }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    mpfr_prec_t saved_;
};

inline BigFloat magnitude(const BigFloat& x) { return abs(x); }

// a + b*eps with eps^2 = 0.
template <class T>
struct Dual {
    T val{}, eps{};

    Dual() = default;
    Dual(T v, T e = T()) : val(std::move(v)), eps(std::move(e)) {}
    Dual(long v) : val(v), eps(0L) {}
    Dual(int v) : val(static_cast<long>(v)), eps(0L) {}
    Dual(const Rational& v) : val(v), eps(0L) {}

    Dual operator-() const { return {-val, -eps}; }

    friend Dual operator+(const Dual& a, const Dual& b) { return {a.val + b.val, a.eps + b.eps}; }
    friend Dual operator-(const Dual& a, const Dual& b) { return {a.val - b.val, a.eps - b.eps}; }
    friend Dual operator*(const Dual& a, const Dual& b) { return {a.val * b.val, a.val * b.eps + a.eps * b.val}; }
    friend Dual operator/(const Dual& a, const Dual& b)
    {
        T inv = T(1L) / b.val;
        T v = a.val * inv;
        return {v, (a.eps - v * b.eps) * inv};
    }
    Dual& operator+=(const Dual& o) { return *this = *this + o; }
    Dual& operator-=(const Dual& o) { return *this = *this - o; }
    Dual& operator*=(const Dual& o) { return *this = *this * o; }
    Dual& operator/=(const Dual& o) { return *this = *this / o; }

    friend Dual operator+(const Dual& a, long b) { return {a.val + b, a.eps}; }
    friend Dual operator+(long b, const Dual& a) { return {b + a.val, a.eps}; }
    friend Dual operator-(const Dual& a, long b) { return {a.val - b, a.eps}; }
    friend Dual operator-(long b, const Dual& a) { return {b - a.val, -a.eps}; }
    friend Dual operator*(const Dual& a, long b) { return {a.val * b, a.eps * b}; }
    friend Dual operator*(long b, const Dual& a) { return {a.val * b, a.eps * b}; }
    friend Dual operator/(const Dual& a, long b) { return {a.val / b, a.eps / b}; }
    friend Dual operator/(long b, const Dual& a) { return Dual(b) / a; }
    friend Dual operator+(const Dual& a, const Rational& b) { return a + Dual(b); }
    friend Dual operator+(const Rational& b, const Dual& a) { return Dual(b) + a; }
    friend Dual operator-(const Dual& a, const Rational& b) { return a - Dual(b); }
    friend Dual operator-(const Rational& b, const Dual& a) { return Dual(b) - a; }
    friend Dual operator*(const Dual& a, const Rational& b) { return a * Dual(b); }
    friend Dual operator*(const Rational& b, const Dual& a) { return Dual(b) * a; }
    friend Dual operator/(const Dual& a, const Rational& b) { return a / Dual(b); }
};

template <class T>
T magnitude(const Dual<T>& x)
{
    T a = magnitude(x.val), b = magnitude(x.eps);
    return a < b ? b : a;
}

} // namespace qseries
