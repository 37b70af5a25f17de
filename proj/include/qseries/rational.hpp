#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "errors.hpp"

namespace qseries {

// mpq_class keeps values in lowest terms after every arithmetic operation.
using Rational = mpq_class;

inline Rational parse_rational(std::string_view text)
{
    std::string s(text);
    auto bad = [&] { return precondition_error("not a rational number: '" + s + "'"); };
    if (s.empty()) throw bad();
    auto slash = s.find('/');
    auto digits_ok = [](std::string_view part, bool sign_allowed) {
        if (sign_allowed && !part.empty() && (part[0] == '-' || part[0] == '+')) part.remove_prefix(1);
        if (part.empty()) return false;
        for (char ch : part)
            if (ch < '0' || ch > '9') return false;
        return true;
    };
    std::string num = s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    if (!digits_ok(num, true) || !digits_ok(den, false)) throw bad();
    if (num[0] == '+') num.erase(0, 1);
    mpz_class n(num), d(den);
    if (d == 0) throw bad();
    Rational r(n, d);
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rational& r)
{
    return r.get_str();
}

inline Rational rational_abs(const Rational& r)
{
    return abs(r);
}

} // namespace qseries
