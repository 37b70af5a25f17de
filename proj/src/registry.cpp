#include <cmath>
#include <initializer_list>

#include "qseries/identities.hpp"

namespace qseries {

namespace {

namespace bd = builders;

#define QS_BUILDERS(fn)                                                         \
    [](FormalBackend& b) { return bd::fn(b); },                                  \
        [](NumericBackend<BigFloat>& b) { return bd::fn(b); },                   \
        [](NumericBackend<Dual<BigFloat>>& b) { return bd::fn(b); }

ParameterSpec formal(std::string name, Rational lo = Rational(1, 13), Rational hi = Rational(3, 4))
{
    return {std::move(name), ParamMode::formal, lo, hi, true, 0};
}

ParameterSpec rational(std::string name, Rational lo, Rational hi, bool negatives = true)
{
    return {std::move(name), ParamMode::rational, lo, hi, negatives, 0};
}

ParameterSpec dual(std::string name, Rational lo = Rational(1, 2), Rational hi = Rational(2))
{
    return {std::move(name), ParamMode::dual, lo, hi, false, 0};
}

ParameterSpec fixed(std::string name, Rational value)
{
    return {std::move(name), ParamMode::fixed, value, value, false, value};
}

// Double-precision view of a point for domain checks.
class Point {
public:
    explicit Point(const Assignment& a) : a_(a) {}
    double operator()(const std::string& name) const { return a_.at(name).get_d(); }
    double q() const { return (*this)("q"); }

private:
    const Assignment& a_;
};

// No factor 1 - x q^k (k >= 0) within 10^-3 of zero.
bool away(double x, double q)
{
    double y = x;
    for (int k = 0; k < 400 && std::abs(y) > 1e-9; ++k, y *= q)
        if (std::abs(1 - y) < 1e-3) return false;
    return true;
}

std::optional<std::string> check_away(std::initializer_list<std::pair<const char*, double>> xs, double q)
{
    for (const auto& [text, x] : xs)
        if (!away(x, q)) return std::string("(") + text + "; q)_inf has a factor too close to zero";
    return std::nullopt;
}

std::optional<std::string> check(bool ok, const char* what)
{
    if (ok) return std::nullopt;
    return std::string("needs ") + what;
}

template <class... C>
std::optional<std::string> first(C... c)
{
    std::optional<std::string> r;
    ((r = r ? r : c), ...);
    return r;
}

std::vector<IdentityRecord> make_registry()
{
    std::vector<IdentityRecord> r;
    auto add = [&](IdentityRecord rec) { r.push_back(std::move(rec)); };

    add({"qbin", "q-binomial theorem", {formal("a", Rational(1, 13), 3), formal("z")}, true, true, 25, 256,
         Rational(1, 13), Rational(1, 3), "|z| < 1",
         [](const Assignment& a) {
             Point p(a);
             return first(check(std::abs(p("z")) < 1, "|z| < 1"), check_away({{"z", p("z")}}, p.q()));
         },
         QS_BUILDERS(qbin)});

    add({"heine", "Heine's transformation",
         {rational("a", Rational(1, 13), Rational(3, 4)), formal("b"), formal("c"), formal("t")}, true, true, 25, 256,
         Rational(1, 13), Rational(1, 3), "|t| < 1, |b| < 1",
         [](const Assignment& a) {
             Point p(a);
             return first(check(std::abs(p("t")) < 1, "|t| < 1"), check(std::abs(p("b")) < 1, "|b| < 1"),
                          check_away({{"c", p("c")}, {"t", p("t")}, {"at", p("a") * p("t")}}, p.q()));
         },
         QS_BUILDERS(heine)});

    add({"heine2", "second iterate of Heine's transformation",
         {rational("a", Rational(1, 13), Rational(3, 4)), rational("b", Rational(1, 13), Rational(3, 4)), formal("c"),
          formal("t")},
         true, true, 25, 256, Rational(1, 13), Rational(1, 3), "|t| < 1, |c| < |b|",
         [](const Assignment& a) {
             Point p(a);
             return first(check(std::abs(p("t")) < 1, "|t| < 1"), check(std::abs(p("c")) < std::abs(p("b")), "|c| < |b|"),
                          check_away({{"c", p("c")}, {"t", p("t")}, {"bt", p("b") * p("t")}}, p.q()));
         },
         QS_BUILDERS(heine2)});

    add({"fine1551", "Fine's transformation of sum t^n/(bq)_n",
         {rational("b", Rational(1, 13), Rational(3, 4)), formal("t")}, true, false, 25, 256, Rational(1, 13),
         Rational(1, 3), "|t| < 1",
         [](const Assignment& a) {
             Point p(a);
             return first(check(std::abs(p("t")) < 1, "|t| < 1"), check_away({{"b", p("b")}, {"t", p("t")}}, p.q()));
         },
         QS_BUILDERS(fine1551)});

    auto agarwal_away = [](const Point& p) {
        const double al = p("alpha"), be = p("beta"), ga = p("gamma"), de = p("delta"), t = p("t"), q = p.q();
        return first(check(std::abs(q / al) < 1, "|q/alpha| < 1"), check(std::abs(t) < 1, "|t| < 1"),
                     check(std::abs(ga * q / be) < 1, "|gamma q/beta| < 1"), check(std::abs(ga) < 1, "|gamma| < 1"),
                     check_away({{"beta/(alpha t)", be / (al * t)},
                                 {"delta", de},
                                 {"t", t},
                                 {"q/alpha", q / al},
                                 {"beta", be},
                                 {"alpha t/beta", al * t / be},
                                 {"q beta/(alpha t)", q * be / (al * t)},
                                 {"gamma q/beta", ga * q / be},
                                 {"delta q/beta", de * q / be}},
                                q));
    };
    const std::vector<ParameterSpec> agarwal_params{
        rational("alpha", Rational(1, 2), 3), rational("beta", Rational(1, 2), 3),
        rational("gamma", Rational(1, 13), Rational(1, 8)), rational("delta", Rational(1, 13), Rational(1, 2)),
        rational("t", Rational(1, 13), Rational(1, 2))};

    add({"agarwal", "Agarwal-type expansion of a 3phi2 with one numerator q", agarwal_params, false, true, 25, 256,
         Rational(1, 13), Rational(1, 6), "|t| < 1, |q/alpha| < 1, |gamma| < 1",
         [agarwal_away](const Assignment& a) { return agarwal_away(Point(a)); }, QS_BUILDERS(agarwal)});

    auto adsy3_params = agarwal_params;
    adsy3_params.push_back(rational("e", Rational(1, 13), Rational(1, 8)));
    adsy3_params.push_back(rational("f", Rational(1, 13), Rational(1, 2)));
    auto adsy3_away = [agarwal_away](const Point& p) {
        const double be = p("beta"), q = p.q();
        return first(agarwal_away(p), check(std::abs(p("e")) < 1, "|e| < 1"),
                     check_away({{"f", p("f")}, {"e q/beta", p("e") * q / be}, {"f q/beta", p("f") * q / be}}, q));
    };
    add({"adsy3", "three-numerator extension of the Agarwal expansion", adsy3_params, false, true, 25, 256,
         Rational(1, 13), Rational(1, 6), "|t| < 1, |q/alpha| < 1, |gamma|, |e| < 1",
         [adsy3_away](const Assignment& a) { return adsy3_away(Point(a)); }, QS_BUILDERS(adsy3)});

    auto nine_params = adsy3_params;
    nine_params.push_back(rational("g", Rational(1, 13), Rational(1, 8)));
    nine_params.push_back(rational("h", Rational(1, 13), Rational(1, 2)));
    add({"nineparam", "nine-parameter expansion of a 5phi4 with one numerator q", nine_params, false, true, 25, 256,
         Rational(1, 13), Rational(1, 6), "|t| < 1, |q/alpha| < 1, |gamma|, |e|, |g| < 1",
         [adsy3_away](const Assignment& a) {
             Point p(a);
             const double be = p("beta"), q = p.q();
             return first(adsy3_away(p), check(std::abs(p("g")) < 1, "|g| < 1"),
                          check_away({{"h", p("h")}, {"g q/beta", p("g") * q / be}, {"h q/beta", p("h") * q / be}}, q));
         },
         QS_BUILDERS(nineparam)});

    auto recip_away = [](const Point& p, bool with_d) {
        const double a = p("a"), b = p("b"), c = p("c"), q = p.q();
        auto base = check_away({{"-aq", -a * q}, {"-bq", -b * q}, {"-c/a", -c / a}, {"-c/b", -c / b}}, q);
        if (base || !with_d) return base;
        const double d = p("d");
        return check_away({{"-d/a", -d / a}, {"-d/b", -d / b}}, q);
    };
    add({"recip3", "three-variable reciprocity theorem",
         {rational("a", Rational(1, 13), 2), rational("b", Rational(1, 13), 2), formal("c")}, true, true, 25, 256,
         Rational(1, 13), Rational(1, 3), "a, b nonzero; no vanishing factor",
         [recip_away](const Assignment& a) { return recip_away(Point(a), false); }, QS_BUILDERS(recip3)});

    add({"recip4", "four-variable reciprocity theorem",
         {rational("a", Rational(1, 13), 2), rational("b", Rational(1, 13), 2), formal("c"), formal("d")}, true, true,
         25, 256, Rational(1, 13), Rational(1, 3), "a, b nonzero; no vanishing factor",
         [recip_away](const Assignment& a) { return recip_away(Point(a), true); }, QS_BUILDERS(recip4)});

    add({"kang75", "a classical sum with (c)_n/(-cq)_n", {formal("c")}, true, false, 25, 256, Rational(1, 13),
         Rational(1, 3), "|c| < 1", [](const Assignment&) { return std::optional<std::string>(); },
         QS_BUILDERS(kang75)});

    auto no_domain = [](const Assignment&) { return std::optional<std::string>(); };

    add({"rcq", "sigma(c, q) as a z-derivative of the three-variable reciprocity function",
         {formal("c"), dual("z")}, true, false, 25, 256, Rational(1, 13), Rational(1, 3), "|c| < 1", no_domain,
         QS_BUILDERS(rcq)});

    add({"aftagar", "Andrews-Fine type expansion of the one-parameter z-sum", {formal("c"), dual("z")}, true, false,
         25, 256, Rational(1, 13), Rational(1, 3), "|c| < 1", no_domain, QS_BUILDERS(aftagar)});

    add({"sigma1", "one-parameter representation of sigma(q)", {formal("c")}, true, true, 25, 256, Rational(1, 13),
         Rational(1, 3), "|c| < 1",
         [](const Assignment& a) {
             Point p(a);
             return first(check(std::abs(p("c")) < 1, "|c| < 1"), check_away({{"c", p("c")}}, p.q()));
         },
         QS_BUILDERS(sigma1)});

    add({"remark1", "sigma(c, q) through the derivative of the one-parameter z-sum", {formal("c"), dual("z")}, true,
         false, 25, 256, Rational(1, 13), Rational(1, 3), "|c| < 1", no_domain, QS_BUILDERS(remark1)});

    add({"lemma4heine", "a two-parameter well-poised sum", {formal("c"), formal("d")}, true, false, 25, 256,
         Rational(1, 13), Rational(1, 3), "|c|, |d| < 1", no_domain, QS_BUILDERS(lemma4heine)});

    add({"chuzhang", "a bilateral-type two-sum product formula",
         {rational("x", Rational(1, 13), Rational(3, 4)), rational("y", Rational(1, 13), Rational(3, 4)),
          rational("b", Rational(1, 13), Rational(3, 4)), rational("c", Rational(1, 13), Rational(3, 4)),
          rational("d", Rational(1, 13), Rational(3, 4))},
         false, true, 25, 256, Rational(1, 13), Rational(1, 3), "no vanishing factor",
         [](const Assignment& a) {
             Point p(a);
             const double x = p("x"), y = p("y"), b = p("b"), c = p("c"), d = p("d"), q = p.q();
             return check_away({{"bx", b * x},
                                {"by", b * y},
                                {"cx", c * x},
                                {"cyq", c * y * q},
                                {"dx", d * x},
                                {"dy", d * y}},
                               q);
         },
         QS_BUILDERS(chuzhang)});

    add({"bbt", "sigma(c, d, q) as a z-derivative of the four-variable reciprocity function",
         {formal("c"), formal("d"), dual("z")}, true, false, 25, 256, Rational(1, 13), Rational(1, 3), "|c|, |d| < 1",
         no_domain, QS_BUILDERS(bbt)});

    auto small_cd_z = [](const Assignment& a) {
        Point p(a);
        const double c = p("c"), d = p("d"), z = p("z"), q = p.q();
        return first(check(z > 0.5 && z < 2 && z != 1, "1/2 < z < 2, z != 1"),
                     check_away({{"c/z", c / z}, {"d/z", d / z}, {"zq", z * q}, {"-c", -c}, {"-d", -d}}, q));
    };
    add({"bts2", "expansion of the four-variable z-sum", {formal("c", Rational(1, 13), Rational(1, 5)),
                                                         formal("d", Rational(1, 13), Rational(1, 5)), dual("z")},
         true, true, 25, 256, Rational(1, 13), Rational(1, 3), "|c|, |d| <= 1/5, 1/2 < z < 2", small_cd_z,
         QS_BUILDERS(bts2)});

    add({"sigma2", "two-parameter representation of sigma(q)",
         {formal("c", Rational(1, 13), Rational(1, 5)), formal("d", Rational(1, 13), Rational(1, 5))}, true, true, 14,
         256, Rational(1, 13), Rational(1, 3), "|c|, |d| <= 1/5",
         [](const Assignment& a) {
             Point p(a);
             return check_away({{"-c", -p("c")}, {"-d", -p("d")}, {"c", p("c")}, {"d", p("d")}}, p.q());
         },
         QS_BUILDERS(sigma2)});

    add({"lambdad0", "the two-parameter remainder at d = 0", {formal("c"), fixed("d", 0)}, true, false, 25, 256,
         Rational(1, 13), Rational(1, 3), "|c| < 1", no_domain, QS_BUILDERS(lambdad0)});

    add({"remark2", "sigma(c, d, q) through the derivative of the four-variable z-sum",
         {formal("c"), formal("d"), dual("z")}, true, false, 14, 256, Rational(1, 13), Rational(1, 3), "|c|, |d| < 1",
         no_domain, QS_BUILDERS(remark2)});

    add({"rsi1", "sum of tails of (-q)_inf", {}, true, false, 25, 256, Rational(1, 13), Rational(1, 3), "",
         no_domain, QS_BUILDERS(rsi1)});
    add({"rsi2", "sum of tails of 1/(q; q^2)_inf", {}, true, false, 25, 256, Rational(1, 13), Rational(1, 3), "",
         no_domain, QS_BUILDERS(rsi2)});
    add({"euler", "Euler's product for (-w)_inf", {formal("w")}, true, false, 25, 256, Rational(1, 13),
         Rational(1, 3), "", no_domain, QS_BUILDERS(euler)});
    add({"lebesgue", "Lebesgue's identity", {formal("a")}, true, false, 25, 256, Rational(1, 13), Rational(1, 3), "",
         no_domain, QS_BUILDERS(lebesgue)});
    add({"jtp", "Jacobi triple product", {rational("z", Rational(1, 2), 2)}, true, false, 25, 256, Rational(1, 13),
         Rational(1, 3), "z nonzero", no_domain, QS_BUILDERS(jtp)});
    return r;
}

} // namespace

std::string to_string(ParamMode m)
{
    switch (m) {
    case ParamMode::formal: return "formal";
    case ParamMode::rational: return "rational";
    case ParamMode::dual: return "dual";
    case ParamMode::fixed: return "fixed";
    }
    return "?";
}

const ParameterSpec* IdentityRecord::param(const std::string& name) const
{
    for (const auto& p : params)
        if (p.name == name) return &p;
    return nullptr;
}

bool IdentityRecord::has_dual() const
{
    for (const auto& p : params)
        if (p.mode == ParamMode::dual) return true;
    return false;
}

const std::vector<IdentityRecord>& registry()
{
    static const std::vector<IdentityRecord> records = make_registry();
    return records;
}

const IdentityRecord* try_find_identity(const std::string& id)
{
    for (const auto& r : registry())
        if (r.id == id) return &r;
    return nullptr;
}

const IdentityRecord& find_identity(const std::string& id)
{
    if (auto* r = try_find_identity(id)) return *r;
    throw precondition_error("unknown identity '" + id + "'");
}

} // namespace qseries
