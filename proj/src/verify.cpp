#include <algorithm>
#include <chrono>
#include <random>

#include <json.hpp>

#include "qseries/identities.hpp"

namespace qseries {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void check_assignable(const IdentityRecord& rec, const Assignment& assigned, bool formal_backend)
{
    for (const auto& [name, value] : assigned) {
        if (name == "q") {
            if (formal_backend) throw precondition_error("q cannot be assigned for the formal backend");
            continue;
        }
        const ParameterSpec* p = rec.param(name);
        if (!p) throw precondition_error("identity '" + rec.id + "' has no parameter '" + name + "'");
        if (p->mode == ParamMode::fixed) throw precondition_error("parameter '" + name + "' is fixed");
        if (formal_backend && p->mode == ParamMode::formal)
            throw precondition_error("parameter '" + name + "' is a formal variable and cannot be assigned");
        if (formal_backend && p->mode == ParamMode::dual)
            throw precondition_error("parameter '" + name + "' is set to 1 + eps by the formal backend");
    }
}

std::vector<VariableSpec> formal_variables(const IdentityRecord& rec)
{
    std::vector<VariableSpec> vars;
    for (const auto& p : rec.params)
        if (p.mode == ParamMode::formal) vars.push_back({p.name, 1, std::nullopt});
    if (rec.has_dual()) vars.push_back({"eps", 0, 2});
    return vars;
}

std::string residual_text(const BigFloat& r) { return r.to_string(6); }

Rational parse_param(const std::string& name, const std::string& text)
{
    try {
        return parse_rational(text);
    } catch (const precondition_error&) {
        throw precondition_error("report parameter '" + name + "' is not a rational: " + text);
    }
}

} // namespace

std::string to_string(Status s)
{
    switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::precondition_error: return "precondition-error";
    }
    return "?";
}

// ---------------------------------------------------------------- sampling

Sampler::Sampler(const std::string& id, std::uint64_t seed, std::uint64_t sample)
{
    std::seed_seq seq{static_cast<std::uint32_t>(fnv1a(id)), static_cast<std::uint32_t>(fnv1a(id) >> 32),
                      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(sample)};
    gen_.seed(seq);
}

Rational Sampler::draw(const Rational& lo, const Rational& hi, bool negatives)
{
    if (lo < 0 || hi < lo || hi == 0) throw precondition_error("invalid sampling range");
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const long den = 1 + static_cast<long>(next() % 13);
        mpz_class lo_num, hi_num;
        mpz_class t = lo.get_num() * den;
        mpz_cdiv_q(lo_num.get_mpz_t(), t.get_mpz_t(), lo.get_den().get_mpz_t());
        t = hi.get_num() * den;
        mpz_fdiv_q(hi_num.get_mpz_t(), t.get_mpz_t(), hi.get_den().get_mpz_t());
        if (lo_num > hi_num) continue;
        const long span = mpz_class(hi_num - lo_num + 1).get_si();
        const long num = lo_num.get_si() + static_cast<long>(next() % static_cast<std::uint64_t>(span));
        if (num == 0) continue;
        Rational r(num, den);
        r.canonicalize();
        if (negatives && next() % 2) r = -r;
        return r;
    }
    throw precondition_error("sampling range admits no rational with denominator at most 13");
}

Rational Sampler::draw(const ParameterSpec& p)
{
    if (p.mode == ParamMode::fixed) return p.value;
    return draw(p.lo, p.hi, p.negatives);
}

// ---------------------------------------------------------------- formal

VerificationReport verify_formal(const IdentityRecord& rec, int order, const Assignment& assigned, std::uint64_t seed)
{
    if (!rec.formal) throw precondition_error("identity '" + rec.id + "' has no formal backend");
    if (order < 1) throw precondition_error("order must be at least 1");
    check_assignable(rec, assigned, true);
    const auto t0 = Clock::now();
    VerificationReport rep;
    rep.identity_id = rec.id;
    rep.backend = "formal";
    rep.order = order;

    Sampler sampler(rec.id, seed, 0);
    std::map<std::string, Rational> values;
    for (const auto& p : rec.params) {
        switch (p.mode) {
        case ParamMode::formal: rep.params[p.name] = "formal"; break;
        case ParamMode::dual: rep.params[p.name] = "1+eps"; break;
        case ParamMode::fixed: values[p.name] = p.value; break;
        case ParamMode::rational: {
            auto it = assigned.find(p.name);
            values[p.name] = it != assigned.end() ? it->second : sampler.draw(p);
            break;
        }
        }
    }
    for (const auto& [name, v] : values) rep.params[name] = to_string(v);

    try {
        auto ctx = make_context(formal_variables(rec), order);
        FormalBackend be(ctx);
        for (const auto& p : rec.params) {
            if (p.mode == ParamMode::formal) be.bind(p.name, be.var(p.name));
            else if (p.mode == ParamMode::dual) be.bind(p.name, 1L + be.var("eps"));
            else be.bind(p.name, be.lit(values.at(p.name)));
        }
        auto sides = rec.build_formal(be);
        auto eq = equal_up_to(sides.lhs, sides.rhs, order);
        rep.terms_evaluated = be.terms_evaluated();
        if (eq.equal) {
            rep.status = Status::pass;
        } else {
            rep.status = Status::fail;
            const auto& m = *eq.first_mismatch;
            rep.first_mismatch = ReportMismatch{m.monomial_text, to_string(m.lhs), to_string(m.rhs)};
        }
    } catch (const error& e) {
        rep.status = Status::precondition_error;
        rep.detail = e.what();
    }
    rep.elapsed_ms = ms_since(t0);
    return rep;
}

// ---------------------------------------------------------------- numeric

VerificationReport verify_numeric_point(const IdentityRecord& rec, long precision, const Assignment& point)
{
    if (!rec.numeric) throw precondition_error("identity '" + rec.id + "' has no numeric backend");
    if (precision < 64) throw precondition_error("precision must be at least 64 bits");
    const auto t0 = Clock::now();
    VerificationReport rep;
    rep.identity_id = rec.id;
    rep.backend = "numeric";
    rep.precision = precision;
    Assignment full = point;
    for (const auto& p : rec.params)
        if (p.mode == ParamMode::fixed) full[p.name] = p.value;
    for (const auto& [name, v] : full) rep.params[name] = to_string(v);

    try {
        if (!full.count("q")) throw precondition_error("no value for q");
        for (const auto& p : rec.params)
            if (!full.count(p.name)) throw precondition_error("no value for parameter '" + p.name + "'");
        PointAssignment(full).validate();
        if (rec.domain)
            if (auto bad = rec.domain(full)) throw precondition_error("domain violation: " + *bad);
        PrecisionScope scope(precision);
        NumericBackend<BigFloat> be(precision, full.at("q"));
        for (const auto& p : rec.params) be.bind(p.name, BigFloat(full.at(p.name)));
        auto sides = rec.build_numeric(be);
        BigFloat r = abs(sides.lhs - sides.rhs);
        rep.terms_evaluated = be.terms_evaluated();
        rep.residual = residual_text(r);
        rep.status = r < BigFloat::pow2(-precision / 2) ? Status::pass : Status::fail;
    } catch (const error& e) {
        rep.status = Status::precondition_error;
        rep.detail = e.what();
    }
    rep.elapsed_ms = ms_since(t0);
    return rep;
}

std::vector<VerificationReport> verify_numeric(const IdentityRecord& rec, long precision, std::uint64_t seed,
                                               int samples, const Assignment& assigned)
{
    if (!rec.numeric) throw precondition_error("identity '" + rec.id + "' has no numeric backend");
    if (samples < 1) throw precondition_error("need at least one sample");
    check_assignable(rec, assigned, false);
    std::vector<VerificationReport> out;
    for (int k = 0; k < samples; ++k) {
        Sampler sampler(rec.id, seed, static_cast<std::uint64_t>(k));
        Assignment pt;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            pt = assigned;
            if (!pt.count("q")) pt["q"] = sampler.draw(rec.q_lo, rec.q_hi, false);
            for (const auto& p : rec.params)
                if (p.mode != ParamMode::fixed && !pt.count(p.name)) pt[p.name] = sampler.draw(p);
            if (!rec.domain || !rec.domain(pt)) break;
            if (pt.size() == assigned.size()) break; // nothing left to resample
        }
        out.push_back(verify_numeric_point(rec, precision, pt));
    }
    return out;
}

// ---------------------------------------------------------------- batch and replay

VerifySummary verify_all(std::optional<int> order, long precision, std::uint64_t seed, int samples,
                         const std::vector<IdentityRecord>& records)
{
    std::vector<const IdentityRecord*> sorted;
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
    VerifySummary s;
    for (const auto* rec : sorted) {
        if (rec->formal) s.reports.push_back(verify_formal(*rec, order.value_or(rec->default_order), {}, seed));
        if (rec->numeric)
            for (auto& r : verify_numeric(*rec, precision, seed, samples)) s.reports.push_back(std::move(r));
    }
    for (const auto& r : s.reports) {
        if (r.status == Status::pass) ++s.passed;
        else if (r.status == Status::fail) ++s.failed;
        else ++s.errors;
    }
    return s;
}

VerificationReport rerun(const VerificationReport& report, const std::vector<IdentityRecord>& records)
{
    const IdentityRecord* rec = nullptr;
    for (const auto& r : records)
        if (r.id == report.identity_id) rec = &r;
    if (!rec) throw precondition_error("unknown identity '" + report.identity_id + "'");
    Assignment values;
    for (const auto& [name, text] : report.params) {
        if (text == "formal" || text == "1+eps") continue;
        const ParameterSpec* p = rec->param(name);
        if (p && p->mode == ParamMode::fixed) continue;
        values[name] = parse_param(name, text);
    }
    if (report.backend == "formal") {
        if (!report.order) throw precondition_error("formal report without an order");
        return verify_formal(*rec, *report.order, values);
    }
    if (report.backend == "numeric") {
        if (!report.precision) throw precondition_error("numeric report without a precision");
        return verify_numeric_point(*rec, *report.precision, values);
    }
    throw precondition_error("unknown backend '" + report.backend + "'");
}

IdentityRecord perturbed(const IdentityRecord& rec, int N)
{
    IdentityRecord out = rec;
    out.build_formal = [f = rec.build_formal, N](FormalBackend& be) {
        auto s = f(be);
        s.rhs = s.rhs + be.q_pow(N);
        return s;
    };
    out.build_numeric = [f = rec.build_numeric, N](NumericBackend<BigFloat>& be) {
        auto s = f(be);
        s.rhs = s.rhs + be.q_pow(N);
        return s;
    };
    out.build_dual = [f = rec.build_dual, N](NumericBackend<Dual<BigFloat>>& be) {
        auto s = f(be);
        s.rhs = s.rhs + be.q_pow(N);
        return s;
    };
    return out;
}

// ---------------------------------------------------------------- cross-backend

CrossCheck cross_check(const IdentityRecord& rec, std::uint64_t seed, int order, const Rational& q0, long precision)
{
    if (!rec.formal) throw precondition_error("identity '" + rec.id + "' has no formal backend");
    CrossCheck out;
    out.identity_id = rec.id;
    Sampler sampler(rec.id, seed, 0);
    for (const auto& p : rec.params) {
        if (p.mode == ParamMode::formal) out.values[p.name] = sampler.draw(Rational(1, 13), Rational(1, 2), true);
        else if (p.mode == ParamMode::rational) out.values[p.name] = sampler.draw(p);
        else if (p.mode == ParamMode::fixed) out.values[p.name] = p.value;
    }
    const bool dual = rec.has_dual();

    std::vector<VariableSpec> vars;
    if (dual) vars.push_back({"eps", 0, 2});
    auto ctx = make_context(vars, order);
    FormalBackend fb(ctx);
    for (const auto& p : rec.params) {
        if (p.mode == ParamMode::formal) fb.bind(p.name, fb.lit(out.values.at(p.name)) * fb.q());
        else if (p.mode == ParamMode::dual) fb.bind(p.name, 1L + fb.var("eps"));
        else fb.bind(p.name, fb.lit(out.values.at(p.name)));
    }
    auto fs = rec.build_formal(fb);

    PrecisionScope scope(precision);
    auto numeric_value = [&](const ParameterSpec& p) {
        const Rational& v = out.values.at(p.name);
        return BigFloat(p.mode == ParamMode::formal ? Rational(v * q0) : v);
    };
    std::array<BigFloat, 2> nl, nr; // value, eps
    if (dual) {
        NumericBackend<Dual<BigFloat>> be(precision, q0);
        for (const auto& p : rec.params) {
            if (p.mode == ParamMode::dual) be.bind(p.name, Dual<BigFloat>(BigFloat(1L), BigFloat(1L)));
            else be.bind(p.name, Dual<BigFloat>(numeric_value(p)));
        }
        auto s = rec.build_dual(be);
        nl = {s.lhs.val, s.lhs.eps};
        nr = {s.rhs.val, s.rhs.eps};
    } else {
        NumericBackend<BigFloat> be(precision, q0);
        for (const auto& p : rec.params) be.bind(p.name, numeric_value(p));
        auto s = rec.build_numeric(be);
        nl = {s.lhs, BigFloat(0L)};
        nr = {s.rhs, BigFloat(0L)};
    }

    PointAssignment pt({{"q", q0}});
    if (dual) pt.values["eps"] = 0;
    const BigFloat factor = BigFloat(Rational(2) / (1 - q0)) * pow(BigFloat(q0), order + 1);
    const BigFloat floor = BigFloat::pow2(-(precision - 32));
    auto add = [&](const char* side, const char* part, const FormalSeries& f, const BigFloat& num) {
        CrossPart cp;
        cp.side = side;
        cp.part = part;
        Rational m = 0;
        for (std::size_t i = 0; i < f.num_terms(); ++i) m = std::max(m, rational_abs(f.coefficient_at(i)));
        cp.max_coefficient = m;
        cp.formal = eval_formal_at(f, pt, precision);
        cp.numeric = num;
        cp.difference = abs(cp.formal - cp.numeric);
        cp.bound = factor * BigFloat(m) + floor;
        cp.ok = cp.difference <= cp.bound;
        out.parts.push_back(cp);
    };
    for (int side = 0; side < 2; ++side) {
        const FormalSeries& f = side == 0 ? fs.lhs : fs.rhs;
        const auto& num = side == 0 ? nl : nr;
        const char* name = side == 0 ? "lhs" : "rhs";
        if (dual) {
            auto [f1, fe] = project_epsilon(f);
            add(name, "value", f1, num[0]);
            add(name, "eps", fe, num[1]);
        } else {
            add(name, "value", f, num[0]);
        }
    }
    out.ok = std::all_of(out.parts.begin(), out.parts.end(), [](const CrossPart& p) { return p.ok; });
    return out;
}

// ---------------------------------------------------------------- JSON

namespace {

json report_json(const VerificationReport& r, bool include_timing)
{
    json j;
    j["identity_id"] = r.identity_id;
    j["backend"] = r.backend;
    j["order"] = r.order ? json(*r.order) : json(nullptr);
    j["precision"] = r.precision ? json(*r.precision) : json(nullptr);
    j["params"] = r.params;
    j["status"] = to_string(r.status);
    if (r.first_mismatch)
        j["first_mismatch"] = {{"monomial", r.first_mismatch->monomial},
                               {"lhs", r.first_mismatch->lhs},
                               {"rhs", r.first_mismatch->rhs}};
    else
        j["first_mismatch"] = nullptr;
    j["residual"] = r.residual ? json(*r.residual) : json(nullptr);
    j["terms_evaluated"] = r.terms_evaluated;
    if (include_timing) j["elapsed_ms"] = r.elapsed_ms;
    return j;
}

VerificationReport report_from(const json& j)
{
    VerificationReport r;
    r.identity_id = j.at("identity_id").get<std::string>();
    r.backend = j.at("backend").get<std::string>();
    if (!j.at("order").is_null()) r.order = j.at("order").get<int>();
    if (!j.at("precision").is_null()) r.precision = j.at("precision").get<long>();
    r.params = j.at("params").get<std::map<std::string, std::string>>();
    const auto st = j.at("status").get<std::string>();
    if (st == "pass") r.status = Status::pass;
    else if (st == "fail") r.status = Status::fail;
    else if (st == "precondition-error") r.status = Status::precondition_error;
    else throw precondition_error("unknown report status '" + st + "'");
    if (!j.at("first_mismatch").is_null()) {
        const auto& m = j.at("first_mismatch");
        r.first_mismatch = ReportMismatch{m.at("monomial").get<std::string>(), m.at("lhs").get<std::string>(),
                                          m.at("rhs").get<std::string>()};
    }
    if (!j.at("residual").is_null()) r.residual = j.at("residual").get<std::string>();
    r.terms_evaluated = j.at("terms_evaluated").get<std::size_t>();
    if (j.contains("elapsed_ms")) r.elapsed_ms = j.at("elapsed_ms").get<double>();
    return r;
}

json parse(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw precondition_error(std::string("malformed report JSON: ") + e.what());
    }
}

} // namespace

std::string VerificationReport::to_json(bool include_timing) const { return report_json(*this, include_timing).dump(2); }

VerificationReport VerificationReport::from_json(const std::string& text)
{
    try {
        return report_from(parse(text));
    } catch (const json::exception& e) {
        throw precondition_error(std::string("malformed report JSON: ") + e.what());
    }
}

std::string reports_to_json(const std::vector<VerificationReport>& reports, bool include_timing)
{
    json a = json::array();
    for (const auto& r : reports) a.push_back(report_json(r, include_timing));
    return a.dump(2);
}

std::vector<VerificationReport> reports_from_json(const std::string& text)
{
    json a = parse(text);
    if (!a.is_array()) throw precondition_error("expected a JSON array of reports");
    std::vector<VerificationReport> out;
    try {
        for (const auto& j : a) out.push_back(report_from(j));
    } catch (const json::exception& e) {
        throw precondition_error(std::string("malformed report JSON: ") + e.what());
    }
    return out;
}

} // namespace qseries
