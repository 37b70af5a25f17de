#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "qseries/cli.hpp"
#include "qseries/identities.hpp"
#include "qseries/sigma.hpp"

using namespace qseries;
namespace bd = qseries::builders;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int run_order(const IdentityRecord& r)
{
    return (r.id == "sigma2" || r.id == "remark2") ? 14 : 25;
}

const std::vector<std::string> kFormalIds{"qbin",  "heine",  "heine2", "fine1551", "recip3", "recip4",
                                          "kang75", "rcq",   "aftagar", "sigma1",  "remark1", "lemma4heine",
                                          "lambdad0", "rsi1", "rsi2",   "euler",   "lebesgue", "jtp",
                                          "bbt",   "bts2",   "sigma2", "remark2"};
const std::vector<std::string> kNumericIds{"agarwal", "adsy3", "nineparam", "chuzhang"};

struct Outcome {
    bool ok;
    std::string detail;
};

Outcome formal_suite()
{
    auto t0 = Clock::now();
    std::vector<std::string> bad;
    for (const auto& id : kFormalIds) {
        const auto& rec = find_identity(id);
        auto r = verify_formal(rec, run_order(rec));
        if (!r.passed()) bad.push_back(id + ":" + to_string(r.status));
    }
    double s = seconds_since(t0);
    std::ostringstream d;
    d << kFormalIds.size() - bad.size() << "/" << kFormalIds.size() << " pass in " << s << " s";
    for (const auto& b : bad) d << " " << b;
    return {bad.empty() && s < 300, d.str()};
}

Outcome numeric_suite()
{
    auto t0 = Clock::now();
    const double limit = std::ldexp(1.0, -128);
    std::size_t n = 0, good = 0;
    double worst = 0;
    for (const auto& id : kNumericIds) {
        for (const auto& r : verify_numeric(find_identity(id), 256, 0, 3)) {
            ++n;
            if (r.passed() && r.residual) {
                double res = std::stod(*r.residual);
                if (res < limit) ++good;
                worst = std::max(worst, res);
            }
        }
    }
    double s = seconds_since(t0);
    std::ostringstream d;
    d << good << "/" << n << " points below 2^-128, worst residual " << worst << ", " << s << " s";
    return {good == n && n == 12 && s < 120, d.str()};
}

Outcome sigma_oracle()
{
    auto ctx = make_context({}, 40);
    auto s = sigma_series(ctx);
    int bad = 0;
    for (int n = 0; n <= 40; ++n) {
        Monomial m = n ? Monomial{{"q", static_cast<unsigned>(n)}} : Monomial{};
        if (s.coefficient(m) != sigma_oracle_coeff(n)) ++bad;
    }
    return {bad == 0, std::to_string(41 - bad) + "/41 coefficients match"};
}

Outcome d_zero_consistency()
{
    auto ctx = make_context({{"c", 1, {}}, {"d", 1, {}}}, 25);
    FormalBackend be(ctx);
    be.bind("c", be.var("c"));
    be.bind("d", be.var("d"));
    auto two = bd::sigma2(be).rhs;
    auto one = bd::sigma1(be).rhs;
    auto rep = equal_up_to(substitute_var(two, "d", be.zero()), one, 25);
    std::string d = "sigma2 rhs at d = 0 vs sigma1 rhs to order 25: ";
    d += rep.equal ? "equal" : "differ at " + rep.first_mismatch->monomial_text;
    return {rep.equal, d};
}

Outcome epsilon_soundness()
{
    const auto& names = bd::z_expression_names();
    std::vector<std::size_t> idx(names.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 gen(20240601);
    std::shuffle(idx.begin(), idx.end(), gen);
    idx.resize(10);

    const Rational q0(1, 10), h(1, 1000000);
    Sampler sampler("epsilon", 0, 0);
    int good = 0;
    double worst = 0;
    std::ostringstream bad;
    for (std::size_t which : idx) {
        const Rational u = sampler.draw(Rational(1, 13), Rational(1, 2), true);
        const Rational v = sampler.draw(Rational(1, 13), Rational(1, 2), true);

        auto ctx = make_context({{"eps", 0, 2}}, 40);
        FormalBackend fb(ctx);
        fb.bind("c", fb.lit(u) * fb.q());
        fb.bind("d", fb.lit(v) * fb.q());
        fb.bind("z", 1L + fb.var("eps"));
        auto derivative = project_epsilon(bd::z_expression(fb, which)).second;
        PrecisionScope scope(256);
        BigFloat formal = eval_formal_at(derivative, PointAssignment({{"q", q0}, {"eps", 0}}), 256);

        auto at = [&](const Rational& z) {
            NumericBackend<BigFloat> be(256, q0);
            be.bind("c", BigFloat(Rational(u * q0)));
            be.bind("d", BigFloat(Rational(v * q0)));
            be.bind("z", BigFloat(z));
            return bd::z_expression(be, which);
        };
        BigFloat fd = (at(1 + h) - at(1 - h)) / BigFloat(Rational(2 * h));
        double rel = (abs(formal - fd) / std::max(abs(formal), BigFloat::pow2(-200))).to_double();
        worst = std::max(worst, rel);
        if (rel < 1e-8) ++good;
        else bad << " " << names[which] << "(" << rel << ")";
    }
    std::ostringstream d;
    d << good << "/10 z-expressions agree, worst relative error " << worst << bad.str();
    return {good == 10, d.str()};
}

Outcome cross_backend()
{
    int good = 0;
    std::ostringstream bad;
    double worst_ratio = 0;
    std::string worst_id;
    for (const auto& id : kFormalIds) {
        CrossCheck cc;
        try {
            cc = cross_check(find_identity(id), 0);
        } catch (const std::exception& e) {
            bad << " " << id << "(" << e.what() << ")";
            continue;
        }
        for (const auto& p : cc.parts)
            if (p.bound > BigFloat(0L) && (p.difference / p.bound).to_double() > worst_ratio) {
                worst_ratio = (p.difference / p.bound).to_double();
                worst_id = id + " " + p.side + " " + p.part;
            }
        if (cc.ok) ++good;
        else bad << " " << id;
    }
    std::ostringstream d;
    d << good << "/" << kFormalIds.size() << " identities within bound, largest difference/bound " << worst_ratio << " ("
      << worst_id << ")" << bad.str();
    return {good == static_cast<int>(kFormalIds.size()), d.str()};
}

// Runs every registry record, with `perturb` replaced by its perturbed copy,
// and checks that only that record fails.
bool negative_control(const std::string& perturb, std::ostringstream& notes)
{
    std::vector<IdentityRecord> records = registry();
    for (auto& r : records)
        if (r.id == perturb) r = perturbed(r, run_order(r));
    bool ok = true;
    for (const auto& r : records) {
        const bool target = r.id == perturb;
        const int N = run_order(r);
        if (r.formal) {
            auto rep = verify_formal(r, N);
            if (target) {
                const std::string want = "q^" + std::to_string(N);
                if (rep.status != Status::fail || !rep.first_mismatch || rep.first_mismatch->monomial != want) {
                    ok = false;
                    notes << " " << perturb << ":witness(" << (rep.first_mismatch ? rep.first_mismatch->monomial : "none")
                          << ")";
                }
            } else if (!rep.passed()) {
                ok = false;
                notes << " " << perturb << "->" << r.id;
            }
        } else if (target) {
            auto reps = verify_numeric(r, 256, 0, 1);
            if (reps.at(0).status != Status::fail) {
                ok = false;
                notes << " " << perturb << ":numeric-not-failing";
            }
        } else {
            // numeric-only neighbours
            for (const auto& rep : verify_numeric(r, 256, 0, 1))
                if (!rep.passed()) {
                    ok = false;
                    notes << " " << perturb << "->" << r.id;
                }
        }
    }
    return ok;
}

Outcome negative_controls()
{
    auto t0 = Clock::now();
    std::ostringstream notes;
    int good = 0;
    for (const auto& r : registry()) good += negative_control(r.id, notes);
    std::ostringstream d;
    d << good << "/" << registry().size() << " perturbations isolated, " << seconds_since(t0) << " s" << notes.str();
    return {good == static_cast<int>(registry().size()), d.str()};
}

Outcome coefficient_table()
{
    std::ostringstream out, err;
    int code = cli::run({"coeffs", "sigma", "--upto", "40"}, out, err);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    bool ok = code == 0 && line == "n,coefficient";
    std::vector<long> values;
    while (std::getline(in, line)) {
        auto comma = line.find(',');
        std::string n = line.substr(0, comma), c = line.substr(comma + 1);
        ok &= comma != std::string::npos && c.find('/') == std::string::npos;
        ok &= std::stol(n) == static_cast<long>(values.size());
        values.push_back(std::stol(c));
    }
    ok &= values.size() == 41;
    const std::vector<long> head{1, 1, -1, 2, -2};
    for (std::size_t i = 0; ok && i < head.size(); ++i) ok &= values[i] == head[i];
    int match = 0;
    for (std::size_t n = 0; n < values.size(); ++n) match += values[n] == sigma_oracle_coeff(static_cast<int>(n));
    ok &= match == 41;
    return {ok, std::to_string(values.size()) + " rows, " + std::to_string(match) + " equal to the oracle, exit " +
                    std::to_string(code)};
}

} // namespace

// Optional arguments pick criteria by number; all run by default.
int main(int argc, char** argv)
{
    const std::vector<std::function<Outcome()>> criteria{formal_suite,      numeric_suite,     sigma_oracle,
                                                         d_zero_consistency, epsilon_soundness, cross_backend,
                                                         negative_controls, coefficient_table};
    int failed = 0;
    std::vector<std::size_t> chosen;
    for (int i = 1; i < argc; ++i) chosen.push_back(std::stoul(argv[i]) - 1);
    if (chosen.empty())
        for (std::size_t i = 0; i < criteria.size(); ++i) chosen.push_back(i);
    for (std::size_t i : chosen) {
        Outcome o{false, ""};
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.ok;
        std::cout << "criterion " << i + 1 << ": " << (o.ok ? "PASS" : "FAIL") << " (" << o.detail << ")" << std::endl;
    }
    return failed ? 1 : 0;
}
