#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bigfloat.hpp"
#include "builders.hpp"
#include "formal_backend.hpp"
#include "numeric.hpp"

namespace qseries {

using builders::Sides;
using Assignment = std::map<std::string, Rational>;

// formal: a weight-1 series variable, sampled in [lo, hi] numerically.
// rational: always a sampled (or assigned) rational.
// dual: z = 1 + eps formally; sampled in (lo, hi) minus {1} numerically.
// fixed: the constant `value`.
enum class ParamMode { formal, rational, dual, fixed };

struct ParameterSpec {
    std::string name;
    ParamMode mode = ParamMode::formal;
    Rational lo{1, 13}, hi{3, 4}; // magnitude range for sampling
    bool negatives = true;        // sample both signs
    Rational value{0};            // fixed mode
};

std::string to_string(ParamMode m);

using FormalBuilder = std::function<Sides<FormalSeries>(FormalBackend&)>;
using NumericBuilder = std::function<Sides<BigFloat>(NumericBackend<BigFloat>&)>;
using DualBuilder = std::function<Sides<Dual<BigFloat>>(NumericBackend<Dual<BigFloat>>&)>;
// Empty when the point is acceptable, otherwise the violated condition.
using DomainCheck = std::function<std::optional<std::string>(const Assignment&)>;

struct IdentityRecord {
    std::string id;
    std::string title;
    std::vector<ParameterSpec> params;
    bool formal = false, numeric = false;
    int default_order = 25;
    long default_precision = 256;
    Rational q_lo{1, 13}, q_hi{1, 3};
    std::string domain_text;
    DomainCheck domain;
    FormalBuilder build_formal;
    NumericBuilder build_numeric;
    DualBuilder build_dual;

    const ParameterSpec* param(const std::string& name) const;
    bool has_dual() const;
};

const std::vector<IdentityRecord>& registry();
const IdentityRecord& find_identity(const std::string& id);
const IdentityRecord* try_find_identity(const std::string& id);

enum class Status { pass, fail, precondition_error };
std::string to_string(Status s);

struct ReportMismatch {
    std::string monomial, lhs, rhs;
};

struct VerificationReport {
    std::string identity_id;
    std::string backend; // "formal" or "numeric"
    std::optional<int> order;
    std::optional<long> precision;
    std::map<std::string, std::string> params; // "p/q", "formal" or "1+eps"
    Status status = Status::pass;
    std::optional<ReportMismatch> first_mismatch;
    std::optional<std::string> residual;
    std::size_t terms_evaluated = 0;
    double elapsed_ms = 0;
    std::string detail; // error text, not serialized

    std::string to_json(bool include_timing = true) const;
    static VerificationReport from_json(const std::string& text);
    bool passed() const { return status == Status::pass; }
};

std::string reports_to_json(const std::vector<VerificationReport>& reports, bool include_timing = true);
std::vector<VerificationReport> reports_from_json(const std::string& text);

// Deterministic rational in [lo, hi] (or [-hi, -lo] when negatives) with
// denominator at most 13, driven by (id, seed, sample).
class Sampler {
public:
    Sampler(const std::string& id, std::uint64_t seed, std::uint64_t sample);
    Rational draw(const Rational& lo, const Rational& hi, bool negatives);
    Rational draw(const ParameterSpec& p);

private:
    std::mt19937_64 gen_;
    std::uint64_t next() { return gen_(); }
};

// Formal parameter values may not be assigned; rational and fixed ones
// missing from `assigned` are drawn from the seeded sampler.
VerificationReport verify_formal(const IdentityRecord& rec, int order, const Assignment& assigned = {},
                                 std::uint64_t seed = 0);

// `point` assigns q and every non-fixed parameter.
VerificationReport verify_numeric_point(const IdentityRecord& rec, long precision, const Assignment& point);
// K points; values missing from `assigned` are resampled until the record's
// domain accepts the point.
std::vector<VerificationReport> verify_numeric(const IdentityRecord& rec, long precision, std::uint64_t seed,
                                               int samples, const Assignment& assigned = {});

struct VerifySummary {
    std::vector<VerificationReport> reports; // ordered by id, formal first
    std::size_t passed = 0, failed = 0, errors = 0;
    bool ok() const { return failed == 0 && errors == 0; }
};

// Every record on every supported backend. `order` overrides the record
// defaults when given.
VerifySummary verify_all(std::optional<int> order, long precision, std::uint64_t seed, int samples = 3,
                         const std::vector<IdentityRecord>& records = registry());

// Re-runs the verification a report describes from its recorded values.
VerificationReport rerun(const VerificationReport& report, const std::vector<IdentityRecord>& records = registry());

// Copy of the record whose right side has q^N added, on every backend.
IdentityRecord perturbed(const IdentityRecord& rec, int N);

// Order-N truncations of both sides at q = q0, with every formal parameter
// v replaced by u_v q, against direct numeric evaluation at the same point.
struct CrossPart {
    std::string side, part; // "lhs"/"rhs", "value"/"eps"
    BigFloat formal, numeric, difference, bound;
    Rational max_coefficient;
    bool ok = false;
};
struct CrossCheck {
    std::string identity_id;
    Assignment values; // u_v for formal parameters, rationals otherwise
    std::vector<CrossPart> parts;
    bool ok = false;
};
CrossCheck cross_check(const IdentityRecord& rec, std::uint64_t seed, int order = 30, const Rational& q0 = Rational(1, 10),
                       long precision = 256);

} // namespace qseries
