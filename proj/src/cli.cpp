#include "qseries/cli.hpp"

#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qseries/identities.hpp"
#include "qseries/sigma.hpp"

namespace qseries::cli {

namespace {

using json = nlohmann::json;

struct UsageError : error {
    using error::error;
};

std::vector<const IdentityRecord*> sorted_records()
{
    std::vector<const IdentityRecord*> out;
    for (const auto& r : registry()) out.push_back(&r);
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
    return out;
}

std::string backends_text(const IdentityRecord& r)
{
    if (r.formal && r.numeric) return "formal,numeric";
    return r.formal ? "formal" : "numeric";
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write '" + path + "'");
    f << text;
    if (!f) throw UsageError("failed writing '" + path + "'");
}

std::string describe(const VerificationReport& r)
{
    std::ostringstream s;
    s << r.identity_id << ' ' << r.backend;
    if (r.order) s << " order=" << *r.order;
    if (r.precision) s << " precision=" << *r.precision;
    for (const auto& [k, v] : r.params) s << ' ' << k << '=' << v;
    s << ": " << to_string(r.status);
    if (r.first_mismatch)
        s << " at " << r.first_mismatch->monomial << " (lhs " << r.first_mismatch->lhs << ", rhs "
          << r.first_mismatch->rhs << ")";
    if (r.residual) s << " residual " << *r.residual;
    if (!r.detail.empty()) s << ": " << r.detail;
    s << " [" << r.terms_evaluated << " terms, " << static_cast<long>(r.elapsed_ms) << " ms]";
    return s.str();
}

int exit_code(const std::vector<VerificationReport>& reports)
{
    bool fail = false, err = false;
    for (const auto& r : reports) {
        fail |= r.status == Status::fail;
        err |= r.status == Status::precondition_error;
    }
    return fail ? 1 : err ? 2 : 0;
}

int cmd_list(bool as_json, std::ostream& out)
{
    if (as_json) {
        json a = json::array();
        for (const auto* r : sorted_records()) {
            json params = json::array();
            for (const auto& p : r->params) {
                json j{{"name", p.name}, {"mode", to_string(p.mode)}};
                if (p.mode == ParamMode::fixed) j["value"] = to_string(p.value);
                params.push_back(j);
            }
            json backends = json::array();
            if (r->formal) backends.push_back("formal");
            if (r->numeric) backends.push_back("numeric");
            a.push_back({{"id", r->id},
                         {"title", r->title},
                         {"backends", backends},
                         {"default_order", r->default_order},
                         {"default_precision", r->default_precision},
                         {"params", params}});
        }
        out << a.dump(2) << '\n';
        return 0;
    }
    for (const auto* r : sorted_records()) {
        out << r->id << '\t' << backends_text(*r) << "\torder=" << r->default_order
            << "\tprecision=" << r->default_precision << '\t';
        for (std::size_t i = 0; i < r->params.size(); ++i)
            out << (i ? "," : "") << r->params[i].name << ':' << to_string(r->params[i].mode);
        out << '\t' << r->title << '\n';
    }
    return 0;
}

Assignment parse_params(const std::vector<std::string>& items)
{
    Assignment a;
    for (const auto& item : items) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=p/q, got '" + item + "'");
        a[item.substr(0, eq)] = parse_rational(item.substr(eq + 1));
    }
    return a;
}

struct VerifyArgs {
    std::string id, backend, json_path;
    std::optional<int> order;
    long precision = 0;
    std::vector<std::string> params;
    std::uint64_t seed = 0;
    int samples = 3;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out)
{
    const IdentityRecord* rec = try_find_identity(a.id);
    if (!rec) throw UsageError("unknown identity '" + a.id + "'");
    const Assignment assigned = parse_params(a.params);
    std::string backend = a.backend;
    if (backend.empty()) {
        // Values for parameters the formal backend keeps symbolic imply a numeric run.
        bool wants_numeric = assigned.count("q") != 0;
        for (const auto& [name, v] : assigned)
            if (const auto* p = rec->param(name); p && (p->mode == ParamMode::formal || p->mode == ParamMode::dual))
                wants_numeric = true;
        backend = rec->formal && !(wants_numeric && rec->numeric) ? "formal" : "numeric";
    }
    if (a.order && *a.order < 1) throw UsageError("--order must be at least 1");
    if (a.precision && a.precision < 64) throw UsageError("--precision must be at least 64");
    std::vector<VerificationReport> reports;
    if (backend == "formal") {
        if (!rec->formal) throw UsageError("identity '" + rec->id + "' has no formal backend");
        reports.push_back(verify_formal(*rec, a.order.value_or(rec->default_order), assigned, a.seed));
    } else if (backend == "numeric") {
        if (!rec->numeric) throw UsageError("identity '" + rec->id + "' has no numeric backend");
        reports = verify_numeric(*rec, a.precision ? a.precision : rec->default_precision, a.seed, a.samples, assigned);
    } else {
        throw UsageError("unknown backend '" + backend + "'");
    }
    for (const auto& r : reports) out << describe(r) << '\n';
    if (!a.json_path.empty()) write_file(a.json_path, reports_to_json(reports) + "\n");
    return exit_code(reports);
}

int cmd_verify_all(std::optional<int> order, long precision, std::uint64_t seed, int samples,
                   const std::string& json_path, std::ostream& out)
{
    if (order && *order < 1) throw UsageError("--order must be at least 1");
    if (precision < 64) throw UsageError("--precision must be at least 64");
    auto s = verify_all(order, precision, seed, samples);
    for (const auto& r : s.reports) out << describe(r) << '\n';
    out << s.reports.size() << " reports: " << s.passed << " passed, " << s.failed << " failed, " << s.errors
        << " errors\n";
    if (!json_path.empty()) write_file(json_path, reports_to_json(s.reports) + "\n");
    return s.ok() ? 0 : exit_code(s.reports);
}

std::vector<std::pair<long, Rational>> coefficient_rows(const std::string& series, int N)
{
    std::vector<std::pair<long, Rational>> rows;
    if (series == "T") {
        auto c = sigma_coefficients(N);
        for (int m = N; m >= 1; --m) rows.emplace_back(1 - 24L * m, c.star_values[m - 1]);
        for (int m = 0; m <= N; ++m) rows.emplace_back(1 + 24L * m, c.values[m]);
        return rows;
    }
    auto ctx = make_context({}, N);
    FormalSeries f(ctx);
    if (series == "sigma") f = sigma_series(ctx);
    else if (series == "sigma-star") f = sigma_star_series(ctx);
    else if (series == "S") f = s_series(ctx);
    else if (series == "D") f = d_series(ctx);
    else throw UsageError("unknown series '" + series + "' (sigma, sigma-star, S, D, T)");
    for (int n = 0; n <= N; ++n)
        rows.emplace_back(n, f.coefficient(n ? Monomial{{"q", static_cast<unsigned>(n)}} : Monomial{}));
    return rows;
}

int cmd_coeffs(const std::string& series, int N, const std::string& csv_path, std::ostream& out)
{
    if (N < 0 || N > 200) throw UsageError("--upto must be between 0 and 200");
    std::ostringstream csv;
    csv << "n,coefficient\n";
    for (const auto& [n, c] : coefficient_rows(series, N)) csv << n << ',' << to_string(c) << '\n';
    out << csv.str();
    if (!csv_path.empty()) write_file(csv_path, csv.str());
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Verification harness for q-series identities"};
    app.require_subcommand(1);

    bool list_json = false;
    auto* list = app.add_subcommand("list", "List the registered identities");
    list->add_flag("--json", list_json, "Print the registry as JSON");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Verify one identity");
    verify->add_option("id", va.id, "Identity id")->required();
    verify->add_option("--order", va.order, "Truncation order (formal)");
    verify->add_option("--backend", va.backend, "formal or numeric")->check(CLI::IsMember({"formal", "numeric"}));
    verify->add_option("--precision", va.precision, "Precision in bits (numeric)");
    verify->add_option("--param", va.params, "Parameter value name=p/q");
    verify->add_option("--seed", va.seed, "Sampling seed");
    verify->add_option("--samples", va.samples, "Number of numeric sample points")->check(CLI::PositiveNumber);
    verify->add_option("--json", va.json_path, "Write the reports as JSON");

    std::optional<int> all_order;
    long all_precision = 256;
    std::uint64_t all_seed = 0;
    int all_samples = 3;
    std::string all_json;
    auto* vall = app.add_subcommand("verify-all", "Verify every identity on every supported backend");
    vall->add_option("--order", all_order, "Truncation order for all formal runs");
    vall->add_option("--precision", all_precision, "Precision in bits");
    vall->add_option("--seed", all_seed, "Sampling seed");
    vall->add_option("--samples", all_samples, "Numeric sample points per identity")->check(CLI::PositiveNumber);
    vall->add_option("--json", all_json, "Write the reports as JSON");

    std::string series, csv_path;
    int upto = 0;
    auto* coeffs = app.add_subcommand("coeffs", "Print a coefficient table");
    coeffs->add_option("series", series, "sigma, sigma-star, S, D or T")->required();
    coeffs->add_option("--upto", upto, "Largest index")->required();
    coeffs->add_option("--csv", csv_path, "Also write the table to this CSV file");

    std::vector<std::string> argv_store{"qseries"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (list->parsed()) return cmd_list(list_json, out);
        if (verify->parsed()) return cmd_verify(va, out);
        if (vall->parsed()) return cmd_verify_all(all_order, all_precision, all_seed, all_samples, all_json, out);
        if (coeffs->parsed()) return cmd_coeffs(series, upto, csv_path, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

} // namespace qseries::cli
