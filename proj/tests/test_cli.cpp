#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qseries/cli.hpp"
#include "qseries/identities.hpp"

using namespace qseries;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::pair<long, std::string>> csv_rows(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "n,coefficient");
    std::vector<std::pair<long, std::string>> rows;
    while (std::getline(in, line)) {
        auto comma = line.find(',');
        rows.emplace_back(std::stol(line.substr(0, comma)), line.substr(comma + 1));
    }
    return rows;
}

// Coefficients of prod (1 + q^k) by direct counting of distinct-part partitions.
long distinct_partitions(int n, int max_part)
{
    if (n == 0) return 1;
    long total = 0;
    for (int p = std::min(n, max_part); p >= 1; --p) total += distinct_partitions(n - p, p - 1);
    return total;
}

std::string temp_path(const std::string& name)
{
    return testing::TempDir() + name;
}

} // namespace

TEST(CliList, TextAndJson)
{
    auto r = run({"list"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 26);
    EXPECT_NE(r.out.find("sigma1\t"), std::string::npos);
    EXPECT_NE(r.out.find("nineparam\tnumeric"), std::string::npos);
    auto j = run({"list", "--json"});
    auto a = nlohmann::json::parse(j.out);
    ASSERT_TRUE(a.is_array());
    EXPECT_EQ(a.size(), 26u);
    EXPECT_EQ(a[0]["id"], "adsy3");
}

TEST(CliCoeffs, SigmaLeadingValues)
{
    auto r = run({"coeffs", "sigma", "--upto", "4"});
    ASSERT_EQ(r.code, 0);
    auto rows = csv_rows(r.out);
    std::vector<std::string> want{"1", "1", "-1", "2", "-2"};
    ASSERT_EQ(rows.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(rows[i].first, static_cast<long>(i));
        EXPECT_EQ(rows[i].second, want[i]);
    }
}

TEST(CliCoeffs, TIndexing)
{
    auto rows = csv_rows(run({"coeffs", "T", "--upto", "1"}).out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], std::make_pair(-23L, std::string("-2")));
    EXPECT_EQ(rows[1], std::make_pair(1L, std::string("1")));
    EXPECT_EQ(rows[2], std::make_pair(25L, std::string("1")));
}

TEST(CliCoeffs, DHasHalfConstantTerm)
{
    auto rows = csv_rows(run({"coeffs", "D", "--upto", "4"}).out);
    std::vector<std::string> want{"-1/2", "1", "2", "2", "3"};
    ASSERT_EQ(rows.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(rows[i].second, want[i]) << i;
}

TEST(CliCoeffs, SMatchesDistinctPartitionCount)
{
    auto rows = csv_rows(run({"coeffs", "S", "--upto", "30"}).out);
    ASSERT_EQ(rows.size(), 31u);
    for (int n = 0; n <= 30; ++n) EXPECT_EQ(std::stol(rows[n].second), distinct_partitions(n, n)) << n;
}

TEST(CliCoeffs, CsvFileMatchesStdout)
{
    const auto path = temp_path("sigma.csv");
    auto r = run({"coeffs", "sigma", "--upto", "10", "--csv", path});
    ASSERT_EQ(r.code, 0);
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    EXPECT_EQ(s.str(), r.out);
    std::remove(path.c_str());
}

TEST(CliCoeffs, BadInputsExitTwo)
{
    EXPECT_EQ(run({"coeffs", "rho", "--upto", "4"}).code, 2);
    EXPECT_EQ(run({"coeffs", "sigma", "--upto", "201"}).code, 2);
    EXPECT_EQ(run({"coeffs", "sigma", "--upto", "-1"}).code, 2);
    EXPECT_EQ(run({"coeffs", "sigma"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliVerify, FormalPassExitsZero)
{
    auto r = run({"verify", "sigma1", "--order", "25"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("sigma1 formal order=25 c=formal: pass"), std::string::npos) << r.out;
}

TEST(CliVerify, ErrorsExitTwo)
{
    auto bad = run({"verify", "qbin", "--param", "z=3/2", "--seed", "1"});
    EXPECT_EQ(bad.code, 2) << bad.out;
    EXPECT_NE(bad.out.find("precondition-error"), std::string::npos);
    EXPECT_EQ(run({"verify", "no-such-id"}).code, 2);
    EXPECT_EQ(run({"verify", "sigma1", "--param", "c"}).code, 2);
    EXPECT_EQ(run({"verify", "sigma1", "--backend", "symbolic"}).code, 2);
    EXPECT_EQ(run({"verify", "nineparam", "--backend", "formal"}).code, 2);
    EXPECT_EQ(run({"verify", "sigma1", "--order", "0"}).code, 2);
}

TEST(CliVerify, AssigningQSelectsNumeric)
{
    auto r = run({"verify", "sigma1", "--param", "q=1/5", "--samples", "2"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("sigma1 numeric precision=256"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("q=1/5"), std::string::npos);
}

TEST(CliVerify, RationalParamIsRecorded)
{
    auto r = run({"verify", "recip3", "--order", "12", "--param", "a=1/2"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("a=1/2"), std::string::npos) << r.out;
}

TEST(CliVerify, JsonReportRerunsToTheSameVerdict)
{
    const auto path = temp_path("recip4.json");
    auto r = run({"verify", "recip4", "--order", "12", "--seed", "5", "--json", path});
    ASSERT_EQ(r.code, 0) << r.out << r.err;
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    auto reports = reports_from_json(s.str());
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].identity_id, "recip4");
    EXPECT_EQ(reports[0].order, 12);
    auto again = rerun(reports[0]);
    EXPECT_EQ(again.status, reports[0].status);
    EXPECT_EQ(again.params, reports[0].params);
    EXPECT_EQ(again.to_json(false), reports[0].to_json(false));
    std::remove(path.c_str());
}

TEST(CliVerify, ExplicitNumericBackend)
{
    auto r = run({"verify", "heine", "--backend", "numeric", "--samples", "1", "--precision", "128"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("heine numeric precision=128"), std::string::npos) << r.out;
}
