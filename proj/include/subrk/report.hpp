#ifndef SUBRK_REPORT_HPP
#define SUBRK_REPORT_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace subrk {

using Json = nlohmann::ordered_json;

// One verified instance of an inequality: lhs <= rhs, residual = rhs - lhs
// (sign convention: nonnegative means the bound holds). stderr is present for
// Monte Carlo cases; the verdict is "inconclusive" when the noise straddles
// the tolerance, so sampling error never reads as a counterexample.
struct CaseResult {
    Json inputs = Json::object();
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    std::optional<double> stderr_;
    std::string verdict; // pass | fail | inconclusive
};

struct SuiteSummary {
    int pass = 0;
    int fail = 0;
    int inconclusive = 0;
};

struct SuiteReport {
    std::string suite;
    Json config = Json::object();
    std::vector<CaseResult> cases;

    SuiteSummary summary() const;
    // 0 = all pass, 1 = any fail, 2 = inconclusive present without failures
    int exit_code() const;
};

// Standard verdict rule: fail only when the residual is below -tol by more
// than `noise` (3 stderr for Monte Carlo data, 0 otherwise); inconclusive
// when the residual is negative but within the noise band.
std::string verdict_for(double residual, double tol, double noise = 0.0);

Json report_to_json(const SuiteReport& report);
SuiteReport report_from_json(const Json& j);

// One row per case; the scalar columns first, then the union of input keys.
std::string report_to_csv(const SuiteReport& report);

void emit_report(const SuiteReport& report, const std::string& format, std::ostream& os);
void emit_report_file(const SuiteReport& report, const std::string& format,
                      const std::string& path);

} // namespace subrk

#endif
