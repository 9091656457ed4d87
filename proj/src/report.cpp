#include "subrk/report.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace subrk {

SuiteSummary SuiteReport::summary() const {
    SuiteSummary s;
    for (const auto& c : cases) {
        if (c.verdict == "pass")
            ++s.pass;
        else if (c.verdict == "fail")
            ++s.fail;
        else if (c.verdict == "inconclusive")
            ++s.inconclusive;
        else
            throw std::invalid_argument("SuiteReport: unknown verdict '" + c.verdict + "'");
    }
    return s;
}

int SuiteReport::exit_code() const {
    SuiteSummary s = summary();
    if (s.fail > 0) return 1;
    if (s.inconclusive > 0) return 2;
    return 0;
}

std::string verdict_for(double residual, double tol, double noise) {
    if (residual >= -tol) return "pass";
    if (residual >= -tol - noise) return "inconclusive";
    return "fail";
}

Json report_to_json(const SuiteReport& report) {
    Json j;
    j["suite"] = report.suite;
    j["config"] = report.config;
    j["cases"] = Json::array();
    for (const auto& c : report.cases) {
        Json jc;
        jc["inputs"] = c.inputs;
        jc["lhs"] = c.lhs;
        jc["rhs"] = c.rhs;
        jc["residual"] = c.residual;
        if (c.stderr_)
            jc["stderr"] = *c.stderr_;
        else
            jc["stderr"] = nullptr;
        jc["verdict"] = c.verdict;
        j["cases"].push_back(std::move(jc));
    }
    SuiteSummary s = report.summary();
    j["summary"] = {{"pass", s.pass}, {"fail", s.fail}, {"inconclusive", s.inconclusive}};
    return j;
}

SuiteReport report_from_json(const Json& j) {
    SuiteReport r;
    r.suite = j.at("suite").get<std::string>();
    r.config = j.at("config");
    for (const auto& jc : j.at("cases")) {
        CaseResult c;
        c.inputs = jc.at("inputs");
        c.lhs = jc.at("lhs").get<double>();
        c.rhs = jc.at("rhs").get<double>();
        c.residual = jc.at("residual").get<double>();
        if (!jc.at("stderr").is_null()) c.stderr_ = jc.at("stderr").get<double>();
        c.verdict = jc.at("verdict").get<std::string>();
        r.cases.push_back(std::move(c));
    }
    return r;
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string csv_number(double v) {
    Json j = v; // reuse the shortest round-trip formatting of the JSON writer
    return j.dump();
}

std::string csv_value(const Json& j) {
    if (j.is_string()) return csv_quote(j.get<std::string>());
    return csv_quote(j.dump());
}

} // namespace

std::string report_to_csv(const SuiteReport& report) {
    std::set<std::string> keys;
    for (const auto& c : report.cases)
        for (const auto& item : c.inputs.items()) keys.insert(item.key());
    std::ostringstream os;
    os << "case,verdict,lhs,rhs,residual,stderr";
    for (const auto& k : keys) os << ',' << csv_quote(k);
    os << '\n';
    for (std::size_t i = 0; i < report.cases.size(); ++i) {
        const CaseResult& c = report.cases[i];
        os << i << ',' << c.verdict << ',' << csv_number(c.lhs) << ',' << csv_number(c.rhs) << ','
           << csv_number(c.residual) << ',' << (c.stderr_ ? csv_number(*c.stderr_) : "");
        for (const auto& k : keys) {
            os << ',';
            if (c.inputs.contains(k)) os << csv_value(c.inputs.at(k));
        }
        os << '\n';
    }
    return os.str();
}

void emit_report(const SuiteReport& report, const std::string& format, std::ostream& os) {
    if (format == "json")
        os << report_to_json(report).dump(2) << '\n';
    else if (format == "csv")
        os << report_to_csv(report);
    else
        throw std::invalid_argument("emit_report: unknown format '" + format + "'");
}

void emit_report_file(const SuiteReport& report, const std::string& format,
                      const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("emit_report_file: cannot open " + path);
    emit_report(report, format, os);
    if (!os) throw std::runtime_error("emit_report_file: write failed for " + path);
}

} // namespace subrk
