#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rlfuzz/loop.hpp"

namespace rlfuzz {

// Run reports are comma-separated records bracketed by structured comment
// lines:
//
//   # rlfuzz-report v1 run
//   # config {...}
//   generation,offset,action,reward,epsilon,loss,outcome
//   0,1184,3,41,1,,completed
//   ...
//   # summary {...}
//
// Doubles are printed with std::to_chars shortest form, which parses back
// to the identical bit pattern; writing and re-reading a report is lossless.

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const char* what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError(std::string("report: bad ") + what + " value \"" + s + "\"");
    return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace detail

inline constexpr const char* kRunReportHeader = "generation,offset,action,reward,epsilon,loss,outcome";

inline void write_run_report(const RunReport& report, std::ostream& out) {
    out << "# rlfuzz-report v1 run\n";
    out << "# config " << report.config_echo.dump() << "\n";
    out << kRunReportHeader << "\n";
    for (const GenerationRecord& r : report.records) {
        out << r.generation << ',' << r.offset << ',' << r.action << ','
            << detail::format_double(r.reward) << ',' << detail::format_double(r.epsilon) << ','
            << (r.loss ? detail::format_double(*r.loss) : std::string()) << ','
            << outcome_name(r.outcome) << "\n";
    }
    Json summary;
    summary["records"] = report.records.size();
    summary["total_reward"] = report.total_reward();
    summary["last_half_reward_sum"] = report.last_half_reward_sum();
    summary["last_half_time_sum"] = report.last_half_time_sum();
    summary["last_half_block_sum"] = report.last_half_block_sum();
    summary["wall_times"] = report.wall_times;
    summary["block_counts"] = report.block_counts;
    Json findings = Json::array();
    for (const CrashFinding& f : report.findings)
        findings.push_back(Json{{"generation", f.generation},
                                {"outcome", outcome_name(f.outcome)},
                                {"path", f.path}});
    summary["findings"] = findings;
    summary["aborted"] = report.aborted;
    summary["abort_kind"] = report.abort_kind == AbortKind::none
                                ? "none"
                                : (report.abort_kind == AbortKind::environment ? "environment" : "numeric");
    summary["abort_reason"] = report.abort_reason;
    summary["weights"] = report.weights_path;
    out << "# summary " << summary.dump() << "\n";
}

inline void write_run_report(const RunReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw EnvironmentError("cannot write report file: " + path);
    write_run_report(report, out);
}

inline RunReport parse_run_report(std::istream& in) {
    RunReport report;
    std::string line;

    if (!std::getline(in, line) || line != "# rlfuzz-report v1 run")
        throw FormatError("report: missing \"# rlfuzz-report v1 run\" magic line");
    if (!std::getline(in, line) || line.rfind("# config ", 0) != 0)
        throw FormatError("report: missing config line");
    try {
        report.config_echo = Json::parse(line.substr(9));
    } catch (const Json::exception& e) {
        throw FormatError(std::string("report: config block: ") + e.what());
    }
    if (!std::getline(in, line) || line != kRunReportHeader)
        throw FormatError("report: missing column header");

    Json summary;
    double running = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# summary ", 0) == 0) {
            try {
                summary = Json::parse(line.substr(10));
            } catch (const Json::exception& e) {
                throw FormatError(std::string("report: summary block: ") + e.what());
            }
            break;
        }
        auto fields = detail::split_csv(line);
        if (fields.size() != 7)
            throw FormatError("report: record with " + std::to_string(fields.size()) +
                              " fields: " + line);
        GenerationRecord r;
        r.generation = static_cast<std::size_t>(detail::parse_double(fields[0], "generation"));
        r.offset = static_cast<std::size_t>(detail::parse_double(fields[1], "offset"));
        r.action = static_cast<std::size_t>(detail::parse_double(fields[2], "action"));
        r.reward = detail::parse_double(fields[3], "reward");
        r.epsilon = detail::parse_double(fields[4], "epsilon");
        if (!fields[5].empty()) r.loss = detail::parse_double(fields[5], "loss");
        r.outcome = outcome_from_name(fields[6]);
        running += r.reward;
        report.records.push_back(r);
        report.cumulative_rewards.push_back(running);
    }
    if (summary.is_null()) throw FormatError("report: missing summary block");
    try {
        report.wall_times = summary["wall_times"].get<std::vector<double>>();
        report.block_counts = summary["block_counts"].get<std::vector<double>>();
        for (const Json& f : summary["findings"]) {
            CrashFinding cf;
            cf.generation = f["generation"].get<std::size_t>();
            cf.outcome = outcome_from_name(f["outcome"].get<std::string>());
            cf.path = f["path"].get<std::string>();
            report.findings.push_back(cf);
        }
        report.aborted = summary["aborted"].get<bool>();
        std::string kind = summary["abort_kind"].get<std::string>();
        report.abort_kind = kind == "none" ? AbortKind::none
                                           : (kind == "environment" ? AbortKind::environment
                                                                    : AbortKind::numeric);
        report.abort_reason = summary["abort_reason"].get<std::string>();
        report.weights_path = summary["weights"].get<std::string>();
        if (summary["records"].get<std::size_t>() != report.records.size())
            throw FormatError("report: summary record count disagrees with the record list");
    } catch (const Json::exception& e) {
        throw FormatError(std::string("report: summary block: ") + e.what());
    }
    return report;
}

inline RunReport parse_run_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EnvironmentError("cannot open report file: " + path);
    return parse_run_report(in);
}

// Field-for-field equality over everything a report file carries.
inline bool reports_equal(const RunReport& a, const RunReport& b) {
    auto finding_eq = [](const CrashFinding& x, const CrashFinding& y) {
        return x.generation == y.generation && x.outcome == y.outcome && x.path == y.path;
    };
    if (a.records != b.records) return false;
    if (a.cumulative_rewards != b.cumulative_rewards) return false;
    if (a.wall_times != b.wall_times || a.block_counts != b.block_counts) return false;
    if (a.findings.size() != b.findings.size()) return false;
    for (std::size_t i = 0; i < a.findings.size(); ++i)
        if (!finding_eq(a.findings[i], b.findings[i])) return false;
    return a.aborted == b.aborted && a.abort_kind == b.abort_kind &&
           a.abort_reason == b.abort_reason && a.config_echo == b.config_echo;
}

}  // namespace rlfuzz
