#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace carnot {

inline constexpr const char* kReportSchema = "carnot-report/1";

enum class Status { pass, fail, flagged };
// reference: a published closed-form value; identity: holds by construction;
// independent: agreement between two separate computations.
enum class Oracle { reference, identity, independent };

std::string to_string(Status s);
std::string to_string(Oracle o);
Status status_from_string(const std::string& s);
Oracle oracle_from_string(const std::string& s);

struct CheckReport {
    std::string suite;
    std::string check;
    int criterion = 0; // acceptance criterion this check feeds, 0 if none
    Status status = Status::fail;
    double residual = 0;
    double tolerance = 0;
    Oracle oracle = Oracle::independent;
    std::string anchor; // what is being compared
    double wall_ms = 0;

    bool operator==(const CheckReport&) const = default;
};

// status = pass iff residual ≤ tolerance; NaN residuals fail.
CheckReport make_check(std::string suite, std::string check, int criterion, double residual, double tolerance,
                       Oracle oracle, std::string anchor);
// Two-scheme disagreement: flagged instead of failed.
CheckReport make_comparison(std::string suite, std::string check, int criterion, double residual, double tolerance,
                            Oracle oracle, std::string anchor);

struct ReportDocument {
    std::string schema = kReportSchema;
    std::string command;
    std::string target;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<CheckReport> checks;
    nlohmann::ordered_json ledger = nlohmann::ordered_json::object();

    bool operator==(const ReportDocument&) const = default;
};

struct Summary {
    int total = 0, pass = 0, fail = 0, flagged = 0;
};

Summary summarize(const std::vector<CheckReport>& checks);

enum class Format { json, csv };
Format format_from_string(const std::string& s);

std::string emit_report(const ReportDocument& doc, Format format);
ReportDocument parse_report(const std::string& text, Format format);

// The same document with every wall time zeroed, for determinism comparisons.
ReportDocument without_timing(ReportDocument doc);

} // namespace carnot
