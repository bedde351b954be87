#include "carnot/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace carnot {

namespace {

using nlohmann::ordered_json;

const char* const kCsvColumns = "suite,check,criterion,status,residual,tolerance,oracle,anchor,wall_ms";

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("report: malformed number '" + s + "'");
    return v;
}

ordered_json number(double v) {
    // JSON has no NaN or infinity; keep them as strings so they round-trip.
    if (!std::isfinite(v)) return format_double(v);
    return v;
}

double from_number(const ordered_json& j) { return j.is_string() ? parse_double(j.get<std::string>()) : j.get<double>(); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
            else if (c == '"') quoted = false;
            else cur += c;
        } else if (c == '"') quoted = true;
        else if (c == ',') out.push_back(cur), cur.clear();
        else cur += c;
    }
    out.push_back(cur);
    return out;
}

ordered_json to_json(const CheckReport& r) {
    ordered_json j;
    j["suite"] = r.suite;
    j["check"] = r.check;
    j["criterion"] = r.criterion;
    j["status"] = to_string(r.status);
    j["residual"] = number(r.residual);
    j["tolerance"] = number(r.tolerance);
    j["oracle"] = to_string(r.oracle);
    j["anchor"] = r.anchor;
    j["wall_ms"] = r.wall_ms;
    return j;
}

CheckReport from_json(const ordered_json& j) {
    CheckReport r;
    r.suite = j.at("suite").get<std::string>();
    r.check = j.at("check").get<std::string>();
    r.criterion = j.at("criterion").get<int>();
    r.status = status_from_string(j.at("status").get<std::string>());
    r.residual = from_number(j.at("residual"));
    r.tolerance = from_number(j.at("tolerance"));
    r.oracle = oracle_from_string(j.at("oracle").get<std::string>());
    r.anchor = j.at("anchor").get<std::string>();
    r.wall_ms = j.at("wall_ms").get<double>();
    return r;
}

} // namespace

std::string to_string(Status s) {
    switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::flagged: return "flagged";
    }
    return "fail";
}

std::string to_string(Oracle o) {
    switch (o) {
    case Oracle::reference: return "reference";
    case Oracle::identity: return "identity";
    case Oracle::independent: return "independent";
    }
    return "independent";
}

Status status_from_string(const std::string& s) {
    if (s == "pass") return Status::pass;
    if (s == "fail") return Status::fail;
    if (s == "flagged") return Status::flagged;
    throw std::invalid_argument("unknown status: " + s);
}

Oracle oracle_from_string(const std::string& s) {
    if (s == "reference") return Oracle::reference;
    if (s == "identity") return Oracle::identity;
    if (s == "independent") return Oracle::independent;
    throw std::invalid_argument("unknown oracle kind: " + s);
}

CheckReport make_check(std::string suite, std::string check, int criterion, double residual, double tolerance,
                       Oracle oracle, std::string anchor) {
    CheckReport r{std::move(suite), std::move(check), criterion, Status::fail, residual, tolerance, oracle, std::move(anchor), 0};
    r.status = residual <= tolerance ? Status::pass : Status::fail;
    return r;
}

CheckReport make_comparison(std::string suite, std::string check, int criterion, double residual, double tolerance,
                            Oracle oracle, std::string anchor) {
    CheckReport r = make_check(std::move(suite), std::move(check), criterion, residual, tolerance, oracle, std::move(anchor));
    if (r.status == Status::fail) r.status = Status::flagged;
    return r;
}

Summary summarize(const std::vector<CheckReport>& checks) {
    Summary s;
    for (const auto& c : checks) {
        ++s.total;
        if (c.status == Status::pass) ++s.pass;
        else if (c.status == Status::fail) ++s.fail;
        else ++s.flagged;
    }
    return s;
}

Format format_from_string(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    throw std::invalid_argument("unknown format: " + s);
}

std::string emit_report(const ReportDocument& doc, Format format) {
    const Summary sum = summarize(doc.checks);
    if (format == Format::json) {
        ordered_json j;
        j["schema"] = doc.schema;
        j["command"] = doc.command;
        j["target"] = doc.target;
        j["config"] = doc.config;
        j["summary"] = {{"total", sum.total}, {"pass", sum.pass}, {"fail", sum.fail}, {"flagged", sum.flagged}};
        j["checks"] = ordered_json::array();
        for (const auto& c : doc.checks) j["checks"].push_back(to_json(c));
        j["ledger"] = doc.ledger;
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "# schema=" << doc.schema << "\n";
    out << "# command=" << doc.command << "\n";
    out << "# target=" << doc.target << "\n";
    out << "# config=" << doc.config.dump() << "\n";
    out << "# ledger=" << doc.ledger.dump() << "\n";
    out << kCsvColumns << "\n";
    for (const auto& c : doc.checks) {
        out << csv_field(c.suite) << ',' << csv_field(c.check) << ',' << c.criterion << ',' << to_string(c.status) << ','
            << format_double(c.residual) << ',' << format_double(c.tolerance) << ',' << to_string(c.oracle) << ','
            << csv_field(c.anchor) << ',' << format_double(c.wall_ms) << "\n";
    }
    return out.str();
}

ReportDocument parse_report(const std::string& text, Format format) {
    ReportDocument doc;
    if (format == Format::json) {
        const ordered_json j = ordered_json::parse(text);
        doc.schema = j.at("schema").get<std::string>();
        if (doc.schema != kReportSchema) throw std::invalid_argument("report: unsupported schema " + doc.schema);
        doc.command = j.at("command").get<std::string>();
        doc.target = j.at("target").get<std::string>();
        doc.config = j.at("config");
        for (const auto& c : j.at("checks")) doc.checks.push_back(from_json(c));
        doc.ledger = j.at("ledger");
        return doc;
    }
    std::istringstream in(text);
    std::string line;
    bool header = false;
    auto meta = [&](const std::string& key) -> std::string {
        const std::string prefix = "# " + key + "=";
        if (line.rfind(prefix, 0) != 0) throw std::invalid_argument("report: expected " + prefix);
        return line.substr(prefix.size());
    };
    std::getline(in, line);
    doc.schema = meta("schema");
    if (doc.schema != kReportSchema) throw std::invalid_argument("report: unsupported schema " + doc.schema);
    std::getline(in, line);
    doc.command = meta("command");
    std::getline(in, line);
    doc.target = meta("target");
    std::getline(in, line);
    doc.config = ordered_json::parse(meta("config"));
    std::getline(in, line);
    doc.ledger = ordered_json::parse(meta("ledger"));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!header) {
            if (line != kCsvColumns) throw std::invalid_argument("report: unexpected CSV header");
            header = true;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 9) throw std::invalid_argument("report: malformed CSV row");
        CheckReport r;
        r.suite = f[0];
        r.check = f[1];
        r.criterion = std::stoi(f[2]);
        r.status = status_from_string(f[3]);
        r.residual = parse_double(f[4]);
        r.tolerance = parse_double(f[5]);
        r.oracle = oracle_from_string(f[6]);
        r.anchor = f[7];
        r.wall_ms = parse_double(f[8]);
        doc.checks.push_back(r);
    }
    if (!header) throw std::invalid_argument("report: missing CSV header");
    return doc;
}

ReportDocument without_timing(ReportDocument doc) {
    for (auto& c : doc.checks) c.wall_ms = 0;
    return doc;
}

} // namespace carnot
