#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "carnot/report.hpp"
#include "carnot/suites.hpp"

using namespace carnot;

namespace {

struct Options {
    SuiteConfig cfg;
    std::string family;
    int n = 0;
    std::string format = "json";
    std::string out;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--seed", o.cfg.seed, "base seed; per-check seeds derive from it")->capture_default_str();
    cmd->add_option("--samples", o.cfg.samples, "quadrature samples, default 200000; grid points for solve-ode, default 1000");
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    cmd->add_option("--out", o.out, "output file; defaults to $CARNOT_OUT_DIR/<name>.<ext>, else stdout");
}

// --out wins; otherwise CARNOT_OUT_DIR supplies the directory; otherwise stdout.
std::optional<std::filesystem::path> destination(const Options& o, const std::string& stem) {
    if (!o.out.empty()) return std::filesystem::path(o.out);
    if (const char* dir = std::getenv("CARNOT_OUT_DIR"); dir && *dir)
        return std::filesystem::path(dir) / (stem + "." + o.format);
    return std::nullopt;
}

void write_output(const std::string& text, const std::optional<std::filesystem::path>& path) {
    if (!path) {
        std::cout << text;
        return;
    }
    if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
    std::ofstream f(*path);
    if (!f) throw std::runtime_error("cannot write " + path->string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path->string());
}

int run_verify(const std::string& target, Options& o) {
    if (!o.family.empty()) o.cfg.family = o.family == "complex" ? Family::complex : Family::quaternionic;
    if (o.n) o.cfg.n = o.n;
    ReportDocument doc;
    doc.command = "verify";
    doc.target = target;
    doc.config = o.cfg.to_json();
    doc.config["format"] = o.format;
    doc.checks = run_suite(target, o.cfg);
    doc.ledger = build_ledger(o.cfg);
    const auto path = destination(o, "verify-" + target);
    write_output(emit_report(doc, format_from_string(o.format)), path);
    const Summary s = summarize(doc.checks);
    std::cerr << "verify " << target << ": " << s.pass << " pass, " << s.fail << " fail, " << s.flagged << " flagged of " << s.total;
    if (path) std::cerr << " -> " << path->string();
    std::cerr << "\n";
    for (const auto& c : doc.checks)
        if (c.status != Status::pass)
            std::cerr << "  " << to_string(c.status) << " " << c.suite << "/" << c.check << ": residual " << c.residual << " > " << c.tolerance << "\n";
    return s.fail == 0 ? 0 : 1;
}

int run_ode(Options& o) {
    const OdeTable t = solve_ode(o.cfg);
    const auto path = destination(o, "solve-ode");
    write_output(emit_ode(t, format_from_string(o.format)), path);
    std::cerr << "solve-ode: " << t.rows.size() << " rows, max anomaly residual " << t.header["max_anomaly_residual"].get<double>();
    if (path) std::cerr << " -> " << path->string();
    std::cerr << "\n";
    return 0;
}

int run_ledger(Options& o) {
    const auto path = destination(o, "ledger");
    write_output(emit_ledger(build_ledger(o.cfg), format_from_string(o.format)), path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical verification of sub-Riemannian conformal geometry and heterotic identities"};
    app.require_subcommand(1);

    Options o;
    std::string target;

    auto* verify = app.add_subcommand("verify", "run a verification suite and emit a report");
    std::vector<std::string> targets = suite_names();
    targets.push_back("all");
    verify->add_option("target", target, "suite")->required()->check(CLI::IsMember(targets));
    add_common(verify, o);
    verify->add_option("--tol-profile", o.cfg.tol_profile, "tolerances for checks outside the pinned criteria")
        ->check(CLI::IsMember({"default", "strict"}))
        ->capture_default_str();
    verify->add_option("--family", o.family, "restrict algebra/group suites")->check(CLI::IsMember({"complex", "quaternionic"}));
    verify->add_option("--n", o.n, "restrict algebra/group suites to one n")->check(CLI::Range(1, 3));
    verify->add_option("--A", o.cfg.A, "heterotic instanton matrix")->check(CLI::IsMember({"identity", "random"}))->capture_default_str();
    verify->add_option("--profile", o.cfg.profile, "heterotic dilaton")->check(CLI::IsMember({"weierstrass", "constant"}))->capture_default_str();
    verify->add_option("--grid-out", o.cfg.grid_out, "write the S^7 quadrature grid as CSV");
    verify->add_option("--grid-in", o.cfg.grid_in, "read the S^7 quadrature grid from CSV")->check(CLI::ExistingFile);

    auto* ode = app.add_subcommand("solve-ode", "sample the one-variable dilaton and its residuals");
    add_common(ode, o);
    ode->add_option("--A", o.cfg.A, "instanton matrix")->check(CLI::IsMember({"identity", "random"}))->capture_default_str();

    auto* ledger = app.add_subcommand("ledger", "print conventions and measured constants");
    add_common(ledger, o);

    // Defaults that differ per subcommand.
    o.cfg.samples = 0;
    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            if (o.cfg.samples == 0) o.cfg.samples = SuiteConfig{}.samples;
            return run_verify(target, o);
        }
        if (ode->parsed()) {
            if (o.cfg.samples == 0) o.cfg.samples = 1000;
            return run_ode(o);
        }
        if (o.cfg.samples == 0) o.cfg.samples = SuiteConfig{}.samples;
        return run_ledger(o);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
