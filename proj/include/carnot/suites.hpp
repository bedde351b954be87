#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "carnot/algebra.hpp"
#include "carnot/report.hpp"
#include "json.hpp"

namespace carnot {

// Tolerances for checks that are not tied to an acceptance criterion. Criterion
// checks carry pinned tolerances and ignore the profile.
struct ToleranceProfile {
    std::string name = "default";
    double algebraic = 1e-12;
    double jet = 1e-8;
    double curvature = 1e-6;
    double quadrature = 1e-3;
};

// "default" or "strict"; throws std::invalid_argument otherwise.
ToleranceProfile tolerance_profile(const std::string& name);

struct SuiteConfig {
    std::uint64_t seed = 7;
    std::size_t samples = 200000;
    std::string tol_profile = "default";
    std::optional<Family> family; // restricts the algebra and group suites
    std::optional<int> n;
    std::string A = "identity";       // heterotic: identity | random
    std::string profile = "weierstrass"; // heterotic: weierstrass | constant
    std::string grid_in, grid_out;    // sphere: S⁷ quadrature grid CSV

    nlohmann::ordered_json to_json() const;
};

std::vector<std::string> suite_names(); // without "all"
// Runs one suite, or every suite for "all", in a fixed order. Throws std::invalid_argument
// on an unknown name or a bad option value.
std::vector<CheckReport> run_suite(const std::string& name, const SuiteConfig& cfg);

// Conventions in force and the measured constants behind them.
nlohmann::ordered_json build_ledger(const SuiteConfig& cfg);

// JSON: the ledger object. CSV: section,key,value rows.
std::string emit_ledger(const nlohmann::ordered_json& ledger, Format format);

// Instanton data selected by cfg.A: the identity, or a seeded Gaussian matrix.
Eigen::Matrix3d heterotic_A(const SuiteConfig& cfg);

inline constexpr const char* kOdeSchema = "carnot-ode/1";

struct OdeTable {
    nlohmann::ordered_json header;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// One-variable dilaton sampled at cfg.samples points of (0.05, 2τ₊ − 0.05).
OdeTable solve_ode(const SuiteConfig& cfg);
// CSV: a "# {header json}" line, the column names, then rows. JSON: header fields plus "rows".
std::string emit_ode(const OdeTable& table, Format format);

// Reproducible per-check seed.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& check);

} // namespace carnot
