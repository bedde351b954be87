// One line per acceptance criterion. Each criterion lists the checks it needs and the
// tolerance each must carry; a check with a different tolerance fails the criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "carnot/report.hpp"
#include "carnot/suites.hpp"

using namespace carnot;

namespace {

struct Required {
    std::string suite, check;
    double tolerance;
};

struct Criterion {
    int id;
    std::string title;
    std::vector<Required> checks;
    std::string timed_suite; // whole-suite wall time is charged to this criterion
    double limit_ms = 0;     // 0: no runtime limit
};

std::vector<Criterion> criteria() {
    std::vector<Criterion> c;
    c.push_back({1, "frame exactness", {}, "", 1000});
    for (const char* t : {"C1", "C2", "H1", "H2"}) c.back().checks.push_back({"algebra", std::string("frame_exact_") + t, 0.0});
    c.push_back({2, "fundamental solution", {}, "", 5000});
    for (const char* t : {"C1", "C2", "H1", "H2"})
        c.back().checks.push_back({"group", std::string("fundamental_") + t + "_explicit", 1e-8});
    c.push_back({3, "sub-Laplacian and Yamabe ratio of Phi", {{"group", "sublaplacian_h_origin_H1", 1e-12}, {"group", "yamabe_phi_H1", 1e-8}}});
    c.push_back({4, "extremal constancy", {{"group", "extremal_constancy_C1", 1e-8}, {"group", "extremal_constancy_H1", 1e-8}}});
    c.push_back({5, "Liouville conformal factor", {{"group", "liouville_H1", 1e-8}}});
    c.push_back({6, "Cayley transform", {}});
    for (const char* t : {"C1", "C2", "H1", "H2"}) {
        c.back().checks.push_back({"cayley", std::string("round_trip_") + t, 1e-12});
        c.back().checks.push_back({"cayley", std::string("jacobian_") + t, 1e-7});
    }
    for (const char* t : {"H1", "H2"}) {
        c.back().checks.push_back({"cayley", std::string("inversion_involution_") + t, 1e-10});
        c.back().checks.push_back({"cayley", std::string("qc_factor_") + t, 1e-6});
    }
    for (const char* t : {"C1", "C2"}) c.back().checks.push_back({"cayley", std::string("cr_factor_") + t, 1e-7});
    c.push_back({7,
                 "matrix spectra",
                 {{"matrices", "spectrum_L", 1e-12},
                  {"matrices", "spectrum_Q", 1e-12},
                  {"matrices", "psd_L", 1e-12},
                  {"matrices", "kernel_L", 0.0},
                  {"matrices", "positive_definite_Q", 0.0}}});
    c.push_back({8, "sphere spectrum", {}, "sphere", 60000});
    for (const char* s : {"s3", "s7"}) {
        c.back().checks.push_back({"sphere", std::string("rayleigh_agreement_") + s, 1.0});
        c.back().checks.push_back({"sphere", std::string("rayleigh_precision_") + s, 1e-3});
        c.back().checks.push_back({"sphere", std::string("lambda1_") + s, 1.0});
        c.back().checks.push_back({"sphere", std::string("degree_two_gap_") + s, 1.0});
    }
    c.push_back({9, "Yamabe constant of S^7", {{"sphere", "upsilon_s7", 0.02}, {"sphere", "upsilon_perturbations_s7", 1.0}}});
    c.push_back({10,
                 "heterotic identities",
                 {{"heterotic", "jacobi_identity", 1e-13},
                  {"heterotic", "d_squared_forms", 1e-13},
                  {"heterotic", "g2_structure", 1e-8},
                  {"heterotic", "torsion_two_path", 1e-8},
                  {"heterotic", "p1_two_path", 1e-6},
                  {"heterotic", "weierstrass_ode", 1e-9},
                  {"heterotic", "instanton_relation", 1e-14},
                  {"heterotic", "anomaly_weierstrass", 1e-7}},
                 "heterotic",
                 120000});
    c.push_back({11, "GV reduction", {}});
    for (const char* t : {"2_1", "4_1", "4_3", "8_3"}) c.back().checks.push_back({"group", std::string("gv_quadratic_") + t, 1e-10});
    c.back().checks.push_back({"group", "gv_cubic_rejected", 1.0});
    return c;
}

double ratio(const CheckReport& r) {
    if (std::isnan(r.residual)) return INFINITY;
    if (r.tolerance > 0) return std::max(0.0, r.residual) / r.tolerance;
    return r.residual > 0 ? INFINITY : 0.0;
}

} // namespace

int main(int argc, char** argv) {
    const SuiteConfig cfg; // seed 7, 2·10⁵ samples, default profile
    std::vector<CheckReport> all;
    std::map<std::string, double> suite_ms;
    for (const std::string& s : suite_names()) {
        const auto t0 = std::chrono::steady_clock::now();
        auto part = run_suite(s, cfg);
        suite_ms[s] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        all.insert(all.end(), part.begin(), part.end());
    }

    int failed = 0;
    for (const Criterion& c : criteria()) {
        std::vector<std::string> problems;
        std::set<std::string> seen;
        int flagged = 0, count = 0;
        double worst = 0, ms = 0;
        for (const Required& q : c.checks) {
            const CheckReport* hit = nullptr;
            for (const auto& r : all)
                if (r.suite == q.suite && r.check == q.check) hit = &r;
            if (!hit) {
                problems.push_back("missing " + q.suite + "/" + q.check);
                continue;
            }
            if (hit->criterion != c.id) problems.push_back(q.check + " tagged for criterion " + std::to_string(hit->criterion));
            if (hit->tolerance != q.tolerance) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s tolerance %.3g differs from pinned %.3g", q.check.c_str(), hit->tolerance, q.tolerance);
                problems.push_back(buf);
            }
        }
        for (const auto& r : all) {
            if (r.criterion != c.id) continue;
            ++count;
            seen.insert(r.check);
            ms += r.wall_ms;
            worst = std::max(worst, ratio(r));
            if (r.status == Status::flagged) ++flagged;
            if (r.status == Status::fail) {
                char buf[256];
                std::snprintf(buf, sizeof buf, "%s/%s residual %.3e > %.3e", r.suite.c_str(), r.check.c_str(), r.residual, r.tolerance);
                problems.push_back(buf);
            }
        }
        if (!c.timed_suite.empty()) ms = suite_ms[c.timed_suite];
        if (c.limit_ms > 0 && ms > c.limit_ms) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "runtime %.0f ms over %.0f ms", ms, c.limit_ms);
            problems.push_back(buf);
        }
        const bool ok = problems.empty();
        failed += !ok;
        std::printf("criterion %2d %s  %-38s %3d checks  worst residual/tol %.3g  %.2f s", c.id, ok ? "PASS" : "FAIL", c.title.c_str(), count,
                    worst, ms / 1000);
        if (c.limit_ms > 0) std::printf(" (limit %.0f s)", c.limit_ms / 1000);
        if (flagged) std::printf("  %d flagged", flagged);
        std::printf("\n");
        for (const auto& p : problems) std::printf("      %s\n", p.c_str());
    }

    int other_fail = 0;
    for (const auto& r : all)
        if (r.criterion == 0 && r.status == Status::fail) {
            ++other_fail;
            std::printf("      supporting check failed: %s/%s residual %.3e > %.3e\n", r.suite.c_str(), r.check.c_str(), r.residual, r.tolerance);
        }
    std::printf("supporting checks: %zu run, %d failed\n", all.size(), other_fail);

    if (argc > 1) {
        ReportDocument doc;
        doc.command = "acceptance";
        doc.target = "all";
        doc.config = cfg.to_json();
        doc.checks = all;
        doc.ledger = build_ledger(cfg);
        std::ofstream(argv[1]) << emit_report(doc, Format::json);
    }
    return failed == 0 && other_fail == 0 ? 0 : 1;
}
