#include "carnot/suites.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "carnot/conformal_maps.hpp"
#include "carnot/exterior.hpp"
#include "carnot/group_analysis.hpp"
#include "carnot/heterotic.hpp"
#include "carnot/sphere.hpp"
#include "carnot/tensor_identities.hpp"
#include "carnot/weierstrass.hpp"

namespace carnot {

namespace {

using nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

// Pinned criterion tolerances.
constexpr double kFundamentalTol = 1e-8;
constexpr double kOriginTol = 1e-12;
constexpr double kYamabeRatioTol = 1e-8;
constexpr double kExtremalTol = 1e-8;
constexpr double kLiouvilleTol = 1e-8;
constexpr double kRoundTripTol = 1e-12;
constexpr double kJacobianTol = 1e-7;
constexpr double kInversionTol = 1e-10;
constexpr double kCrFactorTol = 1e-7;
constexpr double kQcFactorTol = 1e-6;
constexpr double kSpectrumTol = 1e-12;
constexpr double kRayleighTarget = 1e-3;
constexpr double kSigmas = 3.0;
constexpr double kUpsilonWindow = 0.02;
// Randomized-QMC replicates on S⁷; enough that batch standard errors are not heavy-tailed.
constexpr int kS7Batches = 64;
constexpr double kDSquaredTol = 1e-13;
constexpr double kG2Tol = 1e-8;
constexpr double kTorsionTol = 1e-8;
constexpr double kP1Tol = 1e-6;
constexpr double kOdeTol = 1e-9;
constexpr double kAnomalyTol = 1e-7;
constexpr double kGvTol = 1e-10;
constexpr double kGvRejection = 1e-2;

struct Ctx {
    const SuiteConfig& cfg;
    const ToleranceProfile& tol;
    std::uint64_t seed;
};

struct Outcome {
    double residual;
    double tolerance;
};

struct CheckDef {
    std::string id;
    int criterion;
    Oracle oracle;
    std::string anchor;
    std::function<Outcome(const Ctx&)> body;
    bool comparison = false;
};

class SuiteBuilder {
public:
    void add(std::string id, int criterion, Oracle oracle, std::string anchor, std::function<Outcome(const Ctx&)> body) {
        defs.push_back({std::move(id), criterion, oracle, std::move(anchor), std::move(body)});
    }
    void compare(std::string id, int criterion, std::string anchor, std::function<Outcome(const Ctx&)> body) {
        defs.push_back({std::move(id), criterion, Oracle::independent, std::move(anchor), std::move(body), true});
    }
    std::vector<CheckDef> defs;
};

std::vector<CheckReport> execute(const std::string& suite, const std::vector<CheckDef>& defs, const SuiteConfig& cfg) {
    const ToleranceProfile tol = tolerance_profile(cfg.tol_profile);
    auto run_one = [&](const CheckDef& s) {
        const Ctx ctx{cfg, tol, derive_seed(cfg.seed, suite + "/" + s.id)};
        const auto t0 = std::chrono::steady_clock::now();
        CheckReport r;
        try {
            const Outcome o = s.body(ctx);
            r = s.comparison ? make_comparison(suite, s.id, s.criterion, o.residual, o.tolerance, s.oracle, s.anchor)
                             : make_check(suite, s.id, s.criterion, o.residual, o.tolerance, s.oracle, s.anchor);
        } catch (const std::exception& e) {
            r = make_check(suite, s.id, s.criterion, std::nan(""), 0, s.oracle, s.anchor + " [error: " + e.what() + "]");
        }
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return r;
    };
    std::vector<CheckReport> out;
    out.reserve(defs.size());
    if (std::thread::hardware_concurrency() > 1) {
        std::vector<std::future<CheckReport>> futures;
        for (const CheckDef& s : defs) futures.push_back(std::async(std::launch::async, run_one, std::cref(s)));
        for (auto& f : futures) out.push_back(f.get());
    } else {
        for (const CheckDef& s : defs) out.push_back(run_one(s));
    }
    return out;
}

struct AlgebraChoice {
    Family family;
    int n;
    std::string tag() const { return (family == Family::complex ? "C" : "H") + std::to_string(n); }
};

std::vector<AlgebraChoice> selected_algebras(const SuiteConfig& cfg) {
    std::vector<AlgebraChoice> out;
    for (Family f : {Family::complex, Family::quaternionic}) {
        if (cfg.family && *cfg.family != f) continue;
        if (cfg.n) out.push_back({f, *cfg.n});
        else
            for (int n : {1, 2}) out.push_back({f, n});
    }
    return out;
}

std::string norm_tag(Normalization nm) { return nm == Normalization::h_type ? "htype" : "explicit"; }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// ---------------------------------------------------------------- algebra

// Closed-form frame of one quaternionic block: [field][s][b], coordinates ordered t, x, y, z.
constexpr int kQuatFrame[4][3][4] = {
    {{0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 2}},
    {{-2, 0, 0, 0}, {0, 0, 0, -2}, {0, 0, 2, 0}},
    {{0, 0, 0, 2}, {-2, 0, 0, 0}, {0, -2, 0, 0}},
    {{0, 0, -2, 0}, {0, 2, 0, 0}, {-2, 0, 0, 0}},
};

double frame_defect(const AlgebraChoice& c) {
    const auto alg = standard_algebra(c.family, c.n);
    const auto fr = frame(alg);
    double worst = 0;
    for (int a = 0; a < alg.m; ++a)
        for (int s = 0; s < alg.k; ++s)
            for (int b = 0; b < alg.m; ++b) {
                double expect = 0;
                if (c.family == Family::complex) {
                    if (a < c.n && b == c.n + a) expect = 2;
                    if (a >= c.n && b == a - c.n) expect = -2;
                } else if (b / 4 == a / 4) {
                    expect = kQuatFrame[a % 4][s][b % 4];
                }
                worst = std::max(worst, std::abs(fr.C[a](s, b) - expect));
            }
    return worst;
}

std::vector<CheckDef> algebra_suite(const SuiteConfig& cfg) {
    SuiteBuilder s;
    for (const AlgebraChoice c : selected_algebras(cfg)) {
        s.add("frame_exact_" + c.tag(), 1, Oracle::reference, "left-invariant frame coefficients equal the integer closed form",
              [c](const Ctx&) { return Outcome{frame_defect(c), 0.0}; });
        for (Normalization nm : {Normalization::explicit_coordinates, Normalization::h_type}) {
            s.add("structure_" + c.tag() + "_" + norm_tag(nm), 0, Oracle::identity, "J_s skew, orthogonal, anticommuting",
                  [c, nm](const Ctx& x) { return Outcome{standard_algebra(c.family, c.n, nm).structure_defect(), x.tol.algebraic}; });
        }
        s.add("j2_" + c.tag(), 0, Oracle::identity, "J(ξ)J(ξ') lies in span of J_s for ξ ⊥ ξ'", [c](const Ctx& x) {
            const auto r = check_j2(standard_algebra(c.family, c.n), x.seed);
            return Outcome{r.holds ? r.max_residual : kInf, x.tol.algebraic};
        });
        s.add("group_axioms_" + c.tag(), 0, Oracle::identity, "associativity, identity and inverse on random points", [c](const Ctx& x) {
            const auto alg = standard_algebra(c.family, c.n);
            std::mt19937_64 rng(x.seed);
            const GroupPoint e = group_identity(alg);
            double worst = 0;
            for (int t = 0; t < 100; ++t) {
                const GroupPoint a = random_group_point(alg, rng), b = random_group_point(alg, rng), d = random_group_point(alg, rng);
                const GroupPoint l = group_multiply(alg, group_multiply(alg, a, b), d);
                const GroupPoint r = group_multiply(alg, a, group_multiply(alg, b, d));
                worst = std::max(worst, distance(l, r) / (1 + l.flat().norm()));
                worst = std::max(worst, distance(group_multiply(alg, e, a), a));
                worst = std::max(worst, distance(group_multiply(alg, a, group_inverse(alg, a)), e) / (1 + a.flat().norm()));
            }
            return Outcome{worst, x.tol.algebraic};
        });
        s.add("dilation_automorphism_" + c.tag(), 0, Oracle::identity, "δ_λ(ab) = δ_λ(a)δ_λ(b)", [c](const Ctx& x) {
            const auto alg = standard_algebra(c.family, c.n);
            std::mt19937_64 rng(x.seed);
            std::uniform_real_distribution<double> U(0.2, 3.0);
            double worst = 0;
            for (int t = 0; t < 30; ++t) {
                const GroupPoint a = random_group_point(alg, rng), b = random_group_point(alg, rng);
                const double lam = U(rng);
                const GroupPoint l = dilate(alg, lam, group_multiply(alg, a, b));
                const GroupPoint r = group_multiply(alg, dilate(alg, lam, a), dilate(alg, lam, b));
                worst = std::max(worst, distance(l, r) / (1 + l.flat().norm()));
            }
            return Outcome{worst, x.tol.algebraic};
        });
        s.add("gauge_homogeneity_" + c.tag(), 0, Oracle::identity, "N(δ_λ g) = λN(g) and N(g⁻¹) = N(g)", [c](const Ctx& x) {
            const auto alg = standard_algebra(c.family, c.n);
            std::mt19937_64 rng(x.seed);
            double worst = 0;
            for (int t = 0; t < 30; ++t) {
                const GroupPoint a = random_group_point(alg, rng);
                const double N = gauge(alg, a);
                worst = std::max(worst, std::abs(gauge(alg, dilate(alg, 3.0, a)) - 3 * N) / N);
                worst = std::max(worst, std::abs(gauge(alg, group_inverse(alg, a)) - N) / N);
            }
            return Outcome{worst, x.tol.algebraic};
        });
        if (c.family == Family::quaternionic)
            s.add("quaternionic_orientation_" + c.tag(), 0, Oracle::identity, "J1 J2 = -J3", [c](const Ctx&) {
                const auto alg = standard_algebra(c.family, c.n);
                return Outcome{(alg.J[0] * alg.J[1] + alg.J[2]).cwiseAbs().maxCoeff(), 0.0};
            });
    }
    return s.defs;
}

// ---------------------------------------------------------------- group

std::vector<CheckDef> group_suite(const SuiteConfig& cfg) {
    SuiteBuilder s;
    const auto choices = selected_algebras(cfg);
    for (const AlgebraChoice c : choices)
        for (Normalization nm : {Normalization::explicit_coordinates, Normalization::h_type})
            s.add("fundamental_" + c.tag() + "_" + norm_tag(nm), nm == Normalization::explicit_coordinates ? 2 : 0, Oracle::identity,
                  "normalized Δ(N^{2-Q}) at 100 random points", [c, nm](const Ctx& x) {
                      const auto alg = standard_algebra(c.family, c.n, nm);
                      std::mt19937_64 rng(x.seed);
                      double worst = 0;
                      for (int i = 0; i < 100; ++i)
                          worst = std::max(worst, normalized_fundamental_residual(alg, random_group_point(alg, rng)));
                      return Outcome{worst, kFundamentalTol};
                  });

    for (const AlgebraChoice c : choices) {
        if (c.family != Family::quaternionic) continue;
        s.add("sublaplacian_h_origin_" + c.tag(), c.n == 1 ? 3 : 0, Oracle::reference, "Δh(0) = (Q-6)/4", [c](const Ctx&) {
            const auto alg = standard_algebra(c.family, c.n);
            const ScalarField h = conformal_factor_h_field(alg, 1.0 / 16, 1.0, group_identity(alg));
            return Outcome{std::abs(sub_laplacian(alg, h, group_identity(alg)) - (alg.Q() - 6) / 4.0), kOriginTol};
        });
        s.add("sublaplacian_h_" + c.tag(), 0, Oracle::reference, "Δh = (Q-6)/4 + (Q+2)/4 |q|² at random points", [c](const Ctx& x) {
            const auto alg = standard_algebra(c.family, c.n);
            const ScalarField h = conformal_factor_h_field(alg, 1.0 / 16, 1.0, group_identity(alg));
            const double Q = alg.Q();
            std::mt19937_64 rng(x.seed);
            double worst = 0;
            for (int t = 0; t < 20; ++t) {
                const GroupPoint p = random_group_point(alg, rng);
                worst = std::max(worst, rel(sub_laplacian(alg, h, p), (Q - 6) / 4 + (Q + 2) / 4 * p.x.squaredNorm()));
            }
            return Outcome{worst, x.tol.algebraic};
        });
        if (c.n == 1)
            s.add("yamabe_phi_" + c.tag(), 3, Oracle::reference, "-ΔΦ/Φ^{2*-1} = (Q-2)(Q-6)/8 at 100 points", [c](const Ctx& x) {
                const auto alg = standard_algebra(c.family, c.n);
                const ScalarField Phi = conformal_factor_phi_field(alg, 1.0 / 16, 1.0, group_identity(alg));
                const double K = (alg.Q() - 2.0) * (alg.Q() - 6.0) / 8.0;
                std::mt19937_64 rng(x.seed);
                double worst = 0;
                for (int i = 0; i < 100; ++i)
                    worst = std::max(worst, std::abs(yamabe_residual(alg, Phi, random_group_point(alg, rng, 0.1, 5), K).ratio - K) / K);
                return Outcome{worst, kYamabeRatioTol};
            });
        s.add("liouville_" + c.tag(), c.n == 1 ? 5 : 0, Oracle::reference, "conformal scalar ratio = 128n(n+2)c₀σ, (c₀,σ) = (1/16,1)",
              [c](const Ctx& x) {
                  const auto alg = standard_algebra(c.family, c.n);
                  const double expect = 128.0 * c.n * (c.n + 2) / 16.0;
                  std::mt19937_64 rng(x.seed);
                  const GroupPoint g0 = random_group_point(alg, rng, 0.2, 2);
                  double worst = 0;
                  for (int i = 0; i < 20; ++i) {
                      const GroupPoint p = random_group_point(alg, rng, 0.1, 4);
                      worst = std::max(worst, rel(conformal_scalar_ratio(alg, 1.0 / 16, 1.0, group_identity(alg), p), expect));
                      worst = std::max(worst, rel(conformal_scalar_ratio(alg, 1.0 / 16, 1.0, g0, p), expect));
                  }
                  return Outcome{worst, kLiouvilleTol};
              });
    }

    for (const AlgebraChoice c : choices)
        s.add("extremal_constancy_" + c.tag(), c.n == 1 ? 4 : 0, Oracle::identity,
              "Yamabe ratio of the extremal family: 100 points and 10 translation/dilation orbits", [c](const Ctx& x) {
                  const auto alg = standard_algebra(c.family, c.n);
                  const ScalarField u = extremal_family(alg).field();
                  const double ref = yamabe_residual(alg, u, group_identity(alg), 0).ratio;
                  std::mt19937_64 rng(x.seed);
                  double lo = kInf, hi = -kInf;
                  for (int i = 0; i < 100; ++i) {
                      const double r = yamabe_residual(alg, u, random_group_point(alg, rng, 0.1, 5), 0).ratio;
                      lo = std::min(lo, r), hi = std::max(hi, r);
                  }
                  double worst = (hi - lo) / ref;
                  std::uniform_real_distribution<double> U(0.5, 2.0);
                  for (int i = 0; i < 10; ++i) {
                      const GroupPoint h = random_group_point(alg, rng, 0.3, 2);
                      const ScalarField v = scaled_field(alg, translated_field(alg, u, h), U(rng));
                      const double r = yamabe_residual(alg, v, random_group_point(alg, rng, 0.1, 3), 0).ratio;
                      worst = std::max(worst, std::abs(r / ref - 1));
                  }
                  return Outcome{worst, kExtremalTol};
              });

    s.add("translation_commutes", 0, Oracle::independent, "Δ(u∘τ_h) = (Δu)∘τ_h", [](const Ctx& x) {
        const auto alg = standard_algebra(Family::complex, 2);
        const ScalarField u = conformal_factor_h_field(alg, 0.5, 0.3, group_identity(alg));
        std::mt19937_64 rng(x.seed);
        double worst = 0;
        for (int i = 0; i < 20; ++i) {
            const GroupPoint h = random_group_point(alg, rng, 0.2, 3), g = random_group_point(alg, rng, 0.2, 3);
            worst = std::max(worst, rel(sub_laplacian(alg, translated_field(alg, u, h), g), sub_laplacian(alg, u, group_multiply(alg, h, g))));
        }
        return Outcome{worst, 1e3 * x.tol.algebraic};
    });
    s.add("best_constant_2_1", 0, Oracle::reference, "closed-form Sobolev constant at (m,k) = (2,1)", [](const Ctx& x) {
        const double c21 = 0.5 * std::pow(4.0, 0.25) * std::pow(kPi, -3.0 / 8) * std::pow(2.0 / (std::sqrt(kPi) / 2), 0.25);
        return Outcome{rel(best_constant(2, 1), c21), x.tol.algebraic};
    });

    for (auto [m, k] : {std::pair{2, 1}, std::pair{4, 1}, std::pair{4, 3}, std::pair{8, 3}})
        s.add("gv_quadratic_" + std::to_string(m) + "_" + std::to_string(k), 11, Oracle::identity,
              "reduced Yamabe equation and the three positivity identities on the quadratic family", [m, k](const Ctx&) {
                  const auto gv = gv_params(m, k);
                  double worst = 0;
                  for (double A : {1.0, 0.4, 2.3}) {
                      const ScalarField phi = gv_quadratic_family(gv, A);
                      const double hscale = std::max(1.0, A * A * A * A);
                      for (int i = 1; i <= 10; ++i)
                          for (int j = 1; j <= 10; ++j) {
                              const auto r = gv_reduction(gv, phi, 0.5 * i, 0.5 * j);
                              worst = std::max({worst, std::abs(r.yfinal), std::abs(r.hessian) / hscale, std::abs(r.laplace), std::abs(r.mixed)});
                              const auto d = gv_divergence_identity(gv, phi, 0.5 * i, 0.5 * j);
                              worst = std::max(worst, std::abs(d.lhs - d.rhs));
                          }
                  }
                  return Outcome{worst, kGvTol};
              });
    // Negative control, expressed so that passing means the cubic is rejected.
    s.add("gv_cubic_rejected", 11, Oracle::identity, "a generic cubic violates the reduced equation by more than 1e-2", [](const Ctx&) {
        const auto gv = gv_params(2, 1);
        const ScalarField cubic(2, [](std::span<const Jet> v) { return 1.0 + v[0] * v[0] * v[0] + 0.5 * v[0] * v[1] * v[1] + v[1]; });
        double worst = 0;
        for (int i = 1; i <= 5; ++i)
            for (int j = 1; j <= 5; ++j) worst = std::max(worst, std::abs(gv_reduction(gv, cubic, i, j).yfinal));
        return Outcome{kGvRejection / worst, 1.0};
    });
    return s.defs;
}

// ---------------------------------------------------------------- cayley

BallPoint random_ball(const HTypeAlgebra& alg, std::mt19937_64& rng, bool boundary) {
    std::normal_distribution<double> N(0, 1);
    std::uniform_real_distribution<double> U(0, 1);
    const int d = alg.m + alg.k + 1;
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = N(rng);
    v.normalize();
    if (!boundary) v *= 0.97 * std::pow(U(rng), 1.0 / d);
    if ((v - Eigen::VectorXd::Unit(d, d - 1)).norm() < 0.05) v[d - 1] = -v[d - 1];
    return {v.head(alg.m), v.segment(alg.m, alg.k), v[d - 1], boundary};
}

template <class P>
Eigen::VectorXd flat(const P& s) {
    Eigen::VectorXd v(s.xi1.size() + s.xi2.size() + 1);
    v << s.xi1, s.xi2, s.a;
    return v;
}

std::pair<std::vector<std::complex<double>>, std::complex<double>> random_cr_point(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0, 1);
    std::vector<std::complex<double>> Z(n);
    std::complex<double> W(N(rng), N(rng));
    double r2 = std::norm(W);
    for (auto& z : Z) z = {N(rng), N(rng)}, r2 += std::norm(z);
    const double s = std::sqrt(r2);
    for (auto& z : Z) z /= s;
    return {Z, W / s};
}

std::vector<CheckDef> cayley_suite(const SuiteConfig&) {
    SuiteBuilder s;
    for (const AlgebraChoice c : {AlgebraChoice{Family::complex, 1}, AlgebraChoice{Family::complex, 2}, AlgebraChoice{Family::quaternionic, 1},
                                  AlgebraChoice{Family::quaternionic, 2}}) {
        s.add("round_trip_" + c.tag(), 6, Oracle::identity, "C⁻¹∘C on 1000 ball and sphere points", [c](const Ctx& x) {
            const auto alg = standard_algebra(c.family, c.n, Normalization::h_type);
            std::mt19937_64 rng(x.seed);
            double worst = 0;
            for (int i = 0; i < 1000; ++i) {
                const BallPoint b = random_ball(alg, rng, i % 2 == 0);
                worst = std::max(worst, (flat(cayley_inv(alg, cayley(alg, b))) - flat(b)).cwiseAbs().maxCoeff());
            }
            return Outcome{worst, kRoundTripTol};
        });
        s.add("jacobian_" + c.tag(), 6, Oracle::reference, "det DC against the closed form, relative", [c](const Ctx& x) {
            const auto alg = standard_algebra(c.family, c.n, Normalization::h_type);
            std::mt19937_64 rng(x.seed);
            double worst = 0;
            for (int i = 0; i < 10; ++i) worst = std::max(worst, cayley_jacobian_check(alg, random_ball(alg, rng, false)).residual);
            return Outcome{worst, kJacobianTol};
        });
        s.add("jacobian_fd_" + c.tag(), 0, Oracle::independent, "det DC from central differences of the map", [c](const Ctx& x) {
            const auto alg = standard_algebra(c.family, c.n, Normalization::h_type);
            std::mt19937_64 rng(x.seed);
            const int d = alg.m + alg.k + 1;
            const double h = 1e-6;
            double worst = 0;
            for (int i = 0; i < 10; ++i) {
                const BallPoint b = random_ball(alg, rng, false);
                Eigen::MatrixXd J(d, d);
                for (int j = 0; j < d; ++j) {
                    BallPoint up = b, dn = b;
                    const Eigen::VectorXd e = Eigen::VectorXd::Unit(d, j) * h;
                    up.xi1 += e.head(alg.m), up.xi2 += e.segment(alg.m, alg.k), up.a += e[d - 1];
                    dn.xi1 -= e.head(alg.m), dn.xi2 -= e.segment(alg.m, alg.k), dn.a -= e[d - 1];
                    J.col(j) = (flat(cayley(alg, up)) - flat(cayley(alg, dn))) / (2 * h);
                }
                const double cf = cayley_jacobian_check(alg, b).closed_form;
                worst = std::max(worst, std::abs(J.determinant() - cf) / std::abs(cf));
            }
            return Outcome{worst, 1e-6};
        });
    }
    for (int n : {1, 2}) {
        const std::string tag = "H" + std::to_string(n);
        s.add("inversion_involution_" + tag, 6, Oracle::identity, "σ∘σ = id on 200 points, relative to 1+|g|", [n](const Ctx& x) {
            const auto alg = standard_algebra(Family::quaternionic, n);
            std::mt19937_64 rng(x.seed);
            double worst = 0;
            for (int i = 0; i < 200; ++i) {
                const GroupPoint g = random_group_point(alg, rng, 0.05, 20);
                worst = std::max(worst, distance(inversion(alg, inversion(alg, g)), g) / (1 + g.flat().norm()));
            }
            return Outcome{worst, kInversionTol};
        });
        s.add("inversion_composite_" + tag, 0, Oracle::independent, "σ = C₂∘C₁⁻¹ through the sphere", [n](const Ctx& x) {
            const auto alg = standard_algebra(Family::quaternionic, n);
            std::mt19937_64 rng(x.seed);
            double worst = 0;
            for (int i = 0; i < 200; ++i) {
                const GroupPoint g = random_group_point(alg, rng, 0.05, 20);
                const GroupPoint sg = inversion(alg, g);
                worst = std::max(worst, distance(inversion_via_cayley(alg, g), sg) / (1 + sg.flat().norm()));
                worst = std::max(worst, std::abs(gauge(alg, sg) * gauge(alg, g) - 1));
            }
            return Outcome{worst, 1e-10};
        });
        s.add("qc_factor_" + tag, 6, Oracle::reference, "pullback of η̃ equals 8/|1+p'|² Θ̃, residual relative to max(1, factor)",
              [n](const Ctx& x) {
                  const auto alg = standard_algebra(Family::quaternionic, n);
                  std::mt19937_64 rng(x.seed);
                  double worst = 0;
                  for (int i = 0; i < 50; ++i) {
                      const auto r = qc_conformal_factor_check(alg, random_group_point(alg, rng));
                      worst = std::max(worst, r.residual / std::max(1.0, r.factor));
                  }
                  return Outcome{worst, kQcFactorTol};
              });
        s.add("qc_sphere_round_trip_" + tag, 0, Oracle::identity, "C∘C⁻¹ between the group and S^{4n+3}", [n](const Ctx& x) {
            const auto alg = standard_algebra(Family::quaternionic, n);
            std::mt19937_64 rng(x.seed);
            double worst = 0;
            for (int i = 0; i < 100; ++i) {
                const GroupPoint g = random_group_point(alg, rng);
                const QcSpherePoint sp = qc_cayley_inverse(g);
                double r2 = sp.p.norm2();
                for (const auto& q : sp.q) r2 += q.norm2();
                worst = std::max({worst, std::abs(r2 - 1), distance(qc_cayley(n, sp), g) / (1 + g.flat().norm())});
            }
            return Outcome{worst, 1e-10};
        });
    }
    s.add("qc_factor_identity", 0, Oracle::identity, "factor at the group identity (p' = 0) is 8", [](const Ctx& x) {
        const auto alg = standard_algebra(Family::quaternionic, 1);
        const auto r = qc_conformal_factor_check(alg, group_identity(alg));
        return Outcome{std::max(std::abs(r.factor - 8), r.residual / 8), x.tol.algebraic};
    });
    for (int n : {1, 2}) {
        const std::string tag = "C" + std::to_string(n);
        s.add("cr_factor_" + tag, 6, Oracle::reference, "tangential covector residual of |1-W|⁻² Θ̃", [n](const Ctx& x) {
            std::mt19937_64 rng(x.seed);
            double worst = 0;
            for (int i = 0; i < 50; ++i) {
                const auto [Z, W] = random_cr_point(n, rng);
                const auto r = cr_conformal_factor_check(Z, W);
                worst = std::max(worst, r.residual / std::max(1.0, r.factor));
            }
            return Outcome{worst, kCrFactorTol};
        });
        s.add("cr_round_trip_" + tag, 0, Oracle::identity, "CR Cayley map and its inverse", [n](const Ctx& x) {
            std::mt19937_64 rng(x.seed);
            double worst = 0;
            for (int i = 0; i < 50; ++i) {
                const auto [Z, W] = random_cr_point(n, rng);
                const auto back = cr_cayley_inverse(cr_cayley(Z, W));
                worst = std::max(worst, std::abs(back.second - W));
                for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(back.first[j] - Z[j]));
            }
            return Outcome{worst, x.tol.algebraic};
        });
    }
    return s.defs;
}

// ---------------------------------------------------------------- matrices

double spectrum_defect(const Spectrum& s, const std::vector<double>& expect) {
    if (s.eigenvalues.size() != expect.size()) return kInf;
    double worst = 0;
    for (std::size_t i = 0; i < expect.size(); ++i) worst = std::max(worst, std::abs(s.eigenvalues[i] - expect[i]));
    return worst;
}

Eigen::MatrixXd random_matrix(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0, 1);
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) M(i, j) = N(rng);
    return M;
}

std::vector<CheckDef> matrices_suite(const SuiteConfig&) {
    SuiteBuilder s;
    s.add("spectrum_L", 7, Oracle::reference, "{0, 0, 2(2±√2), 10, 10}",
          [](const Ctx&) { return Outcome{spectrum_defect(analyze(matrix_L()), expected_spectrum_L()), kSpectrumTol}; });
    s.add("spectrum_Q", 7, Oracle::reference, "{(15±√209)/4, 1/2}",
          [](const Ctx&) { return Outcome{spectrum_defect(analyze(matrix_Q()), expected_spectrum_Q()), kSpectrumTol}; });
    s.add("psd_L", 7, Oracle::identity, "L symmetric positive semidefinite: max(0, -λ_min) and asymmetry", [](const Ctx&) {
        const ExactMatrix L = matrix_L();
        const auto sp = analyze(L);
        const double asym = (L.numer - L.numer.transpose()).cwiseAbs().maxCoeff();
        return Outcome{std::max({0.0, -sp.min, asym, sp.psd ? 0.0 : kInf}), kSpectrumTol};
    });
    s.add("kernel_L", 7, Oracle::reference, "dim ker L = 2", [](const Ctx&) {
        return Outcome{std::abs(analyze(matrix_L()).kernel_dim - 2.0), 0.0};
    });
    s.add("positive_definite_Q", 7, Oracle::identity, "Q symmetric positive definite", [](const Ctx&) {
        const ExactMatrix Q = matrix_Q();
        const auto sp = analyze(Q);
        const double asym = (Q.numer - Q.numer.transpose()).cwiseAbs().maxCoeff();
        return Outcome{std::max({asym, sp.positive_definite ? 0.0 : kInf}), 0.0};
    });
    s.add("quadratic_form_Q", 0, Oracle::independent, "vᵀQv = d²+e²+6u²-de+4du-4ue on 10⁴ random vectors", [](const Ctx& x) {
        const Eigen::MatrixXd Q = matrix_Q().value();
        std::mt19937_64 rng(x.seed);
        std::normal_distribution<double> N(0, 1);
        double worst = 0;
        for (int t = 0; t < 10000; ++t) {
            const Eigen::Vector3d v(N(rng), N(rng), N(rng));
            const double d = v[0], e = v[1], u = v[2];
            const double poly = d * d + e * e + 6 * u * u - d * e + 4 * d * u - 4 * u * e;
            worst = std::max(worst, std::abs(v.dot(Q * v) - poly) / v.squaredNorm());
        }
        return Outcome{worst, x.tol.algebraic};
    });
    for (int n : {1, 2}) {
        s.add("cr_projection_n" + std::to_string(n), 0, Oracle::identity, "Ψ = Ψ_[1] + Ψ_[-1], eigenvalues ±1 of Ψ ↦ Ψ(J·,J·)",
              [n](const Ctx& x) {
                  const Eigen::MatrixXd J = standard_complex_structure(n);
                  std::mt19937_64 rng(x.seed);
                  double worst = 0;
                  for (int t = 0; t < 20; ++t) {
                      const Eigen::MatrixXd P = random_matrix(2 * n, rng);
                      const auto c = project_cr(P, J);
                      worst = std::max(worst, (c.plus + c.minus - P).cwiseAbs().maxCoeff());
                      worst = std::max(worst, (upsilon_cr(c.plus, J) - c.plus).cwiseAbs().maxCoeff());
                      worst = std::max(worst, (upsilon_cr(c.minus, J) + c.minus).cwiseAbs().maxCoeff());
                  }
                  return Outcome{worst, x.tol.algebraic};
              });
        s.add("qc_projection_n" + std::to_string(n), 0, Oracle::identity, "Ψ = Ψ_[3] + Ψ_[-1], eigenvalues 3 and -1 of Σ Ψ(I_s·,I_s·)",
              [n](const Ctx& x) {
                  const auto I = standard_quaternionic_structure(n);
                  std::mt19937_64 rng(x.seed);
                  double worst = 0;
                  for (int t = 0; t < 20; ++t) {
                      const Eigen::MatrixXd P = random_matrix(4 * n, rng);
                      const auto c = project_qc(P, I);
                      worst = std::max(worst, (c.three + c.minus - P).cwiseAbs().maxCoeff());
                      worst = std::max(worst, (upsilon_qc(c.three, I) - 3 * c.three).cwiseAbs().maxCoeff());
                      worst = std::max(worst, (upsilon_qc(c.minus, I) + c.minus).cwiseAbs().maxCoeff());
                  }
                  return Outcome{worst, 10 * x.tol.algebraic};
              });
    }
    s.add("qc_trace_n1", 0, Oracle::reference, "Ψ_[3] = (tr Ψ / 4) g for symmetric Ψ on H", [](const Ctx& x) {
        const auto I = standard_quaternionic_structure(1);
        std::mt19937_64 rng(x.seed);
        double worst = 0;
        for (int t = 0; t < 20; ++t) {
            const Eigen::MatrixXd A = random_matrix(4, rng);
            const Eigen::MatrixXd P = A + A.transpose();
            const auto c = project_qc(P, I);
            worst = std::max(worst, (c.three - P.trace() / 4 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff());
        }
        return Outcome{worst, 10 * x.tol.algebraic};
    });
    return s.defs;
}

// ---------------------------------------------------------------- sphere

const SphereModel& sphere_model(SphereFamily fam, int n) {
    static const SphereModel cr1(SphereFamily::cr, 1), cr2(SphereFamily::cr, 2), qc1(SphereFamily::qc, 1), qc2(SphereFamily::qc, 2);
    if (fam == SphereFamily::cr) return n == 1 ? cr1 : cr2;
    return n == 1 ? qc1 : qc2;
}

ScalarField constant_field(int dim, double c) {
    return ScalarField(dim, [c](std::span<const Jet> x) { return x[0] * 0.0 + c; });
}

// x₀x₂ is harmonic in the ambient space, so on the sphere it has degree exactly 2.
ScalarField degree_two(int dim) {
    std::vector<int> e(dim, 0);
    e[0] = e[2] = 1;
    return monomial(dim, e);
}

// Rayleigh quotients of the coordinate functions and of the degree-2 trial from one pass
// over the grid, so that means and differences carry their own batch errors.
struct QuotientSet {
    std::vector<Estimate> each;        // R_i for the coordinate functions
    std::vector<Estimate> deviations;  // R_i - mean
    Estimate mean;                     // λ₁ estimate: the mean of R_i
    Estimate degree_two;               // R_h
    Estimate gap;                      // R_h - mean
};

QuotientSet quotient_set(const SphereModel& M, const QuadratureGrid& grid) {
    const int d = M.ambient_dim(), F = d + 1;
    std::vector<ValueGradient> vg;
    for (int i = 0; i < d; ++i) vg.push_back(value_gradient(coordinate_function(d, i)));
    vg.push_back(value_gradient(degree_two(d)));
    const PointVectorFunction in = [&M, vg, F](const Eigen::VectorXd& P, std::span<double> I) {
        Eigen::VectorXd gr;
        for (int f = 0; f < F; ++f) {
            const double v = vg[f](P, gr);
            I[3 * f] = M.project_horizontal(P, gr).squaredNorm() / M.metric_scale();
            I[3 * f + 1] = v * v;
            I[3 * f + 2] = v;
        }
        I[3 * F] = 1;
    };
    auto q = [F](int f, std::span<const double> I) { return I[3 * f] / (I[3 * f + 1] - I[3 * f + 2] * I[3 * f + 2] / I[3 * F]); };
    auto mean = [q, d](std::span<const double> I) {
        double m = 0;
        for (int i = 0; i < d; ++i) m += q(i, I) / d;
        return m;
    };
    std::vector<Functional> fs;
    for (int i = 0; i < d; ++i) fs.push_back([q, i](std::span<const double> I) { return q(i, I); });
    for (int i = 0; i < d; ++i) fs.push_back([q, i, mean](std::span<const double> I) { return q(i, I) - mean(I); });
    fs.push_back(mean);
    fs.push_back([q, d](std::span<const double> I) { return q(d, I); });
    fs.push_back([q, d, mean](std::span<const double> I) { return q(d, I) - mean(I); });
    const auto r = integrate_functionals(grid, 3 * F + 1, in, fs);
    QuotientSet out;
    std::size_t k = 0;
    for (int i = 0; i < d; ++i) out.each.push_back(r[k++]);
    for (int i = 0; i < d; ++i) out.deviations.push_back(r[k++]);
    out.mean = r[k++];
    out.degree_two = r[k++];
    out.gap = r[k++];
    return out;
}

double agreement(const QuotientSet& q) {
    double worst = 0;
    for (const Estimate& e : q.deviations) worst = std::max(worst, std::abs(e.value) / (kSigmas * e.error));
    return worst;
}

double relative_precision(const QuotientSet& q) {
    double worst = 0;
    for (const Estimate& e : q.each) worst = std::max(worst, e.error / std::abs(e.value));
    return worst;
}

double target_match(const QuotientSet& q, double target) { return std::abs(q.mean.value - target) / (kSigmas * q.mean.error); }

double gap_margin(const QuotientSet& q) { return q.gap.value > 0 ? kSigmas * q.gap.error / q.gap.value : kInf; }

double scheme_gap(const QuotientSet& a, const QuotientSet& b) {
    return std::abs(a.mean.value - b.mean.value) / (kSigmas * std::hypot(a.mean.error, b.mean.error));
}

// Even exp-quadratic perturbations exp(ε xᵀSx), ε = 0.2: invariant under x ↦ -x, so centred.
constexpr double kPerturbationEps = 0.2;

std::vector<Eigen::MatrixXd> perturbation_matrices(int dim, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<Eigen::MatrixXd> out;
    for (int t = 0; t < count; ++t) {
        Eigen::MatrixXd A(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) A(i, j) = U(rng);
        out.push_back(0.5 * (A + A.transpose()));
    }
    return out;
}

ValueGradient perturbation_closed_form(const Eigen::MatrixXd& S) {
    return [S](const Eigen::VectorXd& P, Eigen::VectorXd& g) {
        const Eigen::VectorXd SP = S * P;
        const double v = std::exp(kPerturbationEps * P.dot(SP));
        g = 2 * kPerturbationEps * v * SP;
        return v;
    };
}

ScalarField perturbation_field(const Eigen::MatrixXd& S) {
    const int dim = static_cast<int>(S.rows());
    return ScalarField(dim, [S, dim](std::span<const Jet> x) {
        Jet q = x[0] * 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) q += S(i, j) * x[i] * x[j];
        return exp(kPerturbationEps * q);
    });
}

struct SphereGrids {
    std::shared_ptr<const QuadratureGrid> s3_cayley, s3_mc, s7_qmc, s7_mc;
};

SphereGrids sphere_grids(const SuiteConfig& cfg) {
    const SphereModel& cr = sphere_model(SphereFamily::cr, 1);
    const SphereModel& qc = sphere_model(SphereFamily::qc, 1);
    SphereGrids g;
    g.s3_cayley = std::make_shared<QuadratureGrid>(cayley_grid(cr, 48));
    g.s3_mc = std::make_shared<QuadratureGrid>(monte_carlo_grid(cr, std::min<std::size_t>(cfg.samples, 100000), derive_seed(cfg.seed, "sphere/s3_mc")));
    if (!cfg.grid_in.empty()) {
        std::ifstream in(cfg.grid_in);
        if (!in) throw std::invalid_argument("cannot read grid file " + cfg.grid_in);
        auto grid = read_grid_csv(in);
        if (grid.ambient_dim != qc.ambient_dim()) throw std::invalid_argument("grid file is not a grid on S^7");
        g.s7_qmc = std::make_shared<QuadratureGrid>(std::move(grid));
    } else {
        g.s7_qmc = std::make_shared<QuadratureGrid>(qmc_grid(qc, cfg.samples, derive_seed(cfg.seed, "sphere/s7_qmc"), kS7Batches));
    }
    if (!cfg.grid_out.empty()) {
        std::ofstream out(cfg.grid_out);
        if (!out) throw std::invalid_argument("cannot write grid file " + cfg.grid_out);
        write_grid_csv(*g.s7_qmc, out);
    }
    g.s7_mc = std::make_shared<QuadratureGrid>(monte_carlo_grid(qc, cfg.samples, derive_seed(cfg.seed, "sphere/s7_mc")));
    return g;
}

double reconciled_upsilon(double literal) { return literal * std::pow(16.0, -1.0 / 5); }
double reference_upsilon() { return 48 * std::pow(4 * kPi, 1.0 / 5); }

std::vector<CheckDef> sphere_suite(const SuiteConfig& cfg) {
    SuiteBuilder s;
    for (SphereFamily fam : {SphereFamily::cr, SphereFamily::qc})
        for (int n : {1, 2})
            s.add(std::string("structure_") + (fam == SphereFamily::cr ? "cr" : "qc") + "_n" + std::to_string(n), 0, Oracle::identity, "contact forms, I_s, Reeb fields and metric scale at random points",
                  [fam, n](const Ctx& x) {
                      const SphereModel& M = sphere_model(fam, n);
                      std::mt19937_64 rng(x.seed);
                      double worst = 0;
                      for (int t = 0; t < 10; ++t) {
                          const auto c = M.check(M.random_point(rng));
                          worst = std::max({worst, c.annihilation, c.invariance, c.square, c.reeb, c.metric_spread});
                      }
                      return Outcome{worst, x.tol.jet};
                  });

    const SphereGrids g = sphere_grids(cfg);
    const SphereModel& cr = sphere_model(SphereFamily::cr, 1);
    const SphereModel& qc = sphere_model(SphereFamily::qc, 1);
    // Shared between checks; each is computed once.
    using SharedSet = std::shared_ptr<std::shared_future<QuotientSet>>;
    auto shared = [](const SphereModel& M, std::shared_ptr<const QuadratureGrid> grid) {
        return std::make_shared<std::shared_future<QuotientSet>>(
            std::async(std::launch::deferred, [&M, grid] { return quotient_set(M, *grid); }).share());
    };
    const SharedSet s3 = shared(cr, g.s3_cayley), s3_mc = shared(cr, g.s3_mc), s7 = shared(qc, g.s7_qmc), s7_mc = shared(qc, g.s7_mc);

    s.add("volume_s3", 0, Oracle::reference, "Cayley grid integrates 1 to V(S³) = 4π²", [&cr, g](const Ctx& x) {
        return Outcome{rel(integrate(*g.s3_cayley, [](const Eigen::VectorXd&) { return 1.0; }).value, cr.volume()), x.tol.quadrature * 1e-2};
    });
    s.add("lambda1_scalar_s3", 0, Oracle::reference, "S̃/(Q+2) = 2n for CR S³",
          [&cr](const Ctx& x) { return Outcome{rel(cr.scalar_curvature() / (cr.Q() + 2), 2.0), x.tol.jet}; });
    s.add("volume_s7", 0, Oracle::reference, "QMC grid weights sum to V(S⁷) = 64π⁴", [&qc, g](const Ctx& x) {
        return Outcome{rel(integrate(*g.s7_qmc, [](const Eigen::VectorXd&) { return 1.0; }).value, qc.volume()), x.tol.algebraic};
    });
    struct Case {
        std::string tag, scheme, other;
        SharedSet primary, secondary;
        double lambda;
    };
    for (const Case& c : {Case{"s3", "CR S³ (Cayley grid)", "Monte Carlo", s3, s3_mc, 2.0 * cr.n()},
                          Case{"s7", "qc S⁷ (QMC)", "Monte Carlo", s7, s7_mc, qc.scalar_curvature() / (qc.Q() + 2)}}) {
        const SharedSet p = c.primary, o = c.secondary;
        s.add("rayleigh_agreement_" + c.tag, 8, Oracle::identity, "coordinate quotients on " + c.scheme + " agree with their mean: max |R_i - λ̄| / 3σ(R_i - λ̄)",
              [p](const Ctx&) { return Outcome{agreement(p->get()), 1.0}; });
        s.add("rayleigh_precision_" + c.tag, 8, Oracle::identity, "relative quadrature error of each coordinate quotient",
              [p](const Ctx&) { return Outcome{relative_precision(p->get()), kRayleighTarget}; });
        s.add("lambda1_" + c.tag, 8, Oracle::reference, "mean quotient against its target: |λ̄ - λ₁| / 3σ(λ̄)",
              [p, l = c.lambda](const Ctx&) { return Outcome{target_match(p->get(), l), 1.0}; });
        s.add("degree_two_gap_" + c.tag, 8, Oracle::identity, "degree-2 harmonic quotient above λ̄ by 3σ: 3σ(R_h - λ̄) / (R_h - λ̄)",
              [p](const Ctx&) { return Outcome{gap_margin(p->get()), 1.0}; });
        s.compare("scheme_agreement_" + c.tag, 8, "λ̄ from the primary scheme against " + c.other + ": |Δλ̄| / 3σ",
                  [p, o](const Ctx&) { return Outcome{scheme_gap(p->get(), o->get()), 1.0}; });
    }

    s.add("upsilon_s7", 9, Oracle::reference, "Υ(1) with V/16 against 48(4π)^{1/5}, relative", [&qc, g](const Ctx&) {
        const auto one = yamabe_functionals(qc, constant_field(8, 1.0), *g.s7_qmc);
        return Outcome{std::abs(reconciled_upsilon(one.Upsilon.value) - reference_upsilon()) / reference_upsilon(), kUpsilonWindow};
    });
    const std::uint64_t pseed = derive_seed(cfg.seed, "sphere/perturbations");
    s.add("upsilon_perturbations_s7", 9, Oracle::identity, "20 centred perturbations: max (Υ(1) - Υ(φ)) / 3σ", [&qc, g, pseed](const Ctx&) {
        const double base = yamabe_functionals(qc, constant_field(8, 1.0), *g.s7_qmc).Upsilon.value;
        double worst = -kInf;
        for (const Eigen::MatrixXd& S : perturbation_matrices(8, 20, pseed)) {
            const auto y = yamabe_functionals(qc, perturbation_closed_form(S), *g.s7_qmc);
            worst = std::max(worst, (base - y.Upsilon.value) / (kSigmas * y.Upsilon.error));
        }
        return Outcome{worst, 1.0};
    });
    s.add("perturbation_gradient_paths", 0, Oracle::independent, "Υ(φ) with the closed-form gradient against the jet gradient",
          [&qc, pseed](const Ctx& x) {
              const auto grid = qmc_grid(qc, 4096, x.seed);
              double worst = 0;
              for (const Eigen::MatrixXd& S : perturbation_matrices(8, 3, pseed)) {
                  const double a = yamabe_functionals(qc, perturbation_closed_form(S), grid).Upsilon.value;
                  const double b = yamabe_functionals(qc, perturbation_field(S), grid).Upsilon.value;
                  worst = std::max(worst, std::abs(a - b) / b);
              }
              return Outcome{worst, x.tol.algebraic};
          });
    // Antithetic samples make odd moments of even functions vanish identically.
    s.add("perturbations_centred_s7", 0, Oracle::identity, "centre of mass of each perturbation on the antithetic grid, relative to V",
          [&qc, g, pseed](const Ctx& x) {
              double worst = 0;
              for (const Eigen::MatrixXd& S : perturbation_matrices(8, 20, pseed)) {
                  const auto vg = perturbation_closed_form(S);
                  const PointFunction u = [vg](const Eigen::VectorXd& P) {
                      Eigen::VectorXd gr;
                      return vg(P, gr);
                  };
                  for (const Estimate& c : center_of_mass(qc, u, *g.s7_mc)) worst = std::max(worst, std::abs(c.value) / qc.volume());
              }
              return Outcome{worst, x.tol.algebraic};
          });
    return s.defs;
}

// ---------------------------------------------------------------- heterotic

Eigen::Matrix3d gaussian_matrix(std::mt19937_64& rng) {
    std::normal_distribution<double> N(0, 1);
    Eigen::Matrix3d A;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = N(rng);
    return A;
}

std::vector<double> base_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1, 1);
    return {U(rng), U(rng), U(rng), U(rng)};
}

ScalarField random_cubic(std::mt19937_64& rng, double scale = 0.2) {
    std::normal_distribution<double> N(0, scale);
    std::vector<std::array<int, 3>> idx;
    std::vector<double> c;
    for (int a = -1; a < 4; ++a)
        for (int b = a; b < 4; ++b)
            for (int d = std::max(b, 0); d < 4; ++d) {
                idx.push_back({a, b, d});
                c.push_back(N(rng));
            }
    return ScalarField(4, [idx, c](std::span<const Jet> v) {
        Jet r = 0.0 * v[0];
        for (std::size_t t = 0; t < idx.size(); ++t) {
            Jet m = v[idx[t][2]];
            if (idx[t][1] >= 0) m *= v[idx[t][1]];
            if (idx[t][0] >= 0) m *= v[idx[t][0]];
            r += c[t] * m;
        }
        return r;
    });
}

// A smooth non-polynomial dilaton: a small cubic plus a sine of a random direction.
ScalarField random_smooth(std::mt19937_64& rng) {
    const ScalarField cubic = random_cubic(rng, 0.1);
    std::normal_distribution<double> N(0, 1);
    const std::array<double, 4> w{N(rng), N(rng), N(rng), N(rng)};
    return ScalarField(4, [cubic, w](std::span<const Jet> v) {
        Jet arg = w[0] * v[0];
        for (int i = 1; i < 4; ++i) arg += w[i] * v[i];
        return cubic(v) + 0.1 * sin(arg);
    });
}

Eigen::Matrix3d default_lambda() {
    Eigen::Matrix3d L = Eigen::Matrix3d::Zero();
    L(0, 0) = 1;
    return L;
}

std::vector<CheckDef> heterotic_suite(const SuiteConfig& cfg) {
    if (cfg.profile != "weierstrass" && cfg.profile != "constant")
        throw std::invalid_argument("unknown dilaton profile '" + cfg.profile + "' (expected weierstrass or constant)");
    const Eigen::Matrix3d A = heterotic_A(cfg);
    SuiteBuilder s;
    s.add("jacobi_identity", 10, Oracle::identity, "d(de^i) = 0 for K_A with the selected A and 5 random A", [A](const Ctx& x) {
        std::mt19937_64 rng(x.seed);
        double worst = make_KA(A).jacobi_residual();
        for (int t = 0; t < 5; ++t) worst = std::max(worst, make_KA(gaussian_matrix(rng)).jacobi_residual());
        return Outcome{worst, kDSquaredTol};
    });
    s.add("d_squared_forms", 10, Oracle::identity, "d² = 0 on forms of degree 0..3 with polynomial coefficients", [A](const Ctx& x) {
        std::mt19937_64 rng(x.seed);
        const auto sc = make_KA(A);
        double worst = 0;
        for (int degree = 0; degree <= 3; ++degree) {
            const auto p = base_point(rng);
            FrameForm a(3);
            for (std::uint32_t m = 0; m < 128; ++m)
                if (std::popcount(m) == degree) a.add(m, random_cubic(rng).jet(p, 3));
            worst = std::max(worst, ce_differential(ce_differential(a, sc), sc).max_value());
        }
        return Outcome{worst, kDSquaredTol};
    });
    s.add("g2_structure", 10, Oracle::identity, "dΘ̄∧Θ̄ and d*Θ̄ - θ⁷∧*Θ̄ for f ≡ 0 and 5 random smooth f", [A](const Ctx& x) {
        std::mt19937_64 rng(x.seed);
        const auto zero = ScalarField(4, [](std::span<const Jet> v) { return 0.0 * v[0]; });
        const auto c0 = g2_structure(zero, make_KA(A), base_point(rng));
        double worst = std::max(c0.closure, c0.coclosure);
        for (int t = 0; t < 5; ++t) {
            const auto c = g2_structure(random_smooth(rng), make_KA(gaussian_matrix(rng)), base_point(rng));
            worst = std::max({worst, c.closure, c.coclosure});
        }
        return Outcome{worst, kG2Tol};
    });
    s.add("lee_form", 0, Oracle::independent, "-⅓*(*dΘ̄∧Θ̄) = 2df", [](const Ctx& x) {
        std::mt19937_64 rng(x.seed);
        double worst = 0;
        for (int t = 0; t < 5; ++t)
            worst = std::max(worst, g2_structure(random_smooth(rng), make_KA(gaussian_matrix(rng)), base_point(rng)).lee_form);
        return Outcome{worst, x.tol.algebraic * 100};
    });
    s.add("torsion_two_path", 10, Oracle::independent, "dT from the exterior calculus against -(Δe^{2f} + 2|A|²), and off-e¹²³⁴ part",
          [A](const Ctx& x) {
              std::mt19937_64 rng(x.seed);
              const auto zero = ScalarField(4, [](std::span<const Jet> v) { return 0.0 * v[0]; });
              const auto t0 = torsion_check(zero, make_KA(A), base_point(rng));
              double worst = std::max(std::abs(t0.pipeline - t0.closed_form), t0.off_component);
              for (int t = 0; t < 10; ++t) {
                  const auto tc = torsion_check(random_cubic(rng), make_KA(gaussian_matrix(rng)), base_point(rng));
                  worst = std::max({worst, std::abs(tc.pipeline - tc.closed_form), tc.off_component});
              }
              return Outcome{worst, kTorsionTol};
          });
    s.add("p1_two_path", 10, Oracle::independent, "π²p₁(∇⁻) from curvature against the closed form: constant, univariate, bivariate f",
          [A](const Ctx& x) {
              std::mt19937_64 rng(x.seed);
              const auto sc = make_KA(A);
              const std::vector<ScalarField> fs{
                  ScalarField(4, [](std::span<const Jet> v) { return 0.0 * v[0] + 0.4; }),
                  ScalarField(4, [](std::span<const Jet> v) { return 0.35 * v[0]; }),
                  ScalarField(4, [](std::span<const Jet> v) { return 0.3 * sin(v[0]) - 0.1 * v[0] * v[0]; }),
                  ScalarField(4, [](std::span<const Jet> v) { return 0.2 * v[0] * v[0] - 0.1 * v[0] * v[1] + 0.15 * v[1] * v[1]; }),
                  ScalarField(4, [](std::span<const Jet> v) { return 0.2 * exp(0.5 * v[0] - 0.3 * v[1]); }),
              };
              double worst = 0;
              for (const auto& f : fs) {
                  const auto c = connection_and_p1(f, sc, base_point(rng));
                  worst = std::max(worst, std::abs(c.p1_coefficient - c.closed_form));
              }
              return Outcome{worst, kP1Tol};
          });
    s.add("p1_off_component", 0, Oracle::identity, "Tr R⁻∧R⁻ has no part off e¹²³⁴ for random cubic f", [](const Ctx& x) {
        std::mt19937_64 rng(x.seed);
        double worst = 0;
        for (int t = 0; t < 3; ++t) {
            const auto c = connection_and_p1(random_cubic(rng), make_KA(gaussian_matrix(rng)), base_point(rng));
            worst = std::max({worst, c.off_component, std::abs(c.p1_coefficient - c.closed_form)});
        }
        return Outcome{worst, x.tol.jet};
    });
    s.add("connection_metric", 0, Oracle::identity, "Levi-Civita torsion free; both connections skew", [A](const Ctx& x) {
        std::mt19937_64 rng(x.seed);
        const auto c = connection_and_p1(random_cubic(rng), make_KA(A), base_point(rng));
        return Outcome{std::max(c.lc_torsion, c.antisymmetry), x.tol.algebraic * 100};
    });

    const auto data = strominger_data(A, default_lambda());
    s.add("instanton_relation", 10, Oracle::identity, "2|A|² = α²λ² with λ = |ΛA|", [data](const Ctx&) {
        return Outcome{std::abs(2 * data.normA2 - data.alpha * data.alpha * data.lambda * data.lambda) / data.normA2, 1e-14};
    });
    s.add("weierstrass_ode", 10, Oracle::identity, "℘'² - 4℘³ + g₂℘ on 1000 points of a period, relative to 1+|℘|³", [data](const Ctx&) {
        const auto& w = data.wp;
        double worst = 0;
        for (int i = 0; i < 1000; ++i) {
            const double t = 0.05 + (2 * w.tau_plus - 0.1) * i / 999.0;
            const auto v = weierstrass_p(t, w);
            worst = std::max(worst, std::abs(weierstrass_ode_residual(v, w)) / (1 + std::pow(std::abs(v.u), 3)));
        }
        return Outcome{worst, kOdeTol};
    });
    s.add("weierstrass_half_period", 0, Oracle::reference, "τ₊ at g₂ = 4 equals Γ(1/4)²/(4√(2π))", [](const Ctx& x) {
        return Outcome{rel(weierstrass_params(4.0).tau_plus, lemniscatic_half_period()), x.tol.algebraic};
    });
    if (cfg.profile == "weierstrass") {
        s.add("anomaly_weierstrass", 10, Oracle::identity, "anomaly residual of f = ½ ln(α²℘(x¹)) on both assembly routes", [data](const Ctx& x) {
            std::mt19937_64 rng(x.seed);
            std::uniform_real_distribution<double> U(-1, 1);
            const auto f = weierstrass_dilaton(data);
            const double P = 2 * data.wp.tau_plus;
            double worst = 0;
            for (int i = 1; i < 40; ++i) {
                const std::vector<double> p{P * i / 40.0, U(rng), U(rng), U(rng)};
                worst = std::max(worst, std::abs(anomaly_residual(f, data.A, data.Lambda, data.alpha_prime, p)));
                worst = std::max(worst, std::abs(anomaly_residual_pipeline(f, data.A, data.Lambda, data.alpha_prime, p)));
            }
            return Outcome{worst, kAnomalyTol};
        });
        s.add("reduced_ode", 0, Oracle::identity, "(e^{2f})' + ¾α²|A|²(e^{-2f})' - 2α²f'³ along a period", [data](const Ctx& x) {
            const double P = 2 * data.wp.tau_plus;
            double worst = 0;
            for (int i = 1; i < 200; ++i) worst = std::max(worst, std::abs(dilaton_from_u(P * i / 200.0, data).reduced_residual));
            return Outcome{worst, x.tol.jet};
        });
    } else {
        s.add("anomaly_constant", 10, Oracle::identity, "constant dilaton with α' = -2|A|²/λ² on both assembly routes", [data](const Ctx& x) {
            std::mt19937_64 rng(x.seed);
            const auto f = ScalarField(4, [](std::span<const Jet> v) { return 0.0 * v[0] - 0.2; });
            const double ap = -2 * data.normA2 / (data.lambda * data.lambda);
            double worst = 0;
            for (int i = 0; i < 10; ++i) {
                const auto p = base_point(rng);
                worst = std::max({worst, std::abs(anomaly_residual(f, data.A, data.Lambda, ap, p)),
                                  std::abs(anomaly_residual_pipeline(f, data.A, data.Lambda, ap, p))});
            }
            return Outcome{worst, kAnomalyTol};
        });
    }
    s.add("contraction", 0, Oracle::identity, "A_ε → A₀ linearly in ε with the Jacobi identity along the way", [](const Ctx& x) {
        const double a = 0.8, b = -1.3;
        const auto s0 = contract(0, a, b);
        double worst = 0;
        for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
            const auto se = contract(eps, a, b);
            worst = std::max({worst, se.jacobi_residual(), std::abs(se.distance(s0) - eps) / eps});
        }
        return Outcome{worst, x.tol.algebraic * 10};
    });
    return s.defs;
}

using SuiteFactory = std::vector<CheckDef> (*)(const SuiteConfig&);

const std::vector<std::pair<std::string, SuiteFactory>>& registry() {
    static const std::vector<std::pair<std::string, SuiteFactory>> r{
        {"algebra", algebra_suite}, {"group", group_suite},         {"cayley", cayley_suite},
        {"sphere", sphere_suite},   {"matrices", matrices_suite}, {"heterotic", heterotic_suite},
    };
    return r;
}

} // namespace

ToleranceProfile tolerance_profile(const std::string& name) {
    if (name == "default") return {};
    if (name == "strict") return {"strict", 1e-13, 1e-9, 1e-7, 5e-4};
    throw std::invalid_argument("unknown tolerance profile '" + name + "' (expected default or strict)");
}

ordered_json SuiteConfig::to_json() const {
    ordered_json j;
    j["seed"] = seed;
    j["samples"] = samples;
    j["tol_profile"] = tol_profile;
    j["family"] = family ? ordered_json(*family == Family::complex ? "complex" : "quaternionic") : ordered_json(nullptr);
    j["n"] = n ? ordered_json(*n) : ordered_json(nullptr);
    j["A"] = A;
    j["profile"] = profile;
    j["grid_in"] = grid_in;
    j["grid_out"] = grid_out;
    return j;
}

std::vector<std::string> suite_names() {
    std::vector<std::string> out;
    for (const auto& [name, f] : registry()) out.push_back(name);
    return out;
}

std::vector<CheckReport> run_suite(const std::string& name, const SuiteConfig& cfg) {
    tolerance_profile(cfg.tol_profile);
    if (cfg.n && (*cfg.n < 1 || *cfg.n > 3)) throw std::invalid_argument("n must be 1, 2 or 3");
    if (cfg.samples < 1000) throw std::invalid_argument("samples must be at least 1000");
    if (name == "all") {
        std::vector<CheckReport> out;
        for (const auto& [suite, factory] : registry()) {
            auto part = execute(suite, factory(cfg), cfg);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    for (const auto& [suite, factory] : registry())
        if (suite == name) return execute(suite, factory(cfg), cfg);
    throw std::invalid_argument("unknown suite '" + name + "'");
}

Eigen::Matrix3d heterotic_A(const SuiteConfig& cfg) {
    if (cfg.A == "identity") return Eigen::Matrix3d::Identity();
    if (cfg.A == "random") {
        std::mt19937_64 rng(derive_seed(cfg.seed, "heterotic/A"));
        return gaussian_matrix(rng);
    }
    throw std::invalid_argument("unknown instanton matrix '" + cfg.A + "' (expected identity or random)");
}

ordered_json build_ledger(const SuiteConfig& cfg) {
    ordered_json conv;
    conv["bracket_scale_explicit"] = standard_algebra(Family::complex, 1).bracket_scale;
    conv["bracket_scale_htype"] = standard_algebra(Family::complex, 1, Normalization::h_type).bracket_scale;
    conv["gauge"] = "N = (|x|^4 + 16 |y|^2 / c_B^2)^(1/4)";
    {
        const auto h = standard_algebra(Family::quaternionic, 1);
        const Eigen::MatrixXd P = h.J[0] * h.J[1];
        conv["quaternionic_J1J2_over_J3"] = P.cwiseProduct(h.J[2]).sum() / h.J[2].squaredNorm();
    }
    conv["best_constant_prefactor_2_1"] = 1 / std::sqrt(2.0 * (2 + 2 * (1 - 1)));
    {
        const auto alg = standard_algebra(Family::quaternionic, 1);
        const GroupPoint g{Eigen::Vector4d(0.3, -0.7, 0.2, 0.5), Eigen::Vector3d(0.4, -0.1, 0.9)};
        conv["inversion_gauge_constant"] = gauge(alg, inversion(alg, g)) * gauge(alg, g);
        conv["qc_factor_at_identity"] = qc_conformal_factor_check(alg, group_identity(alg)).factor;
    }
    conv["sphere_metric_scale_cr"] = sphere_model(SphereFamily::cr, 1).metric_scale();
    conv["sphere_metric_scale_qc"] = sphere_model(SphereFamily::qc, 1).metric_scale();
    conv["sphere_volume_s3"] = sphere_model(SphereFamily::cr, 1).volume();
    conv["sphere_volume_s7"] = sphere_model(SphereFamily::qc, 1).volume();
    conv["orientation"] = "e1^e2^...^e7";
    {
        const Jet f = ScalarField(4, [](std::span<const Jet> v) { return 0.3 * v[0]; }).jet(std::vector<double>{0.2, 0.1, 0.0, -0.3}, 2);
        const FrameForm e1 = FrameForm::term(1u, Jet::constant(4, 2, 1.0));
        conv["hodge_double_star_sign_1form"] = hodge_star(hodge_star(e1, f), f).coefficient(1u).value();
        const auto g2 = g2_structure(ScalarField(4, [](std::span<const Jet> v) { return 0.3 * v[0]; }), make_KA(Eigen::Matrix3d::Identity()),
                                     std::vector<double>{0.2, 0.1, 0.0, -0.3});
        conv["lee_form_over_df"] = g2.lee.coefficient(1u).value() / 0.3;
    }
    conv["minus_connection_torsion_sign"] = 0.5;
    conv["p1_index_pair_factor"] = 0.5;
    {
        const auto data = strominger_data(heterotic_A(cfg), default_lambda());
        conv["weierstrass_root_over_literal_scale"] = data.wp.d / (std::sqrt(3 * data.normA2) / data.alpha);
        conv["instanton_lambda_matrix"] = "diag(1, 0, 0)";
    }

    ordered_json measured;
    {
        const auto alg = standard_algebra(Family::quaternionic, 1);
        const ScalarField Phi = conformal_factor_phi_field(alg, 1.0 / 16, 1.0, group_identity(alg));
        const GroupPoint p{Eigen::Vector4d(0.5, 0.1, -0.3, 0.2), Eigen::Vector3d(0.2, 0.4, -0.6)};
        measured["yamabe_ratio_phi_H1"] = yamabe_residual(alg, Phi, p, 4).ratio;
    }
    const std::size_t n = std::min<std::size_t>(cfg.samples, 1 << 15);
    {
        const SphereModel& cr = sphere_model(SphereFamily::cr, 1);
        measured["lambda1_cr_s3"] = quotient_set(cr, cayley_grid(cr, 24)).mean.value;
        measured["scalar_curvature_cr_s3"] = cr.scalar_curvature();
    }
    {
        const SphereModel& qc = sphere_model(SphereFamily::qc, 1);
        const auto grid = qmc_grid(qc, n, derive_seed(cfg.seed, "ledger/s7"));
        measured["lambda1_qc_s7"] = quotient_set(qc, grid).mean.value;
        measured["scalar_curvature_qc_s7"] = qc.scalar_curvature();
        const double literal = yamabe_functionals(qc, constant_field(8, 1.0), grid).Upsilon.value;
        measured["upsilon_s7_literal"] = literal;
        measured["upsilon_s7_reconciled"] = reconciled_upsilon(literal);
        measured["upsilon_s7_reference"] = reference_upsilon();
        measured["upsilon_volume_divisor"] = 16;
        measured["quadrature_samples"] = n;
    }

    ordered_json j;
    j["conventions"] = conv;
    j["measured"] = measured;
    return j;
}

std::string emit_ledger(const ordered_json& ledger, Format format) {
    if (format == Format::json) return ledger.dump(2) + "\n";
    std::ostringstream out;
    out << "section,key,value\n";
    for (const auto& [section, entries] : ledger.items())
        for (const auto& [key, v] : entries.items()) {
            std::string text;
            if (v.is_string()) {
                text = v.get<std::string>();
            } else if (v.is_number_float()) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
                text = buf;
            } else {
                text = v.dump();
            }
            if (text.find_first_of(",\"\n") != std::string::npos) {
                std::string q = "\"";
                for (char c : text) q += c == '"' ? std::string("\"\"") : std::string(1, c);
                text = q + "\"";
            }
            out << section << "," << key << "," << text << "\n";
        }
    return out.str();
}

OdeTable solve_ode(const SuiteConfig& cfg) {
    const auto data = strominger_data(heterotic_A(cfg), default_lambda());
    const auto f = weierstrass_dilaton(data);
    OdeTable t;
    t.header["schema"] = kOdeSchema;
    t.header["seed"] = cfg.seed;
    t.header["A"] = cfg.A;
    t.header["g2"] = data.wp.g2;
    t.header["g3"] = data.wp.g3;
    t.header["d"] = data.wp.d;
    t.header["tau_plus"] = data.wp.tau_plus;
    t.header["alpha"] = data.alpha;
    t.header["alpha_prime"] = data.alpha_prime;
    t.header["normA2"] = data.normA2;
    t.header["lambda"] = data.lambda;
    t.columns = {"t", "u", "du", "f", "df", "ode_residual", "reduced_residual", "anomaly_residual"};
    const std::size_t count = std::max<std::size_t>(cfg.samples, 2);
    const double lo = 0.05, hi = 2 * data.wp.tau_plus - 0.05;
    double worst_ode = 0, worst_reduced = 0, worst_anomaly = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        const OdeSample s = dilaton_from_u(x, data);
        const double an = anomaly_residual(f, data.A, data.Lambda, data.alpha_prime, std::vector<double>{x, 0, 0, 0});
        t.rows.push_back({x, s.u, s.du, s.f, s.df, s.ode_residual, s.reduced_residual, an});
        worst_ode = std::max(worst_ode, std::abs(s.ode_residual) / (1 + std::pow(std::abs(s.u), 3)));
        worst_reduced = std::max(worst_reduced, std::abs(s.reduced_residual));
        worst_anomaly = std::max(worst_anomaly, std::abs(an));
    }
    t.header["samples"] = count;
    t.header["max_relative_ode_residual"] = worst_ode;
    t.header["max_reduced_residual"] = worst_reduced;
    t.header["max_anomaly_residual"] = worst_anomaly;
    return t;
}

std::string emit_ode(const OdeTable& table, Format format) {
    if (format == Format::json) {
        ordered_json j = table.header;
        j["columns"] = table.columns;
        j["rows"] = table.rows;
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "# " << table.header.dump() << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << "\n";
    char buf[32];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
    return out.str();
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& check) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : check) h = (h ^ c) * 1099511628211ull;
    std::uint64_t z = seed + h + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace carnot
