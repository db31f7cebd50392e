// acceptance: one PASS/FAIL line per acceptance criterion; exit status 1 if any fails

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "kmsorder/geometry.hpp"
#include "kmsorder/oracle.hpp"
#include "kmsorder/perturbative.hpp"
#include "oracles.hpp"

using namespace kmsorder;

namespace {

// AC1
constexpr int kAc1Points = 50;
constexpr double kAc1SMax = 10.0;
constexpr double kAc1Tol = 1e-12;
constexpr double kAc1Seconds = 1.0;
// AC2
constexpr double kAc2MetricTol = 1e-5;
constexpr double kAc2RatioLimitTol = 1e-8;
constexpr double kAc2SmallS = 1e-4;
constexpr double kAc2Seconds = 1.0;
// AC3
constexpr std::size_t kAc3MinConfigs = 12;
constexpr double kAc3RelTol = 1e-6;
constexpr double kAc3Seconds = 60.0;
// AC4
constexpr double kAc4BalanceTol = 1e-12;
constexpr double kAc4ContinuumTol = 1e-6;
constexpr double kAc4DiscreteTol = 1e-10;
constexpr std::size_t kAc4BalancePoints = 200;
constexpr double kAc4Seconds = 10.0;
// AC5
constexpr double kAc5TraceDistanceTol = 1e-10;
// AC6
constexpr double kAc6MinSlope = 2.8;
constexpr double kAc6MinR2 = 0.99;
constexpr double kAc6MaxShift = 0.05;
constexpr int kAc6NMax = 10;
constexpr int kAc6NMaxRefined = 12;
constexpr double kAc6Seconds = 300.0;
// AC7
constexpr double kAc7ImagFactor = 10.0;
constexpr double kAc7RelTol = 1e-10;
constexpr double kAc7RoundoffFloor = 1e-14;
// AC8
constexpr double kAc8RelTol = 1e-8;

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

DensityMatrix rho_y(double s) { return pauli_gibbs({0, 1, 0}, s); }
DensityMatrix rho_x(double s) { return pauli_gibbs({1, 0, 0}, s); }

const DensityMatrix kRho = DensityMatrix::from_bloch({0.3, 0.2, 0.4});

// Dense-logarithm relative entropy and Eigen-sqrt fidelity, independent of the library.
double dense_entropy(const DensityMatrix& a, const DensityMatrix& b) {
    const Eigen::MatrixXcd A = oracle::to_eigen(a.matrix()), B = oracle::to_eigen(b.matrix());
    return (A * (A.log() - B.log())).trace().real();
}

// √F = Tr|√ρ√σ|, the sum of singular values; avoids square-rooting a tiny eigenvalue.
double dense_sqrt_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    const Eigen::Matrix2cd m = oracle::to_eigen(a.matrix()).sqrt() * oracle::to_eigen(b.matrix()).sqrt();
    return Eigen::JacobiSVD<Eigen::Matrix2cd>(m).singularValues().sum();
}

double richardson(const std::function<double(double)>& f, double h) { return (4.0 * f(0.5 * h) - f(h)) / 3.0; }

void ac1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0, at = 0.0;
    for (int i = 0; i < kAc1Points; ++i) {
        const double s = kAc1SMax * i / (kAc1Points - 1);
        const double e = std::abs(relative_entropy(rho_y(s), rho_x(s)).value - s * std::tanh(s));
        if (e > worst) worst = e, at = s;
    }
    const double dt = seconds_since(t0);
    report("AC1", worst <= kAc1Tol && dt < kAc1Seconds,
           fmt("relative entropy D(rho_y||rho_x) = s tanh s on %d points of [0, %g]: max abs error %.2e at s = %g "
               "(tol %.0e); %.3f s (limit %g s)",
               kAc1Points, kAc1SMax, worst, at, kAc1Tol, dt, kAc1Seconds));
}

void ac2() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_bkm = 0.0, worst_bures = 0.0, worst_ratio = 0.0, worst_oracle = 0.0;
    for (double s : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const auto bkm = bkm_metric(s);
        const auto bures = bures_metric(s);
        const double g_bkm = s * std::tanh(s), g_bures = std::tanh(s) * std::tanh(s);
        worst_bkm = std::max(worst_bkm, std::abs(bkm.numeric - g_bkm) / g_bkm);
        worst_bures = std::max(worst_bures, std::abs(bures.numeric - g_bures) / g_bures);
        const double r = s / std::tanh(s);
        worst_ratio = std::max({worst_ratio, std::abs(metric_ratio(s) - r) / r,
                                std::abs(bkm.numeric / bures.numeric - r) / r});
        // independent finite differences from dense matrix functions
        const auto r0 = rotation_state(s, 0.0);
        const double ob = richardson([&](double th) { return 2.0 * dense_entropy(rotation_state(s, th), r0) / (th * th); },
                                     kMetricStep);
        const double of = richardson(
            [&](double th) { return 8.0 * (1.0 - dense_sqrt_fidelity(rotation_state(s, th), r0)) / (th * th); },
            kMetricStep);
        worst_oracle = std::max({worst_oracle, std::abs(ob - g_bkm) / g_bkm, std::abs(of - g_bures) / g_bures});
    }
    const double small = std::abs(metric_ratio(kAc2SmallS) - 1.0);
    const double dt = seconds_since(t0);
    const bool pass = worst_bkm <= kAc2MetricTol && worst_bures <= kAc2MetricTol && worst_ratio <= kAc2MetricTol &&
                      worst_oracle <= kAc2MetricTol && small <= kAc2RatioLimitTol && dt < kAc2Seconds;
    report("AC2", pass,
           fmt("metrics on s in {0.1,0.5,1,2,5,10}: BKM rel %.1e, Bures rel %.1e, ratio rel %.1e, dense-oracle rel %.1e "
               "(tol %.0e); |ratio(%g) - 1| = %.1e (tol %.0e); %.3f s (limit %g s)",
               worst_bkm, worst_bures, worst_ratio, worst_oracle, kAc2MetricTol, kAc2SmallS, small,
               kAc2RatioLimitTol, dt, kAc2Seconds));
}

struct Case {
    std::string label;
    SpectralModel model;
    Protocol protocol;
};

std::vector<Case> test_matrix() {
    using SF = SwitchingFunction;
    auto xy = [](SF a, SF b) {
        return Protocol{{Observable::x(), a}, {Observable::y(), b}, 0.05};
    };
    const DiscreteModeSet lines{{{2.0, 0.3}, {3.0, 0.25}}, 1.0};
    std::vector<Case> c;
    for (double beta : {1.0, 2.0, 4.0})
        c.push_back({fmt("flat_ohmic L=5 beta=%g cos", beta), SpectralModel::flat_ohmic(beta, 5.0),
                     xy(SF::cosine_bump(-1.2, 1.0), SF::cosine_bump(1.2, 1.0))});
    c.push_back({"flat_ohmic L=5 beta=1 cos gap 2", SpectralModel::flat_ohmic(1.0, 5.0),
                 xy(SF::cosine_bump(-2.0, 1.0), SF::cosine_bump(2.0, 1.0))});
    c.push_back({"flat_ohmic L=3 beta=2 smooth", SpectralModel::flat_ohmic(2.0, 3.0),
                 xy(SF::smooth_bump(-1.2, 1.0), SF::smooth_bump(1.2, 1.0))});
    c.push_back({"flat_ohmic L=5 beta=3 cos/smooth widths 0.7/1.3", SpectralModel::flat_ohmic(3.0, 5.0),
                 xy(SF::cosine_bump(-1.0, 0.7), SF::smooth_bump(1.5, 1.3, 0.8))});
    for (double a : {1.0, 2.0 * M_PI})
        c.push_back({fmt("accelerated a=%.4g L=5 cos", a), SpectralModel::accelerated_massless(a, 5.0),
                     xy(SF::cosine_bump(-1.2, 1.0), SF::cosine_bump(1.2, 1.0))});
    c.push_back({"accelerated a=2 L=8 smooth", SpectralModel::accelerated_massless(2.0, 8.0),
                 xy(SF::smooth_bump(-1.0, 0.9), SF::smooth_bump(1.0, 0.9))});
    for (double beta : {0.5, 1.0, 5.0}) {
        DiscreteModeSet m = lines;
        m.beta = beta;
        c.push_back({fmt("discrete K=2 beta=%g cos", beta), SpectralModel::discrete(m),
                     xy(SF::cosine_bump(-2.0, 1.0), SF::cosine_bump(2.0, 1.0))});
    }
    c.push_back({"discrete K=2 beta=1 smooth", SpectralModel::discrete(lines),
                 xy(SF::smooth_bump(-1.5, 1.0), SF::smooth_bump(1.5, 1.0))});
    c.push_back({"discrete K=2 beta=2 cos amplitude 0.5", SpectralModel::discrete({lines.modes, 2.0}),
                 xy(SF::cosine_bump(-1.6, 1.0, 0.5), SF::cosine_bump(1.6, 1.2))});
    return c;
}

using Method = AsymmetryResult (*)(const Protocol&, const SpectralModel&, const DensityMatrix&, const Tolerance&);
const Method kMethods[3] = {delta_rho_dyson, delta_rho_commutator_time, delta_rho_frequency};

void ac3(const std::vector<Case>& cases) {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t ok = 0;
    double worst = 0.0, min_c = INFINITY;
    std::string bad;
    for (const auto& cs : cases) {
        AsymmetryResult r[3];
        for (int m = 0; m < 3; ++m) r[m] = kMethods[m](cs.protocol, cs.model, kRho, kAsymmetryTolerance);
        bool pass = true;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                const double d = std::abs(r[i].c - r[j].c);
                const double scale = std::max(std::abs(r[i].c), std::abs(r[j].c));
                worst = std::max(worst, d / scale);
                if (!(d <= std::max(kAc3RelTol * scale, r[i].quadrature_error + r[j].quadrature_error))) pass = false;
            }
        min_c = std::min(min_c, std::abs(r[0].c));
        ok += pass;
        if (!pass) bad += " [" + cs.label + "]";
    }
    const double dt = seconds_since(t0);
    report("AC3", ok == cases.size() && cases.size() >= kAc3MinConfigs && dt < kAc3Seconds,
           fmt("three-way agreement of c (Dyson, time, frequency): %zu/%zu configurations (need >= %zu), "
               "max pairwise rel %.1e (tol %.0e or quadrature error), min |c| %.2e; %.2f s (limit %g s)%s",
               ok, cases.size(), kAc3MinConfigs, worst, kAc3RelTol, min_c, dt, kAc3Seconds, bad.c_str()));
}

void ac4() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> times, omegas;
    for (int i = 0; i < 25; ++i) times.push_back(-3.0 + 0.25 * i);
    const double L = 5.0;
    for (std::size_t i = 0; i < kAc4BalancePoints; ++i)
        omegas.push_back(-10.0 * L + 20.0 * L * double(i) / double(kAc4BalancePoints - 1));
    const SpectralModel continuum[] = {SpectralModel::flat_ohmic(1.0, L), SpectralModel::flat_ohmic(2.0, L),
                                       SpectralModel::accelerated_massless(1.0, L)};
    double bal = 0.0, cont = 0.0;
    for (const auto& m : continuum) {
        bal = std::max(bal, detailed_balance_check(m, omegas, kAc4BalanceTol).max_relative_error);
        cont = std::max(cont, kms_time_domain_check(m, times, kAc4ContinuumTol).max_deviation);
    }
    const auto disc = SpectralModel::discrete({{{2.0, 0.3}, {3.5, 0.25}}, 1.0});
    bal = std::max(bal, detailed_balance_check(disc, omegas, kAc4BalanceTol).max_relative_error);
    const double dd = kms_time_domain_check(disc, times, kAc4DiscreteTol).max_deviation;
    const double dt = seconds_since(t0);
    report("AC4", bal <= kAc4BalanceTol && cont <= kAc4ContinuumTol && dd <= kAc4DiscreteTol && dt < kAc4Seconds,
           fmt("detailed balance on %zu-point grid max rel %.1e (tol %.0e); KMS time shift continuum %.1e (tol %.0e), "
               "discrete %.1e (tol %.0e); %.2f s (limit %g s)",
               kAc4BalancePoints, bal, kAc4BalanceTol, cont, kAc4ContinuumTol, dd, kAc4DiscreteTol, dt, kAc4Seconds));
}

void ac5() {
    using SF = SwitchingFunction;
    const DiscreteModeSet lines{{{2.0, 0.3}, {3.5, 0.25}}, 1.0};
    const auto disc = SpectralModel::discrete(lines);
    const auto cont = SpectralModel::flat_ohmic(2.0, 5.0);
    const TruncatedField field(lines, 8);
    EvolutionSpec spec;
    const double lambda = 0.1;
    const auto diag = DensityMatrix::from_bloch({0.0, 0.0, 0.5});
    struct Control {
        const char* name;
        Protocol p;
        DensityMatrix rho;
    };
    const Control controls[] = {
        {"commuting x/x", {{Observable::x(), SF::cosine_bump(-2, 1)}, {Observable::x(), SF::cosine_bump(2, 1)}, lambda}, kRho},
        {"commuting z/z", {{Observable::z(), SF::cosine_bump(-2, 1)}, {Observable::z(), SF::cosine_bump(2, 1)}, lambda}, kRho},
        {"state diagonal in z", {{Observable::x(), SF::cosine_bump(-2, 1)}, {Observable::y(), SF::cosine_bump(2, 1)}, lambda}, diag},
        {"zero amplitude", {{Observable::x(), SF::cosine_bump(-2, 1, 0.0)}, {Observable::y(), SF::cosine_bump(2, 1)}, lambda}, kRho},
    };
    double worst_pert = 0.0, worst_exact = 0.0;
    std::string bad;
    for (const auto& c : controls) {
        double w = 0.0;
        for (const auto* model : {&cont, &disc})
            for (auto f : kMethods) w = std::max(w, 0.5 * trace_norm_of(f(c.p, *model, c.rho, kAsymmetryTolerance).delta_rho));
        const double e = 0.5 * trace_norm_of(ordering_asymmetry_exact(field, c.p, c.rho, spec).delta_rho);
        worst_pert = std::max(worst_pert, w);
        worst_exact = std::max(worst_exact, e);
        if (w > kAc5TraceDistanceTol || e > kAc5TraceDistanceTol) bad += fmt(" [%s]", c.name);
    }
    report("AC5", worst_pert <= kAc5TraceDistanceTol && worst_exact <= kAc5TraceDistanceTol,
           fmt("vanishing controls (commuting couplings, z-diagonal state, zero amplitude): perturbative max trace "
               "distance %.1e, exact oracle (K=2, n_max=8, lambda=%g) %.1e (tol %.0e)%s",
               worst_pert, lambda, worst_exact, kAc5TraceDistanceTol, bad.c_str()));
}

void ac6() {
    const auto t0 = std::chrono::steady_clock::now();
    const DiscreteModeSet lines{{{2.0, 0.3}, {3.5, 0.25}}, 1.0};
    const Protocol p{{Observable::x(), SwitchingFunction::cosine_bump(-2, 1)},
                     {Observable::y(), SwitchingFunction::cosine_bump(2, 1)},
                     0.1};
    EvolutionSpec spec;
    spec.lambdas = EvolutionSpec::geometric_grid(0.01, 0.3, 8);
    std::string detail;
    bool pass = false;
    try {
        const auto a = scaling_fit(TruncatedField(lines, kAc6NMax), p, kRho, spec);
        const auto b = scaling_fit(TruncatedField(lines, kAc6NMaxRefined), p, kRho, spec);
        const double shift = std::abs(a.slope - b.slope);
        const double dt = seconds_since(t0);
        pass = a.slope >= kAc6MinSlope && a.r2 >= kAc6MinR2 && shift < kAc6MaxShift && dt < kAc6Seconds;
        detail = fmt("oracle scaling K=2 lambda in [0.01, 0.3] (8 points, %.2f decades): slope %.4f (min %g), "
                     "R2 %.6f (min %g), n_max %d -> %d shift %.1e (max %g); %.1f s (limit %g s)",
                     a.decades, a.slope, kAc6MinSlope, a.r2, kAc6MinR2, kAc6NMax, kAc6NMaxRefined, shift,
                     kAc6MaxShift, dt, kAc6Seconds);
        for (const auto& w : a.warnings) detail += "; warning: " + w;
    } catch (const std::exception& e) {
        detail = std::string("oracle scaling failed: ") + e.what();
    }
    report("AC6", pass, detail);
}

void ac7(const std::vector<Case>& cases) {
    std::mt19937_64 rng(7);
    std::vector<DensityMatrix> states{kRho};
    for (int i = 0; i < 2; ++i) states.push_back(oracle::random_state(rng));
    std::size_t checked = 0, failed = 0;
    double worst_flip = 0.0, worst_trace = 0.0, worst_herm = 0.0, worst_prop = 0.0, worst_imag_ratio = 0.0,
           worst_margin = 0.0;
    for (const auto& cs : cases)
        for (const auto& rho : states)
            for (auto f : kMethods) {
                const auto a = f(cs.protocol, cs.model, rho, kAsymmetryTolerance);
                const auto b = f(cs.protocol.reversed(), cs.model, rho, kAsymmetryTolerance);
                const double scale = a.delta_rho.max_abs();
                const double flip = max_abs_diff(a.delta_rho, -1.0 * b.delta_rho) / scale;
                const double tr = std::abs(a.delta_rho.trace()) / scale;
                const double herm = a.delta_rho.hermiticity_defect() / scale;
                // Δρ = k·i[σz, ρ] with k complex, fitted by projection
                const auto P = cplx(0.0, 1.0) * commutator(pauli::Z(), rho.matrix());
                cplx num = 0.0, den = 0.0;
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c) {
                        num += std::conj(P(r, c)) * a.delta_rho(r, c);
                        den += std::norm(P(r, c));
                    }
                const cplx k = num / den;
                const double prop = max_abs_diff(a.delta_rho, k * P) / scale;
                const double lam2 = cs.protocol.lambda() * cs.protocol.lambda();
                // exact line sums report zero quadrature error; their error is roundoff
                const double imag_bound = kAc7ImagFactor * std::max(a.quadrature_error, kAc7RoundoffFloor * std::abs(a.c));
                const double imag = std::max(std::abs(k.imag()) / lam2, std::abs(a.c_imag));
                worst_flip = std::max(worst_flip, flip);
                worst_trace = std::max(worst_trace, tr);
                worst_herm = std::max(worst_herm, herm);
                worst_prop = std::max(worst_prop, prop);
                worst_imag_ratio = std::max(worst_imag_ratio, imag / imag_bound);
                ++checked;
                // structure defects may not exceed the relative quadrature error of c either
                const double rel_tol = std::max(kAc7RelTol, kAc7ImagFactor * a.quadrature_error / std::abs(a.c));
                worst_margin = std::max(worst_margin, std::max({flip, tr, herm, prop}) / rel_tol);
                if (flip > rel_tol || tr > rel_tol || herm > rel_tol || prop > rel_tol ||
                    imag > imag_bound)
                    ++failed;
            }
    report("AC7", failed == 0,
           fmt("structure over %zu (configuration, state, method) cases: reversal flip rel %.1e, trace rel %.1e, "
               "hermiticity rel %.1e, departure from real multiple of i[sz,rho] rel %.1e "
               "(tol max(%.0e, %g x quadrature error / |c|), worst defect / tol = %.1e); "
               "max |Im c| / (%g x quadrature error) = %.2f; %zu failures",
               checked, worst_flip, worst_trace, worst_herm, worst_prop, kAc7RelTol, kAc7ImagFactor, worst_margin,
               kAc7ImagFactor, worst_imag_ratio, failed));
}

void ac8() {
    const double w1 = 2.0;
    const Protocol p{{Observable::x(), SwitchingFunction::cosine_bump(-1.5, 1)},
                     {Observable::y(), SwitchingFunction::cosine_bump(1.5, 1)},
                     0.05};
    double worst = 0.0;
    for (auto f : kMethods) {
        std::vector<double> k;
        for (double beta : {0.2, 1.0, 5.0, 25.0}) {
            const auto m = SpectralModel::discrete({{{w1, 0.3}}, beta});
            k.push_back(f(p, m, kRho, kAsymmetryTolerance).c * std::tanh(0.5 * beta * w1));
        }
        for (double v : k) worst = std::max(worst, std::abs(v - k.front()) / std::abs(k.front()));
    }
    report("AC8", worst <= kAc8RelTol,
           fmt("single-mode thermal weighting: c(beta)/coth(beta w1/2) constant over beta in {0.2,1,5,25} for all "
               "three methods, max rel spread %.1e (tol %.0e)",
               worst, kAc8RelTol));
}

}  // namespace

int main() {
    const auto cases = test_matrix();
    ac1();
    ac2();
    ac3(cases);
    ac4();
    ac5();
    ac6();
    ac7(cases);
    ac8();
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
