#include "kmsorder/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "kmsorder/error.hpp"

namespace kmsorder {

namespace {

using Mat = Eigen::MatrixXcd;
constexpr cplx kI{0.0, 1.0};

struct LegPropagators {
    std::array<ComplexMatrix2, 2> projector;
    std::vector<std::array<Mat, 2>> V;  // [mode][branch]
};

// −i s (e^{−iωτ} a + e^{iωτ} a†) X for the truncated ladder operators.
void apply_generator(const Mat& X, double s, double omega, double tau, const std::vector<double>& sq,
                     Mat& out) {
    const cplx down = -kI * s * std::polar(1.0, -omega * tau);
    const cplx up = -kI * s * std::polar(1.0, omega * tau);
    const Eigen::Index n = X.rows();
    for (Eigen::Index r = 0; r < n; ++r) {
        out.row(r).setZero();
        if (r + 1 < n) out.row(r) += down * sq[static_cast<std::size_t>(r + 1)] * X.row(r + 1);
        if (r > 0) out.row(r) += up * sq[static_cast<std::size_t>(r)] * X.row(r - 1);
    }
}

Mat mode_propagator(const SwitchingFunction& chi, double scale, double omega, int n_max,
                    double step) {
    const Eigen::Index dim = n_max + 1;
    Mat V = Mat::Identity(dim, dim);
    if (scale == 0.0 || chi.amplitude() == 0.0) return V;
    std::vector<double> sq(static_cast<std::size_t>(dim));
    for (Eigen::Index n = 0; n < dim; ++n) sq[static_cast<std::size_t>(n)] = std::sqrt(double(n));

    const double t0 = chi.support_begin();
    const double span = chi.support_end() - t0;
    const auto steps = static_cast<long>(std::ceil(span / step));
    const double h = span / static_cast<double>(steps);
    Mat k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), tmp(dim, dim);
    for (long i = 0; i < steps; ++i) {
        const double t = t0 + h * static_cast<double>(i);
        const double s0 = scale * chi(t), sh = scale * chi(t + 0.5 * h), s1 = scale * chi(t + h);
        apply_generator(V, s0, omega, t, sq, k1);
        tmp = V + (0.5 * h) * k1;
        apply_generator(tmp, sh, omega, t + 0.5 * h, sq, k2);
        tmp = V + (0.5 * h) * k2;
        apply_generator(tmp, sh, omega, t + 0.5 * h, sq, k3);
        tmp = V + h * k3;
        apply_generator(tmp, s1, omega, t + h, sq, k4);
        V += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return V;
}

LegPropagators leg_propagators(const TruncatedField& field, const Leg& leg, double lambda,
                               double step) {
    LegPropagators out;
    const auto spec = hermitian_eigen(leg.observable.matrix());
    for (int b = 0; b < 2; ++b) {
        const auto& v = spec.vectors[static_cast<std::size_t>(b)];
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                out.projector[static_cast<std::size_t>(b)](r, c) = v[static_cast<std::size_t>(r)] *
                                                                   std::conj(v[static_cast<std::size_t>(c)]);
    }
    for (const auto& mode : field.modes().modes) {
        std::array<Mat, 2> pair;
        for (int b = 0; b < 2; ++b)
            pair[static_cast<std::size_t>(b)] =
                mode_propagator(leg.switching, spec.values[static_cast<std::size_t>(b)] * lambda * mode.coupling,
                                mode.frequency, field.n_max(), step);
        out.V.push_back(std::move(pair));
    }
    return out;
}

double drift_of(const LegPropagators& leg) {
    double d = 0.0;
    for (const auto& pair : leg.V)
        for (const auto& V : pair) {
            const Mat e = V.adjoint() * V - Mat::Identity(V.rows(), V.cols());
            d = std::max(d, e.cwiseAbs().maxCoeff());
        }
    return d;
}

struct Reduced {
    ComplexMatrix2 rho;
    double leakage = 0.0;
};

// ρ′ = Tr_φ[U_B U_A (ρ ⊗ ρ_φ) U_A† U_B†] with A applied first.
Reduced reduce(const TruncatedField& field, const LegPropagators& A, const LegPropagators& B,
               const DensityMatrix& rho) {
    const std::size_t K = field.modes().modes.size();
    // branch index β = 2·j + i for (A branch i, B branch j)
    std::vector<std::array<Mat, 4>> W(K);
    std::vector<std::vector<double>> p(K);
    Reduced out;
    for (std::size_t k = 0; k < K; ++k) {
        p[k] = field.thermal_weights(k);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                W[k][static_cast<std::size_t>(2 * j + i)] =
                    B.V[k][static_cast<std::size_t>(j)] * A.V[k][static_cast<std::size_t>(i)];
    }
    const Eigen::Index top = field.n_max();
    for (std::size_t k = 0; k < K; ++k)
        for (const auto& w : W[k]) {
            double pop = 0.0;
            for (Eigen::Index n = 0; n <= top; ++n)
                pop += p[k][static_cast<std::size_t>(n)] * std::norm(w(top, n));
            out.leakage = std::max(out.leakage, pop);
        }

    std::array<ComplexMatrix2, 4> left;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            left[static_cast<std::size_t>(2 * j + i)] =
                B.projector[static_cast<std::size_t>(j)] * A.projector[static_cast<std::size_t>(i)];

    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = 0; y < 4; ++y) {
            cplx weight = 1.0;
            for (std::size_t k = 0; k < K; ++k) {
                // Tr(W_x ρ_k W_y†) for diagonal ρ_k
                cplx t = 0.0;
                for (Eigen::Index n = 0; n <= top; ++n) {
                    const double pn = p[k][static_cast<std::size_t>(n)];
                    if (pn == 0.0) continue;
                    t += pn * W[k][y].col(n).dot(W[k][x].col(n));
                }
                weight *= t;
            }
            out.rho += left[x] * rho.matrix() * left[y].adjoint() * weight;
        }
    return out;
}

struct Evaluation {
    ComplexMatrix2 forward, backward;
    double drift = 0.0, leakage = 0.0;
};

Evaluation evaluate(const TruncatedField& field, const Protocol& protocol, const DensityMatrix& rho,
                    double step, bool want_forward, bool want_backward) {
    const auto A = leg_propagators(field, protocol.leg_first(), protocol.lambda(), step);
    const auto B = leg_propagators(field, protocol.leg_second(), protocol.lambda(), step);
    Evaluation e;
    e.drift = std::max(drift_of(A), drift_of(B));
    if (want_forward) {
        const auto r = reduce(field, A, B, rho);
        e.forward = r.rho;
        e.leakage = std::max(e.leakage, r.leakage);
    }
    if (want_backward) {
        const auto r = reduce(field, B, A, rho);
        e.backward = r.rho;
        e.leakage = std::max(e.leakage, r.leakage);
    }
    return e;
}

// Runs at step (and step/2 when checking), then enforces every guard.
Evaluation checked(const TruncatedField& field, const Protocol& protocol, const DensityMatrix& rho,
                   const EvolutionSpec& spec, bool fwd, bool bwd, double& step_change) {
    spec.validate();
    auto coarse = evaluate(field, protocol, rho, spec.step, fwd, bwd);
    step_change = 0.0;
    Evaluation result = coarse;
    if (spec.check_step) {
        result = evaluate(field, protocol, rho, 0.5 * spec.step, fwd, bwd);
        if (fwd) step_change = std::max(step_change, max_abs_diff(coarse.forward, result.forward));
        if (bwd) step_change = std::max(step_change, max_abs_diff(coarse.backward, result.backward));
    }
    if (result.leakage > spec.leakage_threshold)
        throw LeakageError("oracle: truncation leakage " + std::to_string(result.leakage) +
                               " (top Fock level population) exceeds threshold; raise n_max",
                           result.leakage);
    if (result.drift > spec.drift_tolerance)
        throw ConvergenceError("oracle: unitarity drift " + std::to_string(result.drift) +
                                   " exceeds tolerance; reduce the step",
                               result.drift);
    if (step_change > spec.step_tolerance)
        throw ConvergenceError("oracle: halving the step changed the state by " +
                                   std::to_string(step_change),
                               step_change);
    return result;
}

}  // namespace

TruncatedField::TruncatedField(DiscreteModeSet modes, int n_max)
    : modes_(std::move(modes)), n_max_(n_max) {
    modes_.validate();
    if (n_max < 1) throw InvalidInput("truncated field: n_max must be at least 1");
}

double TruncatedField::dimension() const {
    return 2.0 * std::pow(double(n_max_ + 1), double(modes_.modes.size()));
}

std::vector<double> TruncatedField::thermal_weights(std::size_t mode) const {
    const double x = modes_.beta * modes_.modes.at(mode).frequency;
    std::vector<double> p(static_cast<std::size_t>(n_max_ + 1));
    double sum = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) sum += p[n] = std::exp(-x * double(n));
    for (auto& v : p) v /= sum;
    return p;
}

std::vector<double> EvolutionSpec::geometric_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n < 1)
        throw InvalidInput("geometric grid: need 0 < lo ≤ hi and n ≥ 1");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = n == 1 ? lo : lo * std::pow(hi / lo, double(i) / double(n - 1));
    return g;
}

void EvolutionSpec::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidInput("evolution: step must be positive");
    if (order != 4) throw InvalidInput("evolution: only the fourth-order integrator is available");
    for (double l : lambdas)
        if (!(l > 0.0)) throw InvalidInput("evolution: lambda grid must be strictly positive");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1])) throw InvalidInput("evolution: lambda grid must be increasing");
    for (std::size_t i = 2; i < lambdas.size(); ++i) {
        const double r0 = std::log(lambdas[1] / lambdas[0]);
        const double r = std::log(lambdas[i] / lambdas[i - 1]);
        if (std::abs(r - r0) > 1e-9 * std::max(1.0, std::abs(r0)))
            throw InvalidInput("evolution: lambda grid must be geometric");
    }
}

OracleState evolve_protocol(const TruncatedField& field, const Protocol& protocol,
                            const DensityMatrix& rho, Ordering order, const EvolutionSpec& spec) {
    const bool fwd = order == Ordering::first_then_second;
    OracleState out;
    const auto e = checked(field, protocol, rho, spec, fwd, !fwd, out.step_change);
    out.matrix = fwd ? e.forward : e.backward;
    out.unitarity_drift = e.drift;
    out.leakage = e.leakage;
    return out;
}

ExactAsymmetry ordering_asymmetry_exact(const TruncatedField& field, const Protocol& protocol,
                                        const DensityMatrix& rho, const EvolutionSpec& spec) {
    ExactAsymmetry out;
    const auto e = checked(field, protocol, rho, spec, true, true, out.step_change);
    out.delta_rho = e.forward - e.backward;
    out.unitarity_drift = e.drift;
    out.leakage = e.leakage;
    return out;
}

OracleState evolve_protocol_joint(const TruncatedField& field, const Protocol& protocol,
                                  const DensityMatrix& rho, Ordering order,
                                  const EvolutionSpec& spec) {
    spec.validate();
    const auto& modes = field.modes().modes;
    const Eigen::Index levels = field.n_max() + 1;
    Eigen::Index fdim = 1;
    for (std::size_t k = 0; k < modes.size(); ++k) fdim *= levels;
    const Eigen::Index dim = 2 * fdim;

    // Field-space ladder operators a_k and the thermal state.
    std::vector<Mat> a(modes.size(), Mat::Zero(fdim, fdim));
    Eigen::VectorXd pfield = Eigen::VectorXd::Ones(fdim);
    for (Eigen::Index idx = 0; idx < fdim; ++idx) {
        Eigen::Index rem = idx, stride = fdim;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            stride /= levels;
            const Eigen::Index n = rem / stride;
            rem %= stride;
            pfield(idx) *= field.thermal_weights(k)[static_cast<std::size_t>(n)];
            if (n > 0) a[k](idx - stride, idx) = std::sqrt(double(n));
        }
    }

    auto leg_unitary = [&](const Leg& leg) {
        Mat U = Mat::Identity(dim, dim);
        const auto& chi = leg.switching;
        if (chi.amplitude() == 0.0 || protocol.lambda() == 0.0) return U;
        Mat mu(2, 2);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) mu(r, c) = leg.observable.matrix()(r, c);
        auto H = [&](double t) {
            Mat phi = Mat::Zero(fdim, fdim);
            for (std::size_t k = 0; k < modes.size(); ++k) {
                const cplx e = std::polar(1.0, -modes[k].frequency * t);
                phi += modes[k].coupling * (e * a[k] + std::conj(e) * a[k].adjoint());
            }
            Mat h(dim, dim);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    h.block(r * fdim, c * fdim, fdim, fdim) = (protocol.lambda() * chi(t) * mu(r, c)) * phi;
            return h;
        };
        const double t0 = chi.support_begin();
        const double span = chi.support_end() - t0;
        const auto steps = static_cast<long>(std::ceil(span / spec.step));
        const double h = span / double(steps);
        for (long i = 0; i < steps; ++i) {
            const double t = t0 + h * double(i);
            const Mat Hm = H(t + 0.5 * h);
            const Mat k1 = -kI * H(t) * U;
            const Mat k2 = -kI * Hm * (U + 0.5 * h * k1);
            const Mat k3 = -kI * Hm * (U + 0.5 * h * k2);
            const Mat k4 = -kI * H(t + h) * (U + h * k3);
            U += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return U;
    };

    const Mat UA = leg_unitary(protocol.leg_first());
    const Mat UB = leg_unitary(protocol.leg_second());
    const Mat U = order == Ordering::first_then_second ? Mat(UB * UA) : Mat(UA * UB);

    Mat joint = Mat::Zero(dim, dim);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            joint.block(r * fdim, c * fdim, fdim, fdim) = rho.matrix()(r, c) * pfield.asDiagonal().toDenseMatrix().cast<cplx>();
    const Mat evolved = U * joint * U.adjoint();

    OracleState out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out.matrix(r, c) = evolved.block(r * fdim, c * fdim, fdim, fdim).trace();
    out.unitarity_drift = std::max((UA.adjoint() * UA - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff(),
                                   (UB.adjoint() * UB - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff());
    return out;
}

double trace_norm_of(const ComplexMatrix2& m) {
    return trace_norm((m + m.adjoint()) * 0.5);
}

ScalingPoint scaling_point(const TruncatedField& field, const Protocol& protocol,
                           const DensityMatrix& rho, const EvolutionSpec& spec, double lambda) {
    ScalingPoint pt;
    pt.lambda = lambda;
    try {
        const auto p = protocol.with_lambda(lambda);
        const auto exact = ordering_asymmetry_exact(field, p, rho, spec);
        const auto pert = delta_rho_frequency(p, SpectralModel::discrete(field.modes()), rho);
        pt.exact_norm = trace_norm_of(exact.delta_rho);
        pt.pert_norm = trace_norm_of(pert.delta_rho);
        pt.diff_norm = trace_norm_of(exact.delta_rho - pert.delta_rho);
        pt.leakage = exact.leakage;
        pt.unitarity_drift = exact.unitarity_drift;
        pt.ok = true;
    } catch (const Error& e) {
        pt.error = e.what();
        if (const auto* le = dynamic_cast<const LeakageError*>(&e)) pt.leakage = le->leakage();
    }
    return pt;
}

ScalingFit fit_scaling(std::vector<ScalingPoint> points) {
    ScalingFit fit;
    fit.points = std::move(points);
    std::vector<double> x, y;
    for (const auto& p : fit.points)
        if (p.ok && p.diff_norm > 0.0) {
            x.push_back(std::log(p.lambda));
            y.push_back(std::log(p.diff_norm));
        }
    if (x.size() < 3)
        throw InvalidInput("scaling fit: insufficient points (" + std::to_string(x.size()) +
                           " usable, at least 3 required)");
    const double n = double(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidInput("scaling fit: insufficient points (all λ equal)");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    fit.decades = (*hi - *lo) / std::log(10.0);
    if (fit.decades < 1.5)
        fit.warnings.push_back("lambda grid spans " + std::to_string(fit.decades) +
                               " decades (< 1.5)");
    if (fit.r2 < kMinScalingR2)
        fit.warnings.push_back("residual nonlinearity: R^2 = " + std::to_string(fit.r2) +
                               "; lambda grid may leave the perturbative regime");
    for (const auto& p : fit.points)
        if (!p.ok) fit.warnings.push_back("lambda " + std::to_string(p.lambda) + ": " + p.error);
    return fit;
}

ScalingFit scaling_fit(const TruncatedField& field, const Protocol& protocol,
                       const DensityMatrix& rho, const EvolutionSpec& spec) {
    spec.validate();
    std::vector<ScalingPoint> pts;
    for (double l : spec.lambdas) pts.push_back(scaling_point(field, protocol, rho, spec, l));
    return fit_scaling(std::move(pts));
}

}  // namespace kmsorder
