#include "kmsorder/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "kmsorder/error.hpp"

namespace kmsorder {

namespace {

double overlap(const std::array<cplx, 2>& u, const std::array<cplx, 2>& v) {
    return std::norm(std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1]);
}

double relative_residual(double value, double numeric) {
    const double diff = std::abs(numeric - value);
    return value == 0.0 ? diff : diff / std::abs(value);
}

// (4 f(h/2) − f(h)) / 3 for an even function of the step.
template <class F>
double richardson(F&& f, double h) {
    return (4.0 * f(0.5 * h) - f(h)) / 3.0;
}

}  // namespace

RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                                 double floor) {
    const auto& p = rho.spectrum();
    const auto& q = sigma.spectrum();
    // Σ_ij p_i |⟨u_i|v_j⟩|² (log p_i − log q_j); uses Σ_j |⟨u_i|v_j⟩|² = 1 so
    // that identical spectra cancel term by term.
    double D = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const double pi = p.values[i];
        if (pi <= floor) continue;
        for (std::size_t j = 0; j < 2; ++j) {
            const double o = overlap(p.vectors[i], q.vectors[j]);
            if (o == 0.0) continue;
            const double qj = q.values[j];
            if (qj <= floor) {
                if (pi * o > floor) return {std::numeric_limits<double>::infinity(), true};
                continue;
            }
            D += pi * o * (std::log(pi) - std::log(qj));
        }
    }
    if (D < 0.0) {
        if (D < -1e-12)
            throw ConsistencyError("relative_entropy: negative value " + std::to_string(D), D);
        D = 0.0;
    }
    return {D, false};
}

DensityMatrix rotation_state(double s, double theta) {
    if (!(s >= 0.0)) throw InvalidInput("rotation family: s must be non-negative");
    return pauli_gibbs({std::cos(theta), std::sin(theta), 0.0}, s);
}

double relative_entropy_family_closed(double s, double theta) {
    // 1 − cos θ = 2 sin²(θ/2) avoids cancellation at small θ
    const double h = std::sin(0.5 * theta);
    return s * std::tanh(s) * 2.0 * h * h;
}

FamilyEntropy relative_entropy_family(double s, double theta) {
    const auto D = relative_entropy(rotation_state(s, theta), rotation_state(s, 0.0));
    FamilyEntropy out{D.value, relative_entropy_family_closed(s, theta), 0.0};
    out.residual = std::abs(out.value - out.closed_form);
    if (out.residual > 1e-10 * std::max(1.0, out.closed_form))
        throw ConsistencyError("relative_entropy_family: generic and closed forms disagree",
                               out.residual);
    return out;
}

double qubit_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    const auto r = a.bloch();
    const auto t = b.bloch();
    const double dot = r[0] * t[0] + r[1] * t[1] + r[2] * t[2];
    const double ra = 1.0 - (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    const double rb = 1.0 - (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
    return 0.5 * (1.0 + dot + std::sqrt(std::max(0.0, ra * rb)));
}

MetricEstimate bkm_metric(double s) {
    if (!(s >= 0.0)) throw InvalidInput("bkm_metric: s must be non-negative");
    MetricEstimate m{s * std::tanh(s), 0.0, 0.0};
    const auto rho0 = rotation_state(s, 0.0);
    m.numeric = richardson(
        [&](double th) {
            // family states carry exact spectra, so no floor is needed
            return 2.0 * relative_entropy(rotation_state(s, th), rho0, 0.0).value / (th * th);
        },
        kMetricStep);
    m.residual = relative_residual(m.value, m.numeric);
    if (m.residual > kMetricTolerance)
        throw ConsistencyError("bkm_metric: finite-difference cross-check failed at s = " +
                                   std::to_string(s),
                               m.residual);
    return m;
}

MetricEstimate bures_metric(double s) {
    if (!(s >= 0.0)) throw InvalidInput("bures_metric: s must be non-negative");
    const double t = std::tanh(s);
    MetricEstimate m{t * t, 0.0, 0.0};
    const auto rho0 = rotation_state(s, 0.0);
    m.numeric = richardson(
        [&](double th) {
            const double F = qubit_fidelity(rotation_state(s, th), rho0);
            const double sqrtF = std::sqrt(F);
            // 2(1 − √F) written as 2(1 − F)/(1 + √F)
            const double d2 = 2.0 * (1.0 - F) / (1.0 + sqrtF);
            return 4.0 * d2 / (th * th);
        },
        kMetricStep);
    m.residual = relative_residual(m.value, m.numeric);
    if (m.residual > kMetricTolerance)
        throw ConsistencyError("bures_metric: fidelity cross-check failed at s = " + std::to_string(s),
                               m.residual);
    return m;
}

double metric_ratio(double s) {
    if (!(s >= 0.0)) throw InvalidInput("metric_ratio: s must be non-negative");
    if (s == 0.0) return 1.0;
    return s / std::tanh(s);
}

ComplexMatrix2 modular_generator(const DensityMatrix& rho) {
    return -matrix_log(rho);
}

GeometryReport geometry_report(double s) {
    GeometryReport r;
    r.s = s;
    const auto D =
        relative_entropy(pauli_gibbs({0.0, 1.0, 0.0}, s), pauli_gibbs({1.0, 0.0, 0.0}, s), 0.0);
    r.relative_entropy = D.value;
    r.residual_entropy = std::abs(D.value - s * std::tanh(s));
    try {
        const auto b = bkm_metric(s);
        r.g_bkm = b.value;
        r.g_bkm_numeric = b.numeric;
        r.residual_bkm = b.residual;
    } catch (const ConsistencyError& e) {
        r.g_bkm = s * std::tanh(s);
        r.residual_bkm = e.residual();
    }
    try {
        const auto b = bures_metric(s);
        r.g_bures = b.value;
        r.g_bures_numeric = b.numeric;
        r.residual_bures = b.residual;
    } catch (const ConsistencyError& e) {
        r.g_bures = std::tanh(s) * std::tanh(s);
        r.residual_bures = e.residual();
    }
    r.ratio = metric_ratio(s);
    if (r.g_bures_numeric > 0.0)
        r.residual_ratio = std::abs(r.ratio - r.g_bkm_numeric / r.g_bures_numeric) / r.ratio;
    return r;
}

PositivityReport entropy_positivity_report(const std::vector<double>& s_grid) {
    PositivityReport rep;
    std::vector<double> grid = s_grid;
    std::sort(grid.begin(), grid.end());
    for (double s : grid) {
        const auto D =
            relative_entropy(pauli_gibbs({0.0, 1.0, 0.0}, s), pauli_gibbs({1.0, 0.0, 0.0}, s), 0.0);
        rep.rows.push_back({s, D.value});
        if (!(D.value >= 0.0)) rep.all_nonnegative = false;
        if ((D.value == 0.0) != (s == 0.0)) rep.unique_zero_at_origin = false;
    }
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i - 1].s > 0.0 && !(rep.rows[i].D > rep.rows[i - 1].D))
            rep.strictly_increasing = false;
    return rep;
}

}  // namespace kmsorder
