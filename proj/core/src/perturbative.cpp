#include "kmsorder/perturbative.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kmsorder/error.hpp"
#include "kmsorder/quadrature.hpp"

namespace kmsorder {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frequency_scale(const SpectralModel& model) {
    if (!model.is_discrete()) return model.uv_cutoff() > 0.0 ? model.uv_cutoff() : model.frequency_extent();
    double w = 0.0;
    for (const auto& m : model.modes().modes) w = std::max(w, m.frequency);
    return w;
}

// ∫ du F(u) X_ab(u) over [lo, hi]. The outer quadrature gets a third of the
// budget; the kernel evaluations share the other two thirds, scaled by ∫|X|.
template <class Kernel>
auto lag_integral(const SwitchingFunction& a, const SwitchingFunction& b, double lo, double hi,
                  std::vector<double> breakpoints, double scale, Kernel&& kernel,
                  const Tolerance& tol) {
    using T = decltype(kernel(0.0, Tolerance{}).value);
    Estimate<T> out;
    const double mass = a.integral() * b.integral();
    if (mass == 0.0 || !(hi > lo)) return out;

    const Tolerance inner{2.0 * tol.abs / (3.0 * mass), 2.0 * tol.rel / 3.0};
    double inner_err = 0.0;
    auto f = [&](double u) {
        const double x = cross_correlation(a, b, u);
        if (x == 0.0) return T{};
        const auto k = kernel(u, inner);
        inner_err = std::max(inner_err, k.error);
        return k.value * x;
    };
    quad::Options opt;
    opt.abs_tol = tol.abs / 3.0;
    opt.rel_tol = tol.rel / 3.0;
    opt.breakpoints = std::move(breakpoints);
    opt.initial_panels = static_cast<std::size_t>(
        std::clamp(std::ceil((hi - lo) * scale / std::numbers::pi), 2.0, 200.0));
    opt.max_panels = 4000;
    const auto r = quad::integrate(f, lo, hi, opt);
    out.value = r.value;
    out.error = r.error + inner_err * mass;
    return out;
}

template <class Kernel>
auto cross_integral(const SwitchingFunction& a, const SwitchingFunction& b, double scale,
                    Kernel&& kernel, const Tolerance& tol) {
    const double d = a.center() - b.center();
    const double reach = a.half_width() + b.half_width();
    const double inner = std::abs(a.half_width() - b.half_width());
    return lag_integral(a, b, d - reach, d + reach, {d - inner, d, d + inner}, scale,
                        std::forward<Kernel>(kernel), tol);
}

struct Basis {
    ComplexMatrix2 P, R;
    bool q_relevant;
};

Basis asymmetry_basis(const Protocol& p, const DensityMatrix& rho) {
    const auto& m1 = p.leg_first().observable.matrix();
    const auto& m2 = p.leg_second().observable.matrix();
    const auto anti = anticommutator(m1, m2);
    const auto traceless = anti - ComplexMatrix2::identity() * (0.5 * anti.trace());
    const double scale = std::max(1.0, m1.max_abs() * m2.max_abs());
    Basis b;
    b.P = commutator(commutator(m1, m2), rho.matrix()) * 0.5;
    b.R = commutator(anti, rho.matrix()) * (0.5 * kI);
    b.q_relevant = traceless.max_abs() > 1e-14 * scale;
    return b;
}

cplx inner(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    cplx s = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) s += std::conj(a(r, c)) * b(r, c);
    return s;
}

}  // namespace

std::string to_string(AsymmetryMethod m) {
    switch (m) {
        case AsymmetryMethod::dyson: return "dyson";
        case AsymmetryMethod::time_domain: return "time_domain";
        case AsymmetryMethod::frequency_domain: return "frequency_domain";
    }
    return "dyson";
}

ComplexMatrix2 asymmetry_matrix(const Protocol& protocol, const DensityMatrix& rho, double c,
                                double q) {
    const auto b = asymmetry_basis(protocol, rho);
    const double l2 = protocol.lambda() * protocol.lambda();
    return (b.P * c + b.R * q) * l2;
}

AsymmetryResult delta_rho_commutator_time(const Protocol& protocol, const SpectralModel& model,
                                          const DensityMatrix& rho, const Tolerance& tol) {
    const auto& chi1 = protocol.leg_first().switching;
    const auto& chi2 = protocol.leg_second().switching;
    const double scale = frequency_scale(model);
    const auto basis = asymmetry_basis(protocol, rho);

    AsymmetryResult res;
    res.method = AsymmetryMethod::time_domain;
    const auto c = cross_integral(
        chi1, chi2, scale,
        [&](double u, const Tolerance& t) { return hadamard_time(model, u, t); }, tol);
    res.c = c.value;
    res.quadrature_error = c.error;
    if (basis.q_relevant) {
        const auto q = cross_integral(
            chi1, chi2, scale,
            [&](double u, const Tolerance& t) { return commutator_time(model, u, t); }, tol);
        res.q = -q.value;
    }
    res.delta_rho = asymmetry_matrix(protocol, rho, res.c, res.q);
    return res;
}

AsymmetryResult delta_rho_frequency(const Protocol& protocol, const SpectralModel& model,
                                    const DensityMatrix& rho, const Tolerance& tol) {
    const auto& chi1 = protocol.leg_first().switching;
    const auto& chi2 = protocol.leg_second().switching;
    const auto basis = asymmetry_basis(protocol, rho);

    AsymmetryResult res;
    res.method = AsymmetryMethod::frequency_domain;

    if (model.is_discrete()) {
        cplx c = 0.0;
        double q = 0.0;
        for (const auto& m : model.modes().modes) {
            for (double w : {m.frequency, -m.frequency}) {
                const cplx prod = chi1.fourier(-w) * chi2.fourier(w);
                c += hadamard_spectrum(model, w) / kTwoPi * prod;
            }
            const double w = m.frequency;
            const double spectral = wightman_spectrum(model, w) - wightman_spectrum(model, -w);
            q += spectral / std::numbers::pi * std::imag(std::conj(chi1.fourier(w)) * chi2.fourier(w));
        }
        res.c = c.real();
        res.c_imag = c.imag();
        res.q = basis.q_relevant ? q : 0.0;
        res.delta_rho = asymmetry_matrix(protocol, rho, res.c, res.q);
        return res;
    }

    const double L = model.frequency_extent();
    const double span = std::abs(chi1.center() - chi2.center()) + chi1.half_width() + chi2.half_width();
    const double width = std::min(frequency_scale(model), kTwoPi / span);
    quad::Options opt;
    opt.abs_tol = tol.abs;
    opt.rel_tol = tol.rel;
    opt.initial_panels = static_cast<std::size_t>(std::clamp(std::ceil(L / width), 1.0, 2000.0));
    opt.max_panels = 40000;
    opt.breakpoints = {0.0};
    for (double f : model.features()) {
        opt.breakpoints.push_back(f);
        opt.breakpoints.push_back(-f);
    }

    auto fc = [&](double w) {
        return hadamard_spectrum(model, w) / kTwoPi * (chi1.fourier(-w) * chi2.fourier(w));
    };
    const auto c = quad::integrate(fc, -L, L, opt);
    res.c = c.value.real();
    res.c_imag = c.value.imag();
    res.quadrature_error = c.error;

    if (basis.q_relevant) {
        auto fq = [&](double w) {
            return model.spectral_density(w) / std::numbers::pi *
                   std::imag(std::conj(chi1.fourier(w)) * chi2.fourier(w));
        };
        const auto q = quad::integrate(fq, 0.0, L, opt);
        res.q = q.value;
    }
    res.delta_rho = asymmetry_matrix(protocol, rho, res.c, res.q);
    return res;
}

WightmanIntegrals wightman_integrals(const Protocol& protocol, const SpectralModel& model,
                                     const Tolerance& tol) {
    const auto& chi1 = protocol.leg_first().switching;
    const auto& chi2 = protocol.leg_second().switching;
    const double scale = frequency_scale(model);
    auto W = [&](double u, const Tolerance& t) { return wightman_time(model, u, t); };

    WightmanIntegrals out;
    const auto i12 = cross_integral(chi1, chi2, scale, W, tol);
    const auto i21 = cross_integral(chi2, chi1, scale, W, tol);
    auto self = [&](const SwitchingFunction& chi) {
        const double w = chi.half_width();
        return lag_integral(chi, chi, 0.0, 2.0 * w, {w}, scale, W, tol);
    };
    const auto s1 = self(chi1);
    const auto s2 = self(chi2);
    out.I12 = i12.value;
    out.I21 = i21.value;
    out.S1 = s1.value;
    out.S2 = s2.value;
    out.error = i12.error + i21.error + s1.error + s2.error;
    return out;
}

ComplexMatrix2 second_order_correction(const Protocol& protocol, const DensityMatrix& rho,
                                       const WightmanIntegrals& w, Ordering order) {
    const auto& r = rho.matrix();
    const std::array<ComplexMatrix2, 2> mu{protocol.leg_first().observable.matrix(),
                                           protocol.leg_second().observable.matrix()};
    const std::array<cplx, 2> S{w.S1, w.S2};
    // I[i][j] = ∫∫ χ_i(τ)χ_j(τ′) W(τ − τ′); the diagonal equals 2 Re S_i, which
    // is what makes the trace cancel exactly.
    const cplx I[2][2] = {{2.0 * S[0].real(), w.I12}, {w.I21, 2.0 * S[1].real()}};
    const int a = order == Ordering::first_then_second ? 0 : 1;
    const int b = 1 - a;

    ComplexMatrix2 K;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) K += mu[i] * r * mu[j] * I[j][i];
    for (int i = 0; i < 2; ++i) {
        const auto m2 = mu[i] * mu[i];
        K -= m2 * r * S[i] + r * m2 * std::conj(S[i]);
    }
    K -= mu[b] * mu[a] * r * I[b][a] + r * mu[a] * mu[b] * I[a][b];
    return K;
}

std::optional<DensityMatrix> SecondOrderState::state() const {
    if (!positive) return std::nullopt;
    const auto herm = (matrix + matrix.adjoint()) * 0.5;
    try {
        return DensityMatrix(herm);
    } catch (const InvalidInput&) {
        return std::nullopt;
    }
}

SecondOrderState second_order_state(const Protocol& protocol, const SpectralModel& model,
                                    const DensityMatrix& rho, Ordering order,
                                    const Tolerance& tol) {
    SecondOrderState out;
    const double l2 = protocol.lambda() * protocol.lambda();
    if (l2 == 0.0) {
        out.matrix = rho.matrix();
        out.min_eigenvalue = rho.spectrum().values[0];
        return out;
    }
    const auto w = wightman_integrals(protocol, model, tol);
    out.matrix = rho.matrix() + second_order_correction(protocol, rho, w, order) * l2;
    out.quadrature_error = w.error * l2;
    const auto herm = (out.matrix + out.matrix.adjoint()) * 0.5;
    out.min_eigenvalue = hermitian_eigen(herm).values[0];
    out.positive = out.min_eigenvalue >= -1e-12;
    return out;
}

AsymmetryResult delta_rho_dyson(const Protocol& protocol, const SpectralModel& model,
                                const DensityMatrix& rho, const Tolerance& tol) {
    AsymmetryResult res;
    res.method = AsymmetryMethod::dyson;
    const auto w = wightman_integrals(protocol, model, tol);
    const auto diff = second_order_correction(protocol, rho, w, Ordering::first_then_second) -
                      second_order_correction(protocol, rho, w, Ordering::second_then_first);
    const double l2 = protocol.lambda() * protocol.lambda();
    res.delta_rho = diff * l2;
    res.quadrature_error = w.error;

    // Read c (and q) back off the λ² coefficient by least squares on span{P, R}.
    const auto basis = asymmetry_basis(protocol, rho);
    const double floor = 1e-13 * std::max(1.0, rho.matrix().max_abs() *
                                                   protocol.leg_first().observable.matrix().max_abs() *
                                                   protocol.leg_second().observable.matrix().max_abs());
    const bool p_ok = basis.P.max_abs() > floor;
    const bool r_ok = basis.q_relevant && basis.R.max_abs() > floor;
    cplx c = w.I12 + w.I21;
    cplx q = -kI * (w.I12 - w.I21);
    if (p_ok && r_ok) {
        const cplx g11 = inner(basis.P, basis.P), g12 = inner(basis.P, basis.R);
        const cplx g21 = inner(basis.R, basis.P), g22 = inner(basis.R, basis.R);
        const cplx b1 = inner(basis.P, diff), b2 = inner(basis.R, diff);
        const cplx det = g11 * g22 - g12 * g21;
        if (std::abs(det) > 1e-12 * std::abs(g11 * g22)) {
            c = (b1 * g22 - g12 * b2) / det;
            q = (g11 * b2 - g21 * b1) / det;
        } else {
            c = b1 / g11;
        }
    } else if (p_ok) {
        c = inner(basis.P, diff) / inner(basis.P, basis.P);
    } else if (r_ok) {
        q = inner(basis.R, diff) / inner(basis.R, basis.R);
    }
    res.c = c.real();
    res.c_imag = c.imag();
    res.q = basis.q_relevant ? q.real() : 0.0;
    return res;
}

}  // namespace kmsorder
