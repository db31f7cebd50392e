// perturbative.hpp: Second-order ordering asymmetry of a two-leg protocol
//
// With U_j ≈ 1 − iA_j − ½B_j and A_j = λ ∫χ_j μ_j ⊗ φ, tracing out the field
// gives, for arbitrary Hermitian μ₁, μ₂,
//
//     Δρ / λ² = c·P + q·R,   P = ½[[μ₁, μ₂], ρ],   R = (i/2)[{μ₁, μ₂}, ρ],
//
// where c = ∫∫ χ₁(τ)χ₂(τ′) G¹(τ − τ′) and q = −∫∫ χ₁(τ)χ₂(τ′) Q(τ − τ′).
// For μ = (σx, σy) the second term drops out and P = i[σz, ρ].
//
// Double integrals over the two supports are reduced to one lag integral,
// ∫∫ χ_a(τ)χ_b(τ′) F(τ − τ′) = ∫ du F(u) X_ab(u), with X_ab the switching
// cross-correlation; the nested quadrature then runs over u and the kernel.

#pragma once

#include <optional>
#include <string>

#include "kmsorder/algebra.hpp"
#include "kmsorder/spectral.hpp"
#include "kmsorder/switching.hpp"

namespace kmsorder {

enum class AsymmetryMethod { dyson, time_domain, frequency_domain };
std::string to_string(AsymmetryMethod m);

enum class Ordering { first_then_second, second_then_first };

struct AsymmetryResult {
    double c = 0.0;
    double c_imag = 0.0;  // imaginary residue of c before it was discarded
    double q = 0.0;       // zero when {μ₁, μ₂} ∝ I, where it cannot contribute
    ComplexMatrix2 delta_rho;
    AsymmetryMethod method = AsymmetryMethod::time_domain;
    double quadrature_error = 0.0;  // error estimate on c
};

// Default budget for c: abs 1e-12, rel 1e-10.
inline constexpr Tolerance kAsymmetryTolerance{1e-12, 1e-10};

// c from G¹(Δτ) by nested quadrature over the switching supports.
AsymmetryResult delta_rho_commutator_time(const Protocol& protocol, const SpectralModel& model,
                                          const DensityMatrix& rho,
                                          const Tolerance& tol = kAsymmetryTolerance);

// c = ∫ dω/2π G̃¹(ω) χ̃₁(−ω) χ̃₂(ω) over the full line (the imaginary part is
// kept as c_imag). Discrete models reduce to a sum over lines.
AsymmetryResult delta_rho_frequency(const Protocol& protocol, const SpectralModel& model,
                                    const DensityMatrix& rho,
                                    const Tolerance& tol = kAsymmetryTolerance);

// Difference of the two second-order states built from W(Δτ) alone; c and q
// are then read back off Δρ by projection onto P and R.
AsymmetryResult delta_rho_dyson(const Protocol& protocol, const SpectralModel& model,
                                const DensityMatrix& rho,
                                const Tolerance& tol = kAsymmetryTolerance);

// I_ab = ∫∫ χ_a(τ)χ_b(τ′) W(τ − τ′) and the time-ordered self-energies
// S_j = ∫∫_{τ > τ′} χ_j(τ)χ_j(τ′) W(τ − τ′).
struct WightmanIntegrals {
    cplx I12, I21, S1, S2;
    double error = 0.0;
};

WightmanIntegrals wightman_integrals(const Protocol& protocol, const SpectralModel& model,
                                     const Tolerance& tol = kAsymmetryTolerance);

// The λ² coefficient K of the second-order state ρ + λ²K.
ComplexMatrix2 second_order_correction(const Protocol& protocol, const DensityMatrix& rho,
                                       const WightmanIntegrals& w, Ordering order);

struct SecondOrderState {
    ComplexMatrix2 matrix;
    double min_eigenvalue = 0.0;
    bool positive = true;  // min eigenvalue ≥ −1e-12
    double quadrature_error = 0.0;

    // The validated state, or nullopt when the truncated expansion left the
    // positive cone.
    std::optional<DensityMatrix> state() const;
};

SecondOrderState second_order_state(const Protocol& protocol, const SpectralModel& model,
                                    const DensityMatrix& rho, Ordering order,
                                    const Tolerance& tol = kAsymmetryTolerance);

// λ²(c·P + q·R) for the protocol's observables.
ComplexMatrix2 asymmetry_matrix(const Protocol& protocol, const DensityMatrix& rho, double c,
                                double q);

}  // namespace kmsorder
