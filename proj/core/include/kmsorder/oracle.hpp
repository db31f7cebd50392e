// oracle.hpp: Exact evolution of a detector coupled to a truncated bosonic field
//
// H(τ) = λ χ(τ) μ ⊗ φ(τ),  φ(τ) = Σ_k g_k (a_k e^{−iω_k τ} + a_k† e^{iω_k τ}),
// each mode truncated at n_max quanta and prepared in its (renormalized)
// thermal state. During one leg μ is fixed, so the leg propagator splits over
// the eigenprojectors of μ and over modes:
//
//     U_leg = Σ_m P_m ⊗ V_{m,1} ⊗ … ⊗ V_{m,K},
//
// with each V_{m,k} a single-mode propagator integrated by RK4. The reduced
// detector state then needs only per-mode traces. evolve_protocol_joint builds
// the same propagators on the full joint space instead and is kept as a
// reference for small truncations.

#pragma once

#include <string>
#include <vector>

#include "kmsorder/algebra.hpp"
#include "kmsorder/perturbative.hpp"
#include "kmsorder/spectral.hpp"
#include "kmsorder/switching.hpp"

namespace kmsorder {

class TruncatedField {
public:
    // Throws InvalidInput for invalid modes or n_max < 1.
    TruncatedField(DiscreteModeSet modes, int n_max);

    const DiscreteModeSet& modes() const { return modes_; }
    int n_max() const { return n_max_; }
    // 2·(n_max+1)^K
    double dimension() const;
    // p_n ∝ e^{−βω_k n}, n = 0..n_max, summing to one.
    std::vector<double> thermal_weights(std::size_t mode) const;

    TruncatedField with_n_max(int n_max) const { return {modes_, n_max}; }

private:
    DiscreteModeSet modes_;
    int n_max_;
};

struct EvolutionSpec {
    double step = 1e-3;
    int order = 4;
    std::vector<double> lambdas;
    bool check_step = true;          // rerun at step/2 and compare
    double step_tolerance = 1e-11;   // max entrywise change of the reduced state
    double leakage_threshold = 1e-6;
    double drift_tolerance = 1e-9;

    // n points geometric between lo and hi inclusive.
    static std::vector<double> geometric_grid(double lo, double hi, std::size_t n);
    // Throws InvalidInput on a non-positive step, an unsupported order or a
    // λ grid that is not strictly positive and geometric.
    void validate() const;
};

struct OracleState {
    ComplexMatrix2 matrix;
    double unitarity_drift = 0.0;  // max |V†V − I| over all propagators
    double leakage = 0.0;          // max top-level population over modes and branches
    double step_change = 0.0;      // change under step halving (0 if not checked)
};

// Reduced detector state after both legs in the given order. Throws
// LeakageError, or ConvergenceError when step halving moves the result by more
// than step_tolerance or the unitarity drift exceeds drift_tolerance.
OracleState evolve_protocol(const TruncatedField& field, const Protocol& protocol,
                            const DensityMatrix& rho, Ordering order, const EvolutionSpec& spec);

// Dense reference on the 2·(n_max+1)^K joint space. No step halving.
OracleState evolve_protocol_joint(const TruncatedField& field, const Protocol& protocol,
                                  const DensityMatrix& rho, Ordering order,
                                  const EvolutionSpec& spec);

struct ExactAsymmetry {
    ComplexMatrix2 delta_rho;  // ρ(first→second) − ρ(second→first)
    double unitarity_drift = 0.0;
    double leakage = 0.0;
    double step_change = 0.0;
};

ExactAsymmetry ordering_asymmetry_exact(const TruncatedField& field, const Protocol& protocol,
                                        const DensityMatrix& rho, const EvolutionSpec& spec);

struct ScalingPoint {
    double lambda = 0.0;
    double exact_norm = 0.0;  // ‖Δρ_exact‖₁
    double pert_norm = 0.0;   // ‖Δρ_pert‖₁
    double diff_norm = 0.0;   // ‖Δρ_exact − Δρ_pert‖₁
    double leakage = 0.0;
    double unitarity_drift = 0.0;
    bool ok = false;
    std::string error;  // set when the evolution at this λ failed
};

// One λ of the scaling study; errors are caught and recorded in the point.
ScalingPoint scaling_point(const TruncatedField& field, const Protocol& protocol,
                           const DensityMatrix& rho, const EvolutionSpec& spec, double lambda);

struct ScalingFit {
    std::vector<ScalingPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double decades = 0.0;  // log10(λ_max/λ_min) over the fitted points
    std::vector<std::string> warnings;
};

inline constexpr double kMinScalingSlope = 2.8;
inline constexpr double kMinScalingR2 = 0.99;

// Least-squares line through (log λ, log ‖Δρ_exact − Δρ_pert‖₁) over the
// points that succeeded. Throws InvalidInput("insufficient points") below three.
ScalingFit fit_scaling(std::vector<ScalingPoint> points);

ScalingFit scaling_fit(const TruncatedField& field, const Protocol& protocol,
                       const DensityMatrix& rho, const EvolutionSpec& spec);

// Σ|λ_i| of the Hermitian part.
double trace_norm_of(const ComplexMatrix2& m);

}  // namespace kmsorder
