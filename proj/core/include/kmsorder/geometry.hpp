// geometry.hpp: Relative entropy and information metrics on the rotation family
//
// ρ(θ) = pauli_gibbs((cos θ, sin θ, 0), s). Metric conventions:
//   g_BKM   from D(ρ_θ‖ρ_0) ≈ ½ g θ²
//   g_Bures = lim 4 d_B²/θ²,  d_B² = 2(1 − √F)
// With these, g_BKM = s tanh s and g_Bures = tanh² s.

#pragma once

#include <vector>

#include "kmsorder/algebra.hpp"

namespace kmsorder {

struct RelativeEntropy {
    double value = 0.0;
    bool infinite = false;  // supp ρ ⊄ supp σ

    bool finite() const { return !infinite; }
};

// Tr ρ(log ρ − log σ) in the eigenbases of ρ and σ. Eigenvalues at or below
// `floor` count as zero. Results in [−1e-12, 0) are clamped to 0; anything
// more negative throws ConsistencyError.
RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                                 double floor = kEigenvalueFloor);

DensityMatrix rotation_state(double s, double theta);

// s·tanh s·(1 − cos θ)
double relative_entropy_family_closed(double s, double theta);

struct FamilyEntropy {
    double value;        // generic evaluation of D(ρ_θ‖ρ_0)
    double closed_form;
    double residual;
};

// Throws ConsistencyError if the generic and closed forms differ by more than
// 1e-10·max(1, D).
FamilyEntropy relative_entropy_family(double s, double theta);

struct MetricEstimate {
    double value;     // closed form
    double numeric;   // Richardson-refined finite difference
    double residual;  // relative (absolute when the closed form is 0)
};

inline constexpr double kMetricStep = 1e-3;
inline constexpr double kMetricTolerance = 1e-5;

// Both throw ConsistencyError when the residual exceeds kMetricTolerance.
MetricEstimate bkm_metric(double s);
MetricEstimate bures_metric(double s);

// F = ½(1 + r·r′ + √((1 − |r|²)(1 − |r′|²))) for qubit Bloch vectors.
double qubit_fidelity(const DensityMatrix& a, const DensityMatrix& b);

// s / tanh s, with the limit 1 at s = 0.
double metric_ratio(double s);

// K = −log ρ.
ComplexMatrix2 modular_generator(const DensityMatrix& rho);

struct GeometryReport {
    double s = 0.0;
    double relative_entropy = 0.0;  // generic D(ρ_y‖ρ_x)
    double g_bkm = 0.0;
    double g_bures = 0.0;
    double ratio = 0.0;
    double g_bkm_numeric = 0.0;
    double g_bures_numeric = 0.0;
    double residual_entropy = 0.0;  // |D − s tanh s|
    double residual_bkm = 0.0;
    double residual_bures = 0.0;
    double residual_ratio = 0.0;    // against the numeric metrics; 0 at s = 0
};

// Does not throw on residual breaches; the caller compares residuals. The
// family states have exact spectra, so relative entropies here use no floor.
GeometryReport geometry_report(double s);

struct PositivityRow {
    double s;
    double D;
};

struct PositivityReport {
    std::vector<PositivityRow> rows;
    bool all_nonnegative = true;
    bool unique_zero_at_origin = true;  // D = 0 exactly where s = 0
    bool strictly_increasing = true;    // on the s > 0 part of a sorted grid
};

PositivityReport entropy_positivity_report(const std::vector<double>& s_grid);

}  // namespace kmsorder
