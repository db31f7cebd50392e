// spectral.hpp: Stationary field correlations obeying KMS detailed balance
//
// A SpectralModel stores the odd spectral function Δ̃(ω) (only ω ≥ 0 is ever
// evaluated; negative frequencies are reflected) together with β. The
// Wightman spectrum is then *defined* as
//
//     W̃(ω) = Δ̃(ω) / (1 − e^{−βω}),
//
// so W̃(−ω) = e^{−βω} W̃(ω) holds by construction. Time-domain correlators are
// Fourier integrals with the convention f(t) = ∫ dω/2π f̃(ω) e^{−iωt}.
//
// Discrete-mode models describe a field φ(t) = Σ_k g_k (a_k e^{−iω_k t} + h.c.)
// in a thermal state. Their spectra are sums of lines; the frequency-domain
// accessors then return line masses and the time-domain ones closed-form sums.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kmsorder {

using cplx = std::complex<double>;

enum class ModelTag { accelerated_massless_3p1, flat_ohmic, discrete_modes, custom };

std::string to_string(ModelTag tag);
ModelTag model_tag_from_string(const std::string& name);

struct Mode {
    double frequency;  // ω_k > 0
    double coupling;   // g_k; the spectral weight of the line is g_k²
};

struct DiscreteModeSet {
    std::vector<Mode> modes;
    double beta = 1.0;

    // Throws InvalidInput on non-positive/duplicate frequencies or non-finite weights.
    void validate() const;
};

// Bose occupation 1/(e^{βω} − 1); zero in the β → ∞ limit.
double bose_occupation(double beta, double omega);

class SpectralModel {
public:
    // Δ̃(ω) = (ω/2π) e^{−ω²/Λ²}, β = 2π/a.
    static SpectralModel accelerated_massless(double acceleration, double lambda_uv);
    // Δ̃(ω) = (ω/2π) e^{−ω²/Λ²} at a given β.
    static SpectralModel flat_ohmic(double beta, double lambda_uv);
    static SpectralModel discrete(DiscreteModeSet modes);
    // delta_positive is sampled on ω ≥ 0 only and must vanish at ω = 0.
    // `extent` bounds the frequencies that matter; `features` are frequencies
    // where quadrature should place panel edges (narrow lines, kinks).
    static SpectralModel custom(double beta, std::function<double(double)> delta_positive,
                                double extent, std::vector<double> features = {});

    ModelTag tag() const { return tag_; }
    double beta() const { return beta_; }
    double uv_cutoff() const { return lambda_uv_; }
    bool is_discrete() const { return tag_ == ModelTag::discrete_modes; }
    const DiscreteModeSet& modes() const;

    // Δ̃(ω) for continuum models, odd by reflection. Zero for discrete models
    // away from the lines (use line_index / wightman_spectrum there).
    double spectral_density(double omega) const;
    // dΔ̃/dω at 0, used for the removable ω = 0 limits.
    double spectral_slope_at_zero() const { return slope0_; }
    double frequency_extent() const { return extent_; }
    const std::vector<double>& features() const { return features_; }

    // Index of the discrete line at |ω|, or -1.
    int line_index(double omega) const;

    SpectralModel with_beta(double beta) const;

    // Test hook: scales W̃(ω < 0) by (1 + defect), breaking detailed balance.
    SpectralModel with_detailed_balance_defect(double defect) const;
    double detailed_balance_defect() const { return defect_; }

private:
    SpectralModel() = default;

    ModelTag tag_ = ModelTag::custom;
    double beta_ = 1.0;
    double lambda_uv_ = 0.0;
    double extent_ = 0.0;
    double slope0_ = 0.0;
    double defect_ = 0.0;
    std::function<double(double)> delta_;
    std::vector<double> features_;
    std::shared_ptr<const DiscreteModeSet> modes_;
};

// β = 2π/a. Throws InvalidInput for a ≤ 0.
double unruh_beta(double acceleration);

// W̃(ω) ≥ 0. ω = 0 takes the continuous limit Δ̃′(0)/β. For discrete models
// the value is the mass of the line at ω (2π g² (n+1) or 2π g² n), else 0.
double wightman_spectrum(const SpectralModel& model, double omega);

// G̃¹(ω) = W̃(ω) + W̃(−ω).
double hadamard_spectrum(const SpectralModel& model, double omega);
// G̃¹(ω) = coth(βω/2) Δ̃(ω), with the limit 2Δ̃′(0)/β at ω = 0.
double hadamard_spectrum_coth(const SpectralModel& model, double omega);

struct Tolerance {
    double abs = 1e-13;
    double rel = 1e-10;
};

template <class T>
struct Estimate {
    T value{};
    double error = 0.0;
};

// G¹(Δτ) = W(Δτ) + W(−Δτ), real and even.
Estimate<double> hadamard_time(const SpectralModel& model, double dt, const Tolerance& tol = {});
// W(Δτ) = ⟨φ(Δτ) φ(0)⟩ from the full-line integral of W̃.
Estimate<cplx> wightman_time(const SpectralModel& model, double dt, const Tolerance& tol = {});
// Q(Δτ) with W(Δτ) − W(−Δτ) = −i Q(Δτ); state independent, odd in Δτ.
Estimate<double> commutator_time(const SpectralModel& model, double dt, const Tolerance& tol = {});
// W(−Δτ − iβ), evaluated by continuing the Fourier integrand (e^{−βω} factor)
// rather than by invoking detailed balance.
Estimate<cplx> wightman_continued(const SpectralModel& model, double dt, const Tolerance& tol = {});

struct KmsPoint {
    double time;
    cplx direct;     // W(t)
    cplx continued;  // W(−t − iβ)
    double deviation;
    double quadrature_error;
};

struct KmsTimeReport {
    std::vector<KmsPoint> points;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

KmsTimeReport kms_time_domain_check(const SpectralModel& model, std::span<const double> times,
                                    double tolerance, const Tolerance& quad_tol = {});

struct DetailedBalancePoint {
    double omega;
    double ratio;     // W̃(−ω)/W̃(ω)
    double expected;  // e^{−βω}
    double relative_error;
};

struct DetailedBalanceReport {
    std::vector<DetailedBalancePoint> points;
    double max_relative_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// For discrete models the grid is ignored and every line is checked.
DetailedBalanceReport detailed_balance_check(const SpectralModel& model,
                                             std::span<const double> omegas, double tolerance);

struct DiscreteFit {
    DiscreteModeSet modes;
    double reconstruction_error = 0.0;  // max |ΔG¹| over |Δτ| ≤ β
    double tolerance = 0.0;
    bool tolerance_met = false;
};

// Gauss quadrature nodes for the measure G̃¹(ω) dω/2π on (0, ω_max], with
// g_k² = w_k tanh(βω_k/2) so that Σ g_k² f(ω_k) ≈ ∫₀^∞ dω/2π Δ̃(ω) f(ω).
DiscreteFit fit_discrete_modes(const SpectralModel& model, std::size_t mode_count,
                               double omega_max, double tolerance = 1e-3);

}  // namespace kmsorder
