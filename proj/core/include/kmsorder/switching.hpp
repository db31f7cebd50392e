// switching.hpp: Compactly supported switching profiles and two-leg protocols

#pragma once

#include <complex>
#include <string>

#include "kmsorder/algebra.hpp"

namespace kmsorder {

enum class SwitchingShape { cosine_bump, smooth_bump };

std::string to_string(SwitchingShape shape);
SwitchingShape switching_shape_from_string(const std::string& name);

class SwitchingFunction {
public:
    // Throws InvalidInput unless half_width > 0 and amplitude ≥ 0 (all finite).
    SwitchingFunction(SwitchingShape shape, double center, double half_width, double amplitude = 1.0);

    static SwitchingFunction cosine_bump(double center, double half_width, double amplitude = 1.0) {
        return {SwitchingShape::cosine_bump, center, half_width, amplitude};
    }
    static SwitchingFunction smooth_bump(double center, double half_width, double amplitude = 1.0) {
        return {SwitchingShape::smooth_bump, center, half_width, amplitude};
    }

    SwitchingShape shape() const { return shape_; }
    double center() const { return center_; }
    double half_width() const { return half_width_; }
    double amplitude() const { return amplitude_; }
    double support_begin() const { return center_ - half_width_; }
    double support_end() const { return center_ + half_width_; }

    // χ(τ); exactly zero for |τ − t₀| ≥ w.
    double operator()(double tau) const;

    // ∫χ dτ. Closed form A·w for the cosine bump.
    double integral() const;

    // χ̃(ω) = ∫ χ(τ) e^{iωτ} dτ.
    std::complex<double> fourier(double omega) const;

    SwitchingFunction shifted(double dt) const {
        return {shape_, center_ + dt, half_width_, amplitude_};
    }

private:
    SwitchingShape shape_;
    double center_;
    double half_width_;
    double amplitude_;
};

inline double evaluate(const SwitchingFunction& chi, double tau) { return chi(tau); }
inline std::complex<double> fourier(const SwitchingFunction& chi, double omega) {
    return chi.fourier(omega);
}

struct SupportGap {
    bool disjoint;
    double gap;  // |t₀ᵃ − t₀ᵇ| − wᵃ − wᵇ, negative when the supports overlap
};

SupportGap supports_disjoint(const SwitchingFunction& a, const SwitchingFunction& b);

// X_ab(u) = ∫ χ_a(τ + u) χ_b(τ) dτ, the lag profile that every double
// integral ∫∫ χ_a(τ) χ_b(τ′) F(τ − τ′) reduces to. Support is
// |u − (t₀ᵃ − t₀ᵇ)| < wᵃ + wᵇ.
double cross_correlation(const SwitchingFunction& a, const SwitchingFunction& b, double u);

struct Leg {
    Observable observable;
    SwitchingFunction switching;
};

// Two legs whose unitaries act in the listed order (leg_first, then
// leg_second) and a global coupling λ.
class Protocol {
public:
    // Throws InvalidInput when the supports overlap or touch, or λ < 0.
    Protocol(Leg first, Leg second, double lambda);

    const Leg& leg_first() const { return first_; }
    const Leg& leg_second() const { return second_; }
    double lambda() const { return lambda_; }
    double gap() const { return gap_; }

    Protocol reversed() const { return {second_, first_, lambda_}; }
    Protocol with_lambda(double lambda) const { return {first_, second_, lambda}; }

private:
    Leg first_;
    Leg second_;
    double lambda_;
    double gap_;
};

}  // namespace kmsorder
