#include "kmsorder/switching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/sinc.hpp>

#include "kmsorder/error.hpp"
#include "kmsorder/quadrature.hpp"

namespace kmsorder {

namespace {

using std::numbers::pi;

double smooth_profile(double u) {
    const double q = 1.0 - u * u;
    if (q <= 0.0) return 0.0;
    return std::exp(1.0 - 1.0 / q);
}

// sinc(x) + ½[sinc(x + π) + sinc(x − π)] = π² sin x / (x (π² − x²))
double cosine_bump_kernel(double x) {
    using boost::math::sinc_pi;
    if (std::abs(std::abs(x) - pi) < 1e-2)
        return sinc_pi(x) + 0.5 * (sinc_pi(x + pi) + sinc_pi(x - pi));
    return sinc_pi(x) * pi * pi / (pi * pi - x * x);
}

quad::Options tight(std::size_t panels = 1) {
    quad::Options o;
    o.abs_tol = 1e-16;
    o.rel_tol = 1e-13;
    o.initial_panels = panels;
    o.max_panels = 2000;
    return o;
}

}  // namespace

std::string to_string(SwitchingShape shape) {
    return shape == SwitchingShape::cosine_bump ? "cosine_bump" : "smooth_bump";
}

SwitchingShape switching_shape_from_string(const std::string& name) {
    if (name == "cosine_bump") return SwitchingShape::cosine_bump;
    if (name == "smooth_bump") return SwitchingShape::smooth_bump;
    throw InvalidInput("unknown switching shape '" + name + "'");
}

SwitchingFunction::SwitchingFunction(SwitchingShape shape, double center, double half_width,
                                     double amplitude)
    : shape_(shape), center_(center), half_width_(half_width), amplitude_(amplitude) {
    if (!std::isfinite(center)) throw InvalidInput("switching: center must be finite");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw InvalidInput("switching: half_width must be positive");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw InvalidInput("switching: amplitude must be non-negative");
}

double SwitchingFunction::operator()(double tau) const {
    const double u = (tau - center_) / half_width_;
    if (!(std::abs(u) < 1.0)) return 0.0;
    if (shape_ == SwitchingShape::cosine_bump) {
        const double c = std::cos(0.5 * pi * u);
        return amplitude_ * c * c;
    }
    return amplitude_ * smooth_profile(u);
}

double SwitchingFunction::integral() const {
    if (shape_ == SwitchingShape::cosine_bump) return amplitude_ * half_width_;
    auto f = [](double u) { return smooth_profile(u); };
    return amplitude_ * half_width_ * 2.0 * quad::integrate(f, 0.0, 1.0, tight()).value;
}

std::complex<double> SwitchingFunction::fourier(double omega) const {
    const std::complex<double> phase = std::polar(1.0, omega * center_);
    const double x = omega * half_width_;
    if (shape_ == SwitchingShape::cosine_bump)
        return phase * (amplitude_ * half_width_ * cosine_bump_kernel(x));
    auto f = [x](double u) { return smooth_profile(u) * std::cos(x * u); };
    const auto panels = static_cast<std::size_t>(std::ceil(std::abs(x) / pi)) + 1;
    const auto r = quad::integrate(f, 0.0, 1.0, tight(std::min<std::size_t>(panels, 500)));
    return phase * (2.0 * amplitude_ * half_width_ * r.value);
}

SupportGap supports_disjoint(const SwitchingFunction& a, const SwitchingFunction& b) {
    const double gap = std::abs(a.center() - b.center()) - a.half_width() - b.half_width();
    return {gap > 0.0, gap};
}

double cross_correlation(const SwitchingFunction& a, const SwitchingFunction& b, double u) {
    const double lo = std::max(a.support_begin() - u, b.support_begin());
    const double hi = std::min(a.support_end() - u, b.support_end());
    if (!(hi > lo)) return 0.0;
    auto f = [&](double tau) { return a(tau + u) * b(tau); };
    return quad::integrate(f, lo, hi, tight()).value;
}

Protocol::Protocol(Leg first, Leg second, double lambda)
    : first_(std::move(first)), second_(std::move(second)), lambda_(lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidInput("protocol: lambda must be non-negative and finite");
    const auto g = supports_disjoint(first_.switching, second_.switching);
    if (!g.disjoint)
        throw InvalidInput("protocol: switching supports overlap (gap " + std::to_string(g.gap) +
                           "); a strictly positive gap is required");
    gap_ = g.gap;
}

}  // namespace kmsorder
