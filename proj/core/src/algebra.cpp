// algebra.cpp: 2×2 operator algebra, closed-form Hermitian eigensystems

#include "kmsorder/algebra.hpp"

#include <algorithm>
#include <cmath>

#include "kmsorder/error.hpp"

namespace kmsorder {

namespace {
constexpr cplx kI{0.0, 1.0};
}

ComplexMatrix2& ComplexMatrix2::operator+=(const ComplexMatrix2& o) {
    for (int i = 0; i < 4; ++i) e_[i] += o.e_[i];
    return *this;
}

ComplexMatrix2& ComplexMatrix2::operator-=(const ComplexMatrix2& o) {
    for (int i = 0; i < 4; ++i) e_[i] -= o.e_[i];
    return *this;
}

ComplexMatrix2& ComplexMatrix2::operator*=(cplx s) {
    for (auto& v : e_) v *= s;
    return *this;
}

ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
            a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
}

ComplexMatrix2 ComplexMatrix2::adjoint() const {
    return {std::conj(e_[0]), std::conj(e_[2]), std::conj(e_[1]), std::conj(e_[3])};
}

double ComplexMatrix2::max_abs() const {
    double m = 0.0;
    for (const auto& v : e_) m = std::max(m, std::abs(v));
    return m;
}

double ComplexMatrix2::hermiticity_defect() const {
    return max_abs_diff(*this, adjoint());
}

double max_abs_diff(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    return (a - b).max_abs();
}

PauliComponents pauli_components(const ComplexMatrix2& m) {
    return {0.5 * (m(0, 0) + m(1, 1)),
            {0.5 * (m(0, 1) + m(1, 0)), 0.5 * kI * (m(0, 1) - m(1, 0)),
             0.5 * (m(0, 0) - m(1, 1))}};
}

ComplexMatrix2 from_pauli_components(cplx c0, const std::array<cplx, 3>& c) {
    return {c0 + c[2], c[0] - kI * c[1], c[0] + kI * c[1], c0 - c[2]};
}

namespace pauli {
ComplexMatrix2 I() { return ComplexMatrix2::identity(); }
ComplexMatrix2 X() { return {0.0, 1.0, 1.0, 0.0}; }
ComplexMatrix2 Y() { return {0.0, -kI, kI, 0.0}; }
ComplexMatrix2 Z() { return {1.0, 0.0, 0.0, -1.0}; }
ComplexMatrix2 dot(const Vec3& n) {
    return from_pauli_components(0.0, {n[0], n[1], n[2]});
}
}  // namespace pauli

ComplexMatrix2 commutator(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    return a * b - b * a;
}

ComplexMatrix2 anticommutator(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    return a * b + b * a;
}

cplx Spectrum2::expectation(int i, const ComplexMatrix2& m) const {
    const auto& v = vectors[i];
    cplx acc = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) acc += std::conj(v[r]) * m(r, c) * v[c];
    return acc;
}

Spectrum2 hermitian_eigen(const ComplexMatrix2& m) {
    if (!m.is_hermitian())
        throw InvalidInput("hermitian_eigen: matrix is not Hermitian (defect " +
                           std::to_string(m.hermiticity_defect()) + ")");
    const auto pc = pauli_components(m);
    const double c0 = pc.c0.real();
    const Vec3 c{pc.c[0].real(), pc.c[1].real(), pc.c[2].real()};
    const double r = std::hypot(c[0], c[1], c[2]);

    Spectrum2 s;
    if (r == 0.0) {
        s.values = {c0, c0};
        s.vectors = {{{1.0, 0.0}, {0.0, 1.0}}};
        return s;
    }
    const Vec3 n{c[0] / r, c[1] / r, c[2] / r};
    // +1 eigenvector of n·σ, built from whichever pole keeps the norm away from zero
    std::array<cplx, 2> up;
    if (n[2] >= 0.0)
        up = {1.0 + n[2], cplx(n[0], n[1])};
    else
        up = {cplx(n[0], -n[1]), 1.0 - n[2]};
    const double norm = std::sqrt(std::norm(up[0]) + std::norm(up[1]));
    up[0] /= norm;
    up[1] /= norm;
    const std::array<cplx, 2> down{-std::conj(up[1]), std::conj(up[0])};

    s.values = {c0 - r, c0 + r};
    s.vectors = {down, up};
    return s;
}

ComplexMatrix2 matrix_exp(const ComplexMatrix2& hermitian) {
    return hermitian_eigen(hermitian).apply([](double x) { return std::exp(x); });
}

double trace_norm(const ComplexMatrix2& hermitian) {
    const auto s = hermitian_eigen(hermitian);
    return std::abs(s.values[0]) + std::abs(s.values[1]);
}

// ---------------------------------------------------------------- DensityMatrix

namespace {

void validate_state(const ComplexMatrix2& m, const Spectrum2& s) {
    if (!m.is_hermitian(kHermitianTol))
        throw InvalidInput("density matrix is not Hermitian (defect " +
                           std::to_string(m.hermiticity_defect()) + ")");
    if (std::abs(m.trace() - 1.0) > kTraceTol)
        throw InvalidInput("density matrix trace deviates from 1 by " +
                           std::to_string(std::abs(m.trace() - 1.0)));
    if (s.values[0] < -kHermitianTol)
        throw InvalidInput("density matrix has negative eigenvalue " +
                           std::to_string(s.values[0]));
}

}  // namespace

DensityMatrix::DensityMatrix(const ComplexMatrix2& m) : m_(m) {
    if (!m.is_hermitian(kHermitianTol))
        throw InvalidInput("density matrix is not Hermitian (defect " +
                           std::to_string(m.hermiticity_defect()) + ")");
    spectrum_ = hermitian_eigen(m);
    validate_state(m_, spectrum_);
}

DensityMatrix DensityMatrix::maximally_mixed() {
    return DensityMatrix(0.5 * ComplexMatrix2::identity());
}

DensityMatrix DensityMatrix::from_bloch(const Vec3& r) {
    return DensityMatrix(from_pauli_components(0.5, {0.5 * r[0], 0.5 * r[1], 0.5 * r[2]}));
}

DensityMatrix DensityMatrix::pure(cplx a, cplx b) {
    const double norm2 = std::norm(a) + std::norm(b);
    if (!(norm2 > 0.0)) throw InvalidInput("pure: zero ket");
    ComplexMatrix2 m{a * std::conj(a), a * std::conj(b), b * std::conj(a), b * std::conj(b)};
    m *= 1.0 / norm2;
    return DensityMatrix(m);
}

DensityMatrix DensityMatrix::with_spectrum(const ComplexMatrix2& m, const Spectrum2& spectrum) {
    validate_state(m, spectrum);
    const auto rebuilt = spectrum.apply([](double x) { return x; });
    if (max_abs_diff(rebuilt, m) > 1e-12)
        throw InvalidInput("with_spectrum: spectrum does not reproduce the matrix");
    return DensityMatrix(m, spectrum);
}

Vec3 DensityMatrix::bloch() const {
    const auto pc = pauli_components(m_);
    return {2.0 * pc.c[0].real(), 2.0 * pc.c[1].real(), 2.0 * pc.c[2].real()};
}

// ------------------------------------------------------------------ Observable

Observable::Observable(const ComplexMatrix2& m, ObservableLabel label) : m_(m), label_(label) {
    if (!m.is_hermitian())
        throw InvalidInput("observable is not Hermitian (defect " +
                           std::to_string(m.hermiticity_defect()) + ")");
}

std::string Observable::name() const {
    switch (label_) {
        case ObservableLabel::X: return "x";
        case ObservableLabel::Y: return "y";
        case ObservableLabel::Z: return "z";
        case ObservableLabel::custom: break;
    }
    return "custom";
}

// -------------------------------------------------------------- state functions

DensityMatrix pauli_gibbs(const Vec3& direction, double s) {
    const double len = std::hypot(direction[0], direction[1], direction[2]);
    if (!(std::abs(len - 1.0) <= 1e-12))
        throw InvalidInput("pauli_gibbs: direction must be a unit vector (|n| = " +
                           std::to_string(len) + ")");
    if (!std::isfinite(s)) throw InvalidInput("pauli_gibbs: s must be finite");

    const double t = std::tanh(s);
    ComplexMatrix2 m = 0.5 * (ComplexMatrix2::identity() - t * pauli::dot(direction));

    // Eigenvalues from exp(∓s)/(2cosh s) keep full relative precision when tanh s ≈ 1.
    const auto axis = hermitian_eigen(pauli::dot(direction));  // (−1, +1)
    const double p_along = 1.0 / (1.0 + std::exp(2.0 * s));     // σ·n = +1
    const double p_against = 1.0 / (1.0 + std::exp(-2.0 * s));  // σ·n = −1
    Spectrum2 spec;
    if (p_along <= p_against) {
        spec.values = {p_along, p_against};
        spec.vectors = {axis.vectors[1], axis.vectors[0]};
    } else {
        spec.values = {p_against, p_along};
        spec.vectors = {axis.vectors[0], axis.vectors[1]};
    }
    return DensityMatrix::with_spectrum(m, spec);
}

ComplexMatrix2 matrix_log(const DensityMatrix& rho, double floor) {
    const auto& s = rho.spectrum();
    if (s.values[0] <= floor)
        throw SupportViolation("matrix_log: eigenvalue " + std::to_string(s.values[0]) +
                               " at or below floor");
    return s.apply([](double x) { return std::log(x); });
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return 0.5 * trace_norm(a.matrix() - b.matrix());
}

}  // namespace kmsorder
