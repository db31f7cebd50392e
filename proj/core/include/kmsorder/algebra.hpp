// algebra.hpp: Exact 2×2 operator algebra for a two-level detector
//
// Pauli operators, density matrices, commutators, Hermitian matrix functions
// and distances. Every eigendecomposition here is closed form through the
// Bloch decomposition M = c0·I + c·σ; nothing iterates.

#pragma once

#include <array>
#include <complex>
#include <string>

namespace kmsorder {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kEigenvalueFloor = 1e-14;

class ComplexMatrix2 {
public:
    constexpr ComplexMatrix2() = default;
    constexpr ComplexMatrix2(cplx m00, cplx m01, cplx m10, cplx m11)
        : e_{m00, m01, m10, m11} {}

    static constexpr ComplexMatrix2 zero() { return {}; }
    static constexpr ComplexMatrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    constexpr cplx operator()(int row, int col) const { return e_[2 * row + col]; }
    constexpr cplx& operator()(int row, int col) { return e_[2 * row + col]; }

    ComplexMatrix2& operator+=(const ComplexMatrix2& o);
    ComplexMatrix2& operator-=(const ComplexMatrix2& o);
    ComplexMatrix2& operator*=(cplx s);

    friend ComplexMatrix2 operator+(ComplexMatrix2 a, const ComplexMatrix2& b) { return a += b; }
    friend ComplexMatrix2 operator-(ComplexMatrix2 a, const ComplexMatrix2& b) { return a -= b; }
    friend ComplexMatrix2 operator-(ComplexMatrix2 a) { return a *= -1.0; }
    friend ComplexMatrix2 operator*(ComplexMatrix2 a, cplx s) { return a *= s; }
    friend ComplexMatrix2 operator*(cplx s, ComplexMatrix2 a) { return a *= s; }
    friend ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b);

    ComplexMatrix2 adjoint() const;
    cplx trace() const { return e_[0] + e_[3]; }
    cplx determinant() const { return e_[0] * e_[3] - e_[1] * e_[2]; }

    // Largest entrywise modulus.
    double max_abs() const;
    // Largest entrywise deviation from Hermiticity.
    double hermiticity_defect() const;
    bool is_hermitian(double tol = kHermitianTol) const { return hermiticity_defect() <= tol; }

private:
    std::array<cplx, 4> e_{};
};

double max_abs_diff(const ComplexMatrix2& a, const ComplexMatrix2& b);

// Coefficients of M = c0·I + cx·σx + cy·σy + cz·σz.
struct PauliComponents {
    cplx c0;
    std::array<cplx, 3> c;
};

PauliComponents pauli_components(const ComplexMatrix2& m);
ComplexMatrix2 from_pauli_components(cplx c0, const std::array<cplx, 3>& c);

namespace pauli {
ComplexMatrix2 I();
ComplexMatrix2 X();
ComplexMatrix2 Y();
ComplexMatrix2 Z();
// n·σ for a real 3-vector n.
ComplexMatrix2 dot(const Vec3& n);
}  // namespace pauli

ComplexMatrix2 commutator(const ComplexMatrix2& a, const ComplexMatrix2& b);
ComplexMatrix2 anticommutator(const ComplexMatrix2& a, const ComplexMatrix2& b);

// Eigenpairs of a Hermitian 2×2 matrix, eigenvalues ascending.
struct Spectrum2 {
    std::array<double, 2> values{};
    std::array<std::array<cplx, 2>, 2> vectors{};  // vectors[i] pairs with values[i]

    // Σ f(λ_i) |v_i⟩⟨v_i|
    template <class F>
    ComplexMatrix2 apply(F&& f) const {
        ComplexMatrix2 out;
        for (int i = 0; i < 2; ++i) {
            const double fi = f(values[i]);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    out(r, c) += fi * vectors[i][r] * std::conj(vectors[i][c]);
        }
        return out;
    }

    // ⟨v_i| M |v_i⟩
    cplx expectation(int i, const ComplexMatrix2& m) const;
};

// Requires a Hermitian argument (tolerance kHermitianTol, else InvalidInput).
Spectrum2 hermitian_eigen(const ComplexMatrix2& m);

// exp(M) for Hermitian M via its eigendecomposition.
ComplexMatrix2 matrix_exp(const ComplexMatrix2& hermitian);

// Σ |eigenvalues| of a Hermitian matrix.
double trace_norm(const ComplexMatrix2& hermitian);

class DensityMatrix {
public:
    // Validates Hermiticity, unit trace and positivity; throws InvalidInput.
    explicit DensityMatrix(const ComplexMatrix2& m);

    static DensityMatrix maximally_mixed();
    static DensityMatrix from_bloch(const Vec3& r);
    // Pure state |ψ⟩⟨ψ| for a (not necessarily normalized) ket.
    static DensityMatrix pure(cplx a, cplx b);
    // For factories that know the spectrum more accurately than the entries.
    static DensityMatrix with_spectrum(const ComplexMatrix2& m, const Spectrum2& spectrum);

    const ComplexMatrix2& matrix() const { return m_; }
    const Spectrum2& spectrum() const { return spectrum_; }
    Vec3 bloch() const;
    cplx operator()(int r, int c) const { return m_(r, c); }

private:
    DensityMatrix(const ComplexMatrix2& m, const Spectrum2& s) : m_(m), spectrum_(s) {}

    ComplexMatrix2 m_;
    Spectrum2 spectrum_;
};

enum class ObservableLabel { X, Y, Z, custom };

class Observable {
public:
    Observable(const ComplexMatrix2& m, ObservableLabel label = ObservableLabel::custom);

    static Observable x() { return {pauli::X(), ObservableLabel::X}; }
    static Observable y() { return {pauli::Y(), ObservableLabel::Y}; }
    static Observable z() { return {pauli::Z(), ObservableLabel::Z}; }
    static Observable identity() { return {pauli::I(), ObservableLabel::custom}; }

    const ComplexMatrix2& matrix() const { return m_; }
    ObservableLabel label() const { return label_; }
    std::string name() const;

private:
    ComplexMatrix2 m_;
    ObservableLabel label_;
};

// (I − tanh(s)·σ·n)/2 = exp(−s σ·n)/(2 cosh s). Throws InvalidInput unless |n| = 1.
DensityMatrix pauli_gibbs(const Vec3& direction, double s);

// Hermitian logarithm. Throws SupportViolation if an eigenvalue is ≤ floor.
ComplexMatrix2 matrix_log(const DensityMatrix& rho, double floor = kEigenvalueFloor);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace kmsorder
