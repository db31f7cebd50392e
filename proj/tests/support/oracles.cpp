#include "oracles.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using kmsorder::ComplexMatrix2;

Eigen::Matrix2cd to_eigen(const ComplexMatrix2& m) {
    Eigen::Matrix2cd e;
    e << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
    return e;
}

ComplexMatrix2 from_eigen(const Eigen::Matrix2cd& m) {
    return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

ComplexMatrix2 expm(const ComplexMatrix2& a) {
    return from_eigen(to_eigen(a).exp());
}

template <class T>
static T simpson_impl(const std::function<T(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    T s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * i);
    return s * (h / 3.0);
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    return simpson_impl<double>(f, a, b, n);
}

cplx simpson_c(const std::function<cplx(double)>& f, double a, double b, int n) {
    return simpson_impl<cplx>(f, a, b, n);
}

cplx fourier(const kmsorder::SwitchingFunction& chi, double omega, int n) {
    return simpson_c([&](double t) { return chi(t) * std::exp(cplx(0.0, omega * t)); },
                     chi.support_begin(), chi.support_end(), n);
}

double hadamard_lines(const kmsorder::DiscreteModeSet& modes, double dt) {
    double g = 0.0;
    for (const auto& m : modes.modes)
        g += 2.0 * m.coupling * m.coupling / std::tanh(0.5 * modes.beta * m.frequency) *
             std::cos(m.frequency * dt);
    return g;
}

double hadamard_continuum(const std::function<double(double)>& delta, double beta, double slope0,
                          double omega_max, double dt, int n) {
    auto f = [&](double w) {
        const double g = w == 0.0 ? 2.0 * slope0 / beta : delta(w) / std::tanh(0.5 * beta * w);
        return g * std::cos(w * dt) / M_PI;
    };
    return simpson(f, 0.0, omega_max, n);
}

double c_double_integral(const kmsorder::SwitchingFunction& chi1,
                         const kmsorder::SwitchingFunction& chi2,
                         const std::function<double(double)>& g1, int n) {
    if (n % 2) ++n;
    // equal steps on both supports: h = 2w / n for the wider one, grids padded
    const double h = 2.0 * std::max(chi1.half_width(), chi2.half_width()) / n;
    const int n1 = static_cast<int>(std::lround(2.0 * chi1.half_width() / h));
    const int n2 = static_cast<int>(std::lround(2.0 * chi2.half_width() / h));
    auto weights = [&](int m) {
        std::vector<double> w(m + 1);
        for (int i = 0; i <= m; ++i) w[i] = (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0)) * h / 3.0;
        return w;
    };
    const auto w1 = weights(n1), w2 = weights(n2);
    const double a1 = chi1.support_begin(), a2 = chi2.support_begin();
    // lag τ − τ′ = (a1 − a2) + h(i − j), i − j ∈ [−n2, n1]
    std::vector<double> lag(n1 + n2 + 1);
    for (int d = -n2; d <= n1; ++d) lag[d + n2] = g1(a1 - a2 + h * d);
    double c = 0.0;
    for (int i = 0; i <= n1; ++i) {
        const double x1 = w1[i] * chi1(a1 + h * i);
        if (x1 == 0.0) continue;
        for (int j = 0; j <= n2; ++j) c += x1 * w2[j] * chi2(a2 + h * j) * lag[i - j + n2];
    }
    return c;
}

kmsorder::DensityMatrix random_state(std::mt19937_64& rng, double max_radius) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = n(rng), y = n(rng), z = n(rng);
    const double norm = std::sqrt(x * x + y * y + z * z);
    const double r = max_radius * std::cbrt(u(rng));
    return kmsorder::DensityMatrix::from_bloch({r * x / norm, r * y / norm, r * z / norm});
}

ComplexMatrix2 random_hermitian(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const cplx off(n(rng), n(rng));
    return {n(rng), off, std::conj(off), n(rng)};
}

ComplexMatrix2 joint_evolution(const kmsorder::DiscreteModeSet& modes, int n_max,
                               const kmsorder::Leg& a, const kmsorder::Leg& b, double lambda,
                               const kmsorder::DensityMatrix& rho, double h) {
    using Mat = Eigen::MatrixXcd;
    const int d = n_max + 1;
    const int K = static_cast<int>(modes.modes.size());
    int field_dim = 1;
    for (int k = 0; k < K; ++k) field_dim *= d;

    Mat ann = Mat::Zero(d, d);
    for (int n = 1; n < d; ++n) ann(n - 1, n) = std::sqrt(double(n));
    auto embed = [&](const Mat& op, int k) {
        Mat out = Mat::Identity(1, 1);
        for (int j = 0; j < K; ++j) {
            const Mat f = j == k ? op : Mat::Identity(d, d);
            Mat next(out.rows() * f.rows(), out.cols() * f.cols());
            for (int r = 0; r < out.rows(); ++r)
                for (int c = 0; c < out.cols(); ++c)
                    next.block(r * f.rows(), c * f.cols(), f.rows(), f.cols()) = out(r, c) * f;
            out = next;
        }
        return out;
    };
    std::vector<Mat> a_k;
    for (int k = 0; k < K; ++k) a_k.push_back(embed(ann, k));
    auto phi = [&](double t) {
        Mat p = Mat::Zero(field_dim, field_dim);
        for (int k = 0; k < K; ++k) {
            const auto& m = modes.modes[k];
            const cplx e = std::exp(cplx(0.0, -m.frequency * t));
            p += m.coupling * (e * a_k[k] + std::conj(e) * a_k[k].adjoint());
        }
        return p;
    };
    auto kron2 = [&](const Eigen::Matrix2cd& s, const Mat& f) {
        Mat out(2 * field_dim, 2 * field_dim);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out.block(r * field_dim, c * field_dim, field_dim, field_dim) = s(r, c) * f;
        return out;
    };

    Mat field_rho = Mat::Identity(1, 1);
    for (int k = 0; k < K; ++k) {
        Mat pk = Mat::Zero(d, d);
        double z = 0.0;
        for (int n = 0; n < d; ++n) z += std::exp(-modes.beta * modes.modes[k].frequency * n);
        for (int n = 0; n < d; ++n) pk(n, n) = std::exp(-modes.beta * modes.modes[k].frequency * n) / z;
        Mat next(field_rho.rows() * d, field_rho.cols() * d);
        for (int r = 0; r < field_rho.rows(); ++r)
            for (int c = 0; c < field_rho.cols(); ++c) next.block(r * d, c * d, d, d) = field_rho(r, c) * pk;
        field_rho = next;
    }
    Mat state = kron2(to_eigen(rho.matrix()), field_rho);

    auto apply_leg = [&](const kmsorder::Leg& leg) {
        const auto& chi = leg.switching;
        const Eigen::Matrix2cd mu = to_eigen(leg.observable.matrix());
        const int steps = static_cast<int>(std::ceil((chi.support_end() - chi.support_begin()) / h));
        const double dt = (chi.support_end() - chi.support_begin()) / steps;
        for (int s = 0; s < steps; ++s) {
            const double t = chi.support_begin() + (s + 0.5) * dt;
            const Mat H = lambda * chi(t) * kron2(mu, phi(t));
            Eigen::SelfAdjointEigenSolver<Mat> es(H);
            const Eigen::VectorXcd ph =
                (es.eigenvalues().cast<cplx>() * cplx(0.0, -dt)).array().exp().matrix();
            const Mat U = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
            state = U * state * U.adjoint();
        }
    };
    apply_leg(a);
    apply_leg(b);

    ComplexMatrix2 out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out(r, c) = state.block(r * field_dim, c * field_dim, field_dim, field_dim).trace();
    return out;
}

}  // namespace oracle
