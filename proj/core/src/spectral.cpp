// spectral.cpp: KMS-consistent spectra, Fourier-space correlators, mode fits

#include "kmsorder/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "kmsorder/error.hpp"
#include "kmsorder/quadrature.hpp"

namespace kmsorder {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLineMatchTol = 1e-12;
// Gaussian cutoffs are integrated out to 8Λ, where e^{−64} ≈ 1.6e-28.
constexpr double kCutoffExtent = 8.0;

quad::Options time_options(const SpectralModel& m, double dt, const Tolerance& tol) {
    quad::Options o;
    o.abs_tol = tol.abs;
    o.rel_tol = tol.rel;
    o.breakpoints = m.features();
    // Panel width tied to min(2π/|Δτ|, Λ): roughly one oscillation per panel.
    double width = m.uv_cutoff() > 0.0 ? m.uv_cutoff() : m.frequency_extent() / 8.0;
    if (dt != 0.0) width = std::min(width, kTwoPi / std::abs(dt));
    o.initial_panels = static_cast<std::size_t>(
        std::clamp(std::ceil(m.frequency_extent() / width), 1.0, 2000.0));
    o.max_panels = 20000;
    return o;
}

std::vector<double> mirrored(const std::vector<double>& pts) {
    std::vector<double> out{0.0};
    for (double p : pts) {
        out.push_back(p);
        out.push_back(-p);
    }
    return out;
}

void require_continuum(const SpectralModel& m, const char* where) {
    if (m.is_discrete())
        throw InvalidInput(std::string(where) + ": requires a continuum spectral model");
}

}  // namespace

std::string to_string(ModelTag tag) {
    switch (tag) {
        case ModelTag::accelerated_massless_3p1: return "accelerated_massless_3p1";
        case ModelTag::flat_ohmic: return "flat_ohmic";
        case ModelTag::discrete_modes: return "discrete_modes";
        case ModelTag::custom: return "custom";
    }
    return "custom";
}

ModelTag model_tag_from_string(const std::string& name) {
    if (name == "accelerated_massless_3p1") return ModelTag::accelerated_massless_3p1;
    if (name == "flat_ohmic") return ModelTag::flat_ohmic;
    if (name == "discrete_modes") return ModelTag::discrete_modes;
    if (name == "custom") return ModelTag::custom;
    throw InvalidInput("unknown model tag '" + name + "'");
}

void DiscreteModeSet::validate() const {
    if (!(beta > 0.0)) throw InvalidInput("discrete modes: beta must be positive");
    if (modes.empty()) throw InvalidInput("discrete modes: at least one mode required");
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const auto& m = modes[i];
        if (!(m.frequency > 0.0) || !std::isfinite(m.frequency))
            throw InvalidInput("discrete modes: frequencies must be positive and finite");
        if (!std::isfinite(m.coupling))
            throw InvalidInput("discrete modes: couplings must be finite");
        for (std::size_t j = 0; j < i; ++j)
            if (modes[j].frequency == m.frequency)
                throw InvalidInput("discrete modes: frequencies must be distinct");
    }
}

double bose_occupation(double beta, double omega) {
    return 1.0 / std::expm1(beta * omega);
}

// --------------------------------------------------------------- SpectralModel

SpectralModel SpectralModel::accelerated_massless(double acceleration, double lambda_uv) {
    auto m = flat_ohmic(unruh_beta(acceleration), lambda_uv);
    m.tag_ = ModelTag::accelerated_massless_3p1;
    return m;
}

SpectralModel SpectralModel::flat_ohmic(double beta, double lambda_uv) {
    if (!(beta > 0.0)) throw InvalidInput("spectral model: beta must be positive");
    if (!(lambda_uv > 0.0)) throw InvalidInput("spectral model: lambda_uv must be positive");
    SpectralModel m;
    m.tag_ = ModelTag::flat_ohmic;
    m.beta_ = beta;
    m.lambda_uv_ = lambda_uv;
    m.extent_ = kCutoffExtent * lambda_uv;
    m.slope0_ = 1.0 / kTwoPi;
    m.delta_ = [lambda_uv](double w) {
        const double x = w / lambda_uv;
        return w / kTwoPi * std::exp(-x * x);
    };
    return m;
}

SpectralModel SpectralModel::discrete(DiscreteModeSet modes) {
    modes.validate();
    SpectralModel m;
    m.tag_ = ModelTag::discrete_modes;
    m.beta_ = modes.beta;
    double wmax = 0.0;
    for (const auto& mode : modes.modes) wmax = std::max(wmax, mode.frequency);
    m.extent_ = wmax;
    m.modes_ = std::make_shared<const DiscreteModeSet>(std::move(modes));
    return m;
}

SpectralModel SpectralModel::custom(double beta, std::function<double(double)> delta_positive,
                                    double extent, std::vector<double> features) {
    if (!(beta > 0.0)) throw InvalidInput("spectral model: beta must be positive");
    if (!(extent > 0.0)) throw InvalidInput("spectral model: extent must be positive");
    if (!delta_positive) throw InvalidInput("spectral model: missing spectral function");
    if (delta_positive(0.0) != 0.0)
        throw InvalidInput("spectral model: spectral function must vanish at zero");
    for (int i = 1; i <= 1000; ++i) {
        const double v = delta_positive(extent * i / 1000.0);
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidInput("spectral model: spectral function must be non-negative on ω ≥ 0");
    }
    SpectralModel m;
    m.tag_ = ModelTag::custom;
    m.beta_ = beta;
    m.extent_ = extent;
    const double h = 1e-7 * extent;
    m.slope0_ = delta_positive(h) / h;
    m.delta_ = std::move(delta_positive);
    std::sort(features.begin(), features.end());
    m.features_ = std::move(features);
    return m;
}

const DiscreteModeSet& SpectralModel::modes() const {
    if (!modes_) throw InvalidInput("spectral model has no discrete modes");
    return *modes_;
}

double SpectralModel::spectral_density(double omega) const {
    if (is_discrete() || omega == 0.0) return 0.0;
    return omega > 0.0 ? delta_(omega) : -delta_(-omega);
}

int SpectralModel::line_index(double omega) const {
    if (!modes_) return -1;
    const double a = std::abs(omega);
    for (std::size_t k = 0; k < modes_->modes.size(); ++k) {
        const double wk = modes_->modes[k].frequency;
        if (std::abs(a - wk) <= kLineMatchTol * std::max(1.0, wk)) return static_cast<int>(k);
    }
    return -1;
}

SpectralModel SpectralModel::with_beta(double beta) const {
    if (!(beta > 0.0)) throw InvalidInput("spectral model: beta must be positive");
    SpectralModel m = *this;
    m.beta_ = beta;
    if (modes_) {
        DiscreteModeSet copy = *modes_;
        copy.beta = beta;
        m.modes_ = std::make_shared<const DiscreteModeSet>(std::move(copy));
    }
    return m;
}

SpectralModel SpectralModel::with_detailed_balance_defect(double defect) const {
    SpectralModel m = *this;
    m.defect_ = defect;
    return m;
}

// ------------------------------------------------------------------- spectra

double unruh_beta(double acceleration) {
    if (!(acceleration > 0.0) || !std::isfinite(acceleration))
        throw InvalidInput("unruh_beta: acceleration must be positive");
    return kTwoPi / acceleration;
}

double wightman_spectrum(const SpectralModel& model, double omega) {
    const double beta = model.beta();
    const double neg_scale = 1.0 + model.detailed_balance_defect();
    if (model.is_discrete()) {
        const int k = model.line_index(omega);
        if (k < 0 || omega == 0.0) return 0.0;
        const auto& mode = model.modes().modes[static_cast<std::size_t>(k)];
        const double n = bose_occupation(beta, mode.frequency);
        const double mass = kTwoPi * mode.coupling * mode.coupling;
        return omega > 0.0 ? mass * (n + 1.0) : mass * n * neg_scale;
    }
    if (omega == 0.0) return model.spectral_slope_at_zero() / beta;
    // Δ̃(ω)/(1 − e^{−βω}); the ω < 0 branch is Δ̃(|ω|)/(e^{β|ω|} − 1).
    const double value = model.spectral_density(omega) / (-std::expm1(-beta * omega));
    return omega > 0.0 ? value : value * neg_scale;
}

double hadamard_spectrum(const SpectralModel& model, double omega) {
    return wightman_spectrum(model, omega) + wightman_spectrum(model, -omega);
}

double hadamard_spectrum_coth(const SpectralModel& model, double omega) {
    const double beta = model.beta();
    if (model.is_discrete()) {
        const int k = model.line_index(omega);
        if (k < 0 || omega == 0.0) return 0.0;
        const auto& mode = model.modes().modes[static_cast<std::size_t>(k)];
        const double mass = kTwoPi * mode.coupling * mode.coupling;
        return mass / std::tanh(0.5 * beta * mode.frequency);
    }
    if (omega == 0.0) return 2.0 * model.spectral_slope_at_zero() / beta;
    return model.spectral_density(omega) / std::tanh(0.5 * beta * omega);
}

// ------------------------------------------------------------- time domain

Estimate<double> hadamard_time(const SpectralModel& model, double dt, const Tolerance& tol) {
    if (model.is_discrete()) {
        const auto& set = model.modes();
        const double scale = 1.0 + model.detailed_balance_defect();
        double acc = 0.0;
        for (const auto& m : set.modes) {
            // (n+1) + n = coth(βω/2) when detailed balance holds
            const double n = bose_occupation(set.beta, m.frequency);
            acc += 2.0 * m.coupling * m.coupling * (n + 1.0 + n * scale) * std::cos(m.frequency * dt);
        }
        return {acc, 0.0};
    }
    auto f = [&](double w) { return hadamard_spectrum(model, w) * std::cos(w * dt); };
    const auto r = quad::integrate(f, 0.0, model.frequency_extent(), time_options(model, dt, tol));
    return {r.value / std::numbers::pi, r.error / std::numbers::pi};
}

Estimate<cplx> wightman_time(const SpectralModel& model, double dt, const Tolerance& tol) {
    if (model.is_discrete()) {
        const auto& set = model.modes();
        const double scale = 1.0 + model.detailed_balance_defect();
        cplx acc = 0.0;
        for (const auto& m : set.modes) {
            const double n = bose_occupation(set.beta, m.frequency);
            const cplx ph = std::polar(1.0, -m.frequency * dt);
            acc += m.coupling * m.coupling * ((n + 1.0) * ph + n * scale * std::conj(ph));
        }
        return {acc, 0.0};
    }
    auto f = [&](double w) { return wightman_spectrum(model, w) * std::polar(1.0, -w * dt); };
    auto opt = time_options(model, dt, tol);
    opt.breakpoints = mirrored(model.features());
    opt.initial_panels = std::max<std::size_t>(1, opt.initial_panels / 2);
    const double L = model.frequency_extent();
    const auto r = quad::integrate(f, -L, L, opt);
    return {r.value / kTwoPi, r.error / kTwoPi};
}

Estimate<double> commutator_time(const SpectralModel& model, double dt, const Tolerance& tol) {
    if (model.is_discrete()) {
        const auto& set = model.modes();
        const double scale = 1.0 + model.detailed_balance_defect();
        double acc = 0.0;
        for (const auto& m : set.modes) {
            const double n = bose_occupation(set.beta, m.frequency);
            acc += 2.0 * m.coupling * m.coupling * (n + 1.0 - n * scale) * std::sin(m.frequency * dt);
        }
        return {acc, 0.0};
    }
    auto f = [&](double w) {
        return (wightman_spectrum(model, w) - wightman_spectrum(model, -w)) * std::sin(w * dt);
    };
    const auto r = quad::integrate(f, 0.0, model.frequency_extent(), time_options(model, dt, tol));
    return {r.value / std::numbers::pi, r.error / std::numbers::pi};
}

Estimate<cplx> wightman_continued(const SpectralModel& model, double dt, const Tolerance& tol) {
    const double beta = model.beta();
    if (model.is_discrete()) {
        const auto& set = model.modes();
        const double scale = 1.0 + model.detailed_balance_defect();
        cplx acc = 0.0;
        for (const auto& m : set.modes) {
            const double bw = beta * m.frequency;
            const double n = bose_occupation(beta, m.frequency);
            // e^{−iω(−t−iβ)} = e^{iωt} e^{−βω}; n·e^{βω} is formed in log space.
            const double up = (n + 1.0) * std::exp(-bw);
            const double down = std::exp(std::log(n) + bw);
            const cplx ph = std::polar(1.0, m.frequency * dt);
            acc += m.coupling * m.coupling * (up * ph + down * scale * std::conj(ph));
        }
        return {acc, 0.0};
    }
    const double L = model.frequency_extent();
    if (beta * L > 700.0)
        throw InvalidInput("wightman_continued: β·ω_extent too large for direct continuation");
    auto f = [&](double w) {
        return wightman_spectrum(model, w) * std::exp(-beta * w) * std::polar(1.0, w * dt);
    };
    auto opt = time_options(model, dt, tol);
    opt.breakpoints = mirrored(model.features());
    opt.initial_panels = std::max<std::size_t>(1, opt.initial_panels / 2);
    const auto r = quad::integrate(f, -L, L, opt);
    return {r.value / kTwoPi, r.error / kTwoPi};
}

KmsTimeReport kms_time_domain_check(const SpectralModel& model, std::span<const double> times,
                                    double tolerance, const Tolerance& quad_tol) {
    KmsTimeReport rep;
    rep.tolerance = tolerance;
    for (double t : times) {
        const auto direct = wightman_time(model, t, quad_tol);
        const auto cont = wightman_continued(model, t, quad_tol);
        KmsPoint p{t, direct.value, cont.value, std::abs(direct.value - cont.value),
                   direct.error + cont.error};
        rep.max_deviation = std::max(rep.max_deviation, p.deviation);
        rep.points.push_back(p);
    }
    rep.passed = rep.max_deviation <= tolerance;
    return rep;
}

DetailedBalanceReport detailed_balance_check(const SpectralModel& model,
                                             std::span<const double> omegas, double tolerance) {
    DetailedBalanceReport rep;
    rep.tolerance = tolerance;
    std::vector<double> grid;
    if (model.is_discrete()) {
        for (const auto& m : model.modes().modes) grid.push_back(m.frequency);
    } else {
        for (double w : omegas)
            if (w != 0.0) grid.push_back(std::abs(w));
    }
    const double beta = model.beta();
    for (double w : grid) {
        const double pos = wightman_spectrum(model, w);
        const double neg = wightman_spectrum(model, -w);
        const double expected = std::exp(-beta * w);
        DetailedBalancePoint p{w, pos > 0.0 ? neg / pos : 0.0, expected, 0.0};
        // below the smallest normal double the prediction carries no relative precision
        const bool unresolved = pos > 0.0 && std::log(pos) - beta * w < std::log(std::numeric_limits<double>::min());
        if (unresolved && neg < std::numeric_limits<double>::min())
            p.relative_error = 0.0;
        else if (pos > 0.0 && neg > 0.0)
            p.relative_error = std::abs(std::expm1(std::log(neg / pos) + beta * w));
        else
            p.relative_error = std::numeric_limits<double>::infinity();
        rep.max_relative_error = std::max(rep.max_relative_error, p.relative_error);
        rep.points.push_back(p);
    }
    rep.passed = rep.max_relative_error <= tolerance;
    return rep;
}

// ------------------------------------------------------------ mode fitting

DiscreteFit fit_discrete_modes(const SpectralModel& model, std::size_t mode_count,
                               double omega_max, double tolerance) {
    require_continuum(model, "fit_discrete_modes");
    if (mode_count < 1) throw InvalidInput("fit_discrete_modes: need at least one mode");
    if (!(omega_max > 0.0)) throw InvalidInput("fit_discrete_modes: omega_max must be positive");
    const double beta = model.beta();

    // Discretize G̃¹(ω) dω/2π on (0, ω_max] with composite 20-point Gauss–Legendre.
    std::vector<double> edges;
    constexpr int kPanels = 400;
    for (int i = 0; i <= kPanels; ++i) edges.push_back(omega_max * i / kPanels);
    // geometric grading toward declared features so narrow lines are resolved
    const double h0 = omega_max / kPanels;
    for (double f : model.features()) {
        if (!(f > 0.0 && f < omega_max)) continue;
        edges.push_back(f);
        for (double d = 0.5 * h0; d > 1e-12 * h0; d *= 0.5)
            for (double e : {f - d, f + d})
                if (e > 0.0 && e < omega_max) edges.push_back(e);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    using GL = boost::math::quadrature::gauss<double, 20>;
    std::vector<double> x, w;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        const double c = 0.5 * (edges[e] + edges[e + 1]);
        const double h = 0.5 * (edges[e + 1] - edges[e]);
        for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
            for (double sgn : {1.0, -1.0}) {
                const double node = c + sgn * h * GL::abscissa()[i];
                const double weight = h * GL::weights()[i] * hadamard_spectrum(model, node) / (2.0 * std::numbers::pi);
                if (weight > 0.0) {
                    x.push_back(node);
                    w.push_back(weight);
                }
            }
        }
    }
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    const Eigen::Map<const Eigen::VectorXd> nodes(x.data(), n);
    const Eigen::Map<const Eigen::VectorXd> weights(w.data(), n);
    const double mass = weights.sum();

    // Stieltjes procedure as Lanczos on diag(x) with full reorthogonalization.
    const auto K = static_cast<Eigen::Index>(mode_count);
    Eigen::MatrixXd Q(n, K);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(K), off = Eigen::VectorXd::Zero(K);
    Q.col(0) = weights.cwiseSqrt() / std::sqrt(mass);
    Eigen::Index used = K;
    for (Eigen::Index k = 0; k < K; ++k) {
        Eigen::VectorXd r = nodes.cwiseProduct(Q.col(k));
        alpha(k) = Q.col(k).dot(r);
        for (int pass = 0; pass < 2; ++pass)
            r -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * r);
        if (k + 1 == K) break;
        off(k) = r.norm();
        if (off(k) <= 1e-14 * std::max(1.0, std::abs(alpha(k)))) {
            used = k + 1;
            break;
        }
        Q.col(k + 1) = r / off(k);
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(used, used);
    for (Eigen::Index k = 0; k < used; ++k) {
        J(k, k) = alpha(k);
        if (k + 1 < used) J(k, k + 1) = J(k + 1, k) = off(k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);

    DiscreteFit fit;
    fit.tolerance = tolerance;
    fit.modes.beta = beta;
    for (Eigen::Index j = 0; j < used; ++j) {
        const double wk = es.eigenvalues()(j);
        const double qw = mass * es.eigenvectors()(0, j) * es.eigenvectors()(0, j);
        const double g2 = qw * std::tanh(0.5 * beta * wk);
        fit.modes.modes.push_back({wk, std::sqrt(g2)});
    }
    fit.modes.validate();

    const auto discrete = SpectralModel::discrete(fit.modes);
    constexpr int kSamples = 40;
    for (int i = 0; i <= kSamples; ++i) {
        const double t = beta * i / kSamples;
        const double exact = hadamard_time(model, t).value;
        const double approx = hadamard_time(discrete, t).value;
        fit.reconstruction_error = std::max(fit.reconstruction_error, std::abs(exact - approx));
    }
    fit.tolerance_met = fit.reconstruction_error <= tolerance;
    return fit;
}

}  // namespace kmsorder
