// quadrature.hpp: Globally adaptive Gauss–Kronrod (G10/K21) integration
//
// QUADPACK-style error control on top of Boost's node tables: the panel with
// the largest error estimate is bisected until the summed estimate meets
// max(abs_tol, rel_tol·|I|). Works for real and complex integrands.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kmsorder/error.hpp"

namespace kmsorder::quad {

struct Options {
    double abs_tol = 1e-13;
    double rel_tol = 1e-10;
    std::size_t max_panels = 4000;
    std::size_t initial_panels = 1;  // uniform split of each breakpoint interval
    std::vector<double> breakpoints;  // interior points where the integrand has structure
};

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    double l1 = 0.0;  // ∫|f|, the scale against which roundoff is judged
    std::size_t evaluations = 0;
    std::size_t panels = 0;
    bool roundoff_limited = false;
};

namespace detail {

template <class T>
struct Panel {
    double a, b;
    T value;
    double error, l1;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk21(F& f, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    using G = boost::math::quadrature::gauss<double, 10>;
    const auto& x = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<T, 21> fv;

    const T fc = f(center);
    fv[0] = fc;
    T kron = fc * wk[0];
    T gauss{};
    double resabs = std::abs(fc) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        const T fp = f(center + half * x[i]);
        const T fm = f(center - half * x[i]);
        fv[2 * i - 1] = fp;
        fv[2 * i] = fm;
        kron += (fp + fm) * wk[i];
        resabs += (std::abs(fp) + std::abs(fm)) * wk[i];
        if (i % 2 == 1) gauss += (fp + fm) * wg[i / 2];
    }
    const T mean = kron * 0.5;
    double resasc = std::abs(fc - mean) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i)
        resasc += (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean)) * wk[i];

    const double ah = std::abs(half);
    resabs *= ah;
    resasc *= ah;
    double err = std::abs((kron - gauss) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * resabs, err);
    return {a, b, kron * half, err, resabs};
}

}  // namespace detail

template <class F>
auto integrate(F&& f, double a, double b, const Options& opt = {})
    -> Result<std::decay_t<std::invoke_result_t<F&, double>>> {
    using T = std::decay_t<std::invoke_result_t<F&, double>>;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    Result<T> out;
    if (a == b) return out;
    if (!std::isfinite(a) || !std::isfinite(b))
        throw InvalidInput("quad::integrate: limits must be finite");
    if (a > b) {
        auto r = integrate(f, b, a, opt);
        r.value = -r.value;
        return r;
    }

    std::vector<double> edges{a};
    for (double p : opt.breakpoints)
        if (p > a && p < b) edges.push_back(p);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::priority_queue<detail::Panel<T>> active;
    std::vector<detail::Panel<T>> settled;  // at the roundoff floor, never split again
    const std::size_t sub = std::max<std::size_t>(1, opt.initial_panels);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        const double h = (edges[e + 1] - edges[e]) / static_cast<double>(sub);
        for (std::size_t k = 0; k < sub; ++k) {
            const double lo = edges[e] + h * static_cast<double>(k);
            const double hi = (k + 1 == sub) ? edges[e + 1] : lo + h;
            active.push(detail::gk21<T>(f, lo, hi));
            out.evaluations += 21;
        }
    }

    auto totals = [&](T& value, double& error, double& l1) {
        value = T{};
        error = 0.0;
        l1 = 0.0;
        auto copy = active;
        while (!copy.empty()) {
            value += copy.top().value;
            error += copy.top().error;
            l1 += copy.top().l1;
            copy.pop();
        }
        for (const auto& p : settled) {
            value += p.value;
            error += p.error;
            l1 += p.l1;
        }
    };

    T value{};
    double error = 0.0, l1 = 0.0, settled_error = 0.0;
    totals(value, error, l1);
    while (true) {
        const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
        if (error <= target) break;
        // what refinement can still remove is already below the roundoff floor
        if (active.empty() || (settled_error > 0.0 && error - settled_error <= settled_error)) {
            out.roundoff_limited = true;
            break;
        }
        if (active.size() + settled.size() >= opt.max_panels) {
            throw ConvergenceError("quad::integrate: panel budget exhausted on [" +
                                       std::to_string(a) + ", " + std::to_string(b) +
                                       "], error estimate " + std::to_string(error),
                                   error);
        }
        auto worst = active.top();
        active.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const bool too_narrow = (worst.b - worst.a) <= 1e3 * eps * std::max(1.0, std::abs(mid));
        if (too_narrow || worst.error <= 50.0 * eps * worst.l1 * 1.0000001) {
            settled.push_back(worst);
            settled_error += worst.error;
            continue;
        }
        auto left = detail::gk21<T>(f, worst.a, mid);
        auto right = detail::gk21<T>(f, mid, worst.b);
        out.evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        active.push(left);
        active.push(right);
    }
    totals(value, error, l1);
    out.value = value;
    out.error = error;
    out.l1 = l1;
    out.panels = active.size() + settled.size();
    return out;
}

}  // namespace kmsorder::quad
