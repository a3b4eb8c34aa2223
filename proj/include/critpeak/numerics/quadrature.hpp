#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "critpeak/errors.hpp"

namespace critpeak::numerics {

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    std::size_t max_subdivisions = 4096;

    void validate() const {
        if (!(rel_tol > 0.0)) throw InvalidArgument("QuadratureSpec: rel_tol must be > 0");
        if (!(abs_tol >= 0.0)) throw InvalidArgument("QuadratureSpec: abs_tol must be >= 0");
        if (max_subdivisions < 1) throw InvalidArgument("QuadratureSpec: max_subdivisions must be >= 1");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;       // error bound reported by the rule
    std::size_t panels = 0;   // panels in the final partition
};

namespace detail {

struct Panel {
    double a, b, value, error, l1;
    bool operator<(const Panel& o) const { return error < o.error; }
};

using GK15 = boost::math::quadrature::gauss_kronrod<double, 15>;

inline Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
    double err = 0.0, l1 = 0.0;
    // depth 0: a single 15-point Kronrod panel with embedded Gauss error estimate
    double v = GK15::integrate(f, a, b, 0, 0.0, &err, &l1);
    return {a, b, v, err, l1};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration on a finite interval.
/// Splits the worst panel until the summed error estimate meets
/// max(rel_tol*|value|, abs_tol) or max_subdivisions is exhausted.
inline QuadratureResult integrate_interval(const std::function<double(double)>& f, double a,
                                           double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (a == b) return {0.0, 0.0, 0};
    std::priority_queue<detail::Panel> heap;
    detail::Panel p0 = detail::eval_panel(f, a, b);
    if (!std::isfinite(p0.value))
        throw NonConvergence("integrate_interval: non-finite integrand on initial panel");
    double total = p0.value, toterr = p0.error, totl1 = p0.l1;
    heap.push(p0);
    std::size_t splits = 0;
    auto target = [&] {
        // noise floor: cancellation below ~eps_mach * L1 is unresolvable
        const double floor = 50.0 * std::numeric_limits<double>::epsilon() * totl1;
        return std::max({spec.rel_tol * std::abs(total), spec.abs_tol, floor});
    };
    while (toterr > target()) {
        if (splits >= spec.max_subdivisions)
            throw NonConvergence("integrate_interval: max_subdivisions exhausted, error " +
                                 std::to_string(toterr));
        detail::Panel worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval at rounding resolution; keep its estimate and stop splitting it
            heap.push({worst.a, worst.b, worst.value, 0.0, worst.l1});
            toterr -= worst.error;
            continue;
        }
        detail::Panel left = detail::eval_panel(f, worst.a, mid);
        detail::Panel right = detail::eval_panel(f, mid, worst.b);
        if (!std::isfinite(left.value) || !std::isfinite(right.value))
            throw NonConvergence("integrate_interval: non-finite integrand");
        total += left.value + right.value - worst.value;
        toterr += left.error + right.error - worst.error;
        totl1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
        ++splits;
    }
    return {total, toterr, heap.size()};
}

/// Integral of f over [r0, r1] with r1 possibly +infinity.
/// Infinite tails are mapped by r = r0 + t/(1-t) onto t in [0,1).
/// Caller asserts f decays at least like r^{-1-delta}; violations surface
/// as DivergentTail (non-finite mapped integrand or a tail that will not shrink).
inline double integrate_radial(const std::function<double(double)>& f, double r0, double r1,
                               const QuadratureSpec& spec = {}) {
    if (std::isinf(r1)) {
        auto g = [&](double t) {
            double om = 1.0 - t;
            double r = r0 + t / om;
            return f(r) / (om * om);
        };
        try {
            return integrate_interval(g, 0.0, 1.0, spec).value;
        } catch (const NonConvergence& e) {
            // probe the tail: if the mapped integrand is still large near t=1,
            // the decay precondition is violated
            double probe = std::abs(g(1.0 - 1e-8)) * 1e-8;
            if (!std::isfinite(probe) || probe > spec.abs_tol)
                throw DivergentTail(std::string("integrate_radial: tail fails to shrink (") +
                                    e.what() + ")");
            throw;
        }
    }
    return integrate_interval(f, r0, r1, spec).value;
}

/// Fixed-order Gauss-Legendre nodes/weights on [-1,1].
template <unsigned Order>
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_rule() {
    static const auto rule = [] {
        using G = boost::math::quadrature::gauss<double, Order>;
        std::vector<double> x, w;
        const auto& ab = G::abscissa();  // non-negative half
        const auto& ww = G::weights();
        for (std::size_t i = ab.size(); i-- > 0;) {
            if (ab[i] > 0.0) {
                x.push_back(-ab[i]);
                w.push_back(ww[i]);
            }
        }
        for (std::size_t i = 0; i < ab.size(); ++i) {
            x.push_back(ab[i]);
            w.push_back(ww[i]);
        }
        return std::make_pair(x, w);
    }();
    return rule;
}

/// Fixed-order Gauss-Legendre quadrature of f on [a,b].
template <unsigned Order>
inline double gauss_fixed(const std::function<double(double)>& f, double a, double b) {
    const auto& [x, w] = gauss_rule<Order>();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(c + h * x[i]);
    return acc * h;
}

}  // namespace critpeak::numerics
