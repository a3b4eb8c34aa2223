#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "critpeak/errors.hpp"

namespace critpeak::numerics {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct NewtonConfig {
    int max_iters = 60;
    double residual_tol = 1e-12;
    double damping_min = 1.0 / 1024.0;

    void validate() const {
        if (!(residual_tol > 0.0)) throw InvalidArgument("NewtonConfig: residual_tol must be > 0");
        if (!(damping_min > 0.0 && damping_min <= 1.0))
            throw InvalidArgument("NewtonConfig: damping_min must lie in (0,1]");
        if (max_iters < 1) throw InvalidArgument("NewtonConfig: max_iters must be >= 1");
    }
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

/// Centered finite-difference Jacobian with step h = eps_mach^{1/3} * scale.
inline Matrix fd_jacobian(const ResidualFn& F, const Vector& x) {
    const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    const Eigen::Index n = x.size();
    Vector Fx = F(x);
    Matrix J(Fx.size(), n);
    Vector xp = x, xm = x;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = h0 * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        J.col(j) = (F(xp) - F(xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return J;
}

/// Damped Newton iteration: returns x with ||F(x)||_inf <= residual_tol.
/// J may be empty, in which case centered finite differences are used.
inline Vector newton_solve(const ResidualFn& F, const JacobianFn& J, Vector x,
                           const NewtonConfig& cfg = {}) {
    cfg.validate();
    Vector Fx = F(x);
    double res = Fx.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < cfg.max_iters; ++it) {
        if (res <= cfg.residual_tol) return x;
        Matrix Jx = J ? J(x) : fd_jacobian(F, x);
        Eigen::PartialPivLU<Matrix> lu(Jx);
        Vector dx = lu.solve(-Fx);
        if (!dx.allFinite() || (Jx * dx + Fx).lpNorm<Eigen::Infinity>() > 1e-6 * std::max(1.0, res))
            throw SingularJacobian("newton_solve: linear solve failed");
        double t = 1.0;
        Vector xn;
        Vector Fn;
        double rn = res;
        while (true) {
            xn = x + t * dx;
            Fn = F(xn);
            rn = Fn.lpNorm<Eigen::Infinity>();
            if (std::isfinite(rn) && (rn < res * (1.0 - 0.25 * t) || rn <= cfg.residual_tol)) break;
            if (t <= cfg.damping_min) break;
            t *= 0.5;
        }
        x = xn;
        Fx = Fn;
        res = rn;
    }
    if (res <= cfg.residual_tol) return x;
    throw NonConvergence("newton_solve: residual " + std::to_string(res) + " after " +
                         std::to_string(cfg.max_iters) + " iterations");
}

inline Vector newton_solve(const ResidualFn& F, Vector x0, const NewtonConfig& cfg = {}) {
    return newton_solve(F, JacobianFn{}, std::move(x0), cfg);
}

}  // namespace critpeak::numerics
