#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "critpeak/errors.hpp"

namespace critpeak {

/// Coefficient Q(x) modelled as a quadratic about a critical point:
///   Q(x) = value + 0.5 (x-a)^T H (x-a),  with grad Q(a) = 0.
/// This covers the named CLI families ("constant", "paraboloid") and makes
/// every weighted integral over a sphere reducible to exact angular moments.
struct WeightSpec {
    double value = 1.0;            // Q(a)
    Eigen::VectorXd peak;          // a
    Eigen::MatrixXd hessian;       // D^2 Q(a), symmetric

    static WeightSpec constant(int dim, double q0 = 1.0) {
        WeightSpec w;
        w.value = q0;
        w.peak = Eigen::VectorXd::Zero(dim);
        w.hessian = Eigen::MatrixXd::Zero(dim, dim);
        return w;
    }

    /// Q(x) = q0 + 0.5 (x-a)^T H (x-a). The standard Q = Q0 - |x|^2 is
    /// paraboloid(dim, Q0, -2 I, 0).
    static WeightSpec paraboloid(int dim, double q0, const Eigen::MatrixXd& hess,
                                 const Eigen::VectorXd& a) {
        WeightSpec w;
        w.value = q0;
        w.peak = a;
        w.hessian = 0.5 * (hess + hess.transpose());
        if (w.peak.size() != dim || w.hessian.rows() != dim)
            throw InvalidArgument("WeightSpec: dimension mismatch");
        return w;
    }

    int dim() const { return static_cast<int>(peak.size()); }
    double operator()(const Eigen::VectorXd& x) const {
        Eigen::VectorXd d = x - peak;
        return value + 0.5 * d.dot(hessian * d);
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return hessian * (x - peak); }
    double laplacian() const { return hessian.trace(); }
    bool is_constant() const { return hessian.isZero(0.0); }
};

}  // namespace critpeak
