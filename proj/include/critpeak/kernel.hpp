#pragma once

// Bubble profiles U_{x,lambda}, their parameter derivatives, the limit
// kernels psi_i, the Green's function of a ball (method of images), and the
// projection PU = U - phi onto zero Dirichlet boundary data.

#include <cmath>
#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "critpeak/errors.hpp"
#include "critpeak/numerics/quadrature.hpp"
#include "critpeak/numerics/special.hpp"

namespace critpeak::kernel {

using Eigen::VectorXd;

/// U_{x,lambda}(y) = (N(N-2))^{(N-2)/4} lambda^{(N-2)/2} (1+lambda^2|y-x|^2)^{-(N-2)/2}
struct Bubble {
    VectorXd center;
    double height = 1.0;
    int dimension = 3;

    Bubble() = default;
    Bubble(VectorXd x, double lambda, int N)
        : center(std::move(x)), height(lambda), dimension(N) {
        if (!(height > 0.0)) throw InvalidArgument("Bubble: height must be > 0");
        if (dimension < 3) throw InvalidArgument("Bubble: dimension must be >= 3");
        if (center.size() != dimension) throw InvalidArgument("Bubble: center dim mismatch");
    }
};

/// Normalization constant (N(N-2))^{(N-2)/4}.
inline double bubble_norm(int N) { return std::pow(double(N) * (N - 2), 0.25 * (N - 2)); }

inline double eval_bubble_radial(int N, double lambda, double r) {
    return bubble_norm(N) * std::pow(lambda, 0.5 * (N - 2)) *
           std::pow(1.0 + lambda * lambda * r * r, -0.5 * (N - 2));
}

inline double eval_bubble(const Bubble& b, const VectorXd& y) {
    return eval_bubble_radial(b.dimension, b.height, (y - b.center).norm());
}

/// dU/dlambda at radius r = |y-x|.
inline double bubble_dlambda_radial(int N, double lambda, double r) {
    const double t = lambda * lambda * r * r;
    return bubble_norm(N) * 0.5 * (N - 2) * std::pow(lambda, 0.5 * (N - 4)) * (1.0 - t) *
           std::pow(1.0 + t, -0.5 * N);
}

/// (dU/dlambda, dU/dx) where dU/dx differentiates the center coordinates.
inline std::pair<double, VectorXd> bubble_derivatives(const Bubble& b, const VectorXd& y) {
    const int N = b.dimension;
    const double lam = b.height;
    const VectorXd d = y - b.center;
    const double t = lam * lam * d.squaredNorm();
    const double dlam = bubble_dlambda_radial(N, lam, d.norm());
    // dU/dx^i = c_N (N-2) lambda^{(N+2)/2} (y-x)_i (1+t)^{-N/2}
    VectorXd dx = bubble_norm(N) * (N - 2) * std::pow(lam, 0.5 * (N + 2)) *
                  std::pow(1.0 + t, -0.5 * N) * d;
    return {dlam, dx};
}

/// Limit kernels of the linearized operator at the standard bubble:
///   psi_0 = dU_{0,lambda}/dlambda at lambda=1, psi_i = dU_{x,1}/dx^i at x=0.
inline double limit_kernels(int N, int i, const VectorXd& y) {
    const double t = y.squaredNorm();
    if (i == 0) return bubble_norm(N) * 0.5 * (N - 2) * (1.0 - t) * std::pow(1.0 + t, -0.5 * N);
    return bubble_norm(N) * (N - 2) * y[i - 1] * std::pow(1.0 + t, -0.5 * N);
}

/// Ball of radius R centered at the origin.
struct BallDomain {
    int dimension = 3;
    double radius = 1.0;

    BallDomain() = default;
    BallDomain(int N, double R) : dimension(N), radius(R) {
        if (!(radius > 0.0)) throw InvalidArgument("BallDomain: radius must be > 0");
        if (dimension < 3) throw InvalidArgument("BallDomain: dimension must be >= 3");
    }
    bool contains(const VectorXd& y) const { return y.norm() < radius; }
};

/// Green's function of the ball by the method of images.
/// G(x,y) = c_N' (|x-y|^{2-N} - (|x||y-x*|/R)^{2-N}),  x* = R^2 x/|x|^2,
/// c_N' = 1/((N-2) omega_N). Returns (G, H) with H the regular part.
inline std::pair<double, double> green_ball(const BallDomain& domain, const VectorXd& x,
                                            const VectorXd& y) {
    const int N = domain.dimension;
    const double R = domain.radius;
    if (x.norm() >= R || y.norm() >= R) throw OutsideDomain("green_ball: point outside the ball");
    const double d = (x - y).norm();
    if (d == 0.0) throw CoincidentPoints("green_ball: x == y");
    const double cN = 1.0 / ((N - 2) * numerics::sphere_area(N));
    const double xn = x.norm();
    // |x| |y - x*| is symmetric in (x,y); as x -> 0 it tends to R^2
    double img;
    if (xn < 1e-14 * R) {
        img = R;
    } else {
        VectorXd xstar = (R * R / (xn * xn)) * x;
        img = xn * (y - xstar).norm() / R;
    }
    const double H = cN * std::pow(img, 2.0 - N);
    const double G = cN * std::pow(d, 2.0 - N) - H;
    return {G, H};
}

enum class ProjectionMode {
    ExactConstantBoundary,  // centered bubble in a ball: boundary trace is constant
    PoissonKernel,          // harmonic extension via the Poisson integral
    ReyLeadingOrder,        // phi ~ c_N lambda^{-(N-2)/2} (N-2) omega_N H(x,y)
};

namespace detail {

/// Integral over the sphere |z| = R of an integrand depending only on the
/// components of z along two fixed directions. Product Gauss in the two
/// polar angles; the remaining S^{N-3} factor is exact.
template <unsigned Order = 48>
inline double sphere_integral_2axis(int N, double R,
                                    const std::function<double(double, double)>& f_c1_c2) {
    // z . e1 = R cos(th), z . e2 = R sin(th) cos(ps)
    const auto& [xs, ws] = numerics::gauss_rule<Order>();
    const double pi = 3.141592653589793238462643383279502884;
    const double slice = (N >= 4) ? numerics::sphere_area(N - 2) : 2.0;  // |S^{N-3}|, S^0 = 2 pts
    double acc = 0.0;
    for (std::size_t a = 0; a < xs.size(); ++a) {
        const double th = 0.5 * pi * (xs[a] + 1.0);
        const double sth = std::sin(th), cth = std::cos(th);
        double inner = 0.0;
        for (std::size_t b = 0; b < xs.size(); ++b) {
            const double ps = 0.5 * pi * (xs[b] + 1.0);
            double wps = (N >= 4) ? std::pow(std::sin(ps), double(N - 3)) : 1.0;
            inner += ws[b] * wps * f_c1_c2(R * cth, R * sth * std::cos(ps));
        }
        acc += ws[a] * std::pow(sth, double(N - 2)) * inner * (0.5 * pi);
    }
    // azimuthal S^{N-3} measure for N>=4; the N=3 case integrates psi over
    // [0,pi] twice (cos is even about pi), matching the full [0,2pi] circle
    return acc * (0.5 * pi) * slice * std::pow(R, double(N - 1));
}

/// Poisson kernel of the ball: P(y,z) = (R^2-|y|^2) / (omega_N R |y-z|^N).
inline double poisson_kernel(int N, double R, const VectorXd& y, const VectorXd& z) {
    const double num = R * R - y.squaredNorm();
    return num / (numerics::sphere_area(N) * R * std::pow((y - z).norm(), double(N)));
}

// Orthonormal frame spanning {x, y} (padded when degenerate).
inline std::pair<VectorXd, VectorXd> span_frame(const VectorXd& x, const VectorXd& y) {
    const int n = static_cast<int>(x.size());
    VectorXd e1, e2;
    if (x.norm() > 1e-14) {
        e1 = x.normalized();
    } else if (y.norm() > 1e-14) {
        e1 = y.normalized();
    } else {
        e1 = VectorXd::Unit(n, 0);
    }
    VectorXd y2 = y - y.dot(e1) * e1;
    if (y2.norm() > 1e-12 * std::max(1.0, y.norm())) {
        e2 = y2.normalized();
    } else {
        int k = 0;
        double best = std::abs(e1[0]);
        for (int i = 1; i < n; ++i)
            if (std::abs(e1[i]) < best) best = std::abs(e1[i]), k = i;
        VectorXd u = VectorXd::Unit(n, k);
        e2 = (u - u.dot(e1) * e1).normalized();
    }
    return {e1, e2};
}

}  // namespace detail

/// Harmonic extension phi of the boundary trace of U_{x,lambda} on the ball,
/// evaluated at y, by the Poisson integral. Exact at |y| = R (continuity).
inline double phi_poisson(const Bubble& b, const BallDomain& dom, const VectorXd& y) {
    const int N = dom.dimension;
    const double R = dom.radius;
    const double yn = y.norm();
    if (yn >= R * (1.0 - 1e-13)) return eval_bubble(b, y.normalized() * R);
    auto [e1, e2] = detail::span_frame(b.center, y);
    const double xc1 = b.center.dot(e1), xc2 = b.center.dot(e2);
    const double yc1 = y.dot(e1), yc2 = y.dot(e2);
    const double xsq = b.center.squaredNorm(), ysq = y.squaredNorm();
    // both |z-x| and |z-y| depend only on the two frame components of z
    auto f = [&](double z1, double z2) {
        const double zx = xsq + R * R - 2.0 * (z1 * xc1 + z2 * xc2);
        const double zy = ysq + R * R - 2.0 * (z1 * yc1 + z2 * yc2);
        const double U = eval_bubble_radial(N, b.height, std::sqrt(std::max(zx, 0.0)));
        const double P = (R * R - ysq) /
                         (numerics::sphere_area(N) * R * std::pow(std::max(zy, 0.0), 0.5 * N));
        return U * P;
    };
    return detail::sphere_integral_2axis(N, R, f);
}

/// Rey's leading-order form of phi: c_N lambda^{-(N-2)/2} (N-2) omega_N H(x,y).
/// The normalization is fixed by the exact centered-bubble case.
inline double phi_rey(const Bubble& b, const BallDomain& dom, const VectorXd& y) {
    const int N = dom.dimension;
    auto [G, H] = green_ball(dom, b.center, y);
    (void)G;
    return bubble_norm(N) * std::pow(b.height, -0.5 * (N - 2)) * (N - 2) *
           numerics::sphere_area(N) * H;
}

/// (PU, phi) at y for the requested projection mode.
inline std::pair<double, double> project_bubble(const Bubble& b, const BallDomain& dom,
                                                ProjectionMode mode, const VectorXd& y) {
    if (b.dimension != dom.dimension)
        throw ModeDomainMismatch("project_bubble: bubble/domain dimension mismatch");
    const double U = eval_bubble(b, y);
    double phi = 0.0;
    switch (mode) {
        case ProjectionMode::ExactConstantBoundary: {
            if (b.center.norm() > 1e-14 * dom.radius)
                throw ModeDomainMismatch(
                    "ExactConstantBoundary requires a centered bubble in a ball");
            phi = eval_bubble_radial(b.dimension, b.height, dom.radius);
            break;
        }
        case ProjectionMode::PoissonKernel:
            phi = phi_poisson(b, dom, y);
            break;
        case ProjectionMode::ReyLeadingOrder:
            phi = phi_rey(b, dom, y);
            break;
    }
    return {U - phi, phi};
}

/// d(phi)/dlambda for the centered bubble (closed form of the constant trace).
inline double phi_exact_dlambda(const Bubble& b, const BallDomain& dom) {
    return bubble_dlambda_radial(b.dimension, b.height, dom.radius);
}

}  // namespace critpeak::kernel
