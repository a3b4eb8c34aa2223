#pragma once

// Closed constants (A, B, omega_N, S), the decay-rate functions eta/eta1,
// and quadrature evaluators for the interaction integrals of the reduction,
// each paired with its leading-order prediction so the asymptotic lemmas
// become testable ratio statements.

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "critpeak/errors.hpp"
#include "critpeak/kernel.hpp"
#include "critpeak/numerics/quadrature.hpp"
#include "critpeak/numerics/special.hpp"
#include "critpeak/weight.hpp"

namespace critpeak::asymptotics {

using kernel::Bubble;
using numerics::QuadratureSpec;

struct ConstantsTable {
    int N = 0;
    double s = 1.0;
    double A = 0.0;        // (1/N) int |y|^2 (1+|y|^2)^{-N} dy
    double B = 0.0;        // int (1+|y|^2)^{-(N-2)(s+1)/2} dy
    double omega_N = 0.0;  // surface measure of S^{N-1}
    double S = 0.0;        // best Sobolev constant via the bubble quotient
};

inline double critical_exponent(int N) { return 2.0 * N / (N - 2.0); }

/// A and B by radial quadrature, omega_N by the Gamma closed form, S via the
/// Sobolev quotient of the standard bubble.
inline ConstantsTable compute_constants(int N, double s, const QuadratureSpec& spec = {}) {
    if (N < 3) throw InvalidArgument("compute_constants: N must be >= 3");
    if (!(s >= 1.0 && s < (N + 2.0) / (N - 2.0)))
        throw InvalidArgument("compute_constants: s must lie in [1, 2*-1)");
    ConstantsTable t;
    t.N = N;
    t.s = s;
    t.omega_N = numerics::sphere_area(N);
    t.A = (t.omega_N / N) *
          numerics::integrate_radial(
              [N](double r) { return std::pow(r, N + 1) * std::pow(1.0 + r * r, -double(N)); },
              0.0, std::numeric_limits<double>::infinity(), spec);
    const double p = 0.5 * (N - 2) * (s + 1);
    if (2.0 * p == double(N)) {
        // log-divergent boundary family (N + s = 5): the role of B is played
        // by the unit-sphere measure in front of log(lambda)/lambda^2
        t.B = t.omega_N;
    } else if (2.0 * p < double(N)) {
        throw DivergentIntegral("compute_constants: B diverges, needs (N-2)(s+1) >= N");
    } else {
        t.B = t.omega_N *
              numerics::integrate_radial(
                  [N, p](double r) { return std::pow(r, N - 1) * std::pow(1.0 + r * r, -p); },
                  0.0, std::numeric_limits<double>::infinity(), spec);
    }
    const double cN = kernel::bubble_norm(N);
    const double grad2 = cN * cN * (N - 2) * (N - 2) * t.omega_N *
                         numerics::integrate_radial(
                             [N](double r) {
                                 return std::pow(r, N + 1) * std::pow(1.0 + r * r, -double(N));
                             },
                             0.0, std::numeric_limits<double>::infinity(), spec);
    const double mass = std::pow(cN, critical_exponent(N)) * t.omega_N *
                        numerics::integrate_radial(
                            [N](double r) {
                                return std::pow(r, N - 1) * std::pow(1.0 + r * r, -double(N));
                            },
                            0.0, std::numeric_limits<double>::infinity(), spec);
    t.S = grad2 / std::pow(mass, (N - 2.0) / N);
    return t;
}

/// Decay rate eta(lambda): case selection on the sign of (N-2)s - N.
/// The middle case carries the log factor; no continuity across boundaries.
inline double eval_eta(int N, double s, double lambda) {
    const double q = (N - 2) * s;
    if (q > N) return std::pow(lambda, -(N - 0.5 * q));
    if (q == N) return std::log(lambda) * std::pow(lambda, -(N - 0.5 * q));
    return std::pow(lambda, -0.5 * q);
}

/// Decay rate eta1(lambda): case selection on the sign of s - (N+2)/(2(N-2)).
inline double eval_eta1(int N, double s, double lambda) {
    const double sc = (N + 2.0) / (2.0 * (N - 2.0));
    const double expo = 0.5 * (N + 2) - 0.5 * (N - 2) * s;
    if (s > sc) return std::pow(lambda, -expo);
    if (s == sc) return std::pow(std::log(lambda), (N + 2.0) / (2.0 * N)) * std::pow(lambda, -expo);
    return std::pow(lambda, -0.5 * (N - 2) * s);
}

struct ValueWithLeading {
    double value = 0.0;
    double leading = 0.0;
};

namespace detail {

// PU and d(PU)/dlambda for a bubble centered in the ball of radius d
// (projection with exact constant boundary trace).
struct CenteredProjection {
    int N;
    double lambda, d;
    double phi, dphi;
    CenteredProjection(int N_, double lambda_, double d_) : N(N_), lambda(lambda_), d(d_) {
        phi = kernel::eval_bubble_radial(N, lambda, d);
        dphi = kernel::bubble_dlambda_radial(N, lambda, d);
    }
    double pu(double r) const { return kernel::eval_bubble_radial(N, lambda, r) - phi; }
    double dpu_dlambda(double r) const {
        return kernel::bubble_dlambda_radial(N, lambda, r) - dphi;
    }
};

// shells on [0, d] with weight omega_N r^{N-1}
inline double radial_ball_integral(int N, double d, const std::function<double(double)>& f,
                                   const QuadratureSpec& spec) {
    return numerics::sphere_area(N) *
           numerics::integrate_radial([&](double r) { return f(r) * std::pow(r, N - 1); }, 0.0, d,
                                      spec);
}

// int_{R^N} f(|z-c1|, |z-c2|) dz reduced to (r, angle) about c1, with
// D = |c1-c2|: |z-c2|^2 = r^2 + D^2 - 2 r D cos(th). The angle integral is
// adaptive as well: near r = D the second center pierces the shell and the
// integrand concentrates in a narrow angular window.
inline double two_center_integral(int N, double D, double rmax,
                                  const std::function<double(double, double)>& f_r1_r2,
                                  const QuadratureSpec& spec) {
    const double pi = 3.141592653589793238462643383279502884;
    const double ring = (N >= 3) ? numerics::sphere_area(N - 1) : 2.0;  // |S^{N-2}|
    QuadratureSpec inner;
    inner.rel_tol = std::max(spec.rel_tol, 1e-9);
    inner.abs_tol = 0.0;  // terminate on the relative target or the noise floor
    auto radial = [&](double r) {
        auto ang = [&](double th) {
            const double r2 =
                std::sqrt(std::max(r * r + D * D - 2.0 * r * D * std::cos(th), 0.0));
            return f_r1_r2(r, r2) * std::pow(std::sin(th), double(N - 2));
        };
        return numerics::integrate_interval(ang, 0.0, pi, inner).value * std::pow(r, N - 1);
    };
    QuadratureSpec outer;
    outer.rel_tol = std::max(spec.rel_tol, 1e-8);
    outer.abs_tol = 0.0;
    outer.max_subdivisions = spec.max_subdivisions;
    return ring * numerics::integrate_radial(radial, 0.0, rmax, outer);
}

}  // namespace detail

/// int_{B_d(x_b)} ((x - x_b) . grad Q) PU^{2*} dx, with the leading-order
/// prediction c_N^{2*} A DeltaQ / lambda^2. The quadratic weight makes the
/// angular moments exact, reducing to a 1-D radial integral.
inline ValueWithLeading weighted_mass_dilation(const Bubble& b, const WeightSpec& Q, double d,
                                               const QuadratureSpec& spec = {}) {
    const int N = b.dimension;
    const double lam = b.height;
    detail::CenteredProjection proj(N, lam, d);
    const double dq = Q.laplacian();
    // angular average of (y . H (y + delta)) over |y| = r is (tr H / N) r^2
    auto f = [&](double r) {
        return (dq / N) * r * r * std::pow(proj.pu(r), critical_exponent(N));
    };
    ValueWithLeading out;
    out.value = Q.is_constant() ? 0.0 : detail::radial_ball_integral(N, d, f, spec);
    const double c2s = std::pow(kernel::bubble_norm(N), critical_exponent(N));
    const double A = compute_constants(N, 1.0, spec).A;
    out.leading = c2s * A * dq / (lam * lam);
    return out;
}

/// int_{B_d} PU^{s+1} dx with the Lemma 3.1 leading order:
///   c_N^{s+1} B lambda^{-(2-(N-2)(s-1)/2)}          for N+s != 5,
///   c_N^{s+1} omega_N log(lambda)/lambda^2           for N+s  = 5.
/// d may be +infinity (then the unprojected bubble is integrated).
inline ValueWithLeading bubble_power_mass(const Bubble& b, double s, double d,
                                          const QuadratureSpec& spec = {}) {
    const int N = b.dimension;
    const double lam = b.height;
    ValueWithLeading out;
    if (std::isinf(d)) {
        out.value = detail::radial_ball_integral(
            N, std::numeric_limits<double>::infinity(),
            [&](double r) { return std::pow(kernel::eval_bubble_radial(N, lam, r), s + 1.0); },
            spec);
    } else {
        detail::CenteredProjection proj(N, lam, d);
        out.value = detail::radial_ball_integral(
            N, d, [&](double r) { return std::pow(proj.pu(r), s + 1.0); }, spec);
    }
    const double cs1 = std::pow(kernel::bubble_norm(N), s + 1.0);
    if (N + s == 5.0) {
        out.leading = cs1 * numerics::sphere_area(N) * std::log(lam) / (lam * lam);
    } else {
        const double p = 0.5 * (N - 2) * (s + 1);
        const double Bc = numerics::sphere_area(N) * 0.5 *
                          numerics::beta_fn(0.5 * N, p - 0.5 * N);  // Beta closed form
        out.leading = cs1 * Bc * std::pow(lam, -(2.0 - 0.5 * (N - 2) * (s - 1)));
    }
    return out;
}

enum class InteractionKind {
    DilationWeighted,          // int (Q-Q(a)) PU^{2*-1} dPU/dlambda
    TranslationWeighted,       // int (Q-Q(a)) PU^{2*-1} dPU/dx^1
    SubcriticalDilation,       // int PU^s dPU/dlambda
    TranslationSubcritical,    // int U^s dU/dx^1 over a ball about the peak
    CrossDilationCritical,     // int PU_l |d(PU_j^{2*-1})/dlambda|
    CrossDilationSubcritical,  // int PU_l |d(PU_j^s)/dlambda|
    CrossTranslationCritical,  // int PU_l |d(PU_j^{2*-1})/dx^1|
    CrossTranslationSubcritical
};

/// int_{B_d(x_b)} (Q - Q(a)) PU^{2*-1} dPU/dlambda with the (3-13-21)-type
/// leading order -(N-2)/(2N) c_N^{2*} A DeltaQ / lambda^3.
inline ValueWithLeading dilation_weighted(const Bubble& b, const WeightSpec& Q, double d,
                                          const QuadratureSpec& spec = {}) {
    const int N = b.dimension;
    const double lam = b.height;
    const double ts = critical_exponent(N);
    detail::CenteredProjection proj(N, lam, d);
    const Eigen::VectorXd delta = b.center - Q.peak;
    const double dq = Q.laplacian();
    const double c0 = 0.5 * delta.dot(Q.hessian * delta);
    auto f = [&](double r) {
        // avg over |y|=r of Q(x_b+y) - Q(a) is (DeltaQ/(2N)) r^2 + const term
        const double avg = 0.5 * (dq / N) * r * r + c0;
        return avg * std::pow(proj.pu(r), ts - 1.0) * proj.dpu_dlambda(r);
    };
    ValueWithLeading out;
    out.value = Q.is_constant() ? 0.0 : detail::radial_ball_integral(N, d, f, spec);
    const double A = compute_constants(N, 1.0, spec).A;
    out.leading = -(N - 2.0) / (2.0 * N) * std::pow(kernel::bubble_norm(N), ts) * A * dq /
                  (lam * lam * lam);
    return out;
}

/// int_{B_d(x_b)} (Q - Q(a)) PU^{2*-1} dPU/dx^1 with the (3-13-31)-type
/// leading order (N-2)/N c_N^{2*} I1 (H (x_b - a))_1, I1 = int |x|^2/(1+|x|^2)^{N+1}.
inline ValueWithLeading translation_weighted(const Bubble& b, const WeightSpec& Q, double d,
                                             const QuadratureSpec& spec = {}) {
    const int N = b.dimension;
    const double lam = b.height;
    const double cN = kernel::bubble_norm(N);
    const double ts = critical_exponent(N);
    detail::CenteredProjection proj(N, lam, d);
    const Eigen::VectorXd hd = Q.hessian * (b.center - Q.peak);
    auto f = [&](double r) {
        // avg over |y|=r of (Q(x_b+y) - Q(a)) y_1 = (r^2/N) (H delta)_1
        const double g = cN * (N - 2) * std::pow(lam, 0.5 * (N + 2)) *
                         std::pow(1.0 + lam * lam * r * r, -0.5 * N);
        return (r * r / N) * hd[0] * std::pow(proj.pu(r), ts - 1.0) * g;
    };
    ValueWithLeading out;
    out.value = Q.is_constant() ? 0.0 : detail::radial_ball_integral(N, d, f, spec);
    const double I1 = numerics::sphere_area(N) * 0.5 * numerics::beta_fn(0.5 * (N + 2), 0.5 * N);
    out.leading = (N - 2.0) / N * std::pow(cN, ts) * I1 * hd[0];
    return out;
}

/// int_{B_d} PU^s dPU/dlambda with the (3-13-51)-type leading order.
inline ValueWithLeading subcritical_dilation(const Bubble& b, double s, double d,
                                             const QuadratureSpec& spec = {}) {
    const int N = b.dimension;
    const double lam = b.height;
    detail::CenteredProjection proj(N, lam, d);
    ValueWithLeading out;
    out.value = detail::radial_ball_integral(
        N, d, [&](double r) { return std::pow(proj.pu(r), s) * proj.dpu_dlambda(r); }, spec);
    const double cs1 = std::pow(kernel::bubble_norm(N), s + 1.0);
    if (N + s == 5.0) {
        out.leading = -(2.0 / (s + 1.0)) * cs1 * numerics::sphere_area(N) * std::log(lam) /
                      (lam * lam * lam);
    } else {
        const double p = 0.5 * (N - 2) * (s + 1);
        const double Bc = numerics::sphere_area(N) * 0.5 * numerics::beta_fn(0.5 * N, p - 0.5 * N);
        out.leading = -(4.0 - (N - 2) * (s - 1.0)) / (2.0 * (s + 1.0)) * cs1 * Bc *
                      std::pow(lam, -(3.0 - 0.5 * (N - 2) * (s - 1)));
    }
    return out;
}

/// int_{B_d(a)} U^s dU/dx^1 for a bubble centered at a + offset*e1. The
/// integrand is the exact divergence -(1/(s+1)) d(U^{s+1})/dy^1, so the value
/// reduces to the boundary term -(1/(s+1)) int_{dB_d(a)} U^{s+1} nu^1, of
/// size O(lambda^{-(N-2)(s+1)/2}) (the (3-13-43) step). Returns that
/// boundary quadrature and the envelope rate with unit constant.
inline ValueWithLeading translation_subcritical(const Bubble& b, double s, double d,
                                                double offset,
                                                const QuadratureSpec& spec = {}) {
    (void)spec;
    const int N = b.dimension;
    const double lam = b.height;
    const double pi = 3.141592653589793238462643383279502884;
    const double ring = numerics::sphere_area(N - 1);
    // nu^1-moment over the sphere of radius d about the ball center, with the
    // bubble at distance `offset` along e1
    auto ang = [&](double th) {
        const double r2 =
            std::sqrt(std::max(d * d + offset * offset - 2.0 * d * offset * std::cos(th), 0.0));
        const double U = kernel::eval_bubble_radial(N, lam, r2);
        return std::pow(U, s + 1.0) * std::cos(th) * std::pow(std::sin(th), double(N - 2));
    };
    ValueWithLeading out;
    out.value = -(1.0 / (s + 1.0)) * ring * std::pow(d, N - 1) *
                numerics::gauss_fixed<64>(ang, 0.0, pi);
    out.leading = std::pow(lam, -0.5 * (N - 2) * (s + 1));
    return out;
}

/// Cross-bubble interaction with the O(.) rate of the (4-26-2) family.
/// value: full 2-center quadrature with unprojected bubbles (upper bound for
/// the projected integrand); leading: the bare rate in min(lambda).
inline ValueWithLeading cross_interaction(const Bubble& bj, const Bubble& bl,
                                          InteractionKind kind, double s,
                                          const QuadratureSpec& spec = {}) {
    const int N = bj.dimension;
    const double D = (bj.center - bl.center).norm();
    if (D <= 0.0) throw SeparationViolated("cross_interaction: coincident centers");
    const double hr = bj.height / bl.height;
    if (hr < 0.1 || hr > 10.0)
        throw SeparationViolated("cross_interaction: heights not comparable");
    const double lj = bj.height, ll = bl.height;
    const double ts = critical_exponent(N);
    const double lam = std::min(lj, ll);
    auto dmag_dlambda = [&](double r, double p) {
        // |d(U^p)/dlambda| = p U^{p-1} |dU/dlambda|
        const double U = kernel::eval_bubble_radial(N, lj, r);
        return p * std::pow(U, p - 1.0) * std::abs(kernel::bubble_dlambda_radial(N, lj, r));
    };
    auto dmag_dx = [&](double r, double p) {
        const double U = kernel::eval_bubble_radial(N, lj, r);
        const double g = kernel::bubble_norm(N) * (N - 2) * std::pow(lj, 0.5 * (N + 2)) *
                         std::pow(1.0 + lj * lj * r * r, -0.5 * N) * r;
        return p * std::pow(U, p - 1.0) * g;  // |grad-in-center component| <= this
    };
    std::function<double(double, double)> f;
    ValueWithLeading out;
    switch (kind) {
        case InteractionKind::CrossDilationCritical:
            f = [&](double rj, double rl) {
                return kernel::eval_bubble_radial(N, ll, rl) * dmag_dlambda(rj, ts - 1.0);
            };
            out.leading = std::pow(lam, -(N - 1.0));
            break;
        case InteractionKind::CrossDilationSubcritical:
            f = [&](double rj, double rl) {
                return kernel::eval_bubble_radial(N, ll, rl) * dmag_dlambda(rj, s);
            };
            out.leading = std::pow(lam, -(N - 1.0));
            break;
        case InteractionKind::CrossTranslationCritical:
            f = [&](double rj, double rl) {
                return kernel::eval_bubble_radial(N, ll, rl) * dmag_dx(rj, ts - 1.0);
            };
            out.leading = std::pow(lam, -(N - 3.0));
            break;
        case InteractionKind::CrossTranslationSubcritical:
            f = [&](double rj, double rl) {
                return kernel::eval_bubble_radial(N, ll, rl) * dmag_dx(rj, s);
            };
            out.leading = std::pow(lam, -(N - 3.0));
            break;
        default:
            throw InvalidArgument("cross_interaction: not a cross kind");
    }
    auto swapped = [&](double r1, double r2) { return f(r2, r1); };
    // integrate about the l-center so the j-distance enters through the angle
    out.value = detail::two_center_integral(N, D, std::numeric_limits<double>::infinity(), swapped,
                                            spec);
    return out;
}

/// One entry point over all interaction kinds; bl and the offset of bj from
/// Q.peak are ignored by the kinds that do not use them.
inline ValueWithLeading interaction_integrals(const Bubble& bj, const Bubble& bl,
                                              InteractionKind kind, const WeightSpec& Q, double s,
                                              double d, const QuadratureSpec& spec = {}) {
    switch (kind) {
        case InteractionKind::DilationWeighted:
            return dilation_weighted(bj, Q, d, spec);
        case InteractionKind::TranslationWeighted:
            return translation_weighted(bj, Q, d, spec);
        case InteractionKind::SubcriticalDilation:
            return subcritical_dilation(bj, s, d, spec);
        case InteractionKind::TranslationSubcritical:
            return translation_subcritical(bj, s, d, (bj.center - Q.peak).norm(), spec);
        default: {
            const double sep = (bj.center - bl.center).norm();
            if (sep < 4.0 * d)
                throw SeparationViolated("interaction_integrals: |x_j - x_l| < 4d");
            return cross_interaction(bj, bl, kind, s, spec);
        }
    }
}

/// Lemma B.3 check: lhs = int |y-z|^{2-N} (1+|z|)^{-2-theta} dz, with the
/// envelope rate (1+|y|)^{-theta}, log-corrected at theta = N-2.
inline ValueWithLeading convolution_bound_check(int N, double theta, double ynorm,
                                                const QuadratureSpec& spec = {}) {
    if (!(theta > 0.0 && theta <= N - 2.0))
        throw InvalidArgument("convolution_bound_check: need 0 < theta <= N-2");
    auto f = [&](double rz, double ry) {
        // rz = |z| about the origin, ry = |z - y|
        if (ry <= 0.0) return 0.0;
        return std::pow(ry, 2.0 - N) * std::pow(1.0 + rz, -2.0 - theta);
    };
    QuadratureSpec loose = spec;
    loose.rel_tol = std::max(spec.rel_tol, 1e-7);
    ValueWithLeading out;
    out.value =
        detail::two_center_integral(N, ynorm, std::numeric_limits<double>::infinity(), f, loose);
    if (theta == double(N - 2) && ynorm > 1.0)
        out.leading = std::abs(std::log(ynorm)) * std::pow(1.0 + ynorm, -theta);
    else
        out.leading = std::pow(1.0 + ynorm, -theta);
    return out;
}

}  // namespace critpeak::asymptotics
