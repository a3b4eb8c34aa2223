#pragma once

// Radial solver for -u'' - (N-1)/r u' = Q(r) u^{2*-1} + eps u^s on (0,R),
// u'(0) = 0, u(R) = 0. Conservative second-order finite differences on a
// graded grid, damped Newton with an amplitude-pinned (bordered) fallback
// for the soft dilation mode, eps-continuation, structure extraction and
// the local-uniqueness probe.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "critpeak/asymptotics.hpp"
#include "critpeak/errors.hpp"
#include "critpeak/kernel.hpp"
#include "critpeak/numerics/quadrature.hpp"
#include "critpeak/reduced_system.hpp"

namespace critpeak::radial {

using asymptotics::ConstantsTable;

struct RadialProblem {
    int N = 4;
    double s = 1.0;
    double R = 1.0;
    std::function<double(double)> Q;  // radial profile, Q(0) > 0, Q'(0) = 0
    double Q0 = 1.0;                  // Q(0)
    double deltaQ0 = -1.0;            // Delta Q(0) = N Q''(0) < 0
    std::vector<double> grid;         // 0 = r_0 < ... < r_M = R

    /// Q(r) = q0 - curv r^2 on a graded grid r_i = R (i/M)^grade.
    static RadialProblem paraboloid(int N, double s, double R, double q0, double curv, int M,
                                    double grade) {
        RadialProblem p;
        p.N = N;
        p.s = s;
        p.R = R;
        p.Q = [q0, curv](double r) { return q0 - curv * r * r; };
        p.Q0 = q0;
        p.deltaQ0 = -2.0 * curv * N;
        p.grid.resize(M + 1);
        for (int i = 0; i <= M; ++i) p.grid[i] = R * std::pow(double(i) / M, grade);
        p.validate();
        return p;
    }

    static RadialProblem constant_weight(int N, double s, double R, double q0, int M,
                                         double grade) {
        RadialProblem p = paraboloid(N, s, R, q0, 0.0, M, grade);
        p.deltaQ0 = 0.0;
        return p;
    }

    void validate() const {
        if (N < 3) throw InvalidArgument("RadialProblem: N must be >= 3");
        if (!(s >= 1.0 && s < (N + 2.0) / (N - 2.0)))
            throw InvalidArgument("RadialProblem: s outside [1, 2*-1)");
        if (grid.size() < 9 || grid.front() != 0.0 || grid.back() != R)
            throw InvalidArgument("RadialProblem: grid must span [0, R]");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1])) throw InvalidArgument("RadialProblem: grid not increasing");
        // graded toward 0: spacing near the origin no larger than near R
        if (grid[1] - grid[0] > grid.back() - grid[grid.size() - 2] + 1e-15)
            throw InvalidArgument("RadialProblem: grid must be graded toward 0");
        for (double r : grid)
            if (!(Q(r) > 0.0)) throw InvalidArgument("RadialProblem: Q must be positive on [0,R]");
    }
    int M() const { return static_cast<int>(grid.size()) - 1; }
};

struct Tridiagonal {
    std::vector<double> lo, di, up;
};

/// Thomas algorithm; overwrites nothing, returns the solution.
inline std::vector<double> tridiag_solve(const Tridiagonal& T, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    std::vector<double> c(T.up), d(T.di);
    for (std::size_t i = 1; i < n; ++i) {
        const double m = T.lo[i] / d[i - 1];
        d[i] -= m * c[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - c[i] * x[i + 1]) / d[i];
    return x;
}

namespace detail {

/// Discrete operator rows. Interior rows use the conservative flux form of
/// the radial Laplacian, -(r^{N-1} u')' / r^{N-1}; the center row uses the
/// regularized limit -N u''(0) with a symmetric ghost node.
struct Discretization {
    const RadialProblem* p;
    std::vector<double> A, B, C;   // operator stencil (A u_{i-1} + B u_i + C u_{i+1})
    std::vector<double> rowscale;  // |A|+|B|+|C| per row
    std::vector<double> qv;

    explicit Discretization(const RadialProblem& prob) : p(&prob) {
        const auto& r = prob.grid;
        const int N = prob.N, M = prob.M();
        A.assign(M + 1, 0.0);
        B.assign(M + 1, 0.0);
        C.assign(M + 1, 0.0);
        const double h1 = r[1];
        B[0] = 2.0 * N / (h1 * h1);
        C[0] = -2.0 * N / (h1 * h1);
        for (int i = 1; i < M; ++i) {
            const double hm = r[i] - r[i - 1], hp = r[i + 1] - r[i];
            const double rm = 0.5 * (r[i - 1] + r[i]), rp = 0.5 * (r[i] + r[i + 1]);
            const double w = 2.0 / ((hm + hp) * std::pow(r[i], N - 1));
            const double a = w * std::pow(rm, N - 1) / hm;
            const double c = w * std::pow(rp, N - 1) / hp;
            A[i] = -a;
            B[i] = a + c;
            C[i] = -c;
        }
        B[M] = 1.0;
        rowscale.resize(M + 1);
        for (int i = 0; i <= M; ++i) rowscale[i] = std::abs(A[i]) + std::abs(B[i]) + std::abs(C[i]);
        qv.resize(M + 1);
        for (int i = 0; i <= M; ++i) qv[i] = prob.Q(r[i]);
    }

    int M() const { return static_cast<int>(A.size()) - 1; }

    double nonlinearity(int i, double u, double eps) const {
        if (u <= 0.0) return 0.0;  // u^p extended by 0 for u < 0 (zero derivative)
        const int N = p->N;
        return qv[i] * std::pow(u, (N + 2.0) / (N - 2.0)) + eps * std::pow(u, p->s);
    }
    double dnonlinearity(int i, double u, double eps) const {
        if (u <= 0.0) return 0.0;
        const int N = p->N;
        double d = qv[i] * (N + 2.0) / (N - 2.0) * std::pow(u, 4.0 / (N - 2.0));
        d += (p->s == 1.0) ? eps : eps * p->s * std::pow(u, p->s - 1.0);
        return d;
    }

    std::vector<double> residual(const std::vector<double>& u, double eps) const {
        const int Mn = M();
        std::vector<double> F(Mn + 1);
        F[0] = B[0] * u[0] + C[0] * u[1] - nonlinearity(0, u[0], eps);
        for (int i = 1; i < Mn; ++i)
            F[i] = A[i] * u[i - 1] + B[i] * u[i] + C[i] * u[i + 1] - nonlinearity(i, u[i], eps);
        F[Mn] = u[Mn];
        return F;
    }

    Tridiagonal jacobian(const std::vector<double>& u, double eps) const {
        const int Mn = M();
        Tridiagonal J{A, B, C};
        for (int i = 0; i < Mn; ++i) J.di[i] -= dnonlinearity(i, u[i], eps);
        J.lo[Mn] = 0.0;
        J.di[Mn] = 1.0;
        J.up[Mn] = 0.0;
        return J;
    }

    /// Row-scaled residual norm: each row is divided by the magnitudes of its
    /// own terms, floored at rowscale * 1e-8 * max|u| so that near-zero tails
    /// are still held to an absolute standard.
    double scaled_norm(const std::vector<double>& F, const std::vector<double>& u,
                       double eps) const {
        const int Mn = M();
        double umax = 0.0;
        for (double v : u) umax = std::max(umax, std::abs(v));
        const double ufloor = 1e-8 * std::max(umax, 1e-300);
        double worst = 0.0;
        for (int i = 0; i <= Mn; ++i) {
            double den;
            if (i == 0) {
                den = std::abs(B[0] * u[0]) + std::abs(C[0] * u[1]) +
                      std::abs(nonlinearity(0, u[0], eps));
            } else if (i == Mn) {
                den = std::max(1.0, std::abs(u[Mn]));
            } else {
                den = std::abs(A[i] * u[i - 1]) + std::abs(B[i] * u[i]) +
                      std::abs(C[i] * u[i + 1]) + std::abs(nonlinearity(i, u[i], eps));
            }
            den = std::max(den, rowscale[i] * ufloor);
            worst = std::max(worst, std::abs(F[i]) / den);
        }
        return worst;
    }
};

inline std::vector<double> axpy(const std::vector<double>& x, double t,
                                const std::vector<double>& d) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + t * d[i];
    return y;
}

struct NewtonOutcome {
    std::vector<double> u;
    int iters = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Damped Newton at fixed eps in the row-scaled norm.
inline NewtonOutcome newton_fixed_eps(const Discretization& disc, std::vector<double> u,
                                      double eps, double tol = 1e-11, int itmax = 60) {
    NewtonOutcome out;
    for (int it = 0; it < itmax; ++it) {
        auto F = disc.residual(u, eps);
        const double res = disc.scaled_norm(F, u, eps);
        if (res < tol) {
            out.u = std::move(u);
            out.iters = it;
            out.residual = res;
            out.converged = true;
            return out;
        }
        auto J = disc.jacobian(u, eps);
        for (auto& f : F) f = -f;
        auto du = tridiag_solve(J, F);
        double t = 1.0;
        bool ok = false;
        std::vector<double> un;
        while (t >= 1.0 / 65536.0) {
            un = axpy(u, t, du);
            const double rn = disc.scaled_norm(disc.residual(un, eps), un, eps);
            if (std::isfinite(rn) && (rn < res * (1.0 - 1e-4 * t) || rn < tol)) {
                ok = true;
                break;
            }
            t *= 0.5;
        }
        u = std::move(un);
        if (!ok) break;
        out.iters = it + 1;
    }
    auto F = disc.residual(u, eps);
    out.residual = disc.scaled_norm(F, u, eps);
    out.converged = out.residual < tol;
    out.u = std::move(u);
    return out;
}

struct PinnedOutcome {
    std::vector<double> u;
    double eps = 0.0;
    bool converged = false;
};

/// Bordered Newton: PDE rows plus the amplitude constraint u(0) = A, with
/// eps as the extra unknown. Pins the soft dilation mode of the linearized
/// operator, which defeats plain Newton near concentration.
inline PinnedOutcome newton_pinned(const Discretization& disc, std::vector<double> u, double eps,
                                    double Atarget, double tol = 1e-11, int itmax = 80) {
    const int Mn = disc.M();
    for (int it = 0; it < itmax; ++it) {
        auto F = disc.residual(u, eps);
        const double res = std::max(disc.scaled_norm(F, u, eps),
                                    std::abs(u[0] - Atarget) / std::max(1.0, Atarget));
        if (res < tol) return {std::move(u), eps, true};
        auto J = disc.jacobian(u, eps);
        // dF/deps = -u_+^s on PDE rows
        std::vector<double> b(Mn + 1, 0.0);
        for (int i = 0; i < Mn; ++i) b[i] = (u[i] > 0.0) ? std::pow(u[i], disc.p->s) : 0.0;
        std::vector<double> rhs1(F);
        for (auto& f : rhs1) f = -f;
        auto x1 = tridiag_solve(J, rhs1);
        auto x2 = tridiag_solve(J, b);
        const double de = (Atarget - u[0] - x1[0]) / x2[0];
        std::vector<double> du(Mn + 1);
        for (int i = 0; i <= Mn; ++i) du[i] = x1[i] + de * x2[i];
        double t = 1.0;
        std::vector<double> un;
        double en = eps;
        bool ok = false;
        while (t >= 1.0 / 65536.0) {
            un = axpy(u, t, du);
            en = eps + t * de;
            const double rn = std::max(disc.scaled_norm(disc.residual(un, en), un, en),
                                       std::abs(un[0] - Atarget) / std::max(1.0, Atarget));
            if (std::isfinite(rn) && (rn < res * (1.0 - 1e-4 * t) || rn < tol)) {
                ok = true;
                break;
            }
            t *= 0.5;
        }
        u = std::move(un);
        eps = en;
        if (!ok) break;
    }
    auto F = disc.residual(u, eps);
    const double res = std::max(disc.scaled_norm(F, u, eps),
                                std::abs(u[0] - Atarget) / std::max(1.0, Atarget));
    return {std::move(u), eps, res < tol};
}

/// Solve at a prescribed eps. Tries plain Newton, then locates the target on
/// the amplitude-parameterized family eps(A) via pinned solves: bracket the
/// target by walking the amplitude, then a secant/bisection hybrid in log A.
/// The concentrating family has d log(eps)/d log(A) < 0 where trustworthy.
inline NewtonOutcome solve_at_eps(const Discretization& disc, const std::vector<double>& guess,
                                  double eps_target, double tol = 1e-11) {
    NewtonOutcome direct = newton_fixed_eps(disc, guess, eps_target, tol);
    if (direct.converged) return direct;

    const double tau = std::log(eps_target);
    auto accept = [&](PinnedOutcome&& po, int iters) {
        NewtonOutcome out;
        out.u = std::move(po.u);
        out.iters = iters;
        out.residual = tol;
        out.converged = true;
        return out;
    };

    auto pin0 = newton_pinned(disc, guess, eps_target, guess[0], tol);
    if (!pin0.converged || !(pin0.eps > 0.0)) return direct;
    int iters = 1;
    if (std::abs(std::log(pin0.eps) - tau) < 3e-12) return accept(std::move(pin0), iters);

    // walk the amplitude until the target epsilon is bracketed
    PinnedOutcome lo = pin0, hi = pin0;  // lo: log eps > tau side, hi: < tau side
    double lA_lo = std::log(guess[0]), lA_hi = lA_lo;
    bool have_lo = std::log(pin0.eps) > tau, have_hi = !have_lo;
    {
        PinnedOutcome cur = std::move(pin0);
        double lA = std::log(guess[0]);
        double step = have_lo ? 0.35 : -0.35;  // increase A to decrease eps
        for (int k = 0; k < 80 && !(have_lo && have_hi); ++k) {
            const double lA_n = lA + step;
            auto nxt = newton_pinned(disc, cur.u, cur.eps, std::exp(lA_n), tol);
            ++iters;
            if (!nxt.converged || !(nxt.eps > 0.0)) {
                step *= 0.5;  // shorten the stride and retry from the same point
                if (std::abs(step) < 1e-3) return direct;
                continue;
            }
            lA = lA_n;
            if (std::log(nxt.eps) > tau) {
                lo = nxt;
                lA_lo = lA;
                have_lo = true;
            } else {
                hi = nxt;
                lA_hi = lA;
                have_hi = true;
            }
            if (std::abs(std::log(nxt.eps) - tau) < 3e-12) return accept(std::move(nxt), iters);
            cur = std::move(nxt);
        }
        if (!(have_lo && have_hi)) return direct;
    }

    // secant/bisection hybrid inside the bracket
    PinnedOutcome warm = lo;
    for (int k = 0; k < 80; ++k) {
        const double f_lo = std::log(lo.eps) - tau, f_hi = std::log(hi.eps) - tau;
        double lA_n = lA_lo + (lA_hi - lA_lo) * f_lo / (f_lo - f_hi);  // secant
        const double lomid = std::min(lA_lo, lA_hi), himid = std::max(lA_lo, lA_hi);
        if (!(lA_n > lomid && lA_n < himid)) lA_n = 0.5 * (lA_lo + lA_hi);
        auto nxt = newton_pinned(disc, warm.u, warm.eps, std::exp(lA_n), tol);
        ++iters;
        if (!nxt.converged || !(nxt.eps > 0.0)) {
            lA_n = 0.5 * (lA_lo + lA_hi);  // bisect instead
            nxt = newton_pinned(disc, warm.u, warm.eps, std::exp(lA_n), tol);
            ++iters;
            if (!nxt.converged || !(nxt.eps > 0.0)) return direct;
        }
        const double f_n = std::log(nxt.eps) - tau;
        if (std::abs(f_n) < 3e-12) return accept(std::move(nxt), iters);
        if (f_n > 0.0) {
            lo = nxt;
            lA_lo = lA_n;
        } else {
            hi = nxt;
            lA_hi = lA_n;
        }
        warm = std::move(nxt);
        if (std::abs(lA_hi - lA_lo) < 1e-15) break;
    }
    return direct;
}

}  // namespace detail

struct RadialSolution {
    std::vector<double> values;
    double eps = 0.0;
    double peak_height = 0.0;       // u(0)
    double extracted_lambda = 0.0;  // u(0)^{2/(N-2)}
    double newton_residual = 0.0;
    int newton_iters = 0;
};

/// (F, J) of the discrete radial problem; J is the exact tridiagonal Jacobian.
inline std::pair<std::vector<double>, Tridiagonal> assemble_residual(const RadialProblem& p,
                                                                     const std::vector<double>& u,
                                                                     double eps) {
    detail::Discretization disc(p);
    return {disc.residual(u, eps), disc.jacobian(u, eps)};
}

/// Row-scaled residual norm used for convergence decisions.
inline double residual_norm(const RadialProblem& p, const std::vector<double>& u, double eps) {
    detail::Discretization disc(p);
    return disc.scaled_norm(disc.residual(u, eps), u, eps);
}

/// Projected-bubble initial guess Q0^{-(N-2)/4} PU_{0,lambda} on the grid.
inline std::vector<double> bubble_guess(const RadialProblem& p, double lambda_bubble) {
    std::vector<double> u(p.grid.size());
    const double phi = kernel::eval_bubble_radial(p.N, lambda_bubble, p.R);
    const double q = std::pow(p.Q0, -0.25 * (p.N - 2));
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = q * (kernel::eval_bubble_radial(p.N, lambda_bubble, p.grid[i]) - phi);
    u.back() = 0.0;
    return u;
}

/// Smallest Dirichlet eigenvalue of the discrete radial Laplacian
/// (inverse power iteration; used for the s = 1 admissibility bound).
inline double smallest_eigenvalue(const RadialProblem& p, int iters = 200) {
    detail::Discretization disc(p);
    const int Mn = disc.M();
    Tridiagonal L{disc.A, disc.B, disc.C};
    L.lo[Mn] = 0.0;
    L.di[Mn] = 1.0;
    L.up[Mn] = 0.0;
    std::vector<double> v(Mn + 1, 1.0);
    v[Mn] = 0.0;
    double lam = 0.0;
    for (int k = 0; k < iters; ++k) {
        auto w = tridiag_solve(L, v);
        w[Mn] = 0.0;
        double vv = 0.0, vw = 0.0, wmax = 0.0;
        for (int i = 0; i <= Mn; ++i) {
            vv += v[i] * v[i];
            vw += v[i] * w[i];
            wmax = std::max(wmax, std::abs(w[i]));
        }
        lam = vv / vw;
        for (auto& x : w) x /= wmax;
        v = std::move(w);
    }
    return lam;
}

enum class StopReason { RangeExhausted, NewtonFailure, ResolutionLost };

inline std::string stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::RangeExhausted: return "range_exhausted";
        case StopReason::NewtonFailure: return "newton_failure";
        default: return "resolution_lost";
    }
}

struct BranchPoint {
    double eps;
    RadialSolution solution;
    double w_norm_rel = 0.0;
    double pohozaev_residual = 0.0;
    double mass_ratio = 0.0;
    double grid_drift = 0.0;  // |lambda_M / lambda_2M - 1| of the doubling check
};

struct Branch {
    std::vector<BranchPoint> points;  // eps strictly decreasing
    StopReason stop = StopReason::RangeExhausted;
    double stop_eps = 0.0;
    double fitted_rate = 0.0;      // power law: d log(lambda)/d log(eps)
    double fitted_rate_ci = 0.0;   // half-width of the least-squares CI
};

namespace detail {

inline int nodes_under_half_height(const RadialProblem& p, const std::vector<double>& u) {
    const double half = 0.5 * u[0];
    int n = 0;
    for (std::size_t i = 0; i < u.size() && u[i] > half; ++i) ++n;
    return n;
}

// Predictor: pointwise rescaling u -> rho^{(N-2)/2} u(rho r) by the reduced
// height ratio rho, with linear interpolation and zero past R.
inline std::vector<double> rescale_guess(const RadialProblem& p, const std::vector<double>& u,
                                         double rho) {
    const auto& r = p.grid;
    std::vector<double> out(u.size());
    const double amp = std::pow(rho, 0.5 * (p.N - 2));
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double rr = rho * r[i];
        if (rr >= p.R) {
            out[i] = 0.0;
            continue;
        }
        auto it = std::upper_bound(r.begin(), r.end(), rr);
        const std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(1, it - r.begin()),
                                                    r.size() - 1);
        const double t = (rr - r[k - 1]) / (r[k] - r[k - 1]);
        out[i] = amp * ((1.0 - t) * u[k - 1] + t * u[k]);
    }
    out.back() = 0.0;
    return out;
}

}  // namespace detail

/// Structure extraction per Theorem 1.1: lambda = u(0)^{2/(N-2)}, and the
/// relative discrete H1 norm of w = u - Q0^{-(N-2)/4} PU_{0,lambda_fit},
/// where lambda_fit matches the ansatz peak value exactly.
struct StructureReport {
    double lambda = 0.0;
    double lambda_fit = 0.0;
    double w_norm_rel = 0.0;
};

inline StructureReport extract_structure(const RadialProblem& p, const RadialSolution& sol) {
    const int N = p.N;
    if (detail::nodes_under_half_height(p, sol.values) < 8)
        throw PeakUnresolved("extract_structure: fewer than 8 nodes under half height");
    StructureReport rep;
    rep.lambda = std::pow(sol.values[0], 2.0 / (N - 2));
    // solve Q0^{-(N-2)/4} (U(0;lambda) - U(R;lambda)) = u(0) for lambda
    const double target = sol.values[0] * std::pow(p.Q0, 0.25 * (N - 2));
    double lam = std::pow(target / kernel::bubble_norm(N), 2.0 / (N - 2));
    for (int it = 0; it < 100; ++it) {
        const double f = kernel::eval_bubble_radial(N, lam, 0.0) -
                         kernel::eval_bubble_radial(N, lam, p.R) - target;
        const double df = kernel::bubble_norm(N) * 0.5 * (N - 2) * std::pow(lam, 0.5 * (N - 4)) -
                          kernel::bubble_dlambda_radial(N, lam, p.R);
        const double step = f / df;
        lam -= step;
        if (std::abs(step) < 1e-14 * lam) break;
    }
    rep.lambda_fit = lam;
    const double q = std::pow(p.Q0, -0.25 * (N - 2));
    const double phi = kernel::eval_bubble_radial(N, lam, p.R);
    // discrete H1 seminorm via midpoint fluxes (matches the discretization)
    double nw = 0.0, nu = 0.0;
    for (std::size_t i = 1; i < p.grid.size(); ++i) {
        const double h = p.grid[i] - p.grid[i - 1];
        const double rm = 0.5 * (p.grid[i] + p.grid[i - 1]);
        auto pu = [&](double r) { return q * (kernel::eval_bubble_radial(N, lam, r) - phi); };
        const double dw = ((sol.values[i] - pu(p.grid[i])) - (sol.values[i - 1] - pu(p.grid[i - 1]))) / h;
        const double du = (sol.values[i] - sol.values[i - 1]) / h;
        nw += dw * dw * std::pow(rm, N - 1) * h;
        nu += du * du * std::pow(rm, N - 1) * h;
    }
    rep.w_norm_rel = std::sqrt(nw / std::max(nu, 1e-300));
    return rep;
}

/// Fraction of the Dirichlet energy inside B_{r0} (the measure-concentration shadow).
inline double gradient_mass_ratio(const RadialProblem& p, const std::vector<double>& u,
                                  double r0) {
    double inner = 0.0, total = 0.0;
    for (std::size_t i = 1; i < p.grid.size(); ++i) {
        const double h = p.grid[i] - p.grid[i - 1];
        const double rm = 0.5 * (p.grid[i] + p.grid[i - 1]);
        const double du = (u[i] - u[i - 1]) / h;
        const double c = du * du * std::pow(rm, p.N - 1) * h;
        total += c;
        if (rm <= r0) inner += c;
    }
    return inner / std::max(total, 1e-300);
}

/// Reduced-system prediction of the bubble height at eps, used by the
/// continuation predictor and the branch comparison. For N = 4 the exp-law
/// rate carries the domain (Robin) correction, which enters at the same
/// order as the Q-curvature term in this dimension.
inline double predicted_bubble_height(const RadialProblem& p, const ConstantsTable& t,
                                      double eps) {
    reduced::PeakData pk;
    pk.location = Eigen::VectorXd::Zero(p.N);
    pk.q_value = p.Q0;
    pk.gradient = Eigen::VectorXd::Zero(p.N);
    pk.laplacian = p.deltaQ0;
    pk.hessian = (p.deltaQ0 / p.N) * Eigen::MatrixXd::Identity(p.N, p.N);
    if (p.s > 1.0) return reduced::predicted_bubble_height(p.N, p.s, eps, pk, t);
    // exp law: log(lambda_b) = (K_Q + K_H) / (K_log eps)
    const int N = p.N;
    const double cN = kernel::bubble_norm(N);
    const double ts = asymptotics::critical_exponent(N);
    const double KQ = (N - 2.0) / (2.0 * N) * std::pow(cN, ts) * t.A * std::abs(p.deltaQ0) *
                      std::pow(p.Q0, -0.25 * (N + 2));
    // Robin part: ((N-2)/2) Phi(0) c^{2*-1} (omega_N/N) Q0^{-(N-2)/4},
    // Phi(0) = c_N / R^{N-2} on the ball of radius R
    const double KH = 0.5 * (N - 2) * (cN / std::pow(p.R, N - 2)) * std::pow(cN, ts - 1.0) *
                      (t.omega_N / N) * std::pow(p.Q0, -0.25 * (N - 2));
    const double Klog = (2.0 / (p.s + 1.0)) * std::pow(cN, p.s + 1.0) * t.omega_N *
                        std::pow(p.Q0, -0.25 * (N - 2) * p.s);
    const double loglam = (KQ + KH) / (Klog * eps);
    return std::exp(std::min(loglam, 700.0));
}

/// Predicted u(0)^{2/(N-2)} at eps (peak-value normalization of Theorem 1.1).
inline double predicted_peak_lambda(const RadialProblem& p, const ConstantsTable& t, double eps) {
    return reduced::peak_lambda_from_bubble(p.N, p.Q0, predicted_bubble_height(p, t, eps));
}

/// Continuation over a geometric eps ladder. Each accepted point is verified
/// against a doubled grid: resolution is declared lost when the extracted
/// lambda moves by more than 1% under doubling, or when fewer than 8 nodes
/// lie under the half-height radius.
inline Branch continue_branch(const RadialProblem& p, double eps_start, double eps_end,
                              int steps_per_decade,
                              const std::function<void(BranchPoint&)>& per_point = {}) {
    p.validate();
    if (!(eps_start > eps_end && eps_end > 0.0))
        throw InvalidArgument("continue_branch: need eps_start > eps_end > 0");
    if (p.s == 1.0) {
        const double lam1 = smallest_eigenvalue(p);
        if (eps_start >= lam1)
            throw InvalidArgument("continue_branch: for s=1 need eps_start < lambda_1 = " +
                                  std::to_string(lam1));
    }
    const ConstantsTable t = asymptotics::compute_constants(p.N, std::max(p.s, 1.0));

    // doubled companion grid of the same family (grading inferred pointwise)
    RadialProblem p2 = p;
    p2.grid.resize(2 * p.M() + 1);
    const double grade = std::log(p.grid[1] / p.R) / std::log(1.0 / double(p.M()));
    for (int i = 0; i <= 2 * p.M(); ++i)
        p2.grid[i] = p.R * std::pow(double(i) / (2.0 * p.M()), grade);
    detail::Discretization disc(p), disc2(p2);

    const int decades = std::max(1, int(std::ceil(std::log10(eps_start / eps_end))));
    const int nsteps = steps_per_decade * decades;
    Branch br;
    std::vector<double> u, u2;
    double prev_pred = 0.0;
    for (int k = 0; k <= nsteps; ++k) {
        const double eps =
            eps_start * std::pow(eps_end / eps_start, double(k) / nsteps);
        const double pred = predicted_bubble_height(p, t, eps);
        std::vector<double> guess, guess2;
        if (br.points.empty()) {
            guess = bubble_guess(p, pred);
            guess2 = bubble_guess(p2, pred);
        } else {
            const double rho = pred / prev_pred;
            guess = detail::rescale_guess(p, u, rho);
            guess2 = detail::rescale_guess(p2, u2, rho);
        }
        auto out = detail::solve_at_eps(disc, guess, eps);
        auto out2 = detail::solve_at_eps(disc2, guess2, eps);
        if (!out.converged || !out2.converged) {
            if (br.points.empty())
                throw InitialSolveFailed("continue_branch: first point did not converge");
            br.stop = StopReason::NewtonFailure;
            br.stop_eps = eps;
            break;
        }
        const double l1 = std::pow(out.u[0], 2.0 / (p.N - 2));
        const double l2 = std::pow(out2.u[0], 2.0 / (p.N - 2));
        const double drift = std::abs(l1 / l2 - 1.0);
        const int nodes = detail::nodes_under_half_height(p, out.u);
        if (drift > 0.01 || nodes < 8) {
            br.stop = StopReason::ResolutionLost;
            br.stop_eps = eps;
            break;
        }
        BranchPoint bp;
        bp.eps = eps;
        bp.solution.values = out.u;
        bp.solution.eps = eps;
        bp.solution.peak_height = out.u[0];
        bp.solution.extracted_lambda = l1;
        bp.solution.newton_residual = out.residual;
        bp.solution.newton_iters = out.iters;
        bp.grid_drift = drift;
        bp.w_norm_rel = extract_structure(p, bp.solution).w_norm_rel;
        bp.mass_ratio = gradient_mass_ratio(p, out.u, 0.2);
        if (per_point) per_point(bp);
        br.points.push_back(std::move(bp));
        u = std::move(out.u);
        u2 = std::move(out2.u);
        prev_pred = pred;
        br.stop_eps = eps;
    }
    // least-squares slope of log(lambda) vs log(eps) over the last decade
    if (br.points.size() >= 3) {
        const double e_end = br.points.back().eps;
        std::vector<double> xs, ys;
        for (const auto& bp : br.points) {
            if (bp.eps > 10.0 * e_end * (1.0 + 1e-12)) continue;
            xs.push_back(std::log(bp.eps));
            ys.push_back(std::log(bp.solution.extracted_lambda));
        }
        const int n = static_cast<int>(xs.size());
        if (n >= 3) {
            double xbar = 0, ybar = 0;
            for (int i = 0; i < n; ++i) xbar += xs[i], ybar += ys[i];
            xbar /= n;
            ybar /= n;
            double sxx = 0, sxy = 0;
            for (int i = 0; i < n; ++i) {
                sxx += (xs[i] - xbar) * (xs[i] - xbar);
                sxy += (xs[i] - xbar) * (ys[i] - ybar);
            }
            br.fitted_rate = sxy / sxx;
            double ssr = 0;
            for (int i = 0; i < n; ++i) {
                const double e = ys[i] - ybar - br.fitted_rate * (xs[i] - xbar);
                ssr += e * e;
            }
            br.fitted_rate_ci = 2.0 * std::sqrt(ssr / std::max(n - 2, 1) / sxx);
        }
    }
    return br;
}

/// Branch CSV: eps,u0,lambda,w_rel,pohozaev_residual,newton_iters
/// (one row per accepted point, full-precision scientific notation).
inline std::string branch_csv(const Branch& br) {
    std::string out = "eps,u0,lambda,w_rel,pohozaev_residual,newton_iters\n";
    char buf[256];
    for (const auto& bp : br.points) {
        std::snprintf(buf, sizeof buf, "%.17e,%.17e,%.17e,%.17e,%.17e,%d\n", bp.eps,
                      bp.solution.peak_height, bp.solution.extracted_lambda, bp.w_norm_rel,
                      bp.pohozaev_residual, bp.solution.newton_iters);
        out += buf;
    }
    return out;
}

// ---- local uniqueness probe ------------------------------------------------

/// Normalized difference of two gridded solutions and the potential of the
/// linearized equation -Delta xi = C_eps xi.
struct DiffQuotient {
    std::vector<double> xi;       // (u1-u2)/||u1-u2||_inf
    double normalizer = 0.0;      // ||u1-u2||_inf
    std::vector<double> potential;  // C_eps at the nodes
    double linearized_residual = 0.0;  // row-scaled residual of -Delta xi = C xi
};

struct Degenerate {};  // the two solutions coincide (ZeroDifference)

using DiffOutcome = std::variant<DiffQuotient, Degenerate>;

/// Builds xi and C_eps from two solutions of the same discrete problem.
/// C_eps = (2*-1) Q int_0^1 (t u1 + (1-t) u2)^{2*-2} dt + eps s int_0^1 (.)^{s-1} dt
inline DiffOutcome make_diff_quotient(const RadialProblem& p, const std::vector<double>& u1,
                                      const std::vector<double>& u2, double eps) {
    const int N = p.N;
    const std::size_t n = u1.size();
    double norm = 0.0, umax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        norm = std::max(norm, std::abs(u1[i] - u2[i]));
        umax = std::max(umax, std::abs(u1[i]));
    }
    if (norm <= 1e-300 || norm <= 1e-14 * umax) return Degenerate{};
    DiffQuotient d;
    d.normalizer = norm;
    d.xi.resize(n);
    d.potential.resize(n);
    const double pcrit = (N + 2.0) / (N - 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        d.xi[i] = (u1[i] - u2[i]) / norm;
        auto seg = [&](double expo) {
            return numerics::gauss_fixed<16>(
                [&](double tt) {
                    const double v = tt * u1[i] + (1.0 - tt) * u2[i];
                    return v > 0.0 ? std::pow(v, expo) : 0.0;
                },
                0.0, 1.0);
        };
        d.potential[i] = pcrit * p.Q(p.grid[i]) * seg(pcrit - 1.0) + eps * p.s * seg(p.s - 1.0);
    }
    // residual of the discrete linearized equation
    detail::Discretization disc(p);
    const int Mn = disc.M();
    double worst = 0.0;
    for (int i = 0; i < Mn; ++i) {
        double lap;
        if (i == 0)
            lap = disc.B[0] * d.xi[0] + disc.C[0] * d.xi[1];
        else
            lap = disc.A[i] * d.xi[i - 1] + disc.B[i] * d.xi[i] + disc.C[i] * d.xi[i + 1];
        const double rhs = d.potential[i] * d.xi[i];
        const double den = std::max(std::abs(lap) + std::abs(rhs), disc.rowscale[i] * 1e-8);
        worst = std::max(worst, std::abs(lap - rhs) / den);
    }
    d.linearized_residual = worst;
    return d;
}

struct ProbeResult {
    bool same = false;
    double sup_distance_rel = 0.0;
    std::optional<DiffQuotient> xi;
};

/// Theorem 1.4 shadow: solve from two comparable-height guesses at the same
/// eps; report coincidence (sup distance <= 1e-8 ||u||_inf) or the
/// normalized difference with its linearized-equation consistency residual.
inline ProbeResult uniqueness_probe(const RadialProblem& p, double eps, double guess_height_a,
                                    double guess_height_b) {
    p.validate();
    const double hr = guess_height_a / guess_height_b;
    if (hr < 0.25 || hr > 4.0)
        throw InvalidArgument("uniqueness_probe: guess heights not comparable (ratio in [1/4,4])");
    detail::Discretization disc(p);
    auto sa = detail::solve_at_eps(disc, bubble_guess(p, guess_height_a), eps);
    auto sb = detail::solve_at_eps(disc, bubble_guess(p, guess_height_b), eps);
    if (!sa.converged || !sb.converged)
        throw SolveFailed("uniqueness_probe: a Newton solve did not converge");
    double dist = 0.0, umax = 0.0;
    for (std::size_t i = 0; i < sa.u.size(); ++i) {
        dist = std::max(dist, std::abs(sa.u[i] - sb.u[i]));
        umax = std::max(umax, std::abs(sa.u[i]));
    }
    ProbeResult res;
    res.sup_distance_rel = dist / std::max(umax, 1e-300);
    if (res.sup_distance_rel <= 1e-8) {
        res.same = true;
        return res;
    }
    auto d = make_diff_quotient(p, sa.u, sb.u, eps);
    if (std::holds_alternative<Degenerate>(d)) {
        res.same = true;
        return res;
    }
    res.xi = std::get<DiffQuotient>(d);
    return res;
}

}  // namespace critpeak::radial
