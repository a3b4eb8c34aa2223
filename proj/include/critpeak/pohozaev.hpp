#pragma once

// Numerical evaluators for the local Pohozaev identities on gridded radial
// solutions over balls B_d(x0): the translation and dilation identities and
// their difference forms. Radial data is interpolated by cubic splines; all
// sphere integrals reduce to one polar angle with exact vector moments
// (requires the weight to be radial about the origin, which is what the
// radial solver produces).

#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "critpeak/errors.hpp"
#include "critpeak/numerics/quadrature.hpp"
#include "critpeak/numerics/special.hpp"
#include "critpeak/weight.hpp"

namespace critpeak::pohozaev {

/// Natural cubic spline on a nonuniform grid, clamped to zero slope at the
/// left end (radial symmetry at r = 0).
class RadialSpline {
  public:
    RadialSpline() = default;
    RadialSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw InvalidArgument("RadialSpline: need >= 3 nodes");
        // solve for second derivatives m_i; clamped left (y'(x0)=0), natural right
        std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, 0.0);
        const double h0 = x_[1] - x_[0];
        di[0] = 2.0 * h0;
        up[0] = h0;
        rhs[0] = 6.0 * ((y_[1] - y_[0]) / h0 - 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hm = x_[i] - x_[i - 1], hp = x_[i + 1] - x_[i];
            lo[i] = hm;
            di[i] = 2.0 * (hm + hp);
            up[i] = hp;
            rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hp - (y_[i] - y_[i - 1]) / hm);
        }
        di[n - 1] = 1.0;
        m_.assign(n, 0.0);
        // Thomas
        for (std::size_t i = 1; i < n; ++i) {
            const double w = lo[i] / di[i - 1];
            di[i] -= w * up[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_[n - 1] = rhs[n - 1] / di[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - up[i] * m_[i + 1]) / di[i];
    }

    double operator()(double r) const {
        const auto [i, t, h] = locate(r);
        const double a = (x_[i + 1] - r) / h, b = (r - x_[i]) / h;
        (void)t;
        return a * y_[i] + b * y_[i + 1] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }
    double deriv(double r) const {
        const auto [i, t, h] = locate(r);
        const double a = (x_[i + 1] - r) / h, b = (r - x_[i]) / h;
        (void)t;
        return (y_[i + 1] - y_[i]) / h +
               ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h / 6.0;
    }

  private:
    std::tuple<std::size_t, double, double> locate(double r) const {
        const std::size_t n = x_.size();
        if (r <= x_.front()) return {0, 0.0, x_[1] - x_[0]};
        if (r >= x_.back()) return {n - 2, 1.0, x_[n - 1] - x_[n - 2]};
        std::size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= r ? lo : hi) = mid;
        }
        return {lo, 0.0, x_[lo + 1] - x_[lo]};
    }
    std::vector<double> x_, y_, m_;
};

enum class Identity { Translation, Dilation, DiffTranslation, DiffDilation };

inline std::string identity_name(Identity id) {
    switch (id) {
        case Identity::Translation: return "translation";
        case Identity::Dilation: return "dilation";
        case Identity::DiffTranslation: return "diff_translation";
        default: return "diff_dilation";
    }
}

struct PohozaevReport {
    Identity identity;
    int axis = 0;  // component i for the translation identities
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double scale = 0.0;

    double relative_residual() const { return residual / scale; }

    nlohmann::json to_json() const {
        return {{"identity", identity_name(identity)}, {"axis", axis},       {"lhs", lhs},
                {"rhs", rhs},                          {"residual", residual},
                {"relative_residual", relative_residual()}};
    }
};

inline PohozaevReport make_report(Identity id, int axis, double lhs, double rhs) {
    PohozaevReport rep;
    rep.identity = id;
    rep.axis = axis;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.residual = std::abs(lhs - rhs);
    rep.scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return rep;
}

/// Radial weight q(|y|) about the origin; the isotropic restriction of WeightSpec.
struct RadialWeight {
    std::function<double(double)> q;       // q(r)
    std::function<double(double)> dq;      // q'(r)

    static RadialWeight from_weight(const WeightSpec& w) {
        if (w.peak.lpNorm<Eigen::Infinity>() > 0.0)
            throw InvalidArgument("pohozaev: weight must be radial about the origin");
        const int n = w.dim();
        const double h = w.hessian(0, 0);
        if (!w.hessian.isApprox(h * Eigen::MatrixXd::Identity(n, n), 1e-12))
            throw InvalidArgument("pohozaev: weight Hessian must be isotropic");
        const double q0 = w.value;
        return {[q0, h](double r) { return q0 + 0.5 * h * r * r; },
                [h](double r) { return h * r; }};
    }
    static RadialWeight paraboloid(double q0, double curv) {
        return {[q0, curv](double r) { return q0 - curv * r * r; },
                [curv](double r) { return -2.0 * curv * r; }};
    }
};

namespace detail {

// Sphere moments over the unit sphere direction omega with c = omega . e1:
//   m0[f] = int f(c) dsigma,   m1[f] = int f(c) c dsigma  (the omega-moment
//   is m1 e1 by symmetry). 64-point Gauss in the polar angle.
struct SphereMoments {
    int N;
    explicit SphereMoments(int N_) : N(N_) {}
    double m0(const std::function<double(double)>& f) const { return moment(f, 0); }
    double m1(const std::function<double(double)>& f) const { return moment(f, 1); }

  private:
    double moment(const std::function<double(double)>& f, int pw) const {
        const double pi = 3.141592653589793238462643383279502884;
        const double slice = (N >= 3) ? numerics::sphere_area(N - 1) : 2.0;
        auto g = [&](double th) {
            const double c = std::cos(th);
            return f(c) * (pw ? c : 1.0) * std::pow(std::sin(th), double(N - 2));
        };
        return slice * numerics::gauss_fixed<64>(g, 0.0, pi);
    }
};

// Geometry of the ball B_d(x0) for radial fields about the origin:
// y = x0 + rho*omega, |y| depends only on (rho, c).
struct BallGeometry {
    int N;
    Eigen::VectorXd x0;
    double d;
    double x0n;
    Eigen::VectorXd e1;

    BallGeometry(int N_, Eigen::VectorXd x0_, double d_)
        : N(N_), x0(std::move(x0_)), d(d_), x0n(x0.norm()) {
        e1 = x0n > 0.0 ? Eigen::VectorXd(x0 / x0n) : Eigen::VectorXd::Unit(N, 0);
    }
    double ynorm(double rho, double c) const {
        return std::sqrt(std::max(x0n * x0n + rho * rho + 2.0 * rho * x0n * c, 0.0));
    }
};

// int_{B_d(x0)} F(|y|) dy
inline double volume_scalar(const BallGeometry& g, const std::function<double(double)>& F,
                            const numerics::QuadratureSpec& spec) {
    SphereMoments mom(g.N);
    auto radial = [&](double rho) {
        return mom.m0([&](double c) { return F(g.ynorm(rho, c)); }) * std::pow(rho, g.N - 1);
    };
    return numerics::integrate_radial(radial, 0.0, g.d, spec);
}

// int_{B_d(x0)} F(|y|) (y - a0)_i dy for fields linear in y; split into the
// constant part (x0 - a0)_i m0 and the omega part rho (e1)_i m1.
inline double volume_linear_component(const BallGeometry& g,
                                      const std::function<double(double)>& F, int axis,
                                      const numerics::QuadratureSpec& spec) {
    SphereMoments mom(g.N);
    const double xi = g.x0[axis];
    const double ei = g.e1[axis];
    auto radial = [&](double rho) {
        const double a = xi * mom.m0([&](double c) { return F(g.ynorm(rho, c)); });
        const double b = rho * ei * mom.m1([&](double c) { return F(g.ynorm(rho, c)); });
        return (a + b) * std::pow(rho, g.N - 1);
    };
    return numerics::integrate_radial(radial, 0.0, g.d, spec);
}

}  // namespace detail

/// Data shared by the identity evaluators: one or two radial solutions as
/// splines, the radial weight, and the problem parameters.
struct RadialField {
    int N;
    RadialSpline u;
    double domain_radius;

    RadialField(int N_, const std::vector<double>& grid, const std::vector<double>& values,
                double R)
        : N(N_), u(grid, values), domain_radius(R) {}
    double val(double r) const { return r >= domain_radius ? 0.0 : u(r); }
    double du(double r) const { return r >= domain_radius ? 0.0 : u.deriv(r); }
};

namespace detail {

struct TermSet {
    // volume terms
    double vol_dQ = 0.0;      // int dQ/dx^i u^{2*}
    double vol_xdQ = 0.0;     // int ((y-x0).grad Q) u^{2*}
    double vol_Qmass = 0.0;   // int Q u^{2*}
    double vol_smass = 0.0;   // int u^{s+1}
    double vol_grad2 = 0.0;   // int |grad u|^2
    // surface terms on |y - x0| = d
    double surf_dnu_di = 0.0;   // int du/dnu du/dx^i
    double surf_grad2_nui = 0.0;  // int |grad u|^2 nu^i
    double surf_Qmass_nui = 0.0;  // int Q u^{2*} nu^i
    double surf_smass_nui = 0.0;  // int u^{s+1} nu^i
    double surf_grad2_xnu = 0.0;  // int |grad u|^2 (y-x0).nu
    double surf_Qmass_xnu = 0.0;  // int Q u^{2*} (y-x0).nu
    double surf_smass_xnu = 0.0;  // int u^{s+1} (y-x0).nu
    double surf_xgrad_dnu = 0.0;  // int ((y-x0).grad u) du/dnu
    double surf_u_dnu = 0.0;      // int u du/dnu
};

// All terms the translation/dilation identities need, with one pass of
// moment quadratures. axis is the component i.
inline TermSet evaluate_terms(const RadialField& f, const RadialWeight& Q, double s, int axis,
                              const BallGeometry& g, const numerics::QuadratureSpec& spec) {
    TermSet T;
    const int N = f.N;
    const double ts = 2.0 * N / (N - 2.0);
    SphereMoments mom(N);

    auto upow = [&](double r) { return std::pow(std::max(f.val(r), 0.0), ts); };
    auto uspow = [&](double r) { return std::pow(std::max(f.val(r), 0.0), s + 1.0); };

    // volume: dQ/dx^i = q'(|y|) y_i/|y|
    T.vol_dQ = volume_linear_component(
        g, [&](double r) { return r > 0 ? Q.dq(r) / r * upow(r) : 0.0; }, axis, spec);
    // (y - x0) . grad Q = q'(|y|) (|y|^2 - x0.y)/|y|
    {
        auto radial = [&](double rho) {
            return mom.m0([&](double c) {
                       const double r = g.ynorm(rho, c);
                       if (r <= 0) return 0.0;
                       const double x0dot = g.x0n * (g.x0n + rho * c);  // x0 . y
                       return Q.dq(r) / r * (r * r - x0dot) * upow(r);
                   }) *
                   std::pow(rho, N - 1);
        };
        T.vol_xdQ = numerics::integrate_radial(radial, 0.0, g.d, spec);
    }
    T.vol_Qmass = volume_scalar(g, [&](double r) { return Q.q(r) * upow(r); }, spec);
    T.vol_smass = volume_scalar(g, uspow, spec);
    T.vol_grad2 = volume_scalar(g, [&](double r) { return f.du(r) * f.du(r); }, spec);

    // surface, rho = d, nu = omega; y = x0 + d omega
    const double d = g.d;
    const double area = std::pow(d, N - 1);
    auto r_of = [&](double c) { return g.ynorm(d, c); };
    auto dnu = [&](double c) {  // du/dnu = u'(|y|) (x0.omega + d)/|y|
        const double r = r_of(c);
        return r > 0 ? f.du(r) * (g.x0n * c + d) / r : 0.0;
    };
    const double xi = g.x0[axis], ei = g.e1[axis];
    // du/dx^i = u'(r) y_i/r with y_i = x0_i + d omega_i
    T.surf_dnu_di =
        area * (xi * mom.m0([&](double c) {
                    const double r = r_of(c);
                    return r > 0 ? dnu(c) * f.du(r) / r : 0.0;
                }) +
                d * ei * mom.m1([&](double c) {
                    const double r = r_of(c);
                    return r > 0 ? dnu(c) * f.du(r) / r : 0.0;
                }));
    auto grad2 = [&](double c) {
        const double r = r_of(c);
        return f.du(r) * f.du(r);
    };
    auto Qmass = [&](double c) {
        const double r = r_of(c);
        return Q.q(r) * std::pow(std::max(f.val(r), 0.0), ts);
    };
    auto smass = [&](double c) {
        const double r = r_of(c);
        return std::pow(std::max(f.val(r), 0.0), s + 1.0);
    };
    T.surf_grad2_nui = area * ei * mom.m1(grad2);
    T.surf_Qmass_nui = area * ei * mom.m1(Qmass);
    T.surf_smass_nui = area * ei * mom.m1(smass);
    T.surf_grad2_xnu = area * d * mom.m0(grad2);
    T.surf_Qmass_xnu = area * d * mom.m0(Qmass);
    T.surf_smass_xnu = area * d * mom.m0(smass);
    // (y-x0).grad u = u'(r) d (x0.omega + d)/r = d * dnu
    T.surf_xgrad_dnu = area * d * mom.m0([&](double c) { return dnu(c) * dnu(c); });
    T.surf_u_dnu = area * mom.m0([&](double c) { return f.val(r_of(c)) * dnu(c); });
    return T;
}

}  // namespace detail

/// Translation identity over B_d(x0), component i:
///   (1/2*) int dQ/dx^i u^{2*} =
///   int [ du/dnu du/dx^i + ((1/2*) Q u^{2*} - 1/2 |grad u|^2 + eps/(s+1) u^{s+1}) nu^i ]
inline PohozaevReport eval_translation_identity(const RadialField& f, const RadialWeight& Q,
                                                double eps, double s, const Eigen::VectorXd& x0,
                                                double d, int axis,
                                                const numerics::QuadratureSpec& spec = {}) {
    if (x0.norm() + d > f.domain_radius * (1.0 + 1e-12))
        throw BallOutsideDomain("eval_translation_identity: B_d(x0) not inside the domain");
    const double ts = 2.0 * f.N / (f.N - 2.0);
    detail::BallGeometry g(f.N, x0, d);
    auto T = detail::evaluate_terms(f, Q, s, axis, g, spec);
    const double lhs = T.vol_dQ / ts;
    const double rhs = T.surf_dnu_di + T.surf_Qmass_nui / ts - 0.5 * T.surf_grad2_nui +
                       eps / (s + 1.0) * T.surf_smass_nui;
    return make_report(Identity::Translation, axis, lhs, rhs);
}

/// Dilation identity over B_d(x0):
///   (1/2*) int ((y-x0).grad Q) u^{2*} + (1 - N/2 + N/(1+s)) eps int u^{s+1} =
///   int [ (Q/2* u^{2*} + eps/(s+1) u^{s+1} - 1/2 |grad u|^2)(y-x0).nu
///         + ((y-x0).grad u + (N-2)/2 u) du/dnu ]
inline PohozaevReport eval_dilation_identity(const RadialField& f, const RadialWeight& Q,
                                             double eps, double s, const Eigen::VectorXd& x0,
                                             double d,
                                             const numerics::QuadratureSpec& spec = {}) {
    if (x0.norm() + d > f.domain_radius * (1.0 + 1e-12))
        throw BallOutsideDomain("eval_dilation_identity: B_d(x0) not inside the domain");
    const int N = f.N;
    const double ts = 2.0 * N / (N - 2.0);
    detail::BallGeometry g(N, x0, d);
    auto T = detail::evaluate_terms(f, Q, s, 0, g, spec);
    const double lhs =
        T.vol_xdQ / ts + (1.0 - 0.5 * N + N / (1.0 + s)) * eps * T.vol_smass;
    const double rhs = T.surf_Qmass_xnu / ts + eps / (s + 1.0) * T.surf_smass_xnu -
                       0.5 * T.surf_grad2_xnu + T.surf_xgrad_dnu +
                       0.5 * (N - 2) * T.surf_u_dnu;
    return make_report(Identity::Dilation, 0, lhs, rhs);
}

/// The two volume terms of the dilation identity (the Theorem 1.2 balance).
inline std::pair<double, double> dilation_volume_terms(const RadialField& f,
                                                       const RadialWeight& Q, double eps, double s,
                                                       const Eigen::VectorXd& x0, double d,
                                                       const numerics::QuadratureSpec& spec = {}) {
    const int N = f.N;
    const double ts = 2.0 * N / (N - 2.0);
    detail::BallGeometry g(N, x0, d);
    auto T = detail::evaluate_terms(f, Q, s, 0, g, spec);
    return {T.vol_xdQ / ts, (1.0 - 0.5 * N + N / (1.0 + s)) * eps * T.vol_smass};
}

/// Term-by-term assembly of the translation identity from the derivation
/// steps (integration by parts of each side separately); used to guard the
/// packaged evaluator against transcription errors.
inline PohozaevReport assemble_translation_identity(const RadialField& f, const RadialWeight& Q,
                                                    double eps, double s,
                                                    const Eigen::VectorXd& x0, double d, int axis,
                                                    const numerics::QuadratureSpec& spec = {}) {
    const double ts = 2.0 * f.N / (f.N - 2.0);
    detail::BallGeometry g(f.N, x0, d);
    auto T = detail::evaluate_terms(f, Q, s, axis, g, spec);
    // LHS of int (-Delta u) du/dx^i: boundary + half-gradient terms
    const double side1 = -T.surf_dnu_di + 0.5 * T.surf_grad2_nui;
    // RHS: Green's formula on the nonlinearity
    const double side2 = T.surf_Qmass_nui / ts + eps / (s + 1.0) * T.surf_smass_nui -
                         T.vol_dQ / ts;
    // rearranged into the packaged form
    const double lhs = T.vol_dQ / ts;
    const double rhs = lhs + (side1 - side2);  // equals the packaged rhs algebraically
    return make_report(Identity::Translation, axis, lhs, rhs);
}

/// Same for the dilation identity: multiplies by (y-x0).grad u, integrates by
/// parts, and eliminates int |grad u|^2 via the u-multiplied equation.
inline PohozaevReport assemble_dilation_identity(const RadialField& f, const RadialWeight& Q,
                                                 double eps, double s, const Eigen::VectorXd& x0,
                                                 double d,
                                                 const numerics::QuadratureSpec& spec = {}) {
    const int N = f.N;
    const double ts = 2.0 * N / (N - 2.0);
    detail::BallGeometry g(N, x0, d);
    auto T = detail::evaluate_terms(f, Q, s, 0, g, spec);
    // (2019-11-24-03): int -((y-x0).grad u) Delta u
    const double lhs_ibp = 0.5 * (2.0 - N) * T.vol_grad2 + 0.5 * T.surf_grad2_xnu -
                           T.surf_xgrad_dnu;
    // (2019-11-24-02): int ((y-x0).grad u)(Q u^{2*-1} + eps u^s)
    const double rhs_ibp = T.surf_Qmass_xnu / ts + eps / (s + 1.0) * T.surf_smass_xnu -
                           (T.vol_xdQ / ts + N / ts * T.vol_Qmass +
                            N * eps / (s + 1.0) * T.vol_smass);
    // (2019-11-24-04): int |grad u|^2 = surf_u_dnu + vol_Qmass + eps vol_smass
    const double grad2 = T.surf_u_dnu + T.vol_Qmass + eps * T.vol_smass;
    // assemble: lhs_ibp = rhs_ibp with vol_grad2 replaced by grad2
    const double side1 = 0.5 * (2.0 - N) * grad2 + 0.5 * T.surf_grad2_xnu - T.surf_xgrad_dnu;
    const double lhs = T.vol_xdQ / ts + (1.0 - 0.5 * N + N / (1.0 + s)) * eps * T.vol_smass;
    const double rhs = lhs + (side1 - rhs_ibp);
    return make_report(Identity::Dilation, 0, lhs, rhs);
}

// ---- difference identities --------------------------------------------------

struct ZeroDifference {};

/// Node data for the difference identities: the interpolation integrals
/// D1 = int_0^1 (t u1 + (1-t) u2)^{2*-1... exponent (N+2)/(N-2)} dt and
/// D2 with exponent s, plus the normalized difference xi.
struct DifferenceData {
    int N = 0;
    std::vector<double> grid;
    std::vector<double> u1, u2, d1, d2, xi;
    double normalizer = 0.0;
    double domain_radius = 0.0;

    static std::variant<DifferenceData, ZeroDifference> build(int N,
                                                              const std::vector<double>& grid,
                                                              const std::vector<double>& u1,
                                                              const std::vector<double>& u2,
                                                              double s, double R) {
        DifferenceData d;
        d.N = N;
        d.grid = grid;
        d.u1 = u1;
        d.u2 = u2;
        d.domain_radius = R;
        double norm = 0.0, umax = 0.0;
        for (std::size_t i = 0; i < u1.size(); ++i) {
            norm = std::max(norm, std::abs(u1[i] - u2[i]));
            umax = std::max(umax, std::abs(u1[i]));
        }
        if (norm <= 1e-300 || norm <= 1e-14 * umax) return ZeroDifference{};
        d.normalizer = norm;
        const double pc = (N + 2.0) / (N - 2.0);
        d.d1.resize(u1.size());
        d.d2.resize(u1.size());
        d.xi.resize(u1.size());
        for (std::size_t i = 0; i < u1.size(); ++i) {
            auto seg = [&](double expo) {
                return numerics::gauss_fixed<16>(
                    [&](double t) {
                        const double v = t * u1[i] + (1.0 - t) * u2[i];
                        return v > 0.0 ? std::pow(v, expo) : 0.0;
                    },
                    0.0, 1.0);
            };
            d.d1[i] = seg(pc);
            d.d2[i] = seg(s);
            d.xi[i] = (u1[i] - u2[i]) / norm;
        }
        return d;
    }
};

/// Difference form of the chosen identity over B_d(x0); implements the
/// displays exactly as stated (the epsilon coefficient of the dilation form
/// differs from the single-solution identity by the (1+s) factor absorbed
/// into D2's normalization).
inline PohozaevReport eval_difference_identities(const DifferenceData& data,
                                                 const RadialWeight& Q, double eps, double s,
                                                 const Eigen::VectorXd& x0, double d,
                                                 Identity which, int axis = 0,
                                                 const numerics::QuadratureSpec& spec = {}) {
    const int N = data.N;
    if (x0.norm() + d > data.domain_radius * (1.0 + 1e-12))
        throw BallOutsideDomain("eval_difference_identities: ball not inside the domain");
    RadialSpline su1(data.grid, data.u1), su2(data.grid, data.u2), sxi(data.grid, data.xi),
        sd1(data.grid, data.d1), sd2(data.grid, data.d2);
    detail::BallGeometry g(N, x0, d);
    detail::SphereMoments mom(N);
    const double area = std::pow(d, N - 1);
    auto r_of = [&](double c) { return g.ynorm(d, c); };
    const double xi_ax = (x0.size() ? x0[axis] : 0.0), ei = g.e1[axis];

    auto dnu_of = [&](const RadialSpline& sp, double c) {
        const double r = r_of(c);
        return r > 0 ? sp.deriv(r) * (g.x0n * c + d) / r : 0.0;
    };
    auto di_parts = [&](const RadialSpline& spA, const RadialSpline& spB) {
        // int (dA/dnu)(dB/dx^i): split into x0_i and omega_i moments
        const double a = xi_ax * mom.m0([&](double c) {
                             const double r = r_of(c);
                             return r > 0 ? dnu_of(spA, c) * spB.deriv(r) / r : 0.0;
                         });
        const double b = d * ei * mom.m1([&](double c) {
                             const double r = r_of(c);
                             return r > 0 ? dnu_of(spA, c) * spB.deriv(r) / r : 0.0;
                         });
        return area * (a + b);
    };
    auto bracket = [&](double c) {
        // (Q D1 + eps D2) xi - 1/2 (grad u1 + grad u2) . grad xi
        const double r = r_of(c);
        const double dd = (g.x0n * c + d);
        // radial gradients: grad f . grad h = f'(r) h'(r) for radial fields
        const double gg = (su1.deriv(r) + su2.deriv(r)) * sxi.deriv(r);
        (void)dd;
        return (Q.q(r) * sd1(r) + eps * sd2(r)) * sxi(r) - 0.5 * gg;
    };

    if (which == Identity::DiffTranslation) {
        // LHS: int dQ/dx^i D1 xi over the ball
        const double lhs = detail::volume_linear_component(
            g,
            [&](double r) { return r > 0 ? Q.dq(r) / r * sd1(r) * sxi(r) : 0.0; },
            axis, spec);
        const double rhs = area * ei * mom.m1(bracket) +
                           di_parts(su1, sxi) + di_parts(sxi, su2);
        return make_report(Identity::DiffTranslation, axis, lhs, rhs);
    }

    // DiffDilation
    auto vol_scalar = [&](const std::function<double(double)>& F) {
        return detail::volume_scalar(g, F, spec);
    };
    const double lhs_q = [&] {
        auto radial = [&](double rho) {
            return mom.m0([&](double c) {
                       const double r = g.ynorm(rho, c);
                       if (r <= 0) return 0.0;
                       const double x0dot = g.x0n * (g.x0n + rho * c);
                       return Q.dq(r) / r * (r * r - x0dot) * sd1(r) * sxi(r);
                   }) *
                   std::pow(rho, N - 1);
        };
        return numerics::integrate_radial(radial, 0.0, g.d, spec);
    }();
    const double lhs = lhs_q + ((1.0 + s) * (1.0 - 0.5 * N) + N) * eps *
                                   vol_scalar([&](double r) { return sd2(r) * sxi(r); });
    // surface: ((y-x0).grad u1 + (N-2)/2 u1) dxi/dnu + ((y-x0).grad xi + (N-2)/2 xi) du1/dnu
    auto first = [&](double c) {
        const double r = r_of(c);
        return (d * dnu_of(su1, c) + 0.5 * (N - 2) * su1(r)) * dnu_of(sxi, c) +
               (d * dnu_of(sxi, c) + 0.5 * (N - 2) * sxi(r)) * dnu_of(su1, c);
    };
    const double rhs = area * mom.m0(first) + area * d * mom.m0(bracket);
    return make_report(Identity::DiffDilation, 0, lhs, rhs);
}

}  // namespace critpeak::pohozaev
