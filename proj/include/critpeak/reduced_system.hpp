#pragma once

// The finite-dimensional reduced system: location equations (Hessian times
// displacement) and height equations (lambda^{-3} against the subcritical
// perturbation), solved per peak by a Poincare-Miranda box search with a
// Newton polish. Classifies the existence regimes and certifies the
// non-existence case N >= 5, s = 1.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "critpeak/asymptotics.hpp"
#include "critpeak/errors.hpp"
#include "critpeak/kernel.hpp"
#include "critpeak/numerics/miranda.hpp"
#include "critpeak/numerics/newton.hpp"

namespace critpeak::reduced {

using asymptotics::ConstantsTable;

/// A nondegenerate interior critical point of Q with negative Laplacian.
struct PeakData {
    Eigen::VectorXd location;
    double q_value = 1.0;
    Eigen::VectorXd gradient;
    double laplacian = -1.0;
    Eigen::MatrixXd hessian;

    void validate() const {
        if (!(q_value > 0.0)) throw InvalidArgument("PeakData: Q(a_j) must be > 0");
        const double scale = std::max(1.0, std::abs(q_value));
        if (gradient.size() && gradient.lpNorm<Eigen::Infinity>() > 1e-12 * scale)
            throw InvalidArgument("PeakData: grad Q(a_j) must vanish");
        if (!(laplacian < 0.0)) throw InvalidArgument("PeakData: Delta Q(a_j) must be < 0");
        if (std::abs(hessian.determinant()) <= 0.0)
            throw InvalidArgument("PeakData: Hessian must be nondegenerate");
    }

    static PeakData from_weight(const WeightSpec& w) {
        PeakData p;
        p.location = w.peak;
        p.q_value = w.value;
        p.gradient = Eigen::VectorXd::Zero(w.dim());
        p.laplacian = w.laplacian();
        p.hessian = w.hessian;
        return p;
    }
};

struct ReducedProblem {
    int N = 4;
    double s = 1.0;
    double eps = 1e-3;
    std::vector<PeakData> peaks;
    // Miranda box constants (c1 small, c2 large); defaulted from the
    // closed-form balance point when unset.
    std::optional<std::pair<double, double>> box_constants;

    void validate() const {
        if (N < 4) throw InvalidArgument("ReducedProblem: N must be >= 4");
        if (!(s >= 1.0 && s < (N + 2.0) / (N - 2.0)))
            throw InvalidArgument("ReducedProblem: s outside [1, 2*-1)");
        if (!(eps > 0.0)) throw InvalidArgument("ReducedProblem: eps must be > 0");
        if (peaks.empty()) throw InvalidArgument("ReducedProblem: no peaks");
        for (const auto& p : peaks) p.validate();
        for (std::size_t i = 0; i < peaks.size(); ++i)
            for (std::size_t j = i + 1; j < peaks.size(); ++j)
                if ((peaks[i].location - peaks[j].location).norm() < 1e-12)
                    throw InvalidArgument("ReducedProblem: peaks must be distinct");
    }
};

enum class Regime { PowerLaw, ExpLaw, NoSolution };

inline std::string regime_name(Regime r) {
    switch (r) {
        case Regime::PowerLaw: return "PowerLaw";
        case Regime::ExpLaw: return "ExpLaw";
        default: return "NoSolution";
    }
}

/// Regime split of Theorems 1.2/1.3: no concentrating solution iff
/// N >= 5 and s = 1; the log-corrected family handles N = 4, s = 1.
inline Regime classify_regime(int N, double s) {
    if (s == 1.0) return N >= 5 ? Regime::NoSolution : Regime::ExpLaw;
    return Regime::PowerLaw;
}

struct ReducedSolution {
    Regime regime = Regime::NoSolution;
    std::vector<Eigen::VectorXd> centers;
    std::vector<double> heights;       // reduced heights (paper normalization)
    std::vector<double> log_heights;   // log of heights; primary in the ExpLaw regime
    std::vector<double> prefactors;    // C_j: heights = C_j eps^{-beta} / exp law rate
    std::vector<double> peak_lambdas;  // predicted u(x_j)^{2/(N-2)}, corrected constants
    std::vector<numerics::Box> root_boxes;  // certified Miranda boxes (transformed coords)
    // NoSolution certificate: the height residual kept one sign over the box
    double certificate_box_lo = 0.0, certificate_box_hi = 0.0;
    int certificate_sign = 0;
};

/// Leading coefficient of the displayed height equation, as printed in the
/// reduction (negative since DeltaQ < 0).
inline double height_coefficient(int N, double s, double deltaQ, const ConstantsTable& t) {
    return N * (4.0 - (N - 2) * (s - 1.0)) * t.B /
           (2.0 * t.A * (N - 2) * deltaQ * (s + 1.0));
}

/// The displayed leading terms of the height equation:
///   1/lambda^3 + K eps / lambda^{3-(N-2)(s-1)/2}         (N+s != 5)
///   1/lambda^3 + (2 omega_4/(A DeltaQ)) eps log(lambda)/lambda^3   (N+s = 5)
/// Remainder terms are dropped.
inline double height_residual(int N, double s, double eps, double deltaQ, double A, double B,
                              double omega4, double lambda) {
    if (N + s == 5.0) {
        const double Klog = 2.0 * omega4 / (A * deltaQ);
        return 1.0 / std::pow(lambda, 3.0) * (1.0 + Klog * eps * std::log(lambda));
    }
    const double K = N * (4.0 - (N - 2) * (s - 1.0)) * B / (2.0 * A * (N - 2) * deltaQ * (s + 1.0));
    return std::pow(lambda, -3.0) + K * eps * std::pow(lambda, -(3.0 - 0.5 * (N - 2) * (s - 1.0)));
}

/// Hessian-times-displacement location equation (remainders dropped).
inline Eigen::VectorXd location_residual(const PeakData& peak, const Eigen::VectorXd& y) {
    return peak.hessian * (y - peak.location);
}

// ---- corrected-constant chain -------------------------------------------
// The displayed equations drop bubble-normalization powers (N(N-2))^{.}, a
// Taylor factor 1/2 and the Q(a_j) powers; the constants below restore them
// so that predictions are comparable with computed solutions.

/// Corrected K for the power-law balance (negative).
inline double height_coefficient_corrected(int N, double s, const PeakData& pk,
                                           const ConstantsTable& t) {
    const double cN = kernel::bubble_norm(N);
    const double Kp = height_coefficient(N, s, pk.laplacian, t);
    return 2.0 * std::pow(cN, s + 1.0 - asymptotics::critical_exponent(N)) *
           std::pow(pk.q_value, 0.25 * (N + 2.0 - (N - 2) * s)) * Kp;
}

/// Corrected exp-law rate (domain-free part): log(lambda_bubble) * eps -> this.
inline double exp_rate_corrected(int N, const PeakData& pk, const ConstantsTable& t) {
    return 2.0 * t.A * std::abs(pk.laplacian) / (t.omega_N * pk.q_value);
}

/// Bubble height -> the Theorem 1.1 normalization u(x_j)^{2/(N-2)}.
inline double peak_lambda_from_bubble(int N, double q_value, double lambda_bubble) {
    return std::sqrt(double(N) * (N - 2)) / std::sqrt(q_value) * lambda_bubble;
}

/// Power-law: predicted bubble height (|K_corr| eps)^{-1/gamma}.
inline double predicted_bubble_height(int N, double s, double eps, const PeakData& pk,
                                      const ConstantsTable& t) {
    const double gamma = 0.5 * (N - 2) * (s - 1.0);
    if (gamma <= 0.0) throw RegimeMismatch("predicted_bubble_height: power-law regime only");
    const double Kc = std::abs(height_coefficient_corrected(N, s, pk, t));
    return std::pow(Kc * eps, -1.0 / gamma);
}

struct ScalingPrediction {
    Regime regime;
    double value;  // PowerLaw: exponent -2/((N-2)(s-1)); ExpLaw: rate A|DeltaQ|/(2 omega_4)
};

/// The (4-26-61) scaling: heights follow eps^{-2/((N-2)(s-1))} in the
/// power-law regime and log(lambda) ~ rate/eps in the exp-law regime.
inline ScalingPrediction predict_scaling(const ReducedProblem& problem) {
    problem.validate();
    const Regime reg = classify_regime(problem.N, problem.s);
    if (reg == Regime::NoSolution)
        throw RegimeMismatch("predict_scaling: no scaling in the NoSolution regime");
    if (reg == Regime::PowerLaw)
        return {reg, -2.0 / ((problem.N - 2) * (problem.s - 1.0))};
    const ConstantsTable t = asymptotics::compute_constants(problem.N, problem.s);
    return {reg, t.A * std::abs(problem.peaks.front().laplacian) / (2.0 * t.omega_N)};
}

namespace detail {

// Per-peak search in transformed coordinates z = (offset from a_j, m) where
// m = lambda * eps^{beta} (power law) or m = eps * log(lambda) (exp law).
// Location coordinates use the Hessian eigenbasis (orthogonal transform).
struct PeakSearch {
    Eigen::MatrixXd eigvecs;
    Eigen::VectorXd eigvals;
    double loc_halfwidth;
    double c1, c2;
    Regime regime;
};

inline std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual_map(
    int N, double s, double eps, const PeakData& pk, const ConstantsTable& t,
    const PeakSearch& ps) {
    return [=, &pk](const Eigen::VectorXd& zm) {
        const int n = N;
        Eigen::VectorXd F(n + 1);
        // location rows in the eigenbasis: mu_i z_i (+ the dropped remainders)
        for (int i = 0; i < n; ++i) F[i] = ps.eigvals[i] * zm[i];
        const double m = zm[n];
        if (ps.regime == Regime::PowerLaw) {
            const double gamma = 0.5 * (N - 2) * (s - 1.0);
            const double K = height_coefficient(N, s, pk.laplacian, t);
            // lambda^3 * height_residual at lambda = m eps^{-1/gamma}
            F[n] = 1.0 + K * std::pow(m, gamma);
        } else {
            const double Klog = 2.0 * t.omega_N / (t.A * pk.laplacian);
            F[n] = 1.0 + Klog * m;
        }
        return F;
    };
}

}  // namespace detail

/// Solve the reduced system. Power/exp regimes return per-peak centers and
/// heights certified by a Miranda box and polished by Newton; the
/// N >= 5, s = 1 case returns NoSolution with a sign-constancy certificate.
inline ReducedSolution solve_reduced(const ReducedProblem& problem) {
    problem.validate();
    const int N = problem.N;
    const double s = problem.s, eps = problem.eps;
    const ConstantsTable t = asymptotics::compute_constants(N, s);
    ReducedSolution sol;
    sol.regime = classify_regime(N, s);

    if (sol.regime == Regime::NoSolution) {
        // certificate: (1 + K eps)/lambda^3 keeps one sign over the lambda box
        const double K = height_coefficient(N, s, problem.peaks.front().laplacian, t);
        double c1 = 2.0, c2 = 1.0 / eps;
        if (problem.box_constants) {
            c1 = problem.box_constants->first;
            c2 = problem.box_constants->second;
        }
        (void)K;
        int sign = 0;
        const int samples = 64;
        for (const auto& pk : problem.peaks) {
            for (int k = 0; k <= samples; ++k) {
                const double lam = c1 * std::pow(c2 / c1, double(k) / samples);
                const double v =
                    height_residual(N, s, eps, pk.laplacian, t.A, t.B, t.omega_N, lam);
                const int sv = v > 0 ? 1 : (v < 0 ? -1 : 0);
                if (sign == 0) sign = sv;
                if (sv == 0 || sv != sign)
                    throw BoxConstantsInvalid(
                        "solve_reduced: height residual changes sign in the NoSolution regime");
            }
        }
        sol.certificate_box_lo = c1;
        sol.certificate_box_hi = c2;
        sol.certificate_sign = sign;
        return sol;
    }

    const double gamma = 0.5 * (N - 2) * (s - 1.0);
    for (const auto& pk : problem.peaks) {
        detail::PeakSearch ps;
        ps.regime = sol.regime;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pk.hessian);
        ps.eigvecs = es.eigenvectors();
        ps.eigvals = es.eigenvalues();  // ascending, stable
        // balance point of the scaled height equation
        double mstar;
        if (sol.regime == Regime::PowerLaw) {
            mstar = std::pow(std::abs(height_coefficient(N, s, pk.laplacian, t)), -1.0 / gamma);
        } else {
            mstar = std::abs(t.A * pk.laplacian) / (2.0 * t.omega_N);
        }
        ps.c1 = 0.1 * mstar;
        ps.c2 = 10.0 * mstar;
        if (problem.box_constants) {
            ps.c1 = problem.box_constants->first;
            ps.c2 = problem.box_constants->second;
        }
        ps.loc_halfwidth = (sol.regime == Regime::PowerLaw)
                               ? std::pow(eps, 1.0 / (2.0 * (s - 1.0)))
                               : std::exp(-0.5 * ps.c1 / eps);
        ps.loc_halfwidth = std::max(ps.loc_halfwidth, 1e-300);

        auto F = detail::residual_map(N, s, eps, pk, t, ps);
        numerics::Box box;
        box.lower = Eigen::VectorXd::Constant(N + 1, -ps.loc_halfwidth);
        box.upper = Eigen::VectorXd::Constant(N + 1, ps.loc_halfwidth);
        box.lower[N] = ps.c1;
        box.upper[N] = ps.c2;
        auto outcome = numerics::miranda_search(F, box, 30);
        if (std::holds_alternative<numerics::NoSignChange>(outcome))
            throw BoxConstantsInvalid("solve_reduced: Miranda sign condition failed on component " +
                                      std::to_string(std::get<numerics::NoSignChange>(outcome).component));
        numerics::Box root = std::get<numerics::Box>(outcome);

        // Newton polish from the certified box center
        numerics::NewtonConfig ncfg;
        ncfg.residual_tol = 1e-12;
        Eigen::VectorXd zm = numerics::newton_solve(F, root.center(), ncfg);

        const double m = zm[N];
        double lambda, log_lambda;
        if (sol.regime == Regime::PowerLaw) {
            const double beta = 1.0 / gamma;
            lambda = m * std::pow(eps, -beta);
            log_lambda = std::log(m) - beta * std::log(eps);
        } else {
            log_lambda = m / eps;
            lambda = log_lambda > 700.0 ? std::numeric_limits<double>::infinity()
                                        : std::exp(log_lambda);
        }
        Eigen::VectorXd z = zm.head(N);
        sol.centers.push_back(pk.location + ps.eigvecs * z);
        sol.heights.push_back(lambda);
        sol.log_heights.push_back(log_lambda);
        // C_j: lambda = C_j eps^{-beta} (power law) / log(lambda) eps = C_j (exp law)
        sol.prefactors.push_back(m);
        if (sol.regime == Regime::PowerLaw) {
            sol.peak_lambdas.push_back(peak_lambda_from_bubble(
                N, pk.q_value, predicted_bubble_height(N, s, eps, pk, t)));
        } else {
            const double lb = exp_rate_corrected(N, pk, t) / eps;
            sol.peak_lambdas.push_back(
                lb > 690.0 ? std::numeric_limits<double>::infinity()
                           : peak_lambda_from_bubble(N, pk.q_value, std::exp(lb)));
        }
        sol.root_boxes.push_back(root);
    }
    return sol;
}

}  // namespace critpeak::reduced
