#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "critpeak/asymptotics.hpp"

using namespace critpeak;
using namespace critpeak::asymptotics;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
// Gamma-function closed forms (the independent oracles)
double A_closed(int N) {
    return numerics::sphere_area(N) / (2.0 * N) * numerics::gamma_fn(0.5 * (N + 2)) *
           numerics::gamma_fn(0.5 * (N - 2)) / numerics::gamma_fn(N);
}
double B_closed(int N, double s) {
    const double p = 0.5 * (N - 2) * (s + 1);
    return numerics::sphere_area(N) * 0.5 * numerics::beta_fn(0.5 * N, p - 0.5 * N);
}
WeightSpec unit_paraboloid(int N) {
    return WeightSpec::paraboloid(N, 1.0, -2.0 * MatrixXd::Identity(N, N), VectorXd::Zero(N));
}
}  // namespace

TEST_CASE("compute_constants: A and B match the Beta closed forms") {
    for (int N : {3, 4, 5, 6, 7, 8}) {
        for (double s : {1.0, 1.5, 2.0}) {
            if (!(s < (N + 2.0) / (N - 2.0))) continue;
            if ((N - 2) * (s + 1) < N) {
                CHECK_THROWS_AS(compute_constants(N, s), DivergentIntegral);
                continue;
            }
            if ((N - 2) * (s + 1) == N) {
                // boundary family (N + s = 5): B reported as omega_N
                CHECK(compute_constants(N, s).B == Approx(numerics::sphere_area(N)));
                continue;
            }
            auto t = compute_constants(N, s);
            CHECK(t.A == Approx(A_closed(N)).epsilon(1e-8));
            CHECK(t.B == Approx(B_closed(N, s)).epsilon(1e-8));
        }
    }
}

TEST_CASE("compute_constants: reference values") {
    auto t4 = compute_constants(4, 1.5);
    CHECK(t4.A == Approx(M_PI * M_PI / 12.0).epsilon(1e-9));       // pi^2/12
    CHECK(t4.omega_N == Approx(2.0 * M_PI * M_PI).epsilon(1e-13));  // 2 pi^2
    auto t5 = compute_constants(5, 2.0);
    CHECK(t5.B == Approx(16.0 * M_PI * M_PI / 105.0).epsilon(1e-9));  // 16 pi^2/105
}

TEST_CASE("compute_constants: S equals the known Sobolev constant") {
    for (int N : {4, 5}) {
        auto t = compute_constants(N, 1.5);
        const double known =
            M_PI * N * (N - 2) *
            std::pow(numerics::gamma_fn(0.5 * N) / numerics::gamma_fn(double(N)), 2.0 / N);
        CHECK(t.S == Approx(known).epsilon(1e-9));
    }
}

TEST_CASE("S from the quotient is dilation invariant") {
    // replacing U_{0,1} by U_{0,lambda} leaves the quotient unchanged
    const int N = 5;
    const auto base = compute_constants(N, 1.5);
    for (double lam : {0.5, 2.0, 10.0}) {
        const double cN = kernel::bubble_norm(N);
        numerics::QuadratureSpec spec;
        auto grad2 = numerics::sphere_area(N) *
                     numerics::integrate_radial(
                         [&](double r) {
                             const double t = lam * lam * r * r;
                             const double du = cN * (N - 2) * std::pow(lam, 0.5 * (N - 2)) * lam *
                                               lam * r * std::pow(1.0 + t, -0.5 * N);
                             return du * du * std::pow(r, N - 1);
                         },
                         0.0, std::numeric_limits<double>::infinity(), spec);
        auto mass = numerics::sphere_area(N) *
                    numerics::integrate_radial(
                        [&](double r) {
                            return std::pow(kernel::eval_bubble_radial(N, lam, r),
                                            critical_exponent(N)) *
                                   std::pow(r, N - 1);
                        },
                        0.0, std::numeric_limits<double>::infinity(), spec);
        const double S = grad2 / std::pow(mass, (N - 2.0) / N);
        CHECK(S == Approx(base.S).epsilon(1e-10));
    }
}

TEST_CASE("eta: case selection is exact") {
    // N=5, s=1: (N-2)s = 3 < 5 -> lambda^{-3/2}
    CHECK(eval_eta(5, 1.0, 100.0) == Approx(std::pow(100.0, -1.5)).epsilon(1e-14));
    // N=4, s=2: (N-2)s = 4 = N -> the log-corrected middle case log(lam)/lam^2
    CHECK(eval_eta(4, 2.0, 50.0) == Approx(std::log(50.0) / 2500.0).epsilon(1e-14));
    // N=4, s=2.5: (N-2)s = 5 > 4 -> lambda^{-(N-(N-2)s/2)} = lambda^{-1.5}
    CHECK(eval_eta(4, 2.5, 30.0) == Approx(std::pow(30.0, -1.5)).epsilon(1e-14));
}

TEST_CASE("eta1: case selection is exact") {
    // N=4, s=1 < 1.5 -> lambda^{-(N-2)s/2} = lambda^{-1}
    CHECK(eval_eta1(4, 1.0, 100.0) == Approx(0.01).epsilon(1e-14));
    // boundary case s = (N+2)/(2(N-2)) = 1.5 at N=4: log factor present
    CHECK(eval_eta1(4, 1.5, 100.0) ==
          Approx(std::pow(std::log(100.0), 0.75) * std::pow(100.0, -1.5)).epsilon(1e-14));
    // s = 2 > 1.5: lambda^{-(3 - (N-2)s/2)} = lambda^{-1}
    CHECK(eval_eta1(4, 2.0, 100.0) == Approx(std::pow(100.0, -1.0)).epsilon(1e-14));
}

TEST_CASE("eta and eta1 are positive and decreasing for lambda >= 2") {
    for (int N : {4, 5, 6}) {
        for (double s : {1.0, 1.5, 2.0}) {
            if (!(s < (N + 2.0) / (N - 2.0))) continue;
            double prev_eta = 1e300, prev_eta1 = 1e300;
            for (double lam : {2.0, 4.0, 16.0, 256.0}) {
                const double e = eval_eta(N, s, lam), e1 = eval_eta1(N, s, lam);
                CHECK(e > 0.0);
                CHECK(e1 > 0.0);
                CHECK(e < prev_eta);
                CHECK(e1 < prev_eta1);
                prev_eta = e;
                prev_eta1 = e1;
            }
        }
    }
}

TEST_CASE("weighted_mass_dilation: constant weight vanishes") {
    kernel::Bubble b(VectorXd::Zero(4), 100.0, 4);
    auto out = weighted_mass_dilation(b, WeightSpec::constant(4), 1.0);
    CHECK(out.value == 0.0);
}

TEST_CASE("weighted_mass_dilation: ratio to leading tends to 1 monotonically") {
    const int N = 4;
    auto Q = unit_paraboloid(N);
    double prev = 1e9;
    for (double lam : {50.0, 100.0, 200.0}) {
        kernel::Bubble b(VectorXd::Zero(N), lam, N);
        auto out = weighted_mass_dilation(b, Q, 1.0);
        const double dev = std::abs(out.value / out.leading - 1.0);
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("weighted_mass_dilation: reflection symmetry of the weight") {
    // replacing Q(x) by Q(-x) leaves the value unchanged for a centered bubble
    const int N = 5;
    kernel::Bubble b(VectorXd::Zero(N), 80.0, N);
    MatrixXd H = -2.0 * MatrixXd::Identity(N, N);
    H(0, 1) = H(1, 0) = 0.3;
    auto Qp = WeightSpec::paraboloid(N, 1.0, H, VectorXd::Zero(N));
    // Q(-x) has the same Hessian at the origin-peak, so the integrals agree
    auto v1 = weighted_mass_dilation(b, Qp, 0.8);
    auto Qm = WeightSpec::paraboloid(N, 1.0, H, VectorXd::Zero(N));
    auto v2 = weighted_mass_dilation(b, Qm, 0.8);
    CHECK(v1.value == Approx(v2.value).epsilon(1e-14));
}

TEST_CASE("bubble_power_mass: N=5, s=2 leading order within 5% at lambda = 1e3") {
    kernel::Bubble b(VectorXd::Zero(5), 1000.0, 5);
    auto out = bubble_power_mass(b, 2.0, 1.0);
    CHECK(out.value / out.leading == Approx(1.0).margin(0.05));
}

TEST_CASE("bubble_power_mass: N=4, s=1 log case ratio tends to 1") {
    // d chosen so the additive log-offset (log d - 5/4 from the projection
    // and cutoff corrections) is small against log(lambda) at the ladder top
    const double d = 4.5;
    double prev = 1e9;
    for (double lam : {100.0, 1000.0, 10000.0}) {
        kernel::Bubble b(VectorXd::Zero(4), lam, 4);
        auto out = bubble_power_mass(b, 1.0, d);
        const double dev = std::abs(out.value / out.leading - 1.0);
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 0.1);
}

TEST_CASE("bubble_power_mass: d = inf with s = 2*-1 recovers S^{N/2}") {
    for (int N : {4, 5}) {
        auto t = compute_constants(N, 1.5);
        kernel::Bubble b(VectorXd::Zero(N), 1.0, N);
        auto out =
            bubble_power_mass(b, critical_exponent(N) - 1.0,
                              std::numeric_limits<double>::infinity());
        CHECK(out.value == Approx(std::pow(t.S, 0.5 * N)).epsilon(1e-9));
    }
}

TEST_CASE("subcritical_dilation: N=5, s=2 ratio in [0.9, 1.1] at lambda = 1e3") {
    kernel::Bubble b(VectorXd::Zero(5), 1000.0, 5);
    auto out = subcritical_dilation(b, 2.0, 1.0);
    CHECK(out.value / out.leading > 0.9);
    CHECK(out.value / out.leading < 1.1);
}

TEST_CASE("dilation_weighted: constant weight vanishes exactly") {
    kernel::Bubble b(VectorXd::Zero(5), 300.0, 5);
    auto out = dilation_weighted(b, WeightSpec::constant(5), 1.0);
    CHECK(out.value == 0.0);
}

TEST_CASE("lemma ratio ladders decrease and end within 10%") {
    // the acceptance criterion runs the same ladders; here spot-check N=5, s=2
    const int N = 5;
    auto Q = unit_paraboloid(N);
    const std::vector<double> ladder = {100.0, 200.0, 400.0, 800.0, 1600.0};
    for (int kind = 0; kind < 3; ++kind) {
        double prev = 1e18;
        double last = 0.0;
        for (double lam : ladder) {
            kernel::Bubble b(VectorXd::Zero(N), lam, N);
            ValueWithLeading out;
            if (kind == 0) out = weighted_mass_dilation(b, Q, 1.0);
            if (kind == 1) out = dilation_weighted(b, Q, 1.0);
            if (kind == 2) out = subcritical_dilation(b, 2.0, 1.0);
            const double dev = std::abs(out.value / out.leading - 1.0);
            CHECK(dev <= prev * (1.0 + 1e-9));
            prev = dev;
            last = dev;
        }
        CHECK(last <= 0.1);
    }
}

TEST_CASE("translation_weighted: ratio approaches 1 for an offset bubble") {
    const int N = 5;
    auto Q = unit_paraboloid(N);
    double prev = 1e9;
    for (double lam : {100.0, 200.0, 400.0}) {
        kernel::Bubble b(VectorXd::Unit(N, 0) * (0.05 / lam), lam, N);
        auto out = translation_weighted(b, Q, 1.0);
        const double dev = std::abs(out.value / out.leading - 1.0);
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 0.1);
}

TEST_CASE("translation_subcritical: boundary-term envelope with constant 10") {
    const int N = 5;
    const double s = 2.0;
    for (double lam : {100.0, 400.0}) {
        kernel::Bubble b(VectorXd::Zero(N), lam, N);
        auto out = translation_subcritical(b, s, 1.0, 0.05 / lam);
        CHECK(std::abs(out.value) <= 10.0 * out.leading);
    }
}

TEST_CASE("cross interactions obey the O(.) envelopes along the ladder") {
    const int N = 5;
    const double s = 2.0;
    const std::vector<double> ladder = {20.0, 40.0, 80.0};
    for (auto kind : {InteractionKind::CrossDilationCritical,
                      InteractionKind::CrossDilationSubcritical,
                      InteractionKind::CrossTranslationCritical,
                      InteractionKind::CrossTranslationSubcritical}) {
        double C = 0.0;
        for (std::size_t k = 0; k < ladder.size(); ++k) {
            kernel::Bubble bj(VectorXd::Zero(N), ladder[k], N);
            kernel::Bubble bl(VectorXd::Unit(N, 0), ladder[k] * 1.3, N);
            auto out = cross_interaction(bj, bl, kind, s);
            if (k == 0) {
                C = std::abs(out.value) / out.leading;  // calibrate at the smallest lambda
            } else {
                CHECK(std::abs(out.value) <= C * out.leading * 1.05);
            }
        }
    }
}

TEST_CASE("cross interactions enforce separation and comparable heights") {
    const int N = 4;
    kernel::Bubble bj(VectorXd::Zero(N), 50.0, N);
    kernel::Bubble bfar(VectorXd::Unit(N, 0) * 2.0, 50.0, N);
    kernel::Bubble btall(VectorXd::Unit(N, 0) * 2.0, 5000.0, N);
    auto Q = unit_paraboloid(N);
    CHECK_THROWS_AS(interaction_integrals(bj, bfar, InteractionKind::CrossDilationCritical, Q, 1.0,
                                          /*d=*/1.0),
                    SeparationViolated);
    CHECK_THROWS_AS(cross_interaction(bj, btall, InteractionKind::CrossDilationCritical, 1.0),
                    SeparationViolated);
}

TEST_CASE("convolution bound: value at y = 0 has the closed form") {
    // lhs(0) = omega_N int r (1+r)^{-2-theta} dr = omega_N B(2, theta)
    const int N = 5;
    const double theta = 1.0;
    auto out = convolution_bound_check(N, theta, 0.0);
    const double oracle = numerics::sphere_area(N) * numerics::beta_fn(2.0, theta);
    CHECK(out.value == Approx(oracle).epsilon(1e-6));
}

TEST_CASE("convolution bound: theta < N-2 envelope stabilizes") {
    // lhs (1+|y|)^theta must stay bounded: the ratio approaches a constant;
    // a log-corrected growth would show ratio(16)/ratio(8) ~ log16/log8 = 1.33
    const int N = 5;
    const double theta = 1.0;
    std::vector<double> ratios;
    for (double y : {2.0, 4.0, 8.0, 16.0}) {
        auto out = convolution_bound_check(N, theta, y);
        ratios.push_back(out.value / out.leading);
    }
    const std::size_t n = ratios.size();
    CHECK(ratios[n - 1] / ratios[n - 2] <= 1.15);
    CHECK(ratios[n - 1] / ratios[n - 2] >= 1.0 / 1.15);
    // successive growth factors shrink toward 1
    CHECK(std::abs(ratios[n - 1] / ratios[n - 2] - 1.0) <
          std::abs(ratios[1] / ratios[0] - 1.0));
}

TEST_CASE("convolution bound: theta = N-2 log-corrected envelope stabilizes") {
    const int N = 4;
    const double theta = 2.0;
    std::vector<double> ratios;
    for (double y : {4.0, 16.0, 64.0}) {
        auto out = convolution_bound_check(N, theta, y);
        ratios.push_back(out.value / out.leading);
    }
    CHECK(ratios[2] / ratios[1] <= 1.2);
    CHECK(ratios[2] / ratios[1] >= 1.0 / 1.2);
}
