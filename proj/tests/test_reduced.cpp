#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "critpeak/reduced_system.hpp"

using namespace critpeak;
using namespace critpeak::reduced;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
PeakData make_peak(int N, double q0, double curv, VectorXd a = {}) {
    PeakData pk;
    pk.location = a.size() ? a : VectorXd::Zero(N);
    pk.q_value = q0;
    pk.gradient = VectorXd::Zero(N);
    pk.laplacian = -2.0 * curv * N;
    pk.hessian = -2.0 * curv * MatrixXd::Identity(N, N);
    return pk;
}

ReducedProblem make_problem(int N, double s, double eps, double q0 = 1.0, double curv = 1.0) {
    ReducedProblem rp;
    rp.N = N;
    rp.s = s;
    rp.eps = eps;
    rp.peaks.push_back(make_peak(N, q0, curv));
    return rp;
}
}  // namespace

TEST_CASE("height_residual: N=5, s=1 has no root for small eps") {
    auto t = asymptotics::compute_constants(5, 1.0);
    const double K = height_coefficient(5, 1.0, -10.0, t);
    CHECK(K < 0.0);
    // residual = (1 + K eps)/lambda^3: one sign over all lambda when eps < 1/|K|
    const double eps = 0.5 / std::abs(K);
    for (double lam : {2.0, 10.0, 1e3, 1e6}) {
        const double v = height_residual(5, 1.0, eps, -10.0, t.A, t.B, t.omega_N, lam);
        CHECK(v > 0.0);
        CHECK(v * std::pow(lam, 3.0) == Approx(1.0 + K * eps).epsilon(1e-12));
    }
}

TEST_CASE("height_residual: closed-form root for N=5, s=2") {
    auto t = asymptotics::compute_constants(5, 2.0);
    const double dq = -10.0;
    const double K = height_coefficient(5, 2.0, dq, t);
    // K = N (4-3) B / (2 A * 3 * dq * 3)
    CHECK(K == Approx(5.0 * t.B / (2.0 * t.A * 3.0 * dq * 3.0)).epsilon(1e-14));
    for (double eps : {1e-3, 1e-4}) {
        const double lam_star = std::pow(std::abs(K) * eps, -2.0 / 3.0);
        const double v = height_residual(5, 2.0, eps, dq, t.A, t.B, t.omega_N, lam_star);
        CHECK(std::abs(v) <= 1e-12 * std::pow(lam_star, -3.0));
    }
}

TEST_CASE("height_residual: N=4, s=1 log case root") {
    auto t = asymptotics::compute_constants(4, 1.5);  // A, omega_N independent of s
    const double dq = -8.0;
    const double log_lam_star = t.A * std::abs(dq) / (2.0 * t.omega_N) / 0.05;
    const double lam_star = std::exp(log_lam_star);
    const double v = height_residual(4, 1.0, 0.05, dq, t.A, t.B, t.omega_N, lam_star);
    CHECK(std::abs(v) <= 1e-10 * std::pow(lam_star, -3.0));
}

TEST_CASE("location_residual: zero at the peak, linear action") {
    auto pk = make_peak(4, 1.0, 1.0);
    CHECK(location_residual(pk, pk.location).norm() == 0.0);
    VectorXd y = pk.location + 0.3 * VectorXd::Unit(4, 0);
    VectorXd r = location_residual(pk, y);
    CHECK(r[0] == Approx(-2.0 * 0.3).epsilon(1e-14));
    for (int i = 1; i < 4; ++i) CHECK(r[i] == 0.0);
}

TEST_CASE("solve_reduced: N=5, s=2 matches the closed-form balance and scales") {
    auto t = asymptotics::compute_constants(5, 2.0);
    const double K = std::abs(height_coefficient(5, 2.0, -10.0, t));
    double collapse = 0.0;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        auto sol = solve_reduced(make_problem(5, 2.0, eps));
        REQUIRE(sol.regime == Regime::PowerLaw);
        const double lam_star = std::pow(K * eps, -2.0 / 3.0);
        CHECK(sol.heights[0] == Approx(lam_star).epsilon(1e-8));
        const double c = sol.heights[0] * std::pow(eps, 2.0 / 3.0);
        if (collapse == 0.0)
            collapse = c;
        else
            CHECK(c == Approx(collapse).epsilon(1e-6));
    }
}

TEST_CASE("solve_reduced: N=5, s=1 returns NoSolution with a certificate") {
    auto sol = solve_reduced(make_problem(5, 1.0, 1e-3));
    CHECK(sol.regime == Regime::NoSolution);
    CHECK(sol.certificate_sign != 0);
    CHECK(sol.certificate_box_hi > sol.certificate_box_lo);
}

TEST_CASE("solve_reduced: N=4, s=1 exp law rate") {
    auto t = asymptotics::compute_constants(4, 1.5);
    auto sol = solve_reduced(make_problem(4, 1.0, 0.05));
    REQUIRE(sol.regime == Regime::ExpLaw);
    // log(lambda) * eps = A |DeltaQ| / (2 omega_4) per the displayed equation
    const double expected = t.A * 8.0 / (2.0 * t.omega_N);
    CHECK(sol.log_heights[0] * 0.05 == Approx(expected).epsilon(1e-10));
}

TEST_CASE("classifier truth table over (N, s)") {
    for (int N : {4, 5, 6}) {
        for (double s : {1.0, 1.5, 2.0}) {
            const bool expect_none = (N >= 5 && s == 1.0);
            CHECK((classify_regime(N, s) == Regime::NoSolution) == expect_none);
        }
    }
}

TEST_CASE("solve_reduced: Miranda certificate soundness") {
    auto sol = solve_reduced(make_problem(5, 2.0, 1e-3));
    REQUIRE(sol.regime == Regime::PowerLaw);
    REQUIRE(sol.root_boxes.size() == 1);
    // re-evaluate the residual map on the returned sub-box faces
    auto t = asymptotics::compute_constants(5, 2.0);
    auto pk = make_peak(5, 1.0, 1.0);
    const double gamma = 0.5 * 3.0 * 1.0;
    const double K = height_coefficient(5, 2.0, pk.laplacian, t);
    const auto& box = sol.root_boxes[0];
    auto F = [&](const VectorXd& zm) {
        VectorXd f(6);
        for (int i = 0; i < 5; ++i) f[i] = -2.0 * zm[i];
        f[5] = 1.0 + K * std::pow(zm[5], gamma);
        return f;
    };
    for (int i = 0; i < 6; ++i) {
        VectorXd lo = box.center(), hi = box.center();
        lo[i] = box.lower[i];
        hi[i] = box.upper[i];
        CHECK(F(lo)[i] * F(hi)[i] < 0.0);
    }
}

TEST_CASE("multi-peak decoupling: two well-separated peaks solve independently") {
    ReducedProblem rp = make_problem(5, 2.0, 1e-3);
    rp.peaks.push_back(make_peak(5, 1.0, 1.0, VectorXd::Unit(5, 0) * 3.0));
    auto two = solve_reduced(rp);
    auto one = solve_reduced(make_problem(5, 2.0, 1e-3));
    REQUIRE(two.heights.size() == 2);
    CHECK(two.heights[0] == Approx(one.heights[0]).epsilon(1e-10));
    CHECK(two.heights[1] == Approx(one.heights[0]).epsilon(1e-10));
    CHECK((two.centers[1] - VectorXd::Unit(5, 0) * 3.0).norm() <= 1e-10);
}

TEST_CASE("scaling Q by a positive constant never changes the regime") {
    for (double c : {0.5, 2.0, 7.0}) {
        for (int N : {4, 5}) {
            for (double s : {1.0, 2.0}) {
                auto base = make_problem(N, s, 1e-3);
                auto scaled = make_problem(N, s, 1e-3, c, c);
                const auto r1 = solve_reduced(base).regime;
                const auto r2 = solve_reduced(scaled).regime;
                CHECK(r1 == r2);
            }
        }
    }
}

TEST_CASE("predict_scaling: exponents and rates") {
    CHECK(predict_scaling(make_problem(5, 2.0, 1e-3)).value == Approx(-2.0 / 3.0).epsilon(1e-14));
    CHECK(predict_scaling(make_problem(6, 1.5, 1e-3)).value == Approx(-1.0).epsilon(1e-14));
    auto exp_rate = predict_scaling(make_problem(4, 1.0, 1e-3));
    CHECK(exp_rate.regime == Regime::ExpLaw);
    CHECK(exp_rate.value > 0.0);
    CHECK_THROWS_AS(predict_scaling(make_problem(5, 1.0, 1e-3)), RegimeMismatch);
}

TEST_CASE("exp law: log height box representation avoids overflow") {
    auto sol = solve_reduced(make_problem(4, 1.0, 1e-4));
    REQUIRE(sol.regime == Regime::ExpLaw);
    CHECK(std::isfinite(sol.log_heights[0]));
    CHECK(sol.log_heights[0] * 1e-4 > 0.0);
}

TEST_CASE("PeakData validation") {
    auto pk = make_peak(4, 1.0, 1.0);
    pk.laplacian = 1.0;
    CHECK_THROWS_AS(pk.validate(), InvalidArgument);
    pk = make_peak(4, 1.0, 1.0);
    pk.gradient = VectorXd::Constant(4, 1e-3);
    CHECK_THROWS_AS(pk.validate(), InvalidArgument);
}
