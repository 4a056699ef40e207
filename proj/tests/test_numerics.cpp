#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "qmat/linalg.hpp"
#include "qmat/mollifier.hpp"
#include "qmat/quadrature.hpp"
#include "qmat/roots.hpp"

using namespace qmat;

TEST_CASE("panel weights sum to the interval length") {
    for (int order : {4, 8, 16}) {
        QuadratureRule rule{order, 7};
        std::vector<double> xs, ws;
        gauss_nodes(-2.5, 4.0, rule, xs, ws);
        double total = 0.0;
        for (double w : ws) total += w;
        REQUIRE(std::abs(total - 6.5) < 1e-12 * 6.5);
    }
}

TEST_CASE("composite rule integrates a half period of sine") {
    const double got = integrate([](double x) { return std::sin(x); }, 0.0, M_PI, {8, 4});
    REQUIRE(std::abs(got - 2.0) < 1e-10);
}

TEST_CASE("zero integrand gives exactly zero") {
    const double got = integrate([](double) { return 0.0; }, -3.0, 7.0, {4, 3});
    REQUIRE(got == 0.0);
}

TEST_CASE("bump weight integrates to one over its support") {
    const Mollifier f = Mollifier::cos4(3.0);
    const double s = f.support_half_width();
    const double got = integrate([&](double x) { return f.eval(x, 0); }, -s, s, {8, 16});
    REQUIRE(std::abs(got - 1.0) < 1e-10);
}

TEST_CASE("halving panel width gains at least a factor eight on a smooth integrand") {
    const double exact = std::atan(5.0) / 5.0;
    auto runge = [](double x) { return 1.0 / (1.0 + 25.0 * x * x); };
    const double e1 = std::abs(integrate(runge, 0.0, 1.0, {4, 1}) - exact);
    const double e2 = std::abs(integrate(runge, 0.0, 1.0, {4, 2}) - exact);
    REQUIRE(e2 * 8.0 <= e1);
}

TEST_CASE("bracketed root of x^2 - 2") {
    const double r =
        find_root_bracketed([](double x) { return x * x - 2.0; }, 1.0, 2.0, 1e-15);
    REQUIRE(std::abs(r - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("steep transcendental root matches an independent bisection") {
    auto g = [](double phi) { return phi * std::tan(phi) - 100.0; };
    const double hi = 0.5 * M_PI - 1e-12;
    const double r = find_root_bracketed(g, 0.5, hi, 1e-15);
    REQUIRE(std::abs(g(r)) < 1e-10);
    // independent coarse bisection agrees
    double lo = 0.5, up = hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + up);
        if ((g(mid) > 0.0) == (g(up) > 0.0))
            up = mid;
        else
            lo = mid;
    }
    REQUIRE(std::abs(r - 0.5 * (lo + up)) < 1e-12);
}

TEST_CASE("root at a bracket edge converges to the edge") {
    const double r = find_root_bracketed([](double x) { return x; }, 0.0, 1.0, 1e-15);
    REQUIRE(std::abs(r) < 1e-14);
}

TEST_CASE("root finding is rerun-identical") {
    auto g = [](double x) { return std::cos(x) - x; };
    const double a = find_root_bracketed(g, 0.0, 1.0, 1e-15);
    const double b = find_root_bracketed(g, 0.0, 1.0, 1e-15);
    REQUIRE(a == b);
}

TEST_CASE("identity system returns the right-hand side") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(6, 6);
    Eigen::VectorXd b(6);
    b << 1.0, -2.0, 3.5, 0.0, 4.0, -0.25;
    const Eigen::VectorXd c = solve_regularized_symmetric(g, b, 0.0);
    REQUIRE((c - b).norm() < 1e-14);
}

TEST_CASE("zero right-hand side returns zero for any ridge") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(5, 5) * 3.0;
    const Eigen::VectorXd b = Eigen::VectorXd::Zero(5);
    for (double ridge : {0.0, 1e-8, 0.5}) {
        const Eigen::VectorXd c = solve_regularized_symmetric(g, b, ridge);
        REQUIRE(c.norm() == 0.0);
    }
}

TEST_CASE("well-conditioned random system recovers a planted solution") {
    std::mt19937 rng(20240817u);
    std::normal_distribution<double> dist(0.0, 1.0);
    const int n = 50;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = dist(rng);
    Eigen::MatrixXd g = a.transpose() * a + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd target(n);
    for (int i = 0; i < n; ++i) target[i] = dist(rng);
    const Eigen::VectorXd b = g * target;
    const Eigen::VectorXd c = solve_regularized_symmetric(g, b, 0.0);
    REQUIRE((c - target).norm() < 1e-8 * target.norm());
    REQUIRE((g * c - b).norm() < 1e-8 * b.norm());
}

TEST_CASE("singular system without regularization reports the failure") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g(0, 0) = 1.0;
    Eigen::VectorXd b(4);
    b << 1.0, 1.0, 0.0, 0.0;
    REQUIRE_THROWS_AS(solve_regularized_symmetric(g, b, 0.0), SingularSystemError);
    // the same system with a ridge is solvable
    const Eigen::VectorXd c = solve_regularized_symmetric(g, b, 1e-6);
    REQUIRE(c.allFinite());
}

TEST_CASE("asymmetric input is rejected") {
    Eigen::MatrixXd g(3, 3);
    g << 1.0, 0.5, 0.0, -0.5, 1.0, 0.0, 0.0, 0.0, 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Ones(3);
    REQUIRE_THROWS(solve_regularized_symmetric(g, b, 0.0));
}

TEST_CASE("evaluation failure inside the integrand is reported") {
    REQUIRE_THROWS(integrate([](double x) { return 1.0 / (x - x); }, 0.0, 1.0, {4, 2}));
}
