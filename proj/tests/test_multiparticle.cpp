#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "qmat/multiparticle.hpp"
#include "qmat/phasespace.hpp"

using namespace qmat;

namespace {

WavePacket gaussian_packet(double x0, double p0, double sigma0, double mass) {
    const PhysicalConstants c{mass, 1.0};
    WavePacket w;
    w.psi = [=](double x, double t) {
        return free_moving_gaussian_psi(x, t, sigma0, x0, p0, c);
    };
    w.dpsi = [=](double x, double t) {
        return free_moving_gaussian_dpsi(x, t, sigma0, x0, p0, c);
    };
    return w;
}

double branch(double x, double c, double s) {
    return std::pow(2.0 * M_PI * s * s, -0.25) * std::exp(-(x - c) * (x - c) / (4.0 * s * s));
}

double branch_prime(double x, double c, double s) {
    return branch(x, c, s) * (-(x - c) / (2.0 * s * s));
}

} // namespace

TEST_CASE("a product of independent packets is separable in every slice") {
    const Grid1D x1(-10.0, 10.0, 161), x2(-8.0, 8.0, 141);
    const WavePacket a = gaussian_packet(-2.0, 0.8, 1.0, 1.0);
    const WavePacket b = gaussian_packet(1.5, -0.6, 0.7, 2.0);
    const TwoParticleField f = product_two_particle(a, b, x1, x2, {0.4}, {1.0, 2.0});
    const SeparabilityReport rep = separability_residual(f, 0);
    REQUIRE(rep.r0 < 1e-10);
    REQUIRE(rep.r1 < 1e-10);
    REQUIRE(rep.r2 < 1e-10);
    REQUIRE(rep.sigma1 > 0.0);
    REQUIRE_THROWS(separability_residual(f, 1));
}

TEST_CASE("pair observables report each constituent's position and momentum") {
    const Grid1D x1(-10.0, 10.0, 161), x2(-8.0, 8.0, 141);
    const WavePacket a = gaussian_packet(-2.0, 0.8, 1.0, 1.0);
    const WavePacket b = gaussian_packet(1.5, -0.6, 0.7, 2.0);
    const TwoParticleField f = product_two_particle(a, b, x1, x2, {0.4}, {1.0, 2.0});
    const TwoParticleObservables obs = two_particle_observables(f, 0);
    REQUIRE(std::abs(obs.mass - 1.0) < 1e-10);
    REQUIRE(std::abs(obs.q1 - (-2.0 + 0.8 * 0.4 / 1.0)) < 1e-8);
    REQUIRE(std::abs(obs.q2 - (1.5 - 0.6 * 0.4 / 2.0)) < 1e-8);
    REQUIRE(std::abs(obs.p1 - 0.8) < 1e-8);
    REQUIRE(std::abs(obs.p2 + 0.6) < 1e-8);
    REQUIRE(std::abs(obs.p_total - 0.2) < 1e-8);
    REQUIRE(std::abs(obs.q_total - (-1.68 + 1.38)) < 1e-8);
}

TEST_CASE("overall amplitude affects neither separability nor the means") {
    const Grid1D x1(-10.0, 10.0, 161), x2(-8.0, 8.0, 141);
    const WavePacket a = gaussian_packet(-2.0, 0.8, 1.0, 1.0);
    const WavePacket b = gaussian_packet(1.5, -0.6, 0.7, 2.0);
    WavePacket big;
    big.psi = [&a](double x, double t) { return 3.7 * a.psi(x, t); };
    big.dpsi = [&a](double x, double t) { return 3.7 * a.dpsi(x, t); };
    const TwoParticleField f = product_two_particle(big, b, x1, x2, {0.4}, {1.0, 2.0});
    const SeparabilityReport rep = separability_residual(f, 0);
    REQUIRE(rep.r0 < 1e-10);
    const TwoParticleObservables obs = two_particle_observables(f, 0);
    REQUIRE(std::abs(obs.mass - 3.7 * 3.7) < 1e-8);
    REQUIRE(std::abs(obs.q1 - (-1.68)) < 1e-8);
    REQUIRE(std::abs(obs.p1 / obs.mass - 0.8) < 1e-8);
}

TEST_CASE("an entangled superposition of separated branches is flagged") {
    const Grid1D x1(-8.0, 8.0, 161), x2(-8.0, 8.0, 161);
    const double s = 0.8, rt = std::sqrt(0.5);
    auto psi = [=](double u1, double u2, double) {
        return std::complex<double>(
            rt * (branch(u1, -3.0, s) * branch(u2, 2.5, s) +
                  branch(u1, 3.0, s) * branch(u2, -2.5, s)),
            0.0);
    };
    auto d1 = [=](double u1, double u2, double) {
        return std::complex<double>(
            rt * (branch_prime(u1, -3.0, s) * branch(u2, 2.5, s) +
                  branch_prime(u1, 3.0, s) * branch(u2, -2.5, s)),
            0.0);
    };
    auto d2 = [=](double u1, double u2, double) {
        return std::complex<double>(
            rt * (branch(u1, -3.0, s) * branch_prime(u2, 2.5, s) +
                  branch(u1, 3.0, s) * branch_prime(u2, -2.5, s)),
            0.0);
    };
    const TwoParticleField f =
        two_particle_from_pure(psi, d1, d2, x1, x2, {0.0}, {1.0, 2.0});
    const SeparabilityReport rep = separability_residual(f, 0);
    REQUIRE(rep.r0 > 0.5);
}

TEST_CASE("both construction paths agree on a product state") {
    const Grid1D x1(-9.0, 9.0, 101), x2(-9.0, 9.0, 91);
    const WavePacket a = gaussian_packet(-1.0, 0.5, 1.1, 1.0);
    const WavePacket b = gaussian_packet(2.0, 0.3, 0.9, 2.0);
    const TwoParticleField fa = product_two_particle(a, b, x1, x2, {0.2}, {1.0, 2.0});
    auto psi = [&](double u1, double u2, double t) { return a.psi(u1, t) * b.psi(u2, t); };
    auto d1 = [&](double u1, double u2, double t) { return a.dpsi(u1, t) * b.psi(u2, t); };
    auto d2 = [&](double u1, double u2, double t) { return a.psi(u1, t) * b.dpsi(u2, t); };
    const TwoParticleField fb =
        two_particle_from_pure(psi, d1, d2, x1, x2, {0.2}, {1.0, 2.0});
    REQUIRE((fa.diag[0] - fb.diag[0]).norm() < 1e-13 * fa.diag[0].norm());
    REQUIRE((fa.slice1[0] - fb.slice1[0]).norm() < 1e-13 * fa.slice1[0].norm());
    REQUIRE((fa.slice2[0] - fb.slice2[0]).norm() < 1e-13 * fa.slice2[0].norm());
}

TEST_CASE("real stationary packets carry no flow at all") {
    WavePacket a, b;
    a.psi = [](double x, double) { return std::complex<double>(std::exp(-x * x), 0.0); };
    a.dpsi = [](double x, double) {
        return std::complex<double>(-2.0 * x * std::exp(-x * x), 0.0);
    };
    b.psi = [](double x, double) {
        return std::complex<double>(std::exp(-0.5 * (x - 1.0) * (x - 1.0)), 0.0);
    };
    b.dpsi = [](double x, double) {
        return std::complex<double>(-(x - 1.0) * std::exp(-0.5 * (x - 1.0) * (x - 1.0)), 0.0);
    };
    const Grid1D x1(-6.0, 6.0, 61), x2(-5.0, 7.0, 61);
    const TwoParticleField f =
        product_two_particle(a, b, x1, x2, {0.0, 0.1, 0.2}, {1.0, 2.0});
    REQUIRE(f.slice1[0].norm() == 0.0);
    REQUIRE(f.slice2[0].norm() == 0.0);
    const ContinuityResiduals r = check_decoupled_continuity(f);
    REQUIRE(r.particle1 == 0.0);
    REQUIRE(r.particle2 == 0.0);
}

TEST_CASE("free product evolution obeys reduced continuity in each coordinate") {
    const Grid1D x1(-12.0, 12.0, 481), x2(-12.0, 12.0, 481);
    const WavePacket a = gaussian_packet(-1.0, 0.3, 2.0, 1.0);
    const WavePacket b = gaussian_packet(1.0, -0.4, 2.0, 2.0);
    std::vector<double> times;
    for (int r = 0; r < 5; ++r) times.push_back(-0.2 + 0.1 * r);
    TwoParticleField f = product_two_particle(a, b, x1, x2, times, {1.0, 2.0});
    const ContinuityResiduals r = check_decoupled_continuity(f);
    REQUIRE(r.particle1 < 1e-3);
    REQUIRE(r.particle2 < 1e-3);

    for (auto& s : f.slice1) s *= 1.05;
    const ContinuityResiduals bad = check_decoupled_continuity(f);
    REQUIRE(bad.particle1 > 0.02);
    REQUIRE(bad.particle2 < 1e-3);
}

TEST_CASE("pair construction and checks validate their inputs") {
    const WavePacket a = gaussian_packet(0.0, 0.0, 1.0, 1.0);
    const Grid1D x(-5.0, 5.0, 21);
    REQUIRE_THROWS(product_two_particle(a, a, x, x, {0.0}, {1.0, 1.0})); // equal masses
    REQUIRE_THROWS(product_two_particle(a, a, x, x, {0.0}, {1.0, -2.0}));

    TwoParticleField f;
    f.x1 = Grid1D(-1.0, 1.0, 5);
    f.x2 = Grid1D(-1.0, 1.0, 7);
    f.times = {0.0};
    f.masses = {1.0, 2.0};
    f.diag.push_back(Eigen::MatrixXd::Zero(5, 5)); // wrong column count
    f.slice1.push_back(Eigen::MatrixXcd::Zero(5, 7));
    f.slice2.push_back(Eigen::MatrixXcd::Zero(5, 7));
    REQUIRE_THROWS(f.validate());

    const TwoParticleField two =
        product_two_particle(a, gaussian_packet(1.0, 0.0, 1.0, 2.0), x, x, {0.0, 0.1},
                             {1.0, 2.0});
    REQUIRE_THROWS(check_decoupled_continuity(two)); // too few times
    const TwoParticleField skew =
        product_two_particle(a, gaussian_packet(1.0, 0.0, 1.0, 2.0), x, x,
                             {0.0, 0.1, 0.35}, {1.0, 2.0});
    REQUIRE_THROWS(check_decoupled_continuity(skew)); // nonuniform times
}
