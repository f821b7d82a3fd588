#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pdce/observables.hpp"

using namespace pdce;

namespace {

constexpr double kPi = std::numbers::pi;

QuantumState squeezed_vacuum(int dim, double r) {
    const Operator a = destroy(dim), c = create(dim);
    return QuantumState::ket(expm(cplx(r / 2.0) * (a * a - c * c)).matrix().col(0));
}

}  // namespace

TEST_CASE("photon statistics of textbook states") {
    CHECK(mean_photon(QuantumState::fock(6, 3)) == 3.0);
    CHECK_FALSE(mandel_q(QuantumState::vacuum(6)).has_value());
    CHECK(*mandel_q(QuantumState::fock(6, 3)) == doctest::Approx(-1.0));
    const auto coh = QuantumState::coherent(50, cplx(1.2, 0.5));
    CHECK(mean_photon(coh) == doctest::Approx(1.69).epsilon(1e-10));
    CHECK(std::abs(*mandel_q(coh)) < 1e-9);
    CHECK(std::abs(*mandel_q(coh.to_density())) < 1e-9);

    const double r = 0.5;
    const auto sq = squeezed_vacuum(60, r);
    const double n = std::pow(std::sinh(r), 2);
    CHECK(mean_photon(sq) == doctest::Approx(n).epsilon(1e-10));
    CHECK(*mandel_q(sq) == doctest::Approx(1.0 + 2.0 * n).epsilon(1e-9));
}

TEST_CASE("quadrature variances") {
    const auto [vq, vp] = quadrature_variances(QuantumState::vacuum(5));
    CHECK(vq == doctest::Approx(0.25));
    CHECK(vp == doctest::Approx(0.25));
    CHECK(squeezing_db(0.25) == 0.0);
    CHECK(squeezing_db(0.025) == doctest::Approx(10.0));
    CHECK_THROWS_AS(squeezing_db(0.0), DomainError);

    const auto coh = QuantumState::coherent(50, cplx(1.0, -0.7));
    const auto [cq, cp] = quadrature_variances(coh);
    CHECK(cq == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(cp == doctest::Approx(0.25).epsilon(1e-9));

    const double r = 0.4;
    for (const auto& s : {squeezed_vacuum(60, r), squeezed_vacuum(60, r).to_density()}) {
        const auto [q, p] = quadrature_variances(s);
        CHECK(q == doctest::Approx(0.25 * std::exp(-2.0 * r)).epsilon(1e-10));
        CHECK(p == doctest::Approx(0.25 * std::exp(2.0 * r)).epsilon(1e-10));
        CHECK(q * p >= 1.0 / 16.0 - 1e-12);
        // pure Gaussian states saturate the bound, so the two dB figures cancel
        CHECK(squeezing_db(q) + squeezing_db(p) <= 1e-9);
    }

    const auto [fq, fp] = quadrature_variances(QuantumState::fock(5, 2));
    CHECK(fq == doctest::Approx(1.25));
    CHECK(fp == doctest::Approx(1.25));
}

TEST_CASE("Wigner function closed forms") {
    const auto vac = wigner(QuantumState::vacuum(8), 4.0, 4.0, 41);
    const auto one = wigner(QuantumState::fock(8, 1), 4.0, 4.0, 41);
    const cplx beta(0.6, -0.4);
    const auto coh = wigner(QuantumState::coherent(40, beta), 5.0, 5.0, 41);
    double worst = 0.0;
    for (int i = 0; i < 41; ++i) {
        for (int j = 0; j < 41; ++j) {
            const double x = vac.x_axis[i], p = vac.p_axis[j];
            const double r2 = x * x + p * p;
            worst = std::max(worst, std::abs(vac.values(i, j) - std::exp(-r2) / kPi));
            worst = std::max(worst, std::abs(one.values(i, j) - (2.0 * r2 - 1.0) * std::exp(-r2) / kPi));
            const double cx = coh.x_axis[i] - std::numbers::sqrt2 * beta.real();
            const double cp = coh.p_axis[j] - std::numbers::sqrt2 * beta.imag();
            worst = std::max(worst, std::abs(coh.values(i, j) - std::exp(-(cx * cx + cp * cp)) / kPi));
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("Wigner normalization and marginals") {
    const auto s = QuantumState::fock(10, 3);
    const auto g = wigner(s, 7.0, 7.0, 201);
    CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-6));
    // The x marginal of |n> is |psi_n(x)|^2 with psi_n the Hermite function.
    const int n = 3;
    for (int i = 0; i < 201; i += 20) {
        const double x = g.x_axis[i];
        const double dp = g.p_axis[1] - g.p_axis[0];
        const double marginal = g.values.row(i).sum() * dp;
        const double h3 = 8.0 * x * x * x - 12.0 * x;
        const double psi2 = h3 * h3 * std::exp(-x * x) / (std::sqrt(kPi) * std::pow(2.0, n) * 6.0);
        CHECK(std::abs(marginal - psi2) < 1e-6);
    }
}

TEST_CASE("Wigner negativity") {
    const auto one = wigner(QuantumState::fock(4, 1), 6.0, 6.0, 201);
    CHECK(std::abs(wigner_negativity(one) - (4.0 * std::exp(-0.5) - 2.0)) < 1e-3);
    CHECK(negative_regions(one) == 1);

    const auto sq = wigner(squeezed_vacuum(60, 0.5), 6.0, 6.0, 201);
    CHECK(wigner_negativity(sq) < 1e-8);
    CHECK(negative_regions(sq) == 0);
    const auto coh = wigner(QuantumState::coherent(40, cplx(1.0, 1.0)), 6.0, 6.0, 101);
    CHECK(wigner_negativity(coh) < 1e-10);
    CHECK(negative_regions(coh) == 0);

    // |2> has a negative ring around a positive core
    const auto two = wigner(QuantumState::fock(4, 2), 6.0, 6.0, 201);
    CHECK(negative_regions(two) == 1);
    // an even cat has two negative fringes on each side of the origin
    const int dim = 40;
    Vector cat = QuantumState::coherent(dim, cplx(2.5, 0.0)).amplitudes() +
                 QuantumState::coherent(dim, cplx(-2.5, 0.0)).amplitudes();
    cat.normalize();
    const auto cg = wigner(QuantumState::ket(cat), 7.0, 7.0, 201);
    CHECK(negative_regions(cg) >= 2);
    CHECK(wigner_negativity(cg) > 0.1);
}

TEST_CASE("Wigner grid checks") {
    CHECK_THROWS_AS(wigner(QuantumState::vacuum(3), 4.0, 4.0, 40), DomainError);
    CHECK_THROWS_AS(wigner(QuantumState::vacuum(3), 0.0, 4.0, 41), DomainError);
    const auto coh = QuantumState::coherent(60, cplx(3.0, 0.0));
    const auto tight = wigner(coh, 3.0, 3.0, 61);
    CHECK_FALSE(tight.warnings.empty());
    const auto wide = wigner_auto(coh, 3.0, 61);
    CHECK(wide.warnings.empty());
    CHECK(wide.x_axis.back() > 3.0);
    CHECK(wide.integral() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("photon rate") {
    std::vector<double> t, n;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(1e-6 * i);
        n.push_back(2.0 * i);
    }
    auto r = photon_rate(t, n);
    CHECK(r.rate == doctest::Approx(2e6));
    CHECK_FALSE(r.from_first_maximum);

    // A bump followed by a decay: the first maximum of the averaged curve is used.
    for (int i = 0; i <= 100; ++i) n[i] = std::sin(kPi * i / 60.0);
    r = photon_rate(t, n, 5e-6);
    CHECK(r.from_first_maximum);
    CHECK(r.at_time == doctest::Approx(30e-6));
    CHECK(r.rate == doctest::Approx(r.n_at / r.at_time));
    CHECK(r.n_at < 1.0);
    CHECK(r.n_at > 0.99);

    CHECK_THROWS_AS(photon_rate({0.0}, {0.0}), DomainError);
    CHECK_THROWS_AS(photon_rate({0.0, 1.0}, {0.0}), DomainError);
    CHECK_THROWS_AS(photon_rate({0.0, 0.0}, {0.0, 0.0}), DomainError);
}
