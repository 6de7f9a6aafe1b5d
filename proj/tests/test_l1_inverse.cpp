#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <fftw3.h>

#include "periodica/l1_inverse.hpp"

using namespace periodica;

namespace {
GroupRingElement harmonic() {
    return parse_group_ring("3*e - 1*x(1) - 1*x(-1)", 1);
}

// Closed form for the harmonic inverse on Z: g_n = rho^|n| / sqrt(5),
// rho = (3 - sqrt 5)/2.
double harmonic_inverse_coeff(std::int64_t n) {
    const double rho = (3.0 - std::sqrt(5.0)) / 2.0;
    return std::pow(rho, std::abs(static_cast<double>(n))) / std::sqrt(5.0);
}

// Independent oracle: Fourier coefficients of 1/f^ from a dense grid,
// computed directly with FFTW. Independent of the Newton-Schulz path.
std::vector<double> dense_grid_inverse(const GroupRingElement& f, int grid,
                                       int radius) {
    std::vector<std::complex<double>> in(static_cast<size_t>(grid)),
        out(static_cast<size_t>(grid));
    for (int k = 0; k < grid; ++k) {
        std::complex<double> v = 0;
        double theta = 2.0 * M_PI * k / grid;
        for (const auto& [g, c] : f.terms())
            v += static_cast<double>(c) *
                 std::exp(std::complex<double>(0, theta * static_cast<double>(g[0])));
        in[static_cast<size_t>(k)] = 1.0 / v;
    }
    fftw_plan plan = fftw_plan_dft_1d(
        grid, reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    std::vector<double> coeffs(static_cast<size_t>(2 * radius + 1));
    for (int n = -radius; n <= radius; ++n) {
        int idx = n >= 0 ? n : n + grid;
        coeffs[static_cast<size_t>(n + radius)] =
            out[static_cast<size_t>(idx)].real() / grid;
    }
    return coeffs;
}
}  // namespace

TEST_CASE("dense grid oracle matches the closed form") {
    auto oracle = dense_grid_inverse(harmonic(), 4096, 16);
    for (int n = -16; n <= 16; ++n)
        REQUIRE(oracle[static_cast<size_t>(n + 16)] ==
                Catch::Approx(harmonic_inverse_coeff(n)).margin(1e-12));
}

TEST_CASE("l1 inverse of delta and scalar") {
    auto e = GroupRingElement::delta(GroupElement::identity(1));
    auto r = l1_inverse(e, 1e-12);
    REQUIRE(r.inverse.coeff(GroupElement::identity(1)) == Catch::Approx(1.0));
    REQUIRE(r.inverse.stored_norm_l1() == Catch::Approx(1.0));
    REQUIRE(r.certificate.residual_bound <= 1e-12);

    auto two = GroupRingElement::delta(GroupElement::identity(1), 2);
    auto r2 = l1_inverse(two, 1e-12);
    REQUIRE(r2.inverse.coeff(GroupElement::identity(1)) == Catch::Approx(0.5));
}

TEST_CASE("l1 inverse of the harmonic element") {
    auto res = l1_inverse(harmonic(), 1e-10);
    const auto& g = res.inverse;

    // closed-form check
    for (int n = -10; n <= 10; ++n)
        REQUIRE(g.coeff(GroupElement::of({n})) ==
                Catch::Approx(harmonic_inverse_coeff(n)).margin(1e-9));

    // oracle identity: sum_n g_n = 1 / f^(0) = 1
    double sum = 0;
    for (const auto& [ge, c] : g.terms()) sum += c;
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));

    // certificate holds under independent exact re-summation
    mpq_class exact = exact_residual_l1(harmonic(), g);
    mpq_class budget(res.certificate.tol);
    mpq_class tail_term(g.tail());
    tail_term *= harmonic().norm_l1();
    REQUIRE(exact + tail_term <= budget);
    REQUIRE(exact <= mpq_class(res.certificate.residual_bound));

    // norm bracket contains the true norm (= 1 by the identity above,
    // since all closed-form coefficients are positive)
    auto [lo, hi] = g.norm_l1_interval();
    REQUIRE(lo <= 1.0 + 1e-9);
    REQUIRE(hi >= 1.0 - 1e-9);

    // symmetric f gives a symmetric inverse
    for (int n = 1; n <= 8; ++n)
        REQUIRE(std::abs(g.coeff(GroupElement::of({n})) -
                         g.coeff(GroupElement::of({-n}))) < 1e-12);
}

TEST_CASE("l1 inverse in two dimensions") {
    // 5 e - shifts: diagonally dominant, invertible
    auto f = parse_group_ring("5*e - 1*x(1,0) - 1*x(-1,0) - 1*x(0,1) - 1*x(0,-1)", 2);
    auto res = l1_inverse(f, 1e-8);
    mpq_class exact = exact_residual_l1(f, res.inverse);
    mpq_class tail_term(res.inverse.tail());
    tail_term *= f.norm_l1();
    REQUIRE(exact + tail_term <= mpq_class(1e-8));
    // f^(0,0) = 1, so the coefficient sum is 1
    double sum = 0;
    for (const auto& [ge, c] : res.inverse.terms()) sum += c;
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-7));
}

TEST_CASE("non-invertible elements are reported") {
    // f = 1 - x: symbol vanishes at theta = 0
    auto f = parse_group_ring("1*e - 1*x(1)", 1);
    REQUIRE_THROWS_AS(l1_inverse(f, 1e-8), DomainError);
    try {
        l1_inverse(f, 1e-8);
    } catch (const DomainError& err) {
        REQUIRE(err.code() == ErrorCode::not_invertible);
    }

    // symbol 2 - 2cos(theta) vanishes at 0 as well
    auto f2 = parse_group_ring("2*e - 1*x(1) - 1*x(-1)", 1);
    REQUIRE_THROWS_AS(l1_inverse(f2, 1e-8), DomainError);
}

TEST_CASE("tail window on the harmonic inverse") {
    auto res = l1_inverse(harmonic(), 1e-12);
    Enumeration en(1);

    // Oracle: minimal symmetric radius R with
    //   2 sum_{n > R} rho^n / sqrt5 + tail < eta,
    // verified by direct summation.
    double eta = 1e-3;
    auto w2 = tail_window(res.inverse, eta, en);
    std::int64_t radius = 0;
    for (const auto& g : w2) radius = std::max(radius, g.word_length());

    auto outside_mass = [&](std::int64_t r) {
        double m = res.inverse.tail();
        for (const auto& [ge, c] : res.inverse.terms())
            if (ge.word_length() > r) m += std::abs(c);
        return m;
    };
    REQUIRE(outside_mass(radius) < eta);
    REQUIRE(outside_mass(radius - 1) >= eta);
    // direct summation of the closed form gives the same radius
    auto closed_outside = [&](std::int64_t r) {
        double m = 0;
        for (std::int64_t n = r + 1; n < r + 200; ++n)
            m += 2 * harmonic_inverse_coeff(n);
        return m;
    };
    REQUIRE(closed_outside(radius) < eta);
    REQUIRE(closed_outside(radius - 1) >= eta);

    // mass outside W2^{-1} is below eta (window semantics)
    REQUIRE(res.inverse.mass_outside(w2.inverse()) < eta);

    // trivial cases
    auto e = GroupRingElement::delta(GroupElement::identity(1));
    auto re = l1_inverse(e, 1e-12);
    auto we = tail_window(re.inverse, 0.5, en);
    REQUIRE(we.size() == 1);
    REQUIRE(we.contains(GroupElement::identity(1)));

    auto whuge = tail_window(res.inverse, 10.0, en);
    REQUIRE(whuge.size() == 1);

    REQUIRE_THROWS_AS(tail_window(res.inverse, 1e-30, en), DomainError);
}

TEST_CASE("truncate inverse") {
    auto res = l1_inverse(harmonic(), 1e-12);
    auto w = FiniteSubset::ball(1, 2);
    auto wt = truncate_inverse(res.inverse, w);
    REQUIRE(wt.tail() == 0.0);
    REQUIRE(wt.terms().size() == 5);
    for (int n = -2; n <= 2; ++n)
        REQUIRE(wt.coeff(GroupElement::of({n})) ==
                Catch::Approx(harmonic_inverse_coeff(n)).margin(1e-9));

    // W2 covering the whole support reproduces g
    auto big = FiniteSubset::ball(1, 60);
    auto full = truncate_inverse(res.inverse, big);
    REQUIRE(full.terms().size() == res.inverse.terms().size());

    auto only_e = FiniteSubset::of(1, {GroupElement::identity(1)});
    auto we = truncate_inverse(res.inverse, only_e);
    REQUIRE(we.terms().size() == 1);
}
