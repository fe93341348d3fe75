#include <random>

#include "doctest.h"
#include "slabtbc/sdomain.hpp"

using namespace slabtbc;
using sdomain::LayeredProfile;
using sdomain::ModeBoundaryData;
using sdomain::ModeSource;

namespace {

// Constant-coefficient Green solution of (-d2/dz2 + beta^2) E = mu s delta
// with outgoing Robin ends, assembled from exponentials.
std::vector<cdouble> green_oracle(int nz, double h2, double h1, cdouble s, double mu,
                                  cdouble beta, int k0) {
    const double dz = (h1 - h2) / (nz - 1);
    const double z0 = h2 + k0 * dz;
    const cdouble wc = 2.0 * beta * std::exp(beta * (h1 - h2));
    std::vector<cdouble> e(nz);
    for (int k = 0; k < nz; ++k) {
        const double z = h2 + k * dz;
        const double zl = std::min(z, z0), zu = std::max(z, z0);
        e[k] = mu * s * std::exp(beta * (zl - h2)) * std::exp(-beta * (zu - h1)) / wc;
    }
    return e;
}

ModeSource zero_source(int nz) {
    ModeSource f;
    f.f1.assign(nz, cdouble(0.0));
    f.f2.assign(nz, cdouble(0.0));
    f.f3.assign(nz, cdouble(0.0));
    return f;
}

}  // namespace

TEST_CASE("layered profile invariants") {
    CHECK_THROWS_AS(LayeredProfile({0.0, 1.0}, {1.0, 2.0}, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(LayeredProfile({0.0, 1.0, 0.5}, {1.0, 2.0}, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(LayeredProfile({0.0, 0.5, 1.0}, {1.0, -2.0}, {1.0, 1.0}), DataError);
    LayeredProfile p({0.0, 0.5, 1.0}, {1.0, 2.0}, {1.0, 3.0});
    CHECK(p.eps_at(0.25) == 1.0);
    CHECK(p.eps_at(0.75) == 2.0);
    CHECK(p.mu_average(0.25, 0.75) == doctest::Approx(0.5 * (1.0 + 3.0)));
    CHECK(p.exterior(1).eps == 2.0);
    CHECK(p.exterior(2).eps == 1.0);
}

TEST_CASE("solve_mode: zero data gives the zero solution") {
    LayeredProfile p({0.0, 1.0}, {1.0}, {1.0});
    auto sol = sdomain::solve_mode({1.0, 0.5}, ComplexFrequency(1.0, 0.3), p, 33);
    for (int k = 0; k < sol.nz; ++k) {
        CHECK(std::abs(sol.e1[k]) == 0.0);
        CHECK(std::abs(sol.e2[k]) == 0.0);
        CHECK(std::abs(sol.e3[k]) == 0.0);
    }
    CHECK(sol.residual == 0.0);
}

TEST_CASE("solve_mode matches the closed-form Green solution at second order") {
    LayeredProfile p({0.0, 1.0}, {1.0}, {1.0});
    const ComplexFrequency s(0.3, 0.2);
    const cdouble beta = symbols::beta({0.0, 0.0}, s, p.exterior(1));
    std::vector<double> errs;
    for (int nz : {65, 129, 257}) {
        const double dz = 1.0 / (nz - 1);
        auto f = zero_source(nz);
        const int k0 = nz / 2;
        f.f1[k0] = 1.0 / dz;
        auto sol = sdomain::solve_mode({0.0, 0.0}, s, p, nz, &f);
        auto exact = green_oracle(nz, 0.0, 1.0, s.value(), 1.0, beta, k0);
        double emax = 0.0, scale = 0.0;
        for (int k = 0; k < nz; ++k) {
            emax = std::max(emax, std::abs(sol.e1[k] - exact[k]));
            scale = std::max(scale, std::abs(exact[k]));
        }
        errs.push_back(emax / scale);
        CHECK(sol.residual <= 1e-10);
    }
    CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(2.0).epsilon(0.08));
    CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(2.0).epsilon(0.08));
}

TEST_CASE("solve_mode: two-layer solve satisfies the discrete system and ATBC rows") {
    LayeredProfile p({0.0, 0.5, 1.0}, {1.0, 2.0}, {1.0, 1.5});
    const Xi xi{1.0, 0.0};
    const ComplexFrequency s(1.0, 0.6);
    const int nz = 129;
    auto f = zero_source(nz);
    for (int k = 0; k < nz; ++k) {
        const double z = k / double(nz - 1);
        const double b = std::max(0.0, 1.0 - std::pow((z - 0.5) / 0.3, 2));
        f.f1[k] = b * b;
        f.f2[k] = 0.5 * b * b;
        f.f3[k] = cdouble(0.0, 0.2) * b * b;
    }
    auto sol = sdomain::solve_mode(xi, s, p, nz, &f);
    CHECK(sol.residual <= 1e-10);

    // Boundary rows hold to round-off when reconstructed from the solution.
    const double dz = sol.dz;
    const cdouble i1(0.0, xi.xi1);
    const auto b_top = symbols::capacity_matrix(xi, s, p.exterior(1)).matrix;
    const cdouble alpha_top = 1.0 / (p.mu().back() * s.value());
    const cdouble e1p = (1.5 * sol.e1[nz - 1] - 2.0 * sol.e1[nz - 2] + 0.5 * sol.e1[nz - 3]) / dz;
    const cdouble row = alpha_top * (e1p - i1 * sol.e3[nz - 1]) + b_top(0, 0) * sol.e1[nz - 1] +
                        b_top(0, 1) * sol.e2[nz - 1];
    double scale = 0.0;
    for (int k = 0; k < nz; ++k) scale = std::max(scale, std::abs(sol.e1[k]));
    CHECK(std::abs(row) <= 1e-10 * std::max(1.0, scale / dz));
}

TEST_CASE("outgoing extension: boundary value, decay rate, functional equation") {
    const symbols::ExteriorMedium med(1.0, 1.0, 1);
    const ComplexFrequency s(1.0, 0.0);
    const cdouble v(0.7, -0.1);
    CHECK(std::abs(sdomain::outgoing_extension(v, {0.0, 0.0}, s, med, 1.0, 1.0) - v) == 0.0);
    // Re beta = 1 at xi = 0, s = 1: one unit up decays by e^{-1}.
    const cdouble one_up = sdomain::outgoing_extension(v, {0.0, 0.0}, s, med, 1.0, 2.0);
    CHECK(std::abs(one_up) / std::abs(v) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    // functional equation at arbitrary mode
    const Xi xi{2.0, -1.0};
    const ComplexFrequency s2(0.7, 1.1);
    const cdouble beta = symbols::beta(xi, s2, med);
    const cdouble a = sdomain::outgoing_extension(v, xi, s2, med, 1.0, 2.3);
    const cdouble b = sdomain::outgoing_extension(v, xi, s2, med, 1.0, 2.3 + 0.4);
    CHECK(std::abs(b / a - std::exp(-beta * 0.4)) <= 1e-14 * std::abs(std::exp(-beta * 0.4)));
    CHECK_THROWS_AS(
        (void)sdomain::outgoing_extension(v, xi, s2, med, 1.0, 0.5), DomainError);
    const symbols::ExteriorMedium med2(1.0, 1.0, 2);
    CHECK_NOTHROW((void)sdomain::outgoing_extension(v, xi, s2, med2, 0.0, -0.5));
    CHECK_THROWS_AS((void)sdomain::outgoing_extension(v, xi, s2, med2, 0.0, 0.5), DomainError);
}

TEST_CASE("theorem AT check: homogeneity and the zero-source error") {
    LayeredProfile p({0.0, 1.0}, {1.0}, {1.0});
    const ComplexFrequency s(1.0, 1.0);
    const int nz = 65;
    auto f = zero_source(nz);
    for (int k = 0; k < nz; ++k) {
        const double z = k / double(nz - 1);
        f.f2[k] = std::max(0.0, 1.0 - std::pow((z - 0.5) / 0.3, 2));
    }
    auto sol = sdomain::solve_mode({0.0, 0.0}, s, p, nz, &f);
    const double r1 = sdomain::theorem_at_check(sol, f, s);
    auto f2 = f;
    for (auto& v : f2.f2) v *= 2.0;
    auto sol2 = sdomain::solve_mode({0.0, 0.0}, s, p, nz, &f2);
    const double r2 = sdomain::theorem_at_check(sol2, f2, s);
    CHECK(std::abs(r2 - r1) <= 1e-12 * r1);
    CHECK_THROWS_AS((void)sdomain::theorem_at_check(sol, zero_source(nz), s),
                    UndefinedRatioError);
}

TEST_CASE("lemma es check: homogeneity and zero-data error") {
    LayeredProfile p({0.0, 1.0}, {1.0}, {1.0});
    const Xi xi{1.0, 0.0};
    const ComplexFrequency s(1.0, 0.5);
    const int nz = 65;
    ModeBoundaryData bd;
    bd.top1 = cdouble(0.4, 0.1);
    bd.bottom2 = cdouble(-0.3, 0.2);
    auto sol = sdomain::solve_mode(xi, s, p, nz, nullptr, &bd);
    const double r1 = sdomain::lemma_es_check(sol, zero_source(nz), bd, s);
    ModeBoundaryData bd2 = bd;
    bd2.top1 *= 3.0;
    bd2.bottom2 *= 3.0;
    auto sol2 = sdomain::solve_mode(xi, s, p, nz, nullptr, &bd2);
    const double r2 = sdomain::lemma_es_check(sol2, zero_source(nz), bd2, s);
    CHECK(std::abs(r2 - r1) <= 1e-12 * r1);
    ModeBoundaryData none;
    CHECK_THROWS_AS((void)sdomain::lemma_es_check(sol, zero_source(nz), none, s),
                    UndefinedRatioError);
}

TEST_CASE("solve_mode residual stays small for random driven modes") {
    LayeredProfile p({0.0, 0.3, 0.8, 1.0}, {1.0, 1.7, 0.9}, {1.2, 1.0, 0.8});
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Xi xi{3.0 * gauss(rng), 3.0 * gauss(rng)};
        const ComplexFrequency s(0.2 + std::abs(gauss(rng)), 2.0 * gauss(rng));
        const int nz = 65;
        auto f = zero_source(nz);
        for (int k = 0; k < nz; ++k) {
            f.f1[k] = cdouble(gauss(rng), gauss(rng));
            f.f2[k] = cdouble(gauss(rng), gauss(rng));
            f.f3[k] = cdouble(gauss(rng), gauss(rng));
        }
        auto sol = sdomain::solve_mode(xi, s, p, nz, &f);
        CHECK(sol.residual <= 1e-10);
    }
}
