#include <random>

#include "doctest.h"
#include "slabtbc/symbols.hpp"

using namespace slabtbc;
using symbols::ExteriorMedium;

TEST_CASE("beta: trivial and hand-evaluated values") {
    const ExteriorMedium med(1.0, 1.0, 1);
    CHECK(std::abs(symbols::beta({0.0, 0.0}, ComplexFrequency(1.0, 0.0), med) - 1.0) < 1e-14);
    const cdouble b = symbols::beta({0.0, 0.0}, ComplexFrequency(1.0, 1.0), med);
    CHECK(std::abs(b - cdouble(1.0, 1.0)) < 1e-14);
    // xi = (3,4), s = 2: beta^2 = 4 + 25 = 29
    const cdouble b2 = symbols::beta({3.0, 4.0}, ComplexFrequency(2.0, 0.0), med);
    CHECK(std::abs(b2 - std::sqrt(29.0)) < 1e-13);
}

TEST_CASE("beta: invalid frequency is rejected at construction") {
    CHECK_THROWS_AS(ComplexFrequency(0.0, 1.0), InvalidFrequencyError);
    CHECK_THROWS_AS(ComplexFrequency(-0.5, 1.0), InvalidFrequencyError);
}

TEST_CASE("beta: branch correctness over random samples") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto logu = [&](double lo, double hi) {
        return lo * std::exp(unit(rng) * std::log(hi / lo));
    };
    for (int i = 0; i < 5000; ++i) {
        const Xi xi{logu(1e-3, 1e3) * std::cos(2 * kPi * unit(rng)),
                    logu(1e-3, 1e3) * std::sin(2 * kPi * unit(rng))};
        const ComplexFrequency s(logu(1e-2, 1e2),
                                 (unit(rng) < 0.5 ? -1 : 1) * logu(1e-2, 1e2));
        const ExteriorMedium med(logu(0.3, 3.0), logu(0.3, 3.0), 1);
        const cdouble b = symbols::beta(xi, s, med);
        CHECK(b.real() > 0.0);
        const cdouble target = med.eps * med.mu * s.value() * s.value() + xi.norm2();
        CHECK(std::abs(b * b - target) <= 1e-13 * std::abs(target));
        // conjugation symmetry
        const cdouble bc = symbols::beta(xi, ComplexFrequency(s.s1(), -s.s2()), med);
        CHECK(std::abs(bc - std::conj(b)) < 1e-13 * std::abs(b));
    }
}

TEST_CASE("capacity matrix: plane-wave impedance at xi = 0") {
    const ExteriorMedium med(4.0, 0.25, 1);
    const auto sym = symbols::capacity_matrix({0.0, 0.0}, ComplexFrequency(0.7, -1.3), med);
    const double imp = std::sqrt(med.eps / med.mu);
    CHECK(std::abs(sym.matrix(0, 0) - imp) < 1e-13 * imp);
    CHECK(std::abs(sym.matrix(1, 1) - imp) < 1e-13 * imp);
    CHECK(std::abs(sym.matrix(0, 1)) < 1e-15);
    CHECK(std::abs(sym.matrix(1, 0)) < 1e-15);
}

TEST_CASE("capacity matrix: hand evaluation at xi = (1,0), s = 1") {
    const ExteriorMedium med(1.0, 1.0, 1);
    const auto m = symbols::capacity_matrix({1.0, 0.0}, ComplexFrequency(1.0, 0.0), med).matrix;
    const double r2 = std::sqrt(2.0);
    CHECK(std::abs(m(0, 0) - 1.0 / r2) < 1e-14);
    CHECK(std::abs(m(1, 1) - 2.0 / r2) < 1e-14);
    CHECK(std::abs(m(0, 1)) < 1e-15);
}

TEST_CASE("capacity matrix: the two algebraic forms agree; conjugation symmetry") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.1, 2.0);
    for (int i = 0; i < 500; ++i) {
        const Xi xi{3.0 * gauss(rng), 3.0 * gauss(rng)};
        const ComplexFrequency s(unit(rng), 4.0 * gauss(rng));
        const ExteriorMedium med(unit(rng), unit(rng), i % 2 + 1);
        const auto m2 = symbols::capacity_matrix(xi, s, med).matrix;
        const auto m1 = symbols::capacity_matrix_impedance_form(xi, s, med);
        CHECK((m1 - m2).cwiseAbs().maxCoeff() <= 1e-12 * m2.cwiseAbs().maxCoeff());
        CHECK(std::abs(m2(0, 1) - m2(1, 0)) < 1e-14 * m2.cwiseAbs().maxCoeff());
        const Xi nxi{-xi.xi1, -xi.xi2};
        const auto mc =
            symbols::capacity_matrix(nxi, ComplexFrequency(s.s1(), -s.s2()), med).matrix;
        CHECK((mc - m2.conjugate()).cwiseAbs().maxCoeff() <=
              1e-13 * m2.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("apply_capacity: zero trace, impedance mode, inverse round trip") {
    LateralGrid g(2.0 * kPi, 2.0 * kPi, 8, 8, 1.0, 0.0, 4);
    const ExteriorMedium med(1.0, 1.0, 1);
    const ComplexFrequency s(1.0, 0.4);
    symbols::CapacitySymbolSet set(g, s, med);

    auto zero = spectral::TangentialTrace::zero(g, spectral::Boundary::Gamma1);
    auto out = symbols::apply_capacity(g, set, zero);
    for (int m = 0; m < g.plane_size(); ++m) {
        CHECK(std::abs(out.u1[m]) == 0.0);
        CHECK(std::abs(out.u2[m]) == 0.0);
    }

    auto unit_mode = spectral::TangentialTrace::zero(g, spectral::Boundary::Gamma1);
    unit_mode.u1[0] = 1.0;
    out = symbols::apply_capacity(g, set, unit_mode);
    CHECK(std::abs(out.u1[0] - std::sqrt(med.eps / med.mu)) < 1e-13);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto t = spectral::TangentialTrace::zero(g, spectral::Boundary::Gamma1);
    for (int m = 0; m < g.plane_size(); ++m) {
        t.u1[m] = cdouble(gauss(rng), gauss(rng));
        t.u2[m] = cdouble(gauss(rng), gauss(rng));
    }
    auto forward = symbols::apply_capacity(g, set, t);
    // Independent oracle: per-mode 2x2 inverse applied back.
    auto back = forward;
    for (int ix = 0; ix < g.modes_x(); ++ix)
        for (int iy = 0; iy < g.modes_y(); ++iy) {
            const size_t m = size_t(ix) * g.modes_y() + iy;
            const auto& a = set.at(ix, iy);
            const cdouble det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
            back.u1[m] = (a(1, 1) * forward.u1[m] - a(0, 1) * forward.u2[m]) / det;
            back.u2[m] = (a(0, 0) * forward.u2[m] - a(1, 0) * forward.u1[m]) / det;
        }
    double err = 0.0, scale = 0.0;
    for (int m = 0; m < g.plane_size(); ++m) {
        err = std::max({err, std::abs(back.u1[m] - t.u1[m]), std::abs(back.u2[m] - t.u2[m])});
        scale = std::max({scale, std::abs(t.u1[m]), std::abs(t.u2[m])});
    }
    CHECK(err < 1e-10 * scale);

    LateralGrid g2(2.0 * kPi, 2.0 * kPi, 4, 4, 1.0, 0.0, 4);
    auto small = spectral::TangentialTrace::zero(g2, spectral::Boundary::Gamma1);
    CHECK_THROWS_AS((void)symbols::apply_capacity(g2, set, small), GridMismatchError);
}

TEST_CASE("positivity margin: examples and random nonnegativity") {
    LateralGrid g(2.0 * kPi, 2.0 * kPi, 8, 8, 1.0, 0.0, 4);
    const ExteriorMedium med(1.0, 1.0, 1);
    const ComplexFrequency s(1.0, 0.0);
    auto zero = spectral::TangentialTrace::zero(g, spectral::Boundary::Gamma1);
    CHECK(symbols::positivity_margin(g, zero, s, med) == 0.0);
    auto unit_mode = zero;
    unit_mode.u1[0] = 1.0;
    CHECK(symbols::positivity_margin(g, unit_mode, s, med) == doctest::Approx(1.0));

    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.05, 20.0);
    for (int i = 0; i < 200; ++i) {
        auto t = zero;
        double unorm = 0.0;
        for (int m = 0; m < g.plane_size(); ++m) {
            t.u1[m] = cdouble(gauss(rng), gauss(rng));
            t.u2[m] = cdouble(gauss(rng), gauss(rng));
            unorm += std::norm(t.u1[m]) + std::norm(t.u2[m]);
        }
        const ComplexFrequency sr(unit(rng), gauss(rng) * 10.0);
        CHECK(symbols::positivity_margin(g, t, sr, med) >= -1e-12 * unorm);
    }
}

TEST_CASE("continuity constant: hand evaluations and the degenerate axis") {
    const ExteriorMedium med(1.0, 1.0, 1);
    // s = 1 + i: a = 0, b = 2, C = (5/4)^{1/4} * 2
    CHECK(symbols::continuity_constant(ComplexFrequency(1.0, 1.0), med) ==
          doctest::Approx(std::pow(1.25, 0.25) * 2.0).epsilon(1e-9));
    // a = 1 via s1^2 - s2^2 = 1: C = max{sqrt(1+b^2), 1} / s1
    const double s1 = std::sqrt(2.0), s2 = 1.0;
    const double b = 2.0 * s1 * s2;
    CHECK(symbols::continuity_constant(ComplexFrequency(s1, s2), med) ==
          doctest::Approx(std::sqrt(1.0 + b * b) / s1).epsilon(1e-12));
    CHECK_THROWS_AS((void)symbols::continuity_constant(ComplexFrequency(1.0, 0.0), med),
                    DegenerateConstantError);
}

TEST_CASE("beta identities: residuals vanish") {
    const ExteriorMedium med(1.0, 1.0, 1);
    auto [r2a, r3a] = symbols::beta_identities({0.0, 0.0}, ComplexFrequency(2.0, 0.0), med);
    CHECK(r2a < 1e-14);
    CHECK(r3a < 1e-14);
    auto [r2b, r3b] = symbols::beta_identities({3.0, 4.0}, ComplexFrequency(1.0, 2.0), med);
    CHECK(r2b <= 1e-12);
    CHECK(r3b <= 1e-12);
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const ExteriorMedium m(0.5 + std::abs(gauss(rng)), 0.5 + std::abs(gauss(rng)), 1);
        auto [ra, rb] = symbols::beta_identities({gauss(rng) * 5, gauss(rng) * 5},
                                                 ComplexFrequency(0.1 + std::abs(gauss(rng)),
                                                                  gauss(rng) * 5),
                                                 m);
        CHECK(ra <= 1e-12);
        CHECK(rb <= 1e-12);
    }
}

TEST_CASE("symbol audit: bounds hold and runs are reproducible") {
    const ExteriorMedium med(1.0, 1.0, 1);
    auto a = symbols::symbol_bound_audit(2000, 77, med);
    CHECK(a.samples == 2000);
    CHECK(a.min_positivity_margin >= -1e-12);
    CHECK(a.max_fbound_ratio <= 1.0 + 1e-12);
    CHECK(a.max_continuity_ratio <= 1.0 + 1e-9);
    CHECK(a.max_beta_residual <= 1e-13);
    CHECK(a.max_form_difference <= 1e-12);
    auto b = symbols::symbol_bound_audit(2000, 77, med);
    CHECK(a.max_continuity_ratio == b.max_continuity_ratio);
    CHECK(a.min_positivity_margin == b.min_positivity_margin);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json().find("worst_case_inputs") != std::string::npos);
    CHECK_THROWS_AS((void)symbols::symbol_bound_audit(0, 1, med), DataError);
}

TEST_CASE("exterior medium validation") {
    CHECK_THROWS_AS(ExteriorMedium(-1.0, 1.0, 1), DataError);
    CHECK_THROWS_AS(ExteriorMedium(1.0, 0.0, 2), DataError);
    CHECK_THROWS_AS(ExteriorMedium(1.0, 1.0, 3), DataError);
}
