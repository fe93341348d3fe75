#include <random>

#include "doctest.h"
#include "slabtbc/spectral.hpp"

using namespace slabtbc;
using spectral::Boundary;
using spectral::TangentialTrace;
using spectral::TraceNormKind;

namespace {

LateralGrid small_grid(int nx = 8, int ny = 8, int nz = 5) {
    return LateralGrid(2.0 * kPi, 2.0 * kPi, nx, ny, 1.0, 0.0, nz);
}

std::vector<cdouble> random_plane(const LateralGrid& g, std::mt19937_64& rng, bool real_only) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cdouble> v(g.plane_size());
    for (auto& c : v) c = real_only ? cdouble(gauss(rng), 0.0) : cdouble(gauss(rng), gauss(rng));
    return v;
}

// Direct O(N^4) DFT with the library's unitary-torus scaling.
std::vector<cdouble> dft_oracle(const LateralGrid& g, const std::vector<cdouble>& u) {
    std::vector<cdouble> out(g.plane_size(), cdouble(0.0));
    const double scale = std::sqrt(g.period_x() * g.period_y()) / g.plane_size();
    for (int kx = 0; kx < g.modes_x(); ++kx)
        for (int ky = 0; ky < g.modes_y(); ++ky) {
            cdouble acc(0.0);
            for (int i = 0; i < g.modes_x(); ++i)
                for (int j = 0; j < g.modes_y(); ++j) {
                    const double phase = -2.0 * kPi * (double(kx) * i / g.modes_x() +
                                                       double(ky) * j / g.modes_y());
                    acc += u[size_t(i) * g.modes_y() + j] * std::polar(1.0, phase);
                }
            out[size_t(kx) * g.modes_y() + ky] = acc * scale;
        }
    return out;
}

}  // namespace

TEST_CASE("forward_lateral: constant field concentrates at xi = 0") {
    auto g = small_grid();
    std::vector<cdouble> u(g.plane_size(), cdouble(1.0));
    auto c = spectral::forward_lateral(g, u);
    CHECK(std::abs(c[0] - std::sqrt(g.period_x() * g.period_y())) < 1e-12);
    for (int m = 1; m < g.plane_size(); ++m) CHECK(std::abs(c[m]) < 1e-12);
}

TEST_CASE("forward_lateral: pure mode lands on the single coefficient") {
    auto g = small_grid();
    std::vector<cdouble> u(g.plane_size());
    for (int i = 0; i < g.modes_x(); ++i)
        for (int j = 0; j < g.modes_y(); ++j)
            u[size_t(i) * g.modes_y() + j] = std::polar(1.0, g.xi1(1) * g.x(i));
    auto c = spectral::forward_lateral(g, u);
    const size_t hit = size_t(1) * g.modes_y() + 0;
    for (int m = 0; m < g.plane_size(); ++m) {
        if (size_t(m) == hit)
            CHECK(std::abs(c[m]) > 1.0);
        else
            CHECK(std::abs(c[m]) < 1e-12);
    }
}

TEST_CASE("forward_lateral matches the direct DFT oracle; Hermitian on real input") {
    auto g = small_grid();
    std::mt19937_64 rng(7);
    auto u = random_plane(g, rng, true);
    auto c = spectral::forward_lateral(g, u);
    auto oracle = dft_oracle(g, u);
    double scale = 0.0;
    for (auto& x : oracle) scale = std::max(scale, std::abs(x));
    for (int m = 0; m < g.plane_size(); ++m) CHECK(std::abs(c[m] - oracle[m]) < 1e-12 * scale);
    CHECK(spectral::hermitian_symmetric(g, c, 1e-13));
}

TEST_CASE("round trip inverse(forward) is the identity") {
    for (auto [nx, ny] : {std::pair{8, 8}, std::pair{16, 4}, std::pair{4, 32}}) {
        LateralGrid g(1.0, 3.0, nx, ny, 1.0, 0.0, 4);
        std::mt19937_64 rng(nx * 100 + ny);
        auto u = random_plane(g, rng, false);
        auto back = spectral::inverse_lateral(g, spectral::forward_lateral(g, u));
        double scale = 0.0, err = 0.0;
        for (int m = 0; m < g.plane_size(); ++m) {
            scale = std::max(scale, std::abs(u[m]));
            err = std::max(err, std::abs(back[m] - u[m]));
        }
        CHECK(err < 1e-13 * scale);
    }
}

TEST_CASE("forward_lateral rejects wrong shapes") {
    auto g = small_grid();
    std::vector<cdouble> bad(g.plane_size() + 1);
    CHECK_THROWS_AS((void)spectral::forward_lateral(g, bad), ShapeError);
}

TEST_CASE("l2_norm_slab: zero, constant, and Parseval") {
    auto g = small_grid(8, 8, 9);
    const size_t n = g.volume_size();
    std::vector<cdouble> zero(n, cdouble(0.0));
    CHECK(spectral::l2_norm_slab(g, zero) == 0.0);

    const cdouble c(1.5, -0.5);
    std::vector<cdouble> con(n, c);
    const double volume = g.period_x() * g.period_y() * g.height();
    CHECK(spectral::l2_norm_slab(g, con) ==
          doctest::Approx(std::abs(c) * std::sqrt(volume)).epsilon(1e-13));

    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cdouble> u(n);
    for (auto& x : u) x = cdouble(gauss(rng), gauss(rng));
    const double phys = spectral::l2_norm_slab(g, u);
    const double spec = spectral::l2_norm_slab_spectral(g, u);
    CHECK(std::abs(phys - spec) < 1e-12 * phys);
}

TEST_CASE("hcurl_norm: constant field reduces to the L2 norm") {
    auto g = small_grid(8, 8, 7);
    auto f = spectral::VectorField::zero(g);
    std::fill(f.c1.begin(), f.c1.end(), cdouble(2.0, 1.0));
    const double h = spectral::hcurl_norm(g, f);
    const double l2 = spectral::l2_norm_slab(g, f);
    CHECK(std::abs(h - l2) < 1e-12 * l2);
}

TEST_CASE("hcurl_norm matches the hand-built curl quadrature") {
    // u = (sin(2 pi y / Ly) q(z), 0, 0) with q quadratic, so the one-sided
    // d/dz stencils are exact; curl = (0, q' sin, -(2pi/Ly) cos q).
    auto g = small_grid(8, 8, 9);
    auto f = spectral::VectorField::zero(g);
    auto q = [](double z) { return z * z + 0.5 * z + 0.2; };
    auto qp = [](double z) { return 2.0 * z + 0.5; };
    const double ky = 2.0 * kPi / g.period_y();
    for (int k = 0; k < g.nz(); ++k)
        for (int i = 0; i < g.modes_x(); ++i)
            for (int j = 0; j < g.modes_y(); ++j)
                f.c1[(size_t(k) * g.modes_x() + i) * g.modes_y() + j] =
                    std::sin(ky * g.y(j)) * q(g.z(k));
    double oracle = 0.0;
    const double dv = g.dx() * g.dy() * g.dz();
    for (int k = 0; k < g.nz(); ++k) {
        const double w = (k == 0 || k == g.nz() - 1) ? 0.5 : 1.0;
        for (int i = 0; i < g.modes_x(); ++i)
            for (int j = 0; j < g.modes_y(); ++j) {
                const double u1 = std::sin(ky * g.y(j)) * q(g.z(k));
                const double c2 = std::sin(ky * g.y(j)) * qp(g.z(k));
                const double c3 = -ky * std::cos(ky * g.y(j)) * q(g.z(k));
                oracle += w * (u1 * u1 + c2 * c2 + c3 * c3);
            }
    }
    oracle = std::sqrt(oracle * dv);
    const double h = spectral::hcurl_norm(g, f);
    CHECK(std::abs(h - oracle) < 1e-10 * oracle);
}

TEST_CASE("hcurl_norm: gradient fields are curl free") {
    auto g = small_grid(8, 8, 6);
    auto f = spectral::VectorField::zero(g);
    const double kx = 2.0 * kPi / g.period_x(), ky = 2.0 * kPi / g.period_y();
    for (int k = 0; k < g.nz(); ++k)
        for (int i = 0; i < g.modes_x(); ++i)
            for (int j = 0; j < g.modes_y(); ++j) {
                const size_t m = (size_t(k) * g.modes_x() + i) * g.modes_y() + j;
                // grad of phi = sin(kx x) cos(2 ky y), independent of z
                f.c1[m] = kx * std::cos(kx * g.x(i)) * std::cos(2.0 * ky * g.y(j));
                f.c2[m] = -2.0 * ky * std::sin(kx * g.x(i)) * std::sin(2.0 * ky * g.y(j));
            }
    const double h = spectral::hcurl_norm(g, f);
    const double l2 = spectral::l2_norm_slab(g, f);
    CHECK(std::abs(h - l2) < 1e-10 * l2);
    CHECK(h >= l2 * (1.0 - 1e-14));
}

TEST_CASE("trace_norm examples") {
    auto g = small_grid();
    auto t = TangentialTrace::zero(g, Boundary::Gamma1);
    CHECK(spectral::trace_norm(g, t, TraceNormKind::CurlMinusHalf) == 0.0);
    CHECK(spectral::trace_norm(g, t, TraceNormKind::DivMinusHalf) == 0.0);

    t.u1[0] = 1.0;  // xi = 0 mode
    CHECK(spectral::trace_norm(g, t, TraceNormKind::CurlMinusHalf) == doctest::Approx(1.0));
    CHECK(spectral::trace_norm(g, t, TraceNormKind::DivMinusHalf) == doctest::Approx(1.0));

    auto s = TangentialTrace::zero(g, Boundary::Gamma1);
    s.u2[size_t(1) * g.modes_y() + 0] = 1.0;  // xi = (1, 0), u = (0, 1)
    CHECK(spectral::trace_norm(g, s, TraceNormKind::CurlMinusHalf) ==
          doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-13));
}

TEST_CASE("duality pairing: examples, surface-integral identity, and the AJ bound") {
    auto g = small_grid();
    auto zero = TangentialTrace::zero(g, Boundary::Gamma1);
    auto u = TangentialTrace::zero(g, Boundary::Gamma1);
    u.u1[size_t(2) * g.modes_y() + 3] = 1.0;
    CHECK(std::abs(spectral::duality_pairing(g, u, zero)) == 0.0);
    CHECK(spectral::duality_pairing(g, u, u).real() == doctest::Approx(1.0));

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = TangentialTrace::zero(g, Boundary::Gamma1);
        auto b = TangentialTrace::zero(g, Boundary::Gamma1);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int m = 0; m < g.plane_size(); ++m) {
            a.u1[m] = cdouble(gauss(rng), gauss(rng));
            a.u2[m] = cdouble(gauss(rng), gauss(rng));
            b.u1[m] = cdouble(gauss(rng), gauss(rng));
            b.u2[m] = cdouble(gauss(rng), gauss(rng));
        }
        const double lhs = std::abs(spectral::duality_pairing(g, a, b));
        const double rhs = spectral::trace_norm(g, a, TraceNormKind::DivMinusHalf) *
                           spectral::trace_norm(g, b, TraceNormKind::CurlMinusHalf);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }

    // Physical surface integral agrees with the mode sum.
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cdouble> p1(g.plane_size()), p2(g.plane_size()), q1(g.plane_size()),
        q2(g.plane_size());
    for (int m = 0; m < g.plane_size(); ++m) {
        p1[m] = cdouble(gauss(rng), gauss(rng));
        p2[m] = cdouble(gauss(rng), gauss(rng));
        q1[m] = cdouble(gauss(rng), gauss(rng));
        q2[m] = cdouble(gauss(rng), gauss(rng));
    }
    auto ua = TangentialTrace::zero(g, Boundary::Gamma2);
    auto va = TangentialTrace::zero(g, Boundary::Gamma2);
    ua.u1 = spectral::forward_lateral(g, p1);
    ua.u2 = spectral::forward_lateral(g, p2);
    va.u1 = spectral::forward_lateral(g, q1);
    va.u2 = spectral::forward_lateral(g, q2);
    cdouble surf(0.0);
    for (int m = 0; m < g.plane_size(); ++m)
        surf += (p1[m] * std::conj(q1[m]) + p2[m] * std::conj(q2[m]));
    surf *= g.dx() * g.dy();
    const cdouble modes = spectral::duality_pairing(g, ua, va);
    CHECK(std::abs(surf - modes) < 1e-12 * std::abs(surf));

    auto wrong = TangentialTrace::zero(g, Boundary::Gamma2);
    CHECK_THROWS_AS((void)spectral::duality_pairing(g, u, wrong), GridMismatchError);
}

TEST_CASE("grid invariants are enforced") {
    CHECK_THROWS_AS(LateralGrid(1.0, 1.0, 8, 8, 0.0, 1.0, 4), ShapeError);   // h1 <= h2
    CHECK_THROWS_AS(LateralGrid(1.0, 1.0, 7, 8, 1.0, 0.0, 4), ShapeError);   // odd modes
    CHECK_THROWS_AS(LateralGrid(1.0, 1.0, 2, 8, 1.0, 0.0, 4), ShapeError);   // too few
    const LateralGrid g(1.0, 1.0, 8, 8, 1.0, 0.0, 4);
    // mode <-> wavenumber map is the signed bijection
    CHECK(g.signed_kx(0) == 0);
    CHECK(g.signed_kx(3) == 3);
    CHECK(g.signed_kx(4) == -4);
    CHECK(g.signed_kx(7) == -1);
}
