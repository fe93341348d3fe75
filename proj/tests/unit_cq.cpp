#include <cstdio>
#include <random>

#include "doctest.h"
#include "slabtbc/cq.hpp"
#include "slabtbc/spectral.hpp"

using namespace slabtbc;
using cq::Generator;
using cq::OperatorKind;

TEST_CASE("scalar weights: identity, differencer, integrator") {
    const double dt = 0.02;
    auto w1 = cq::scalar_weights([](cdouble) { return cdouble(1.0); }, dt, 32, Generator::BDF2);
    CHECK(std::abs(w1[0] - 1.0) < 1e-12);
    for (int n = 1; n <= 32; ++n) CHECK(std::abs(w1[n]) < 1e-12);

    auto wd = cq::scalar_weights([](cdouble s) { return s; }, dt, 32, Generator::BDF1);
    CHECK(std::abs(wd[0] - 1.0 / dt) < 1e-9 / dt);
    CHECK(std::abs(wd[1] + 1.0 / dt) < 1e-9 / dt);
    for (int n = 2; n <= 32; ++n) CHECK(std::abs(wd[n]) < 1e-9 / dt);

    auto wi = cq::scalar_weights([](cdouble s) { return 1.0 / s; }, dt, 32, Generator::BDF1);
    for (int n = 0; n <= 32; ++n) CHECK(std::abs(wi[n] - dt) < 1e-7 * dt);

    // BDF2 integrator weights match the closed form dt (1 - 3^{-(n+1)}).
    auto wi2 = cq::scalar_weights([](cdouble s) { return 1.0 / s; }, dt, 32, Generator::BDF2);
    auto q2 = cq::integrator_weights(Generator::BDF2, dt, 32);
    for (int n = 0; n <= 32; ++n) CHECK(std::abs(wi2[n] - q2[n]) < 1e-7 * dt);

    CHECK_THROWS_AS(
        (void)cq::scalar_weights([](cdouble) { return cdouble(1.0); }, dt, 8, Generator::BDF1,
                                 1.5),
        ConfigurationError);
}

TEST_CASE("scalar convolution: integrator and differencer behavior, causality") {
    const double dt = 0.1;
    const int n = 20;
    auto wi = cq::scalar_weights([](cdouble s) { return 1.0 / s; }, dt, n, Generator::BDF1);
    std::vector<cdouble> ones(n + 1, cdouble(1.0));
    for (int m = 0; m <= n; ++m) {
        const cdouble y = cq::scalar_convolve(wi, ones, m);
        CHECK(std::abs(y - (m + 1.0) * dt) < 1e-6 * (m + 1.0) * dt);
    }
    auto wd = cq::scalar_weights([](cdouble s) { return s; }, dt, n, Generator::BDF1);
    std::vector<cdouble> ramp(n + 1);
    for (int m = 0; m <= n; ++m) ramp[m] = m * dt;
    for (int m = 1; m <= n; ++m)
        CHECK(std::abs(cq::scalar_convolve(wd, ramp, m) - 1.0) < 1e-6);

    std::vector<cdouble> zeros(n + 1, cdouble(0.0));
    CHECK(std::abs(cq::scalar_convolve(wi, zeros, n)) == 0.0);

    // causality: output at m is independent of future samples
    std::vector<cdouble> tail = ones;
    tail[15] = 99.0;
    CHECK(std::abs(cq::scalar_convolve(wi, ones, 10) - cq::scalar_convolve(wd, ones, 10) -
                   (cq::scalar_convolve(wi, tail, 10) - cq::scalar_convolve(wd, tail, 10))) <
          1e-12);

    CHECK_THROWS_AS((void)cq::scalar_convolve(wi, ones, n + 5), ShapeError);
    std::vector<cdouble> longer(100, cdouble(1.0));
    CHECK_THROWS_AS((void)cq::scalar_convolve(wi, longer, 50), KernelTooShortError);
}

TEST_CASE("operational calculus: product symbol equals convolved weights") {
    const double dt = 0.05;
    const int n = 64;
    auto a = cq::scalar_weights([](cdouble s) { return 1.0 / (s + 1.0); }, dt, n,
                                Generator::BDF2);
    auto b = cq::scalar_weights([](cdouble s) { return 1.0 / (s + 2.0); }, dt, n,
                                Generator::BDF2);
    auto ab = cq::scalar_weights([](cdouble s) { return 1.0 / ((s + 1.0) * (s + 2.0)); }, dt, n,
                                 Generator::BDF2);
    double scale = 0.0;
    for (auto& w : ab) scale = std::max(scale, std::abs(w));
    for (int m = 0; m <= n; ++m) {
        cdouble conv(0.0);
        for (int k = 0; k <= m; ++k) conv += a[k] * b[m - k];
        CHECK(std::abs(conv - ab[m]) <= 1e-10 * scale);
    }
}

TEST_CASE("operational calculus holds per mode for 2x2 capacity symbols") {
    LateralGrid g(2.0 * kPi, 2.0 * kPi, 4, 4, 1.0, 0.0, 4);
    const symbols::ExteriorMedium med(1.0, 1.0, 1);
    const double dt = 0.05;
    const int n = 48;
    auto bsym = [&](int ix, int iy, cdouble s) {
        return symbols::capacity_matrix(g.xi(ix, iy), ComplexFrequency(s.real(), s.imag()), med)
            .matrix;
    };
    auto b2sym = [&](int ix, int iy, cdouble s) {
        const auto b = bsym(ix, iy, s);
        return symbols::Matrix2c(b * b);
    };
    // The identity is exact in the calculus; push the contour resolution
    // past the default so quadrature aliasing sits below the tolerance.
    const double lambda = std::pow(10.0, -3.0 / n);
    cq::CQKernel k1(g, OperatorKind::T, Generator::BDF2, dt, n, bsym, false, lambda, 16 * n);
    cq::CQKernel k2(g, OperatorKind::T, Generator::BDF2, dt, n, b2sym, false, lambda, 16 * n);
    for (int mode : {0, 5, 9}) {
        double scale = 0.0;
        for (int m = 0; m <= n; ++m)
            scale = std::max(scale, k2.weight(mode, m).cwiseAbs().maxCoeff());
        for (int m = 0; m <= n; ++m) {
            symbols::Matrix2c conv = symbols::Matrix2c::Zero();
            for (int k = 0; k <= m; ++k) conv += k1.weight(mode, k) * k1.weight(mode, m - k);
            CHECK((conv - k2.weight(mode, m)).cwiseAbs().maxCoeff() <= 1e-10 * scale);
        }
    }
}

TEST_CASE("consistency order of BDF1/BDF2 on smooth symbols") {
    // u = t^2 e^{-t}; exact single and double integrals known in closed form.
    auto u_fn = [](double t) { return t * t * std::exp(-t); };
    auto i1 = [](double t) { return 2.0 - std::exp(-t) * (t * t + 2.0 * t + 2.0); };
    auto i2 = [](double t) { return 2.0 * t + std::exp(-t) * (t * t + 4.0 * t + 6.0) - 6.0; };
    const double t_final = 2.0;
    // Error over the trajectory tail; a single endpoint can sit on a
    // superconvergent node and spoil the order estimate.
    auto measure = [&](Generator gen, bool dbl, int steps) {
        const double dt = t_final / steps;
        auto w = cq::scalar_weights(
            [&](cdouble s) { return dbl ? 1.0 / (s * s) : 1.0 / s; }, dt, steps, gen);
        std::vector<cdouble> hist(steps + 1);
        for (int m = 0; m <= steps; ++m) hist[m] = u_fn(m * dt);
        double emax = 0.0;
        for (int m = steps / 2; m <= steps; ++m) {
            const cdouble y = cq::scalar_convolve(w, hist, m);
            emax = std::max(emax, std::abs(y - (dbl ? i2(m * dt) : i1(m * dt))));
        }
        return emax;
    };
    for (auto gen : {Generator::BDF1, Generator::BDF2}) {
        const double expected = gen == Generator::BDF1 ? 1.0 : 2.0;
        for (bool dbl : {false, true}) {
            const double e1 = measure(gen, dbl, 128);
            const double e2 = measure(gen, dbl, 256);
            const double order = std::log2(e1 / e2);
            CHECK(order == doctest::Approx(expected).epsilon(0.15 / expected));
        }
    }
}

TEST_CASE("kernels applied to Hermitian histories keep outputs Hermitian") {
    LateralGrid g(2.0 * kPi, 2.0 * kPi, 8, 8, 1.0, 0.0, 4);
    const symbols::ExteriorMedium med(1.2, 0.8, 1);
    const double dt = 0.05;
    auto kernel = cq::capacity_kernel(g, med, OperatorKind::T, Generator::BDF2, dt, 16, false);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    cq::TraceHistory hist;
    hist.stored_modes = kernel.stored_modes();
    const int steps = 6;
    for (int n = 0; n < steps; ++n) {
        std::vector<cdouble> plane(g.plane_size());
        for (auto& c : plane) c = cdouble(gauss(rng), 0.0);
        auto c1 = spectral::forward_lateral(g, plane);
        for (auto& c : plane) c = cdouble(gauss(rng), 0.0);
        auto c2 = spectral::forward_lateral(g, plane);
        hist.u1.insert(hist.u1.end(), c1.begin(), c1.end());
        hist.u2.insert(hist.u2.end(), c2.begin(), c2.end());
    }
    std::vector<cdouble> y1, y2;
    cq::convolve(kernel, hist, steps - 1, y1, y2);
    CHECK(spectral::hermitian_symmetric(g, y1, 1e-11));
    CHECK(spectral::hermitian_symmetric(g, y2, 1e-11));
}

TEST_CASE("C kernel on a constant history approaches the s -> 0 limit") {
    LateralGrid g(2.0 * kPi, 2.0 * kPi, 4, 4, 1.0, 0.0, 4);
    const symbols::ExteriorMedium med(1.0, 1.0, 1);
    const double dt = 0.05;
    const int n = 512;
    auto kernel = cq::capacity_kernel(g, med, OperatorKind::C, Generator::BDF2, dt, n, false);
    cq::TraceHistory hist;
    hist.stored_modes = kernel.stored_modes();
    for (int m = 0; m <= n; ++m) {
        hist.append_zero();
        for (int q = 0; q < hist.stored_modes; ++q) {
            hist.u1[size_t(m) * hist.stored_modes + q] = 1.0;
            hist.u2[size_t(m) * hist.stored_modes + q] = 1.0;
        }
    }
    std::vector<cdouble> y1, y2;
    cq::convolve(kernel, hist, n, y1, y2);
    // mode (1, 0): s B -> R(xi)/(mu |xi|) = [[0,0],[0,1]] acting on (1,1).
    const int mode = kernel.mode_index(1, 0);
    CHECK(std::abs(y1[mode]) < 0.05);
    CHECK(std::abs(y2[mode] - 1.0) < 0.05);
}

TEST_CASE("parseval residual: zero signal, analytic pair, smooth pulse") {
    cq::TimeSignal z{1e-3, std::vector<double>(5001, 0.0)};
    CHECK(cq::parseval_residual(z, z, 1.0).residual == 0.0);

    const double dt = 1e-3;
    const int n = 20001;
    cq::TimeSignal u{dt, {}};
    u.samples.resize(n);
    for (int i = 0; i < n; ++i) u.samples[i] = std::exp(-i * dt);
    auto r = cq::parseval_residual(u, u, 1.0);
    CHECK(r.residual <= 1e-6);
    CHECK(std::abs(r.freq_side - 0.25) <= 2e-6);
    CHECK(std::abs(r.time_side - 0.25) <= 2e-6);

    cq::TimeSignal p{dt, {}};
    p.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = i * dt;
        const double v = 1.0 - (t - 3.0) * (t - 3.0) / 4.0;
        p.samples[i] = v > 0.0 ? v * v * v * v : 0.0;
    }
    auto rp = cq::parseval_residual(p, p, 0.5);
    CHECK(rp.residual <= 1e-6);

    cq::TimeSignal bad{2e-3, std::vector<double>(n, 0.0)};
    CHECK_THROWS_AS((void)cq::parseval_residual(u, bad, 1.0), ShapeError);
}

TEST_CASE("passivity certificate: nonnegative margins for both generators") {
    LateralGrid g(2.0 * kPi, 2.0 * kPi, 4, 4, 1.0, 0.0, 4);
    const symbols::ExteriorMedium med(1.0, 1.0, 2);
    for (auto gen : {Generator::BDF1, Generator::BDF2}) {
        auto kernel = cq::capacity_kernel(g, med, OperatorKind::C, gen, 0.05, 96, false);
        CHECK(cq::passivity_certificate(kernel, 100, 11) >= -1e-10);
    }
    auto tk = cq::capacity_kernel(g, med, OperatorKind::T, Generator::BDF2, 0.05, 16, false);
    CHECK_THROWS_AS((void)cq::passivity_certificate(tk, 10, 1), DataError);
}

TEST_CASE("kernel serialization round trip") {
    LateralGrid g(1.0, 2.0, 4, 6, 1.0, 0.0, 4);
    const symbols::ExteriorMedium med(2.0, 0.5, 1);
    auto kernel = cq::capacity_kernel(g, med, OperatorKind::T, Generator::BDF1, 0.03, 12, true);
    const std::string path = "/tmp/slabtbc_kernel_test.bin";
    kernel.save(path);
    auto loaded = cq::CQKernel::load(path);
    CHECK(loaded.generator() == kernel.generator());
    CHECK(loaded.kind() == kernel.kind());
    CHECK(loaded.dt() == kernel.dt());
    CHECK(loaded.horizon() == kernel.horizon());
    CHECK(loaded.lambda() == kernel.lambda());
    CHECK(loaded.half_spectrum() == kernel.half_spectrum());
    for (int mode = 0; mode < kernel.stored_modes(); ++mode)
        for (int m = 0; m <= kernel.horizon(); ++m)
            CHECK((loaded.weight(mode, m) - kernel.weight(mode, m)).cwiseAbs().maxCoeff() ==
                  0.0);
    std::remove(path.c_str());
}
