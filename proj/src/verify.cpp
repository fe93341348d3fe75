#include "slabtbc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "slabtbc/io.hpp"

namespace slabtbc::verify {

using spectral::Boundary;
using spectral::TangentialTrace;
using stepper::SlabMedium;
using stepper::SourceTerm;
using symbols::ExteriorMedium;

namespace {

const char* status_name(CheckResult::Status s) {
    switch (s) {
        case CheckResult::Status::Pass: return "pass";
        case CheckResult::Status::Fail: return "fail";
        default: return "degenerate";
    }
}

struct Gate {
    bool ok = true;
    void require(bool cond) { ok = ok && cond; }
};

// Log-uniform (xi, s) sampler shared by the symbol checks.
struct SymbolSampler {
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    explicit SymbolSampler(std::uint64_t seed) : rng(seed) {}
    double log_uniform(double lo, double hi) {
        return lo * std::exp(unit(rng) * std::log(hi / lo));
    }
    Xi xi(bool allow_zero = true) {
        const double r = (allow_zero && unit(rng) < 0.01) ? 0.0 : log_uniform(1e-3, 1e3);
        const double phi = 2.0 * kPi * unit(rng);
        return {r * std::cos(phi), r * std::sin(phi)};
    }
    ComplexFrequency s(bool nonzero_s2) {
        const double s1 = log_uniform(1e-2, 1e2);
        double s2 = (unit(rng) < 0.5 ? -1.0 : 1.0) * log_uniform(1e-2, 1e2);
        if (!nonzero_s2 && unit(rng) < 0.05) s2 = 0.0;
        return ComplexFrequency(s1, s2);
    }
};

TangentialTrace random_trace(const LateralGrid& g, Boundary b, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    TangentialTrace t = TangentialTrace::zero(g, b);
    for (int m = 0; m < g.plane_size(); ++m) {
        t.u1[m] = cdouble(gauss(rng), gauss(rng));
        t.u2[m] = cdouble(gauss(rng), gauss(rng));
    }
    return t;
}

// Smooth random field: a handful of lateral modes, each carrying a smooth
// non-periodic z-profile, synthesized by inverse FFT per plane.
spectral::VectorField random_smooth_field(const LateralGrid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> kx_pick(-g.modes_x() / 4, g.modes_x() / 4 - 1);
    std::uniform_int_distribution<int> ky_pick(-g.modes_y() / 4, g.modes_y() / 4 - 1);
    const int n_modes = 8, n_prof = 4;
    const int np = g.plane_size();
    std::vector<std::vector<cdouble>> coeff(
        3, std::vector<cdouble>(static_cast<size_t>(np) * g.nz(), cdouble(0.0)));
    for (int c = 0; c < 3; ++c) {
        for (int mset = 0; mset < n_modes; ++mset) {
            const int kx = kx_pick(rng), ky = ky_pick(rng);
            const int ix = (kx + g.modes_x()) % g.modes_x();
            const int iy = (ky + g.modes_y()) % g.modes_y();
            cdouble amp_m[8];
            for (int m = 0; m < n_prof; ++m)
                amp_m[m] = cdouble(gauss(rng), gauss(rng)) / ((1.0 + m) * (1.0 + m));
            for (int k = 0; k < g.nz(); ++k) {
                const double t = static_cast<double>(k) / (g.nz() - 1);
                cdouble prof(0.0);
                for (int m = 0; m < n_prof; ++m) prof += amp_m[m] * std::cos(m * kPi * t);
                coeff[c][static_cast<size_t>(k) * np + ix * g.modes_y() + iy] += prof;
            }
        }
    }
    spectral::VectorField f = spectral::VectorField::zero(g);
    for (int k = 0; k < g.nz(); ++k) {
        auto plane = [&](int c) {
            return std::span<const cdouble>(coeff[c]).subspan(static_cast<size_t>(k) * np, np);
        };
        auto p1 = spectral::inverse_lateral(g, plane(0));
        auto p2 = spectral::inverse_lateral(g, plane(1));
        auto p3 = spectral::inverse_lateral(g, plane(2));
        std::copy(p1.begin(), p1.end(), f.c1.begin() + static_cast<size_t>(k) * np);
        std::copy(p2.begin(), p2.end(), f.c2.begin() + static_cast<size_t>(k) * np);
        std::copy(p3.begin(), p3.end(), f.c3.begin() + static_cast<size_t>(k) * np);
    }
    return f;
}

double l2_flat(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double field_l2(const stepper::FieldState& st, double dv) {
    return std::sqrt((l2_flat(st.ex) + l2_flat(st.ey) + l2_flat(st.ez)) * dv);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Temporal profile used by the stability/current checks (matches
// scenarios::make_current_source).
double gmod(double t, double f, double ramp) {
    return std::sin(2.0 * kPi * f * t) * scenarios::ramp_value(t, ramp);
}

double gmod_dt(double t, double f, double ramp) {
    const double w = 2.0 * kPi * f;
    double r = scenarios::ramp_value(t, ramp);
    double rp = 0.0;
    if (t > 0.0 && t < ramp) {
        const double u = t / ramp;
        rp = (30.0 * u * u - 60.0 * u * u * u + 30.0 * u * u * u * u) / ramp;
    }
    return w * std::cos(w * t) * r + std::sin(w * t) * rp;
}

LateralGrid unit_grid(int lat, int nz_cells) {
    return LateralGrid(1.0, 1.0, lat, lat, 1.0, 0.0, nz_cells + 1);
}

}  // namespace

nlohmann::json CheckResult::to_json() const {
    nlohmann::json j;
    j["check_id"] = check_id;
    j["status"] = status_name(status);
    j["measured"] = measured;
    j["tolerances"] = tolerances;
    j["seed"] = seed;
    j["provenance"] = provenance;
    if (!note.empty()) j["note"] = note;
    return j;
}

// --------------------------------------------------------------- Lemma AJ

CheckResult check_duality(int n_pairs, std::uint64_t seed, spectral::TraceWeight weight) {
    CheckResult r;
    r.check_id = "lemma_aj_duality";
    r.seed = seed;
    r.provenance = "random trace pairs on an 8x8 mode grid, periods 2pi";
    LateralGrid g(2.0 * kPi, 2.0 * kPi, 8, 8, 1.0, 0.0, 4);
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int i = 0; i < n_pairs; ++i) {
        auto u = random_trace(g, Boundary::Gamma1, rng);
        auto v = random_trace(g, Boundary::Gamma1, rng);
        const double lhs = std::abs(spectral::duality_pairing(g, u, v));
        const double rhs =
            spectral::trace_norm(g, u, spectral::TraceNormKind::DivMinusHalf, weight) *
            spectral::trace_norm(g, v, spectral::TraceNormKind::CurlMinusHalf, weight);
        worst = std::max(worst, lhs / rhs);
    }
    r.measured["max_pairing_over_bound"] = worst;
    r.tolerances["max_pairing_over_bound"] = 1.0 + 1e-12;
    r.status = worst <= 1.0 + 1e-12 ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// -------------------------------------------------------------- Lemma TaT

CheckResult check_trace_inequality(int n_fields, std::uint64_t seed, int nx, int ny,
                                   int nz_nodes) {
    CheckResult r;
    r.check_id = "lemma_tat_trace";
    r.seed = seed;
    LateralGrid g(2.0 * kPi, 2.0 * kPi, nx, ny, 1.0, 0.0, nz_nodes);
    const double c =
        std::max(std::sqrt(1.0 + 1.0 / g.height()), std::sqrt(2.0));
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int i = 0; i < n_fields; ++i) {
        auto f = random_smooth_field(g, rng);
        const double denom = spectral::hcurl_norm(g, f);
        for (Boundary b : {Boundary::Gamma1, Boundary::Gamma2}) {
            auto t = spectral::boundary_trace(g, f, b);
            const double tn = spectral::trace_norm(g, t, spectral::TraceNormKind::CurlMinusHalf);
            worst = std::max(worst, tn / denom);
        }
    }
    r.provenance = "random band-limited fields, " + std::to_string(nx) + "x" +
                   std::to_string(ny) + "x" + std::to_string(nz_nodes) + ", h1-h2=1";
    r.measured["max_ratio"] = worst;
    r.measured["constant"] = c;
    r.tolerances["max_ratio"] = c * 1.05;
    r.status = worst <= c * 1.05 ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// ------------------------------------------------- branch + form identities

CheckResult check_branch_forms(std::uint64_t n_samples, std::uint64_t seed) {
    CheckResult r;
    r.check_id = "branch_form_identities";
    r.seed = seed;
    r.provenance = "log-uniform (xi, s, eps, mu) samples";
    SymbolSampler smp(seed);
    double max_beta_res = 0.0, max_form = 0.0, min_re_beta = 1e300, max_conj = 0.0;
    double max_identity = 0.0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const Xi xi = smp.xi();
        const ComplexFrequency s = smp.s(false);
        const double eps = smp.log_uniform(0.3, 3.0), mu = smp.log_uniform(0.3, 3.0);
        const int side = smp.unit(smp.rng) < 0.5 ? 1 : 2;
        const ExteriorMedium med(eps, mu, side);
        const cdouble b = symbols::beta(xi, s, med);
        min_re_beta = std::min(min_re_beta, b.real());
        const cdouble target = eps * mu * s.value() * s.value() + xi.norm2();
        max_beta_res = std::max(
            max_beta_res, std::abs(b * b - target) / std::max(std::abs(target), 1e-300));
        const auto m2 = symbols::capacity_matrix(xi, s, med).matrix;
        const auto m1 = symbols::capacity_matrix_impedance_form(xi, s, med);
        max_form = std::max(max_form,
                            (m1 - m2).cwiseAbs().maxCoeff() / m2.cwiseAbs().maxCoeff());
        // Conjugation symmetry (real time-domain kernels).
        const ComplexFrequency sc(s.s1(), -s.s2());
        max_conj = std::max(max_conj, std::abs(symbols::beta(xi, sc, med) - std::conj(b)) /
                                          std::abs(b));
        const auto [r2, r3] = symbols::beta_identities(xi, s, med);
        max_identity = std::max({max_identity, r2, r3});
    }
    r.measured["min_re_beta"] = min_re_beta;
    r.measured["max_beta_sq_residual"] = max_beta_res;
    r.measured["max_form_difference"] = max_form;
    r.measured["max_conjugation_residual"] = max_conj;
    r.measured["max_beta_identity_residual"] = max_identity;
    r.tolerances["max_beta_sq_residual"] = 1e-13;
    r.tolerances["max_form_difference"] = 1e-12;
    r.tolerances["min_re_beta"] = 0.0;
    r.tolerances["max_beta_identity_residual"] = 1e-12;
    Gate gate;
    gate.require(min_re_beta > 0.0);
    gate.require(max_beta_res <= 1e-13);
    gate.require(max_form <= 1e-12);
    gate.require(max_conj <= 1e-12);
    gate.require(max_identity <= 1e-12);
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// --------------------------------------------------------------- Lemma TP

CheckResult check_positivity(std::uint64_t n_samples, std::uint64_t seed) {
    CheckResult r;
    r.check_id = "lemma_tp_positivity";
    r.seed = seed;
    const ExteriorMedium med(1.3, 0.8, 1);
    auto audit = symbols::symbol_bound_audit(n_samples, seed, med);
    // Multi-mode traces through the public operator as well.
    LateralGrid g(2.0 * kPi, 2.0 * kPi, 8, 8, 1.0, 0.0, 4);
    std::mt19937_64 rng(seed + 1);
    SymbolSampler smp(seed + 2);
    double min_margin = 1e300;
    for (int i = 0; i < 100; ++i) {
        auto t = random_trace(g, Boundary::Gamma1, rng);
        const ComplexFrequency s = smp.s(false);
        double unorm = 0.0;
        for (int m = 0; m < g.plane_size(); ++m) unorm += std::norm(t.u1[m]) + std::norm(t.u2[m]);
        min_margin = std::min(min_margin, symbols::positivity_margin(g, t, s, med) / unorm);
    }
    r.provenance = "symbol audit plus 100 multi-mode traces";
    r.measured["min_margin_per_mode"] = audit.min_positivity_margin;
    r.measured["min_hermitian_eig"] = audit.min_hermitian_eig;
    r.measured["min_margin_traces"] = min_margin;
    r.tolerances["min_margin"] = -1e-12;
    Gate gate;
    gate.require(audit.min_positivity_margin >= -1e-12);
    gate.require(audit.min_hermitian_eig >= -1e-12);
    gate.require(min_margin >= -1e-12);
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// --------------------------------------------------------------- Lemma TC

CheckResult check_continuity(std::uint64_t n_samples, std::uint64_t seed) {
    CheckResult r;
    r.check_id = "lemma_tc_continuity";
    r.seed = seed;
    r.provenance = "per-mode pairing and operator ratios, s2 != 0";
    const ExteriorMedium med(1.0, 1.0, 1);
    SymbolSampler smp(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double c_tat = std::sqrt(2.0);  // h1 - h2 = 1
    double max_fb = 0.0, max_pair = 0.0, max_op = 0.0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const Xi xi = smp.xi();
        const ComplexFrequency s = smp.s(true);
        const cdouble b = symbols::beta(xi, s, med);
        const double fb = symbols::f_bound(s, med);
        max_fb = std::max(max_fb, std::sqrt(1.0 + xi.norm2()) / std::abs(b) / fb);
        const double cj = symbols::continuity_constant(s, med);
        const auto m = symbols::capacity_matrix(xi, s, med).matrix;
        const cdouble u1(gauss(smp.rng), gauss(smp.rng)), u2(gauss(smp.rng), gauss(smp.rng));
        const cdouble w1(gauss(smp.rng), gauss(smp.rng)), w2(gauss(smp.rng), gauss(smp.rng));
        const cdouble v1 = m(0, 0) * u1 + m(0, 1) * u2;
        const cdouble v2 = m(1, 0) * u1 + m(1, 1) * u2;
        const double q = 1.0 + xi.norm2();
        auto curl_n = [&](cdouble a1, cdouble a2) {
            return std::sqrt((std::norm(a1) + std::norm(a2) +
                              std::norm(xi.xi1 * a2 - xi.xi2 * a1)) /
                             std::sqrt(q));
        };
        auto div_n = [&](cdouble a1, cdouble a2) {
            return std::sqrt((std::norm(a1) + std::norm(a2) +
                              std::norm(xi.xi1 * a1 + xi.xi2 * a2)) /
                             std::sqrt(q));
        };
        const double pairing = std::abs(v1 * std::conj(w1) + v2 * std::conj(w2));
        max_pair = std::max(max_pair, pairing / (curl_n(u1, u2) * curl_n(w1, w2) * cj));
        max_op = std::max(max_op, div_n(v1, v2) / (curl_n(u1, u2) * c_tat * cj));
    }
    r.measured["max_fbound_ratio"] = max_fb;
    r.measured["max_pairing_over_cj"] = max_pair;
    r.measured["max_opnorm_over_c_cj"] = max_op;
    r.tolerances["ratios"] = 1.0 + 1e-9;
    Gate gate;
    gate.require(max_fb <= 1.0 + 1e-9);
    gate.require(max_pair <= 1.0 + 1e-9);
    gate.require(max_op <= 1.0 + 1e-9);
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// ----------------------------------------------------------- Eq. A1 / PI

CheckResult check_parseval() {
    CheckResult r;
    r.check_id = "eq_a1_pi_laplace";
    r.provenance = "analytic exponential pair and BDF1 integrator weights";
    // Eq. (A1): CQ of 1/s under BDF1 is the left-rectangle integrator.
    const double dt = 0.01;
    auto w = cq::scalar_weights([](cdouble s) { return 1.0 / s; }, dt, 64,
                                cq::Generator::BDF1);
    double max_weight_err = 0.0;
    for (const auto& wi : w) max_weight_err = std::max(max_weight_err, std::abs(wi - dt) / dt);
    // Eq. (PI): u = v = e^{-t}, s1 = 1; both sides equal 1/4.
    const double dts = 1e-3;
    const int n = 20001;
    cq::TimeSignal u;
    u.dt = dts;
    u.samples.resize(n);
    for (int i = 0; i < n; ++i) u.samples[i] = std::exp(-i * dts);
    const auto pr = cq::parseval_residual(u, u, 1.0);
    r.measured["integrator_weight_err"] = max_weight_err;
    r.measured["parseval_residual"] = pr.residual;
    r.measured["freq_side"] = pr.freq_side;
    r.measured["time_side"] = pr.time_side;
    r.measured["analytic_value"] = 0.25;
    r.measured["truncation"] = pr.truncation;
    r.tolerances["integrator_weight_err"] = 1e-7;
    r.tolerances["parseval_residual"] = 1e-6;
    Gate gate;
    gate.require(max_weight_err <= 1e-7);
    gate.require(pr.residual <= 1e-6);
    gate.require(std::abs(pr.freq_side - 0.25) <= 2e-6);
    gate.require(std::abs(pr.time_side - 0.25) <= 2e-6);
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// ------------------------------------------------------------- Theorem AT

namespace {

// Closed-form constant-coefficient solution for the xi = 0 grid-delta
// source, assembled from outgoing exponentials.
std::vector<cdouble> green_closed_form(int nz, double h2, double h1, cdouble s, double mu,
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

sdomain::ModeSource bump_source(int nz, double h2, double h1, double c1, double c2, double c3) {
    sdomain::ModeSource src;
    src.f1.resize(nz);
    src.f2.resize(nz);
    src.f3.resize(nz);
    const double dz = (h1 - h2) / (nz - 1);
    for (int k = 0; k < nz; ++k) {
        const double z = h2 + k * dz;
        const double b = scenarios::bump((z - 0.5 * (h1 + h2)) / (0.3 * (h1 - h2)));
        src.f1[k] = c1 * b;
        src.f2[k] = c2 * b;
        src.f3[k] = c3 * b;
    }
    return src;
}

}  // namespace

CheckResult check_sdomain_oracle() {
    CheckResult r;
    r.check_id = "theorem_at_sdomain";
    r.provenance = "grid-delta Green benchmark and AT ratio sweeps";
    sdomain::LayeredProfile profile({0.0, 1.0}, {1.0}, {1.0});
    const ComplexFrequency s_green(0.3, 0.2);
    const cdouble beta = symbols::beta({0.0, 0.0}, s_green, profile.exterior(1));

    std::vector<int> nzs = {64, 128, 256, 512};
    std::vector<double> errs;
    for (int nz : nzs) {
        const double dz = 1.0 / (nz - 1);
        sdomain::ModeSource src;
        src.f1.assign(nz, cdouble(0.0));
        src.f2.assign(nz, cdouble(0.0));
        src.f3.assign(nz, cdouble(0.0));
        const int k0 = nz / 2;
        src.f1[k0] = 1.0 / dz;
        auto sol = sdomain::solve_mode({0.0, 0.0}, s_green, profile, nz, &src);
        auto exact = green_closed_form(nz, 0.0, 1.0, s_green.value(), 1.0, beta, k0);
        double emax = 0.0, scale = 0.0;
        for (int k = 0; k < nz; ++k) {
            emax = std::max(emax, std::abs(sol.e1[k] - exact[k]));
            scale = std::max(scale, std::abs(exact[k]));
        }
        errs.push_back(emax / scale);
    }
    // Least-squares slope of log2(err) against refinement level.
    double slope = 0.0;
    {
        const int n = static_cast<int>(errs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < n; ++i) {
            const double x = i, y = std::log2(errs[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        slope = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    // Theorem AT ratios: fixed benchmark plus an s1 sweep.
    const ComplexFrequency s_bench(1.0, 1.0);
    auto ratio_at = [&](const ComplexFrequency& s, int nz, const Xi& xi) {
        auto src = bump_source(nz, 0.0, 1.0, 1.0, 0.6, 0.3);
        auto sol = sdomain::solve_mode(xi, s, profile, nz, &src);
        return sdomain::theorem_at_check(sol, src, s);
    };
    const double at_1 = ratio_at(s_bench, 129, {0.0, 0.0});
    const double at_2 = ratio_at(s_bench, 257, {0.0, 0.0});
    const double at_drift = std::abs(at_2 - at_1) / at_1;
    double sweep_max = 0.0;
    for (double s1 : {0.5, 1.0, 2.0})
        sweep_max = std::max(sweep_max, ratio_at(ComplexFrequency(s1, s1), 129, {1.0, 0.0}));

    r.measured["green_errors"] = errs;
    r.measured["green_order"] = slope;
    r.measured["at_ratio"] = at_2;
    r.measured["at_refinement_drift"] = at_drift;
    r.measured["at_sweep_max_ratio"] = sweep_max;
    r.tolerances["green_err_at_512"] = 1e-8;
    r.tolerances["green_order"] = "[1.9, 2.1]";
    r.tolerances["at_refinement_drift"] = 0.2;
    Gate gate;
    gate.require(errs.back() <= 1e-8);
    gate.require(slope >= 1.9 && slope <= 2.1);
    gate.require(std::isfinite(at_2) && at_drift <= 0.2);
    gate.require(std::isfinite(sweep_max) && sweep_max < 1e6);
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

CheckResult check_lemma_ase() {
    CheckResult r;
    r.check_id = "lemma_ase_pec_bound";
    r.provenance = "per-mode data j = eps E0 + s^{-1} curl H0 through the AT machinery";
    r.note = "validates the measured ratio via the capacity-boundary solver; "
             "the paper's PEC constant is not isolated";
    sdomain::LayeredProfile profile({0.0, 1.0}, {1.2}, {0.9});
    const Xi xi{1.0, 0.5};
    auto run = [&](const ComplexFrequency& s, int nz) {
        auto e0 = bump_source(nz, 0.0, 1.0, 0.8, -0.4, 0.2);
        auto h0 = bump_source(nz, 0.0, 1.0, 0.1, 0.9, -0.3);
        // curl of the H0 profile at this mode
        sdomain::ModeSolution hsol;
        hsol.xi = xi;
        hsol.s = s.value();
        hsol.nz = nz;
        hsol.dz = 1.0 / (nz - 1);
        hsol.e1 = h0.f1;
        hsol.e2 = h0.f2;
        hsol.e3 = h0.f3;
        auto ch = sdomain::mode_curl(hsol);
        sdomain::ModeSource j;
        j.f1.resize(nz);
        j.f2.resize(nz);
        j.f3.resize(nz);
        for (int k = 0; k < nz; ++k) {
            j.f1[k] = 1.2 * e0.f1[k] + ch.c1[k] / s.value();
            j.f2[k] = 1.2 * e0.f2[k] + ch.c2[k] / s.value();
            j.f3[k] = 1.2 * e0.f3[k] + ch.c3[k] / s.value();
        }
        auto sol = sdomain::solve_mode(xi, s, profile, nz, &j);
        auto cu = sdomain::mode_curl(sol);
        const double lhs = sdomain::mode_l2(cu.c1, cu.c2, cu.c3, sol.dz) +
                           std::abs(sol.s) *
                               sdomain::mode_l2(sol.e1, sol.e2, sol.e3, sol.dz);
        const double rhs = std::abs(sol.s) * sdomain::mode_l2(e0.f1, e0.f2, e0.f3, sol.dz) +
                           sdomain::mode_l2(ch.c1, ch.c2, ch.c3, sol.dz);
        return lhs * s.s1() / rhs;
    };
    const ComplexFrequency s(1.0, 0.7);
    const double r1 = run(s, 129), r2 = run(s, 257);
    const double drift = std::abs(r2 - r1) / r1;
    r.measured["ratio"] = r2;
    r.measured["refinement_drift"] = drift;
    r.tolerances["refinement_drift"] = 0.2;
    r.status = (std::isfinite(r2) && drift <= 0.2) ? CheckResult::Status::Pass
                                                   : CheckResult::Status::Fail;
    return r;
}

CheckResult check_lemma_es() {
    CheckResult r;
    r.check_id = "lemma_es_inhomogeneous";
    r.provenance = "boundary-data-driven reduced problem, two-layer profile";
    sdomain::LayeredProfile profile({0.0, 0.5, 1.0}, {1.0, 2.0}, {1.0, 1.0});
    const Xi xi{1.0, 0.0};
    const ComplexFrequency s(1.0, 0.8);
    sdomain::ModeBoundaryData bd;
    bd.top1 = cdouble(0.3, 0.1);
    bd.top2 = cdouble(-0.2, 0.05);
    bd.bottom1 = cdouble(0.1, -0.3);
    bd.bottom2 = cdouble(0.4, 0.0);
    auto run = [&](int nz, double scale) {
        auto j = bump_source(nz, 0.0, 1.0, 0.5 * scale, 0.2 * scale, -0.1 * scale);
        sdomain::ModeSource neg;
        neg.f1.resize(nz);
        neg.f2.resize(nz);
        neg.f3.resize(nz);
        for (int k = 0; k < nz; ++k) {
            neg.f1[k] = -j.f1[k];
            neg.f2[k] = -j.f2[k];
            neg.f3[k] = -j.f3[k];
        }
        sdomain::ModeBoundaryData bs = bd;
        bs.top1 *= scale;
        bs.top2 *= scale;
        bs.bottom1 *= scale;
        bs.bottom2 *= scale;
        auto sol = sdomain::solve_mode(xi, s, profile, nz, &neg, &bs);
        return sdomain::lemma_es_check(sol, j, bs, s);
    };
    const double r1 = run(129, 1.0), r2 = run(257, 1.0), rs = run(129, 2.0);
    const double drift = std::abs(r2 - r1) / r1;
    const double homogeneity = std::abs(rs - r1) / r1;
    r.measured["ratio"] = r2;
    r.measured["refinement_drift"] = drift;
    r.measured["homogeneity_residual"] = homogeneity;
    r.tolerances["refinement_drift"] = 0.2;
    r.tolerances["homogeneity_residual"] = 1e-12;
    Gate gate;
    gate.require(std::isfinite(r2));
    gate.require(drift <= 0.2);
    gate.require(homogeneity <= 1e-12);
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// ------------------------------------------------------- PEC energy (3.2)

namespace {

struct PecDrifts {
    double discrete = 0.0;
    double continuum = 0.0;
    double kappa_e2 = 0.0;
};

PecDrifts pec_drift_run(int lat, int nzc, int steps) {
    LateralGrid g = unit_grid(lat, nzc);
    SlabMedium med = SlabMedium::homogeneous(g, 1.0, 1.0);
    scenarios::PulseSpec pulse;
    pulse.center = {0.5, 0.5, 0.5};
    pulse.width = {0.24, 0.24, 0.2};
    pulse.polarization = {1.0, 0.0, 0.0};
    SourceTerm src = scenarios::make_pulse_initial(med, pulse, false);
    const double dt = 0.5 * med.cfl_limit();
    auto st = stepper::init(med, src, dt, false);
    const double dv = g.dx() * g.dy() * g.dz();
    // e1(0) from the exact initial data (H0 = 0 here).
    double e1_ref = 0.0;
    for (size_t m = 0; m < src.e0x.size(); ++m) e1_ref += src.e0x[m] * src.e0x[m];
    e1_ref *= dv;
    const auto entry0 = stepper::energies(st, med);
    const double curls0 = entry0.hcurl_e * entry0.hcurl_e - entry0.l2_e * entry0.l2_e;

    PecDrifts out;
    double disc_ref = 0.0;
    for (int n = 0; n < steps; ++n) {
        stepper::step_pec(st, med, src);
        if (n == 0) disc_ref = st.discrete_energy;
        out.discrete = std::max(out.discrete,
                                std::abs(st.discrete_energy - disc_ref) / disc_ref);
        if (n % 5 == 0 || n == steps - 1) {
            const auto e = stepper::energies(st, med);
            out.continuum = std::max(out.continuum, std::abs(e.e1 - e1_ref) / e1_ref);
            if (e.e2) out.kappa_e2 = std::max(out.kappa_e2, *e.e2 / curls0);
        }
    }
    return out;
}

}  // namespace

CheckResult check_pec_energy(bool with_refinement) {
    CheckResult r;
    r.check_id = "thm_32_pec_energy";
    r.provenance = "compact pulse, J = 0, CFL 0.5";
    const auto base = pec_drift_run(32, 64, 500);
    r.measured["discrete_drift"] = base.discrete;
    r.measured["continuum_drift"] = base.continuum;
    r.measured["kappa_e2"] = base.kappa_e2;
    r.tolerances["discrete_drift"] = 1e-12;
    r.tolerances["continuum_drift"] = 1e-3;
    Gate gate;
    gate.require(base.discrete <= 1e-12);
    gate.require(base.continuum <= 1e-3);
    if (with_refinement) {
        const auto fine = pec_drift_run(64, 128, 1000);
        const double ratio = base.continuum / fine.continuum;
        r.measured["refined_continuum_drift"] = fine.continuum;
        r.measured["drift_reduction"] = ratio;
        r.tolerances["drift_reduction"] = "[2.5, 6.0]";
        gate.require(fine.discrete <= 1e-12);
        gate.require(ratio >= 2.5 && ratio <= 6.0);
    }
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// --------------------------------------------- reduced stability (4.1)

namespace {

struct StabilityMeasure {
    double ratio = 0.0;
};

StabilityMeasure reduced_stability_run(int lat, int nzc, double t_final) {
    LateralGrid g = unit_grid(lat, nzc);
    SlabMedium med = SlabMedium::homogeneous(g, 1.0, 1.0);
    scenarios::PulseSpec pulse;
    pulse.center = {0.5, 0.5, 0.5};
    pulse.width = {0.28, 0.28, 0.22};
    pulse.polarization = {1.0, 0.4, 0.0};
    SourceTerm init_data = scenarios::make_pulse_initial(med, pulse, false);
    scenarios::CurrentSpec cs;
    cs.pulse = pulse;
    cs.pulse.polarization = {0.0, 1.0, 0.3};
    cs.frequency = 1.5;
    cs.ramp_time = 0.3;
    SourceTerm src = scenarios::make_current_source(med, cs);
    src.e0x = init_data.e0x;
    src.e0y = init_data.e0y;
    src.e0z = init_data.e0z;
    src.h0x = init_data.h0x;  // empty (zero) is fine

    const double dt = 0.45 * med.cfl_limit();
    const int steps = static_cast<int>(std::ceil(t_final / dt));
    auto kernels = stepper::make_boundary_kernels(med, dt, steps + 1, cq::Generator::BDF2);
    auto st = stepper::init(med, src, dt, false);
    const auto e0 = stepper::energies(st, med);
    const double dv = g.dx() * g.dy() * g.dz();

    // ||J||_{H^1(0,T;L2)}: separable J = j(x) g(t).
    double jnorm = 0.0;
    {
        std::vector<double> jx(med.node_count(), 0.0), jy(med.node_count(), 0.0),
            jz(med.cell_count(), 0.0);
        const double tstar = 0.45;  // past the ramp, sin != 0
        src.current(tstar, jx, jy, jz);
        const double gstar = gmod(tstar, cs.frequency, cs.ramp_time);
        const double jspace =
            std::sqrt((l2_flat(jx) + l2_flat(jy) + l2_flat(jz)) * dv) / std::abs(gstar);
        double acc = 0.0;
        const int nq = 4000;
        for (int i = 0; i <= nq; ++i) {
            const double t = t_final * i / nq;
            const double w = (i == 0 || i == nq) ? 0.5 : 1.0;
            const double gv = gmod(t, cs.frequency, cs.ramp_time);
            const double gd = gmod_dt(t, cs.frequency, cs.ramp_time);
            acc += w * (gv * gv + gd * gd);
        }
        jnorm = jspace * std::sqrt(acc * t_final / nq);
    }
    const double rhs = e0.hcurl_e + e0.hcurl_h + jnorm;

    double lhs = 0.0;
    for (int n = 0; n < steps; ++n) {
        stepper::step_tbc(st, med, src, kernels);
        const auto e = stepper::energies(st, med);
        auto dnorm = [&](const std::vector<double>& a, const std::vector<double>& b) {
            double s2 = 0.0;
            for (size_t m = 0; m < a.size(); ++m) {
                const double d = (a[m] - b[m]) / st.dt;
                s2 += d * d;
            }
            return s2;
        };
        const double dte =
            std::sqrt((dnorm(st.ex, st.ex_p) + dnorm(st.ey, st.ey_p) + dnorm(st.ez, st.ez_p)) *
                      dv);
        const double dth =
            std::sqrt((dnorm(st.hx, st.hx_p) + dnorm(st.hy, st.hy_p) + dnorm(st.hz, st.hz_p)) *
                      dv);
        const double curl_e =
            std::sqrt(std::max(0.0, e.hcurl_e * e.hcurl_e - e.l2_e * e.l2_e));
        const double curl_h =
            std::sqrt(std::max(0.0, e.hcurl_h * e.hcurl_h - e.l2_h * e.l2_h));
        lhs = std::max(lhs, dte + dth + curl_e + curl_h);
    }
    return {lhs / rhs};
}

}  // namespace

CheckResult check_reduced_stability(bool with_refinement) {
    CheckResult r;
    r.check_id = "thm_41_reduced_stability";
    r.provenance = "TBC run with (H1)-compliant mixed data";
    const double r1 = reduced_stability_run(16, 32, 1.5).ratio;
    r.measured["ratio"] = r1;
    Gate gate;
    gate.require(std::isfinite(r1) && r1 > 0.0);
    if (with_refinement) {
        const double r2 = reduced_stability_run(32, 64, 1.5).ratio;
        const double drift = std::abs(r2 - r1) / r1;
        r.measured["refined_ratio"] = r2;
        r.measured["refinement_drift"] = drift;
        r.tolerances["refinement_drift"] = 0.2;
        gate.require(drift <= 0.2);
    }
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// ------------------------------------------------------ splitting (4.1)

CheckResult check_splitting() {
    CheckResult r;
    r.check_id = "splitting_consistency";
    r.provenance = "PEC(E0,H0) + forced TBC(J) vs TBC(E0,H0,J), 200 steps";
    LateralGrid g = unit_grid(16, 32);
    SlabMedium med = SlabMedium::homogeneous(g, 1.0, 1.0);
    scenarios::PulseSpec pulse;
    pulse.center = {0.5, 0.5, 0.5};
    pulse.width = {0.26, 0.26, 0.2};
    pulse.polarization = {1.0, 0.0, 0.0};
    SourceTerm full = scenarios::make_pulse_initial(med, pulse, true);
    scenarios::CurrentSpec cs;
    cs.pulse = pulse;
    cs.pulse.polarization = {0.0, 1.0, 0.0};
    cs.frequency = 1.2;
    cs.ramp_time = 0.25;
    SourceTerm current_only = scenarios::make_current_source(med, cs);
    full.current = current_only.current;

    SourceTerm init_only = full;
    init_only.current = nullptr;

    const double dt = 0.45 * med.cfl_limit();
    const int steps = 200;
    auto kernels = stepper::make_boundary_kernels(med, dt, steps + 1, cq::Generator::BDF2);

    auto st_u = stepper::init(med, init_only, dt, false);   // PEC part
    auto st_e = stepper::init(med, current_only, dt, false);  // forced TBC part
    auto st_full = stepper::init(med, full, dt, false);

    std::vector<cdouble> f1_top, f2_top, f1_bot, f2_bot;
    stepper::BoundaryForcing forcing = [&](int, spectral::Boundary b, std::vector<cdouble>& a,
                                           std::vector<cdouble>& c) {
        if (b == spectral::Boundary::Gamma1) {
            a = f1_top;
            c = f2_top;
        } else {
            a = f1_bot;
            c = f2_bot;
        }
    };
    for (int n = 0; n < steps; ++n) {
        // The PEC run's interior H supplies the V x n forcing of the
        // reduced problem; capture before stepping.
        stepper::boundary_rhs_planes(st_u, med, spectral::Boundary::Gamma1, nullptr, nullptr,
                                     f1_top, f2_top);
        stepper::boundary_rhs_planes(st_u, med, spectral::Boundary::Gamma2, nullptr, nullptr,
                                     f1_bot, f2_bot);
        stepper::step_pec(st_u, med, init_only);
        stepper::step_tbc(st_e, med, current_only, kernels, &forcing);
        stepper::step_tbc(st_full, med, full, kernels);
    }
    auto rel = [&]() {
        double num = 0.0, den = 0.0;
        auto acc = [&](const std::vector<double>& a, const std::vector<double>& b,
                       const std::vector<double>& c) {
            for (size_t m = 0; m < a.size(); ++m) {
                const double d = a[m] + b[m] - c[m];
                num += d * d;
                den += c[m] * c[m];
            }
        };
        acc(st_u.ex, st_e.ex, st_full.ex);
        acc(st_u.ey, st_e.ey, st_full.ey);
        acc(st_u.ez, st_e.ez, st_full.ez);
        acc(st_u.hx, st_e.hx, st_full.hx);
        acc(st_u.hy, st_e.hy, st_full.hy);
        acc(st_u.hz, st_e.hz, st_full.hz);
        return std::sqrt(num / den);
    };
    const double mismatch = rel();
    r.measured["relative_mismatch"] = mismatch;
    r.tolerances["relative_mismatch"] = 1e-10;
    r.status = mismatch <= 1e-10 ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// ------------------------------------------------------ Lemma TTP / TP1

CheckResult check_passivity(int trials, std::uint64_t seed) {
    CheckResult r;
    r.check_id = "lemma_ttp_passivity";
    r.seed = seed;
    r.provenance = "CQ passivity certificate (BDF1, BDF2) and pulse boundary work";
    LateralGrid g(2.0 * kPi, 2.0 * kPi, 8, 8, 1.0, 0.0, 4);
    const ExteriorMedium med(1.0, 1.0, 1);
    double worst = 1e300;
    for (auto gen : {cq::Generator::BDF1, cq::Generator::BDF2}) {
        auto kernel = cq::capacity_kernel(g, med, cq::OperatorKind::C, gen, 0.05, 128, false);
        worst = std::min(worst, cq::passivity_certificate(kernel, trials, seed));
    }
    // Pulse scenario: cumulative boundary work vs max e1.
    LateralGrid gs = unit_grid(16, 32);
    SlabMedium meds = SlabMedium::homogeneous(gs, 1.0, 1.0);
    scenarios::PulseSpec pulse;
    pulse.center = {0.5, 0.5, 0.5};
    pulse.width = {0.26, 0.26, 0.2};
    pulse.polarization = {1.0, 0.0, 0.0};
    SourceTerm src = scenarios::make_pulse_initial(meds, pulse, true);
    stepper::RunSpec spec;
    spec.closure = stepper::BoundaryClosure::TBC;
    spec.dt = 0.45 * meds.cfl_limit();
    spec.steps = 200;
    spec.energy_stride = 10;
    spec.track_second_diff = false;
    auto res = stepper::run(meds, src, spec);
    const double work = res.state.tbc->top.work + res.state.tbc->bottom.work;
    const double floor = -1e-8 * res.max_e1;
    r.measured["min_certificate_margin"] = worst;
    r.measured["pulse_boundary_work"] = work;
    r.measured["max_e1"] = res.max_e1;
    r.tolerances["min_certificate_margin"] = -1e-10;
    r.tolerances["pulse_boundary_work_floor"] = floor;
    Gate gate;
    gate.require(worst >= -1e-10);
    gate.require(work >= floor);
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// --------------------------------------------------------- Theorem pe

namespace {

struct AprioriMeasure {
    double kappa_min = 0.0, kappa_max = 0.0;
    double kappa2_min = 0.0, kappa2_max = 0.0;
};

AprioriMeasure apriori_run(int lat, int nzc) {
    LateralGrid g = unit_grid(lat, nzc);
    SlabMedium med = SlabMedium::homogeneous(g, 1.0, 1.0);
    scenarios::PulseSpec pulse;
    pulse.center = {0.5, 0.5, 0.5};
    pulse.width = {0.4, 0.4, 0.3};
    pulse.polarization = {1.0, 0.0, 0.0};
    SourceTerm src = scenarios::make_h0_initial(med, pulse);
    std::vector<double> e1x, e1y, e1z;
    stepper::derive_e1(med, src, e1x, e1y, e1z);
    const double dv = g.dx() * g.dy() * g.dz();
    const double e1n = std::sqrt((l2_flat(e1x) + l2_flat(e1y) + l2_flat(e1z)) * dv);

    const double t0 = 0.0032;
    const double dt = t0 / 16.0;
    const int steps = 64;  // 4 T0
    auto kernels = stepper::make_boundary_kernels(med, dt, steps + 1, cq::Generator::BDF2);
    auto st = stepper::init(med, src, dt, false);
    std::vector<double> norms(steps + 1, 0.0);
    for (int n = 0; n < steps; ++n) {
        stepper::step_tbc(st, med, src, kernels);
        norms[n + 1] = field_l2(st, dv);
    }
    AprioriMeasure out;
    out.kappa_min = out.kappa2_min = 1e300;
    for (int mult : {1, 2, 4}) {
        const int nt = 16 * mult;
        const double t = nt * dt;
        double peak = 0.0, acc = 0.0;
        for (int n = 0; n <= nt; ++n) {
            peak = std::max(peak, norms[n]);
            acc += norms[n] * norms[n] * dt;
        }
        const double kappa = peak / (t * e1n);
        const double kappa2 = std::sqrt(acc) / (std::sqrt(t) * t * e1n);
        out.kappa_min = std::min(out.kappa_min, kappa);
        out.kappa_max = std::max(out.kappa_max, kappa);
        out.kappa2_min = std::min(out.kappa2_min, kappa2);
        out.kappa2_max = std::max(out.kappa2_max, kappa2);
    }
    return out;
}

}  // namespace

CheckResult check_apriori(bool with_refinement) {
    CheckResult r;
    r.check_id = "theorem_pe_apriori";
    r.provenance = "E1-dominated data (E0 = 0, H0 bump), T-sweep {T0, 2T0, 4T0}";
    const auto base = apriori_run(16, 32);
    const double spread = base.kappa_max / base.kappa_min;
    const double spread2 = base.kappa2_max / base.kappa2_min;
    r.measured["kappa_ie"] = base.kappa_max;
    r.measured["kappa_ie_spread"] = spread;
    r.measured["kappa_ie2"] = base.kappa2_max;
    r.measured["kappa_ie2_spread"] = spread2;
    r.tolerances["spread"] = 1.2;
    Gate gate;
    gate.require(spread <= 1.2);
    gate.require(spread2 <= 1.2);
    if (with_refinement) {
        const auto fine = apriori_run(32, 64);
        const double drift = std::abs(fine.kappa_max - base.kappa_max) / base.kappa_max;
        r.measured["kappa_refinement_drift"] = drift;
        r.tolerances["kappa_refinement_drift"] = 0.2;
        gate.require(drift <= 0.2);
    }
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// ------------------------------------------------ TBC reflection fidelity

namespace {

struct ReflectionMeasure {
    double mismatch = 0.0;
    double reflection = 0.0;
};

ReflectionMeasure reflection_level(int lat, int nzc) {
    LateralGrid g_slab = unit_grid(lat, nzc);
    SlabMedium med_slab = SlabMedium::homogeneous(g_slab, 1.0, 1.0);
    LateralGrid g_ref(1.0, 1.0, lat, lat, 3.0, -1.0, 4 * nzc + 1);
    SlabMedium med_ref = SlabMedium::homogeneous(g_ref, 1.0, 1.0);

    scenarios::PulseSpec pulse;
    pulse.center = {0.5, 0.5, 0.5};
    pulse.width = {0.22, 0.22, 0.18};
    pulse.polarization = {1.0, 0.0, 0.0};
    SourceTerm src_slab = scenarios::make_pulse_initial(med_slab, pulse, true);
    SourceTerm src_ref = scenarios::make_pulse_initial(med_ref, pulse, true);

    const double dt = 0.45 * med_slab.cfl_limit();
    const double t_final = 2.0, t_exit = 1.6;
    const int steps = static_cast<int>(std::ceil(t_final / dt));
    auto kernels = stepper::make_boundary_kernels(med_slab, dt, steps + 1, cq::Generator::BDF2);

    auto st = stepper::init(med_slab, src_slab, dt, false);
    auto sr = stepper::init(med_ref, src_ref, dt, false);
    const double incident = std::max({max_abs(st.ex), max_abs(st.ey), max_abs(st.ez)});

    const int nx = lat, ny = lat;
    const int off = nzc;  // slab [0,1] sits at node offset nzc in the reference
    auto compare = [&]() {
        double num = 0.0, den = 0.0;
        auto acc_nodal = [&](const std::vector<double>& a, const std::vector<double>& b) {
            const int nzn_s = nzc + 1, nzn_r = 4 * nzc + 1;
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int k = 0; k <= nzc; ++k) {
                        const double va = a[(static_cast<size_t>(i) * ny + j) * nzn_s + k];
                        const double vb =
                            b[(static_cast<size_t>(i) * ny + j) * nzn_r + k + off];
                        num += (va - vb) * (va - vb);
                        den += vb * vb;
                    }
        };
        auto acc_cell = [&](const std::vector<double>& a, const std::vector<double>& b) {
            const int nzc_s = nzc, nzc_r = 4 * nzc;
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int k = 0; k < nzc; ++k) {
                        const double va = a[(static_cast<size_t>(i) * ny + j) * nzc_s + k];
                        const double vb =
                            b[(static_cast<size_t>(i) * ny + j) * nzc_r + k + off];
                        num += (va - vb) * (va - vb);
                        den += vb * vb;
                    }
        };
        acc_nodal(st.ex, sr.ex);
        acc_nodal(st.ey, sr.ey);
        acc_cell(st.ez, sr.ez);
        return std::make_pair(num, den);
    };

    double max_diff = 0.0, max_ref = 0.0, residual = 0.0;
    for (int n = 0; n < steps; ++n) {
        stepper::step_tbc(st, med_slab, src_slab, kernels);
        stepper::step_pec(sr, med_ref, src_ref);
        if (n % 4 == 3 || n == steps - 1) {
            auto [num, den] = compare();
            max_diff = std::max(max_diff, std::sqrt(num));
            max_ref = std::max(max_ref, std::sqrt(den));
            if ((n + 1) * dt >= t_exit) {
                const double amp = std::max({max_abs(st.ex), max_abs(st.ey), max_abs(st.ez)});
                residual = std::max(residual, amp);
            }
        }
    }
    return {max_diff / max_ref, residual / incident};
}

}  // namespace

CheckResult check_tbc_reflection(int levels) {
    CheckResult r;
    r.check_id = "tbc_reflection_fidelity";
    r.provenance = "upward pulse vs 4x-tall PEC reference before round-trip time";
    std::vector<double> mism, refl;
    for (int l = 0; l < levels; ++l) {
        const auto m = reflection_level(16 << l, 32 << l);
        mism.push_back(m.mismatch);
        refl.push_back(m.reflection);
    }
    r.measured["mismatch_levels"] = mism;
    r.measured["reflection_levels"] = refl;
    Gate gate;
    // The spec'd resolution is level 1 (32 x 32 x 64).
    const int spec_level = std::min(1, levels - 1);
    gate.require(mism[spec_level] <= 1e-3);
    gate.require(refl[spec_level] <= 1e-3);
    r.tolerances["mismatch"] = 1e-3;
    r.tolerances["reflection"] = 1e-3;
    if (levels >= 2) {
        std::vector<double> orders;
        for (int l = 0; l + 1 < levels; ++l) orders.push_back(std::log2(mism[l] / mism[l + 1]));
        r.measured["observed_orders"] = orders;
        r.tolerances["final_order"] = "[1.8, 2.1]";
        const double order = orders.back();
        gate.require(order >= 1.8 && order <= 2.1);
    }
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// ------------------------------------------- stepper vs s-domain oracle

namespace {

double oracle_level(int nzc, int level) {
    const int lat = 8;
    LateralGrid g(1.0, 1.0, lat, lat, 1.0, 0.0, nzc + 1);
    SlabMedium med = SlabMedium::homogeneous(g, 1.0, 1.0);
    sdomain::LayeredProfile profile({0.0, 1.0}, {1.0}, {1.0});

    const std::array<cdouble, 3> amp = {cdouble(0.7, 0.0), cdouble(1.0, 0.0), cdouble(0.0)};
    const double zc = 0.5, zw = 0.25, freq = 1.0, ramp = 0.4;
    SourceTerm src = scenarios::make_mode_current(med, 1, 0, amp, zc, zw, freq, ramp);

    const double t_final = 1.2;
    const int steps = 64 << level;
    const double dt = t_final / steps;
    if (dt > 0.45 * med.cfl_limit())
        throw ConfigurationError("oracle_level: dt exceeds the stability budget");

    auto kernels = stepper::make_boundary_kernels(med, dt, steps + 1, cq::Generator::BDF2);
    auto st = stepper::init(med, src, dt, false);

    // Reference: per-mode s-domain solve composed with the CQ inverse
    // transform of the same generator.
    const int nz = nzc + 1;
    const Xi xi{2.0 * kPi / g.period_x(), 0.0};
    const double dz = g.dz();
    auto symbol = [&](cdouble s) {
        sdomain::ModeSource f;
        f.f1.resize(nz);
        f.f2.resize(nz);
        f.f3.resize(nz);
        for (int k = 0; k < nz; ++k) {
            const double b = scenarios::bump((k * dz - zc) / zw);
            f.f1[k] = -0.5 * amp[0] * b;
            f.f2[k] = -0.5 * amp[1] * b;
            f.f3[k] = 0.0;
        }
        const ComplexFrequency cs(s.real(), s.imag());
        auto sol = sdomain::solve_mode(xi, cs, profile, nz, &f);
        std::vector<cdouble> flat(2 * nz);
        for (int k = 0; k < nz; ++k) {
            flat[k] = sol.e1[k];
            flat[nz + k] = sol.e2[k];
        }
        return flat;
    };
    auto w = cq::vector_weights(symbol, dt, steps, cq::Generator::BDF2);
    std::vector<double> gsam(steps + 1);
    for (int n = 0; n <= steps; ++n) gsam[n] = gmod(n * dt, freq, ramp);

    double num = 0.0, den = 0.0;
    const int stride = std::max(1, steps / 32);
    std::vector<cdouble> ref(2 * nz);
    for (int n = 0; n < steps; ++n) {
        stepper::step_tbc(st, med, src, kernels);
        if ((n + 1) % stride != 0) continue;
        std::fill(ref.begin(), ref.end(), cdouble(0.0));
        for (int m2 = 0; m2 <= n + 1; ++m2) {
            const double gv = gsam[m2];
            if (gv == 0.0) continue;
            const auto& wm = w[n + 1 - m2];
            for (int q = 0; q < 2 * nz; ++q) ref[q] += wm[q] * gv;
        }
        auto prof = stepper::extract_mode(st, g, 1, 0);
        for (int k = 0; k < nz; ++k) {
            num += std::norm(prof.ex[k] - ref[k]) + std::norm(prof.ey[k] - ref[nz + k]);
            den += std::norm(ref[k]) + std::norm(ref[nz + k]);
        }
    }
    return std::sqrt(num / den);
}

}  // namespace

CheckResult check_oracle_agreement() {
    CheckResult r;
    r.check_id = "oracle_agreement_mode";
    r.provenance = "single-mode current, stepper vs s-domain solve + CQ inversion";
    std::vector<double> errs;
    for (int l = 0; l < 3; ++l) errs.push_back(oracle_level(16 << l, l));
    std::vector<double> orders;
    for (size_t i = 0; i + 1 < errs.size(); ++i)
        orders.push_back(std::log2(errs[i] / errs[i + 1]));
    r.measured["errors"] = errs;
    r.measured["orders"] = orders;
    r.tolerances["finest_error"] = 1e-3;
    r.tolerances["final_order"] = "[1.6, 2.4]";
    Gate gate;
    gate.require(errs.back() <= 1e-3);
    gate.require(orders.back() >= 1.6 && orders.back() <= 2.4);
    r.status = gate.ok ? CheckResult::Status::Pass : CheckResult::Status::Fail;
    return r;
}

// ------------------------------------------------------------- the suite

std::vector<std::string> suite_check_ids() {
    return {"branch_form_identities", "lemma_aj_duality",      "lemma_tat_trace",
            "lemma_tc_continuity",    "lemma_tp_positivity",   "eq_a1_pi_laplace",
            "theorem_at_sdomain",     "lemma_ase_pec_bound",   "lemma_es_inhomogeneous",
            "thm_32_pec_energy",      "thm_41_reduced_stability", "splitting_consistency",
            "lemma_ttp_passivity",    "theorem_pe_apriori",    "tbc_reflection_fidelity",
            "oracle_agreement_mode"};
}

CheckResult run_check(const std::string& id, const SuiteOptions& opt) {
    const std::uint64_t s = opt.seed;
    const bool q = opt.quick;
    if (id == "branch_form_identities") return check_branch_forms(q ? 10000 : 100000, s + 1);
    if (id == "lemma_aj_duality") return check_duality(1000, s + 2, opt.weight);
    if (id == "lemma_tat_trace")
        return q ? check_trace_inequality(100, s + 3, 16, 16, 33)
                 : check_trace_inequality(1000, s + 3, 32, 32, 64);
    if (id == "lemma_tc_continuity") return check_continuity(q ? 1000 : 10000, s + 4);
    if (id == "lemma_tp_positivity") return check_positivity(q ? 1000 : 10000, s + 5);
    if (id == "eq_a1_pi_laplace") return check_parseval();
    if (id == "theorem_at_sdomain") return check_sdomain_oracle();
    if (id == "lemma_ase_pec_bound") return check_lemma_ase();
    if (id == "lemma_es_inhomogeneous") return check_lemma_es();
    if (id == "thm_32_pec_energy") return check_pec_energy(!q);
    if (id == "thm_41_reduced_stability") return check_reduced_stability(!q);
    if (id == "splitting_consistency") return check_splitting();
    if (id == "lemma_ttp_passivity") return check_passivity(q ? 100 : 1000, s + 6);
    if (id == "theorem_pe_apriori") return check_apriori(!q);
    if (id == "tbc_reflection_fidelity") return check_tbc_reflection(q ? 2 : 3);
    if (id == "oracle_agreement_mode") return check_oracle_agreement();
    throw ConfigurationError("unknown check id: " + id);
}

std::vector<CheckResult> run_suite(const SuiteOptions& opt) {
    std::vector<CheckResult> out;
    for (const auto& id : suite_check_ids()) out.push_back(run_check(id, opt));
    // Results that are proof-level only: reported, not checked.
    CheckResult a2;
    a2.check_id = "lemma_a2_paley_wiener";
    a2.status = CheckResult::Status::Degenerate;
    a2.note = "out of scope by design: distribution-theoretic inversion argument; its "
              "consequences are exercised by the time-domain checks";
    out.push_back(a2);
    CheckResult dens;
    dens.check_id = "density_lemma";
    dens.status = CheckResult::Status::Degenerate;
    dens.note = "out of scope by design: density of smooth compactly supported fields";
    out.push_back(dens);
    return out;
}

std::string summary_table(const std::vector<CheckResult>& results) {
    std::ostringstream os;
    os << "check                          status      note\n";
    os << "-----------------------------  ----------  ----------------------------\n";
    for (const auto& r : results) {
        os << r.check_id;
        for (size_t i = r.check_id.size(); i < 31; ++i) os << ' ';
        const std::string st = status_name(r.status);
        os << st;
        for (size_t i = st.size(); i < 12; ++i) os << ' ';
        os << (r.note.empty() ? "" : r.note.substr(0, 60)) << "\n";
    }
    return os.str();
}

}  // namespace slabtbc::verify
