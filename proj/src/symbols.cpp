#include "slabtbc/symbols.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

namespace slabtbc::symbols {

cdouble beta(const Xi& xi, const ComplexFrequency& s, const ExteriorMedium& medium) {
    const cdouble sv = s.value();
    const cdouble b2 = medium.eps * medium.mu * sv * sv + xi.norm2();
    const cdouble b = std::sqrt(b2);
    // For Re s > 0 the argument never touches (-inf, 0], so the principal
    // branch gives Re b > 0.  A vanishing |b| can only mean s1 ~ 0 misuse.
    if (std::abs(b) < 1e-300)
        throw InvalidFrequencyError("beta: |beta| underflow, s too close to the imaginary axis");
    return b;
}

std::pair<double, double> beta_identities(const Xi& xi, const ComplexFrequency& s,
                                          const ExteriorMedium& medium) {
    const cdouble b = beta(xi, s, medium);
    const double m = b.real(), n = b.imag();
    const double em = medium.eps * medium.mu;
    const double lhs1 = m * m - n * n;
    const double rhs1 = em * (s.s1() * s.s1() - s.s2() * s.s2()) + xi.norm2();
    const double lhs2 = m * n;
    const double rhs2 = em * s.s1() * s.s2();
    const double scale1 = std::max({std::abs(lhs1), std::abs(rhs1), 1e-300});
    const double scale2 = std::max({std::abs(lhs2), std::abs(rhs2), 1e-300});
    return {std::abs(lhs1 - rhs1) / scale1, std::abs(lhs2 - rhs2) / scale2};
}

CapacitySymbol capacity_matrix(const Xi& xi, const ComplexFrequency& s,
                               const ExteriorMedium& medium) {
    const cdouble sv = s.value();
    const cdouble b = beta(xi, s, medium);
    const cdouble pref = 1.0 / (medium.mu * sv * b);
    const cdouble ems2 = medium.eps * medium.mu * sv * sv;
    CapacitySymbol sym;
    sym.xi = xi;
    sym.s = sv;
    sym.side = medium.side;
    sym.matrix(0, 0) = pref * (ems2 + xi.xi2 * xi.xi2);
    sym.matrix(0, 1) = pref * (-xi.xi1 * xi.xi2);
    sym.matrix(1, 0) = pref * (-xi.xi1 * xi.xi2);
    sym.matrix(1, 1) = pref * (ems2 + xi.xi1 * xi.xi1);
    return sym;
}

Matrix2c capacity_matrix_impedance_form(const Xi& xi, const ComplexFrequency& s,
                                        const ExteriorMedium& medium) {
    const cdouble sv = s.value();
    const cdouble b = beta(xi, s, medium);
    const cdouble pref = 1.0 / (medium.mu * sv);
    Matrix2c m;
    m(0, 0) = pref * (b - xi.xi1 * xi.xi1 / b);
    m(0, 1) = pref * (-xi.xi1 * xi.xi2 / b);
    m(1, 0) = pref * (-xi.xi2 * xi.xi1 / b);
    m(1, 1) = pref * (b - xi.xi2 * xi.xi2 / b);
    return m;
}

CapacitySymbolSet::CapacitySymbolSet(const LateralGrid& grid, const ComplexFrequency& s,
                                     const ExteriorMedium& medium)
    : modes_x_(grid.modes_x()), modes_y_(grid.modes_y()), s_(s), medium_(medium) {
    matrices_.reserve(static_cast<size_t>(modes_x_) * modes_y_);
    for (int ix = 0; ix < modes_x_; ++ix)
        for (int iy = 0; iy < modes_y_; ++iy)
            matrices_.push_back(capacity_matrix(grid.xi(ix, iy), s, medium).matrix);
}

spectral::TangentialTrace apply_capacity(const LateralGrid& grid, const CapacitySymbolSet& set,
                                         const spectral::TangentialTrace& trace) {
    if (set.modes_x() != grid.modes_x() || set.modes_y() != grid.modes_y())
        throw GridMismatchError("apply_capacity: symbol set does not cover the trace's modes");
    if (trace.u1.size() != static_cast<size_t>(grid.plane_size()))
        throw GridMismatchError("apply_capacity: trace size mismatch");
    spectral::TangentialTrace out = spectral::TangentialTrace::zero(grid, trace.boundary);
    for (int ix = 0; ix < grid.modes_x(); ++ix) {
        for (int iy = 0; iy < grid.modes_y(); ++iy) {
            const size_t m = static_cast<size_t>(ix) * grid.modes_y() + iy;
            const Matrix2c& M = set.at(ix, iy);
            out.u1[m] = M(0, 0) * trace.u1[m] + M(0, 1) * trace.u2[m];
            out.u2[m] = M(1, 0) * trace.u1[m] + M(1, 1) * trace.u2[m];
        }
    }
    return out;
}

double positivity_margin(const LateralGrid& grid, const spectral::TangentialTrace& trace,
                         const ComplexFrequency& s, const ExteriorMedium& medium) {
    if (trace.u1.size() != static_cast<size_t>(grid.plane_size()))
        throw GridMismatchError("positivity_margin: trace size mismatch");
    double margin = 0.0;
    for (int ix = 0; ix < grid.modes_x(); ++ix) {
        for (int iy = 0; iy < grid.modes_y(); ++iy) {
            const size_t m = static_cast<size_t>(ix) * grid.modes_y() + iy;
            const Matrix2c M = capacity_matrix(grid.xi(ix, iy), s, medium).matrix;
            const cdouble u1 = trace.u1[m], u2 = trace.u2[m];
            const cdouble v1 = M(0, 0) * u1 + M(0, 1) * u2;
            const cdouble v2 = M(1, 0) * u1 + M(1, 1) * u2;
            margin += (v1 * std::conj(u1) + v2 * std::conj(u2)).real();
        }
    }
    return margin;
}

double continuity_constant(const ComplexFrequency& s, const ExteriorMedium& medium) {
    const double em = medium.eps * medium.mu;
    const double a = em * (s.s1() * s.s1() - s.s2() * s.s2());
    const double b = 2.0 * em * s.s1() * s.s2();
    if (b == 0.0)
        throw DegenerateConstantError(
            "continuity_constant: the printed bound degenerates on the real s-axis (b_j = 0)");
    const double f = std::pow(((1.0 - a) * (1.0 - a) + b * b) / (b * b), 0.25);
    const double amp = std::max(std::sqrt(a * a + b * b), 1.0);
    return f * amp / (medium.mu * s.s1());
}

double f_bound(const ComplexFrequency& s, const ExteriorMedium& medium) {
    const double em = medium.eps * medium.mu;
    const double a = em * (s.s1() * s.s1() - s.s2() * s.s2());
    const double b = 2.0 * em * s.s1() * s.s2();
    if (b == 0.0)
        throw DegenerateConstantError("f_bound: degenerate on the real s-axis (b_j = 0)");
    return std::pow(((1.0 - a) * (1.0 - a) + b * b) / (b * b), 0.25);
}

namespace {

// Mode-local curl-trace norm squared under the standard weight.
double curl_norm2(const Xi& xi, const cdouble& u1, const cdouble& u2) {
    const double q = 1.0 + xi.norm2();
    return (std::norm(u1) + std::norm(u2) + std::norm(xi.xi1 * u2 - xi.xi2 * u1)) /
           std::sqrt(q);
}

void push_worst(std::vector<AuditWorstCase>& list, const AuditWorstCase& c, bool keep_max,
                size_t cap = 3) {
    list.push_back(c);
    std::sort(list.begin(), list.end(), [&](const auto& l, const auto& r) {
        return keep_max ? l.value > r.value : l.value < r.value;
    });
    if (list.size() > cap) list.resize(cap);
}

}  // namespace

SymbolAudit symbol_bound_audit(std::uint64_t n_samples, std::uint64_t rng_seed,
                               const ExteriorMedium& medium) {
    if (n_samples < 1) throw DataError("symbol_bound_audit: n_samples must be >= 1");
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SymbolAudit audit;
    audit.samples = n_samples;
    audit.seed = rng_seed;
    audit.min_positivity_margin = std::numeric_limits<double>::infinity();
    audit.min_hermitian_eig = std::numeric_limits<double>::infinity();

    auto log_uniform = [&](double lo, double hi) {
        return lo * std::exp(unit(rng) * std::log(hi / lo));
    };

    for (std::uint64_t i = 0; i < n_samples; ++i) {
        // ~1% of the samples sit exactly at xi = 0.
        double r = (unit(rng) < 0.01) ? 0.0 : log_uniform(1e-3, 1e3);
        const double phi = 2.0 * kPi * unit(rng);
        const Xi xi{r * std::cos(phi), r * std::sin(phi)};
        const double s1 = log_uniform(1e-2, 1e2);
        const double s2 = (unit(rng) < 0.5 ? -1.0 : 1.0) * log_uniform(1e-2, 1e2);
        const ComplexFrequency s(s1, s2);

        // Branch correctness.
        const cdouble b = beta(xi, s, medium);
        const cdouble sv = s.value();
        const cdouble target = medium.eps * medium.mu * sv * sv + xi.norm2();
        const double res =
            std::abs(b * b - target) / std::max(std::abs(target), 1e-300);
        audit.max_beta_residual = std::max(audit.max_beta_residual, res);

        // Form equivalence CO1 vs CO2.
        const Matrix2c m2 = capacity_matrix(xi, s, medium).matrix;
        const Matrix2c m1 = capacity_matrix_impedance_form(xi, s, medium);
        const double mscale = std::max(m2.cwiseAbs().maxCoeff(), 1e-300);
        audit.max_form_difference =
            std::max(audit.max_form_difference, (m1 - m2).cwiseAbs().maxCoeff() / mscale);

        // Pointwise F-bound (needs s2 != 0, which the sampler guarantees).
        const double ratio = std::sqrt(1.0 + xi.norm2()) / std::abs(b);
        const double fb = f_bound(s, medium);
        audit.max_fbound_ratio = std::max(audit.max_fbound_ratio, ratio / fb);

        // Random trace pair at this mode: positivity and pairing bound.
        const cdouble u1(gauss(rng), gauss(rng)), u2(gauss(rng), gauss(rng));
        const cdouble w1(gauss(rng), gauss(rng)), w2(gauss(rng), gauss(rng));
        const cdouble v1 = m2(0, 0) * u1 + m2(0, 1) * u2;
        const cdouble v2 = m2(1, 0) * u1 + m2(1, 1) * u2;
        const double unorm2 = std::norm(u1) + std::norm(u2);
        const double margin = (v1 * std::conj(u1) + v2 * std::conj(u2)).real() / unorm2;
        if (margin < audit.min_positivity_margin) {
            audit.min_positivity_margin = margin;
            push_worst(audit.worst_positivity, {xi.xi1, xi.xi2, s1, s2, margin}, false);
        }

        Eigen::SelfAdjointEigenSolver<Matrix2c> eig((m2 + m2.adjoint()) / 2.0);
        const double h = eig.eigenvalues().minCoeff() / mscale;
        audit.min_hermitian_eig = std::min(audit.min_hermitian_eig, h);

        const double pairing =
            std::abs(v1 * std::conj(w1) + v2 * std::conj(w2));
        const double cn = std::sqrt(curl_norm2(xi, u1, u2) * curl_norm2(xi, w1, w2));
        const double cj = continuity_constant(s, medium);
        const double cratio = pairing / (cn * cj);
        if (cratio > audit.max_continuity_ratio) {
            audit.max_continuity_ratio = cratio;
            push_worst(audit.worst_continuity, {xi.xi1, xi.xi2, s1, s2, cratio}, true);
        }
    }
    return audit;
}

std::string SymbolAudit::to_json() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["seed"] = seed;
    j["sample_ranges"] = {{"abs_xi", {0.0, 1e3}}, {"s1", {1e-2, 1e2}}, {"abs_s2", {1e-2, 1e2}}};
    j["min_positivity_margin"] = min_positivity_margin;
    j["max_continuity_ratio"] = max_continuity_ratio;
    j["max_fbound_ratio"] = max_fbound_ratio;
    j["max_beta_residual"] = max_beta_residual;
    j["max_form_difference"] = max_form_difference;
    j["min_hermitian_eig"] = min_hermitian_eig;
    auto dump = [](const std::vector<AuditWorstCase>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& c : v)
            a.push_back({{"xi1", c.xi1}, {"xi2", c.xi2}, {"s1", c.s1}, {"s2", c.s2},
                         {"value", c.value}});
        return a;
    };
    j["worst_case_inputs"] = {{"continuity", dump(worst_continuity)},
                              {"positivity", dump(worst_positivity)}};
    return j.dump(2);
}

}  // namespace slabtbc::symbols
