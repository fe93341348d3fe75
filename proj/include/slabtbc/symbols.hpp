#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>

#include "slabtbc/spectral.hpp"

namespace slabtbc::symbols {

using Matrix2c = Eigen::Matrix2cd;

// Homogeneous exterior half-space (side 1: z > h1, side 2: z < h2).
struct ExteriorMedium {
    double eps = 1.0;
    double mu = 1.0;
    int side = 1;

    ExteriorMedium() = default;
    ExteriorMedium(double eps_, double mu_, int side_) : eps(eps_), mu(mu_), side(side_) {
        if (!(eps > 0.0) || !(mu > 0.0) || !std::isfinite(eps) || !std::isfinite(mu))
            throw DataError("ExteriorMedium: eps, mu must be finite and positive");
        if (side != 1 && side != 2) throw DataError("ExteriorMedium: side must be 1 or 2");
    }
};

// Vertical spectral rate beta = (eps*mu*s^2 + |xi|^2)^{1/2}, principal
// branch; Re beta > 0 whenever Re s > 0.
cdouble beta(const Xi& xi, const ComplexFrequency& s, const ExteriorMedium& medium);

// Residuals of the identities m^2 - n^2 = eps*mu*(s1^2 - s2^2) + |xi|^2 and
// m*n = eps*mu*s1*s2 for beta = m + i n, each relative.
std::pair<double, double> beta_identities(const Xi& xi, const ComplexFrequency& s,
                                          const ExteriorMedium& medium);

// Per-mode 2x2 matrix symbol of the capacity operator B_j acting on
// (u1_hat, u2_hat).
struct CapacitySymbol {
    Xi xi;
    cdouble s;
    int side = 1;
    Matrix2c matrix;
};

// Reduced form: (1/(mu s beta)) [eps mu s^2 I + R(xi)] with the
// (-xi1 xi2) coupling structure.
CapacitySymbol capacity_matrix(const Xi& xi, const ComplexFrequency& s,
                               const ExteriorMedium& medium);

// Impedance form built from beta and the xi projector; algebraically equal
// to capacity_matrix and kept as the independent route for the
// form-equivalence checks.
Matrix2c capacity_matrix_impedance_form(const Xi& xi, const ComplexFrequency& s,
                                        const ExteriorMedium& medium);

// Symbol table over a lateral grid, immutable after construction.
class CapacitySymbolSet {
  public:
    CapacitySymbolSet(const LateralGrid& grid, const ComplexFrequency& s,
                      const ExteriorMedium& medium);

    const Matrix2c& at(int ix, int iy) const {
        return matrices_[static_cast<size_t>(ix) * modes_y_ + iy];
    }
    int modes_x() const { return modes_x_; }
    int modes_y() const { return modes_y_; }
    const ComplexFrequency& s() const { return s_; }
    const ExteriorMedium& medium() const { return medium_; }

  private:
    int modes_x_;
    int modes_y_;
    ComplexFrequency s_;
    ExteriorMedium medium_;
    std::vector<Matrix2c> matrices_;
};

spectral::TangentialTrace apply_capacity(const LateralGrid& grid, const CapacitySymbolSet& set,
                                         const spectral::TangentialTrace& trace);

// Re <B u, u> over the trace's modes.  Lemma TP: nonnegative up to
// round-off relative to ||u||^2.
double positivity_margin(const LateralGrid& grid, const spectral::TangentialTrace& trace,
                         const ComplexFrequency& s, const ExteriorMedium& medium);

// Explicit continuity constant C_j from the Lemma TC proof; degenerate
// (infinite) on the real s-axis.
double continuity_constant(const ComplexFrequency& s, const ExteriorMedium& medium);

// Pointwise bound on (1+|xi|^2)^{1/2}/|beta| used inside Lemma TC.
double f_bound(const ComplexFrequency& s, const ExteriorMedium& medium);

struct AuditWorstCase {
    double xi1, xi2, s1, s2;
    double value;
};

struct SymbolAudit {
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    double min_positivity_margin = 0.0;   // normalized by ||u||^2
    double max_continuity_ratio = 0.0;    // pairing ratio / C_j
    double max_fbound_ratio = 0.0;        // ((1+|xi|^2)^{1/2}/|beta|) / F-bound
    double max_beta_residual = 0.0;
    double max_form_difference = 0.0;     // CO1 vs CO2, entrywise relative
    double min_hermitian_eig = 0.0;       // smallest eig of (M+M^H)/2, normalized
    std::vector<AuditWorstCase> worst_continuity;
    std::vector<AuditWorstCase> worst_positivity;

    std::string to_json() const;
};

// Randomized audit of Lemma TC / Lemma TP over log-uniform (xi, s) samples,
// |xi| in [0, 1e3], s1 in [1e-2, 1e2], |s2| in [1e-2, 1e2].
SymbolAudit symbol_bound_audit(std::uint64_t n_samples, std::uint64_t rng_seed,
                               const ExteriorMedium& medium);

}  // namespace slabtbc::symbols
