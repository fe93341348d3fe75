#pragma once

#include <optional>

#include "slabtbc/symbols.hpp"

namespace slabtbc::sdomain {

// Piecewise-constant layered medium on [h2, h1].
class LayeredProfile {
  public:
    LayeredProfile(std::vector<double> breakpoints, std::vector<double> eps,
                   std::vector<double> mu);

    int layers() const { return static_cast<int>(eps_.size()); }
    double h2() const { return breakpoints_.front(); }
    double h1() const { return breakpoints_.back(); }
    double eps_at(double z) const { return eps_[layer_of(z)]; }
    double mu_at(double z) const { return mu_[layer_of(z)]; }
    int layer_of(double z) const;
    // Integral average of mu over [za, zb]; realizes the harmonic-average
    // flux coefficient 1/mu_bar at layer breakpoints.
    double mu_average(double za, double zb) const;
    symbols::ExteriorMedium exterior(int side) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& eps() const { return eps_; }
    const std::vector<double>& mu() const { return mu_; }

  private:
    std::vector<double> breakpoints_;
    std::vector<double> eps_;
    std::vector<double> mu_;
};

// Per-mode source samples (right-hand side f of the curl-curl equation) on
// the nz-node z-grid.
struct ModeSource {
    std::vector<cdouble> f1, f2, f3;
};

// Inhomogeneous boundary data g_j = V x n_j for the (ATBC) rows.
struct ModeBoundaryData {
    cdouble top1{0.0}, top2{0.0};     // Gamma_1
    cdouble bottom1{0.0}, bottom2{0.0};  // Gamma_2
};

struct ModeSolution {
    Xi xi;
    cdouble s;
    int nz = 0;
    double dz = 0.0;
    std::vector<cdouble> e1, e2, e3;
    double residual = 0.0;  // ||A x - b|| / ||b||
};

// Second-order finite-difference solve of the per-mode curl-curl problem
//   curl((mu s)^-1 curl E) + eps s E = f  on (h2, h1),
//   (mu_j s)^-1 (curl E) x n_j + B_j[E_Gamma] = g_j  on Gamma_j.
// All three components are kept; blocks stay banded and O(nz) solvable.
ModeSolution solve_mode(const Xi& xi, const ComplexFrequency& s, const LayeredProfile& profile,
                        int nz, const ModeSource* source = nullptr,
                        const ModeBoundaryData* boundary_data = nullptr);

// Outgoing extension of a boundary trace value into the exterior:
// value * e^{-beta |z - h|} with the side's beta.
cdouble outgoing_extension(cdouble trace_value, const Xi& xi, const ComplexFrequency& s,
                           const symbols::ExteriorMedium& medium, double boundary_z, double z);

// Discrete curl of a mode solution (same stencils as the solver rows).
struct ModeCurl {
    std::vector<cdouble> c1, c2, c3;
};
ModeCurl mode_curl(const ModeSolution& sol);

// Trapezoidal L2(h2,h1) norm of a component stack.
double mode_l2(std::span<const cdouble> f, double dz);
double mode_l2(const std::vector<cdouble>& f1, const std::vector<cdouble>& f2,
               const std::vector<cdouble>& f3, double dz);

// (||curl u|| + ||s u||) * s1 / ||s f||; Theorem AT asserts a uniform bound.
double theorem_at_check(const ModeSolution& solution, const ModeSource& source,
                        const ComplexFrequency& s);

// LHS / (s1^{-1} RHS) for the inhomogeneous reduced problem, RHS built from
// ||s J|| plus the div-trace norms of s V x n and |s|^2 V x n.
double lemma_es_check(const ModeSolution& solution, const ModeSource& source_term,
                      const ModeBoundaryData& boundary, const ComplexFrequency& s);

}  // namespace slabtbc::sdomain
