#pragma once

#include <array>
#include <functional>
#include <optional>

#include "slabtbc/cq.hpp"
#include "slabtbc/sdomain.hpp"

namespace slabtbc::stepper {

enum class BoundaryClosure { PEC, TBC };

// Yee staggering on the laterally periodic slab.  z splits into nz-1 cells
// between the grid's nz nodes; Ex, Ey, Hz live on z-nodes, Ez, Hx, Hy on
// z-cell centers.  Arrays are k-fastest: idx = (i*Ny + j)*nk + k.
class SlabMedium {
  public:
    static SlabMedium homogeneous(const LateralGrid& grid, double eps, double mu);
    static SlabMedium from_profile(const LateralGrid& grid, const sdomain::LayeredProfile& p);
    static SlabMedium from_samplers(const LateralGrid& grid,
                                    const std::function<double(double, double, double)>& eps,
                                    const std::function<double(double, double, double)>& mu,
                                    const symbols::ExteriorMedium& exterior1,
                                    const symbols::ExteriorMedium& exterior2);

    const LateralGrid& grid() const { return grid_; }
    const symbols::ExteriorMedium& exterior(int side) const {
        return side == 1 ? ext1_ : ext2_;
    }
    int cells_z() const { return grid_.nz() - 1; }
    size_t node_count() const {
        return static_cast<size_t>(grid_.modes_x()) * grid_.modes_y() * grid_.nz();
    }
    size_t cell_count() const {
        return static_cast<size_t>(grid_.modes_x()) * grid_.modes_y() * cells_z();
    }

    const std::vector<double>& eps_x() const { return eps_x_; }
    const std::vector<double>& eps_y() const { return eps_y_; }
    const std::vector<double>& eps_z() const { return eps_z_; }
    const std::vector<double>& mu_x() const { return mu_x_; }
    const std::vector<double>& mu_y() const { return mu_y_; }
    const std::vector<double>& mu_z() const { return mu_z_; }

    double eps_min() const { return eps_min_; }
    double eps_max() const { return eps_max_; }
    double mu_min() const { return mu_min_; }
    double mu_max() const { return mu_max_; }

    // Largest stable leapfrog step at the fastest wave speed.
    double cfl_limit() const;

  private:
    SlabMedium(const LateralGrid& grid, const symbols::ExteriorMedium& e1,
               const symbols::ExteriorMedium& e2)
        : grid_(grid), ext1_(e1), ext2_(e2) {}
    void fill(const std::function<double(double, double, double)>& eps,
              const std::function<double(double, double, double)>& mu);
    void validate_boundary_layers() const;

    LateralGrid grid_;
    symbols::ExteriorMedium ext1_, ext2_;
    std::vector<double> eps_x_, eps_y_, eps_z_, mu_x_, mu_y_, mu_z_;
    double eps_min_ = 0.0, eps_max_ = 0.0, mu_min_ = 0.0, mu_max_ = 0.0;
};

// Current density and initial data.  Initial arrays may be empty (zero);
// the current callback writes into pre-zeroed staggered arrays at time t.
struct SourceTerm {
    std::vector<double> e0x, e0y, e0z;
    std::vector<double> h0x, h0y, h0z;
    std::function<void(double t, std::span<double> jx, std::span<double> jy,
                       std::span<double> jz)>
        current;
    bool has_support_box = false;
    std::array<double, 3> support_lo{0.0, 0.0, 0.0};
    std::array<double, 3> support_hi{0.0, 0.0, 0.0};
};

// E1 = eps^{-1} (curl H0 - J0); under (H1) the J0 term vanishes and the
// assembled value is asserted against that.
void derive_e1(const SlabMedium& medium, const SourceTerm& source, std::vector<double>& e1x,
               std::vector<double>& e1y, std::vector<double>& e1z);

struct TbcSideState {
    cq::TraceHistory history;       // E-trace modes, one entry per step
    std::vector<cdouble> y1, y2;    // T[E]^n at the current step
    double work = 0.0;              // cumulative Re<T[E_G], E_G> dt
};

struct TbcState {
    TbcSideState top, bottom;
};

struct FieldState {
    int n = 0;
    double dt = 0.0;
    // E^n and H^{n+1/2}
    std::vector<double> ex, ey, ez, hx, hy, hz;
    // E^{n-1}, H^{n-1/2} (discrete energy, first differences)
    std::vector<double> ex_p, ey_p, ez_p, hx_p, hy_p, hz_p;
    // E^{n-2}, H^{n-3/2} (second differences), kept only when tracked
    bool track_second_diff = false;
    std::vector<double> ex_p2, ey_p2, ez_p2, hx_p2, hy_p2, hz_p2;
    // Accumulated div J at z-interior nodes (Gauss-law bookkeeping)
    std::vector<double> accum_divj;
    // Staggered-product scheme energy after the last step
    double discrete_energy = 0.0;
    std::optional<TbcState> tbc;
};

FieldState init(const SlabMedium& medium, const SourceTerm& source, double dt,
                bool track_second_diff = true);

void step_pec(FieldState& state, const SlabMedium& medium, const SourceTerm& source);

struct TbcKernels {
    cq::CQKernel top;
    cq::CQKernel bottom;
};

// Capacity kernels (operator kind T) for the two boundary planes with the
// Yee half-cell stagger phases folded into the off-diagonal coupling.
TbcKernels make_boundary_kernels(const SlabMedium& medium, double dt, int horizon,
                                 cq::Generator gen);

// Inhomogeneous trace forcing (the V x n term of the reduced problem),
// added per step to the boundary-row right-hand side in mode space.
using BoundaryForcing = std::function<void(int n, spectral::Boundary b,
                                           std::vector<cdouble>& f1, std::vector<cdouble>& f2)>;

void step_tbc(FieldState& state, const SlabMedium& medium, const SourceTerm& source,
              const TbcKernels& kernels, const BoundaryForcing* forcing = nullptr);

// Mode-space boundary-row contributions of the interior magnetic field and
// current (the P terms of the boundary E-update).  Exposed so a PEC run's
// traces can drive the reduced problem's forcing.
void boundary_rhs_planes(const FieldState& state, const SlabMedium& medium,
                         spectral::Boundary b, const double* jx_plane, const double* jy_plane,
                         std::vector<cdouble>& p1, std::vector<cdouble>& p2);

struct EnergyEntry {
    int step = 0;
    double t = 0.0;
    double e1 = 0.0;
    std::optional<double> e2, e3;
    double l2_e = 0.0, l2_h = 0.0;
    double hcurl_e = 0.0, hcurl_h = 0.0;
    double boundary_work = 0.0;
    double discrete_energy = 0.0;
};

EnergyEntry energies(const FieldState& state, const SlabMedium& medium);

// max over z-interior nodes of |div(eps E) + int_0^t div J| relative to the
// size of the fluxes entering the divergence.
double divergence_residual(const FieldState& state, const SlabMedium& medium);

struct RunSpec {
    BoundaryClosure closure = BoundaryClosure::PEC;
    double dt = 0.0;
    int steps = 0;
    cq::Generator generator = cq::Generator::BDF2;
    int energy_stride = 1;
    bool track_second_diff = true;
};

struct RunResult {
    std::vector<EnergyEntry> report;
    FieldState state;
    double max_e1 = 0.0;
};

RunResult run(const SlabMedium& medium, const SourceTerm& source, const RunSpec& spec);

// Complex amplitude of the lateral mode (kx, ky) per z level for each
// staggered component, with the half-cell offsets evaluated exactly.
struct ModeProfiles {
    std::vector<cdouble> ex, ey, ez, hx, hy, hz;
};
ModeProfiles extract_mode(const FieldState& state, const LateralGrid& grid, int kx, int ky);

}  // namespace slabtbc::stepper
