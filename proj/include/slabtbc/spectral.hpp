#pragma once

#include <span>

#include "slabtbc/grid.hpp"

namespace slabtbc::spectral {

enum class Boundary { Gamma1, Gamma2 };
enum class TraceNormKind { CurlMinusHalf, DivMinusHalf };

// Weight applied outside the bracket of the trace norms.  Standard is the
// H^{-1/2} weight (1+|xi|^2)^{-1/2}; AsPrinted uses (1+|xi|^2) for audit runs.
enum class TraceWeight { Standard, AsPrinted };

// Tangential trace on Gamma_j, stored per mode in FFT index order
// (idx = ix*modes_y + iy).  The third component is zero by construction.
struct TangentialTrace {
    Boundary boundary = Boundary::Gamma1;
    std::vector<cdouble> u1;
    std::vector<cdouble> u2;

    static TangentialTrace zero(const LateralGrid& g, Boundary b) {
        TangentialTrace t;
        t.boundary = b;
        t.u1.assign(g.plane_size(), cdouble(0.0));
        t.u2.assign(g.plane_size(), cdouble(0.0));
        return t;
    }
};

// Vector field sampled on the full slab grid, plane-major layout:
// idx = (k*modes_x + ix)*modes_y + iy with k the z index.
struct VectorField {
    std::vector<cdouble> c1;
    std::vector<cdouble> c2;
    std::vector<cdouble> c3;

    static VectorField zero(const LateralGrid& g) {
        VectorField f;
        f.c1.assign(g.volume_size(), cdouble(0.0));
        f.c2.assign(g.volume_size(), cdouble(0.0));
        f.c3.assign(g.volume_size(), cdouble(0.0));
        return f;
    }
};

// Unitary-torus DFT pair.  forward_lateral returns coefficients scaled by
// sqrt(Lx*Ly)/(Nx*Ny), which makes the Parseval identity between the
// physical quadrature sum and the plain spectral sum exact.
std::vector<cdouble> forward_lateral(const LateralGrid& g, std::span<const cdouble> samples);
std::vector<cdouble> inverse_lateral(const LateralGrid& g, std::span<const cdouble> coeffs);

// L2(Omega) norm of a scalar field by physical-space quadrature
// (trapezoidal in z) and by the equivalent spectral sum.
double l2_norm_slab(const LateralGrid& g, std::span<const cdouble> field);
double l2_norm_slab_spectral(const LateralGrid& g, std::span<const cdouble> field);

double l2_norm_slab(const LateralGrid& g, const VectorField& u);

// H(curl) norm via the six-term spectral form; d/dz by second-order
// differences (one-sided at z = h1, h2).  Requires nz >= 3.
double hcurl_norm(const LateralGrid& g, const VectorField& u);

double trace_norm(const LateralGrid& g, const TangentialTrace& t, TraceNormKind kind,
                  TraceWeight weight = TraceWeight::Standard);

// <u, v> = sum_xi (u1 conj(v1) + u2 conj(v2)); equals the L2(Gamma_j)^3
// surface integral under the forward_lateral scaling.
cdouble duality_pairing(const LateralGrid& g, const TangentialTrace& u, const TangentialTrace& v);

// Tangential trace of a slab vector field on the given boundary plane.
TangentialTrace boundary_trace(const LateralGrid& g, const VectorField& u, Boundary b);

bool hermitian_symmetric(const LateralGrid& g, std::span<const cdouble> coeffs, double tol);

}  // namespace slabtbc::spectral
