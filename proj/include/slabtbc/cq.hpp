#pragma once

#include <functional>

#include "slabtbc/symbols.hpp"

namespace slabtbc::cq {

using symbols::Matrix2c;

enum class Generator { BDF1, BDF2 };
enum class OperatorKind { T, C };  // T realizes B_j, C realizes s*B_j

// Generating polynomial delta(zeta) of the multistep method.
cdouble generator_delta(Generator gen, cdouble zeta);

// eps^{1/(2M)}: balances aliasing against round-off in the contour sums.
double default_contour_radius(int contour_points);

int contour_points_for(int horizon);  // M = 2N (>= 8)

// Scalar CQ weights w_0..w_N of a Laplace symbol analytic for Re s > 0:
//   w_n = (lambda^{-n}/M) sum_l K(delta(lambda e^{2 pi i l/M})/dt) e^{-2 pi i n l/M}.
std::vector<cdouble> scalar_weights(const std::function<cdouble(cdouble)>& symbol, double dt,
                                    int horizon, Generator gen, double lambda = 0.0,
                                    int contour_points = 0);

// Causal discrete convolution sum_{m<=n} w_{n-m} u_m.
cdouble scalar_convolve(std::span<const cdouble> weights, std::span<const cdouble> history,
                        int n);

// Closed-form weights of the discrete integrator dt/delta(zeta), i.e. the
// CQ realization of 1/s for the same generator.
std::vector<double> integrator_weights(Generator gen, double dt, int horizon);

// Weights of a vector-valued symbol (e.g. an s-domain solve sampled on a
// z-grid); returns weights[n] as a flat vector of the symbol's length.
std::vector<std::vector<cdouble>> vector_weights(
    const std::function<std::vector<cdouble>(cdouble)>& symbol, double dt, int horizon,
    Generator gen, double lambda = 0.0, int contour_points = 0);

// Per-mode 2x2 matrix weights over a lateral mode set.  The symbol is
// evaluated per stored mode; storage may cover the full spectrum or the
// r2c half spectrum (iy = 0..modes_y/2).
using ModeSymbol = std::function<Matrix2c(int ix, int iy, cdouble s)>;

class CQKernel {
  public:
    CQKernel(const LateralGrid& grid, OperatorKind kind, Generator gen, double dt, int horizon,
             const ModeSymbol& symbol, bool half_spectrum, double lambda = 0.0,
             int contour_points = 0);

    Generator generator() const { return gen_; }
    OperatorKind kind() const { return kind_; }
    double dt() const { return dt_; }
    int horizon() const { return horizon_; }
    double lambda() const { return lambda_; }
    int modes_x() const { return modes_x_; }
    int modes_y() const { return modes_y_; }
    bool half_spectrum() const { return half_; }
    int stored_y() const { return half_ ? modes_y_ / 2 + 1 : modes_y_; }
    int stored_modes() const { return modes_x_ * stored_y(); }

    // Step-major storage keeps the per-step mode sweep contiguous.
    const Matrix2c& weight(int mode, int n) const {
        return weights_[static_cast<size_t>(n) * stored_modes() + mode];
    }
    const Matrix2c* step_weights(int n) const {
        return weights_.data() + static_cast<size_t>(n) * stored_modes();
    }
    int mode_index(int ix, int iy) const { return ix * stored_y() + iy; }

    void save(const std::string& path) const;
    static CQKernel load(const std::string& path);

  private:
    CQKernel() = default;
    Generator gen_ = Generator::BDF2;
    OperatorKind kind_ = OperatorKind::T;
    double dt_ = 0.0;
    int horizon_ = 0;
    double lambda_ = 0.0;
    int modes_x_ = 0;
    int modes_y_ = 0;
    bool half_ = false;
    std::vector<Matrix2c> weights_;
};

// Capacity kernel for one boundary: symbol B_j (kind T) or s B_j (kind C)
// over the grid's modes.
CQKernel capacity_kernel(const LateralGrid& grid, const symbols::ExteriorMedium& medium,
                         OperatorKind kind, Generator gen, double dt, int horizon,
                         bool half_spectrum = false, double lambda = 0.0);

// Trace history u^0..u^n for one boundary, per mode (matching a kernel's
// mode storage).
struct TraceHistory {
    int stored_modes = 0;
    std::vector<cdouble> u1;  // [step * stored_modes + mode]
    std::vector<cdouble> u2;
    int steps() const { return stored_modes == 0 ? 0 : static_cast<int>(u1.size()) / stored_modes; }
    void append_zero() {
        u1.resize(u1.size() + stored_modes, cdouble(0.0));
        u2.resize(u2.size() + stored_modes, cdouble(0.0));
    }
};

// y^n = sum_{m<=n} W_{n-m} u^m for every stored mode.
void convolve(const CQKernel& kernel, const TraceHistory& history, int n,
              std::vector<cdouble>& out1, std::vector<cdouble>& out2);

// Uniformly sampled real signal on [0, (n-1) dt].
struct TimeSignal {
    double dt = 0.0;
    std::vector<double> samples;
};

struct ParsevalResult {
    double residual = 0.0;     // |freq side - time side|
    double freq_side = 0.0;
    double time_side = 0.0;
    double truncation = 0.0;   // time-horizon tail estimate
};

// Residual of the Laplace Parseval identity
//   (1/2pi) int u(s) conj(v(s)) ds2 = int_0^inf e^{-2 s1 t} u v dt
// for real signals; frequency side over the sampling band via padded DFT,
// time side by composite Simpson.
ParsevalResult parseval_residual(const TimeSignal& u, const TimeSignal& v, double s1);

// Minimum over random trace histories of the normalized discrete boundary
// work Re sum_n (discrete time integral of C[u])_n conj(u_n) dt / ||u||^2.
// Requires kind C; nonnegative up to round-off for A-stable generators.
double passivity_certificate(const CQKernel& kernel, int trials, std::uint64_t seed);

}  // namespace slabtbc::cq
