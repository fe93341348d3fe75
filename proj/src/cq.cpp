#include "slabtbc/cq.hpp"

#include <fftw3.h>

#include <cfloat>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <random>

#include "json.hpp"

namespace slabtbc::cq {

namespace {

class Plan1DCache {
  public:
    static Plan1DCache& instance() {
        static Plan1DCache cache;
        return cache;
    }
    fftw_plan plan(int n) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<cdouble> buf(n);
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        fftw_plan pl = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        plans_.emplace(n, pl);
        return pl;
    }

  private:
    std::mutex mutex_;
    std::map<int, fftw_plan> plans_;
};

void fft_forward_inplace(std::vector<cdouble>& buf) {
    fftw_plan pl = Plan1DCache::instance().plan(static_cast<int>(buf.size()));
    fftw_execute_dft(pl, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
}

// Contour samples K_l -> weights w_n = lambda^{-n}/M * DFT(K)_n, n = 0..N.
void contour_to_weights(std::vector<cdouble>& samples, double lambda, int horizon,
                        cdouble* out, size_t stride) {
    const int m = static_cast<int>(samples.size());
    fft_forward_inplace(samples);
    double lam_pow = 1.0;
    for (int n = 0; n <= horizon; ++n) {
        out[static_cast<size_t>(n) * stride] = samples[n] / (lam_pow * m);
        lam_pow *= lambda;
    }
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

}  // namespace

cdouble generator_delta(Generator gen, cdouble zeta) {
    if (gen == Generator::BDF1) return 1.0 - zeta;
    return 1.5 - 2.0 * zeta + 0.5 * zeta * zeta;
}

double default_contour_radius(int contour_points) {
    return std::pow(DBL_EPSILON, 1.0 / (2.0 * contour_points));
}

int contour_points_for(int horizon) { return std::max(2 * horizon, 8); }

std::vector<cdouble> scalar_weights(const std::function<cdouble(cdouble)>& symbol, double dt,
                                    int horizon, Generator gen, double lambda,
                                    int contour_points) {
    if (!(dt > 0.0)) throw ConfigurationError("scalar_weights: dt must be positive");
    if (horizon < 0) throw ConfigurationError("scalar_weights: horizon must be >= 0");
    const int m = contour_points > 0 ? contour_points : contour_points_for(horizon);
    if (lambda == 0.0) lambda = default_contour_radius(m);
    if (!(lambda > 0.0 && lambda < 1.0))
        throw ConfigurationError("scalar_weights: contour radius must lie in (0,1)");

    std::vector<cdouble> samples(m);
    for (int l = 0; l < m; ++l) {
        const cdouble zeta = std::polar(lambda, 2.0 * kPi * l / m);
        samples[l] = symbol(generator_delta(gen, zeta) / dt);
    }
    std::vector<cdouble> w(horizon + 1);
    contour_to_weights(samples, lambda, horizon, w.data(), 1);
    return w;
}

cdouble scalar_convolve(std::span<const cdouble> weights, std::span<const cdouble> history,
                        int n) {
    if (n < 0 || static_cast<size_t>(n) >= history.size())
        throw ShapeError("scalar_convolve: history must hold at least n+1 samples");
    if (static_cast<size_t>(n) >= weights.size())
        throw KernelTooShortError("scalar_convolve: convolution step exceeds kernel horizon");
    cdouble sum(0.0);
    for (int k = 0; k <= n; ++k) sum += weights[n - k] * history[k];
    return sum;
}

std::vector<double> integrator_weights(Generator gen, double dt, int horizon) {
    std::vector<double> q(horizon + 1, dt);
    if (gen == Generator::BDF2) {
        // dt/delta2(zeta) = dt * sum_n (1 - 3^{-(n+1)}) zeta^n.
        double p = 1.0 / 3.0;
        for (int n = 0; n <= horizon; ++n) {
            q[n] = dt * (1.0 - p);
            p /= 3.0;
        }
    }
    return q;
}

std::vector<std::vector<cdouble>> vector_weights(
    const std::function<std::vector<cdouble>(cdouble)>& symbol, double dt, int horizon,
    Generator gen, double lambda, int contour_points) {
    if (!(dt > 0.0)) throw ConfigurationError("vector_weights: dt must be positive");
    const int m = contour_points > 0 ? contour_points : contour_points_for(horizon);
    if (lambda == 0.0) lambda = default_contour_radius(m);
    if (!(lambda > 0.0 && lambda < 1.0))
        throw ConfigurationError("vector_weights: contour radius must lie in (0,1)");
    std::vector<std::vector<cdouble>> samples(m);
    for (int l = 0; l < m; ++l) {
        const cdouble zeta = std::polar(lambda, 2.0 * kPi * l / m);
        samples[l] = symbol(generator_delta(gen, zeta) / dt);
    }
    const size_t len = samples[0].size();
    std::vector<std::vector<cdouble>> w(horizon + 1, std::vector<cdouble>(len));
    std::vector<cdouble> seq(m);
    for (size_t q = 0; q < len; ++q) {
        for (int l = 0; l < m; ++l) seq[l] = samples[l][q];
        fft_forward_inplace(seq);
        double lam_pow = 1.0;
        for (int n = 0; n <= horizon; ++n) {
            w[n][q] = seq[n] / (lam_pow * m);
            lam_pow *= lambda;
        }
    }
    return w;
}

CQKernel::CQKernel(const LateralGrid& grid, OperatorKind kind, Generator gen, double dt,
                   int horizon, const ModeSymbol& symbol, bool half_spectrum, double lambda,
                   int contour_points)
    : gen_(gen), kind_(kind), dt_(dt), horizon_(horizon), modes_x_(grid.modes_x()),
      modes_y_(grid.modes_y()), half_(half_spectrum) {
    if (!(dt > 0.0)) throw ConfigurationError("CQKernel: dt must be positive");
    if (horizon < 0) throw ConfigurationError("CQKernel: horizon must be >= 0");
    const int m = contour_points > 0 ? contour_points : contour_points_for(horizon);
    lambda_ = lambda == 0.0 ? default_contour_radius(m) : lambda;
    if (!(lambda_ > 0.0 && lambda_ < 1.0))
        throw ConfigurationError("CQKernel: contour radius must lie in (0,1)");

    std::vector<cdouble> s_nodes(m);
    for (int l = 0; l < m; ++l) {
        const cdouble zeta = std::polar(lambda_, 2.0 * kPi * l / m);
        s_nodes[l] = generator_delta(gen, zeta) / dt;
    }

    const int my = stored_y();
    const size_t sm = static_cast<size_t>(stored_modes());
    weights_.assign(sm * (horizon_ + 1), Matrix2c::Zero());
    // Matrix2cd is 4 contiguous complex entries in column-major order
    // ((0,0),(1,0),(0,1),(1,1)); steps are sm matrices apart.
    const size_t stride = 4 * sm;
    std::vector<cdouble> seq00(m), seq01(m), seq10(m), seq11(m);
    for (int ix = 0; ix < modes_x_; ++ix) {
        for (int iy = 0; iy < my; ++iy) {
            for (int l = 0; l < m; ++l) {
                const Matrix2c v = symbol(ix, iy, s_nodes[l]);
                seq00[l] = v(0, 0);
                seq01[l] = v(0, 1);
                seq10[l] = v(1, 0);
                seq11[l] = v(1, 1);
            }
            cdouble* base = weights_.data()->data() +
                            static_cast<size_t>(mode_index(ix, iy)) * 4;
            contour_to_weights(seq00, lambda_, horizon_, base + 0, stride);
            contour_to_weights(seq10, lambda_, horizon_, base + 1, stride);
            contour_to_weights(seq01, lambda_, horizon_, base + 2, stride);
            contour_to_weights(seq11, lambda_, horizon_, base + 3, stride);
        }
    }
}

CQKernel capacity_kernel(const LateralGrid& grid, const symbols::ExteriorMedium& medium,
                         OperatorKind kind, Generator gen, double dt, int horizon,
                         bool half_spectrum, double lambda) {
    ModeSymbol symbol = [&grid, medium, kind](int ix, int iy, cdouble s) {
        const ComplexFrequency cs(s.real(), s.imag());
        Matrix2c b = symbols::capacity_matrix(grid.xi(ix, iy), cs, medium).matrix;
        // The xi1*xi2 cross coupling flips sign under the DFT mirror of a
        // Nyquist index, so it has no consistent single-mode value for real
        // lattice signals; drop it there (same treatment as the odd
        // derivative in real spectral differentiation).
        if (ix == grid.modes_x() / 2 || iy == grid.modes_y() / 2) b(0, 1) = b(1, 0) = 0.0;
        if (kind == OperatorKind::C) b *= s;
        return b;
    };
    return CQKernel(grid, kind, gen, dt, horizon, symbol, half_spectrum, lambda);
}

void convolve(const CQKernel& kernel, const TraceHistory& history, int n,
              std::vector<cdouble>& out1, std::vector<cdouble>& out2) {
    if (history.stored_modes != kernel.stored_modes())
        throw GridMismatchError("convolve: history mode set does not match kernel");
    if (n < 0 || n >= history.steps())
        throw ShapeError("convolve: history must hold at least n+1 steps");
    if (n > kernel.horizon())
        throw KernelTooShortError("convolve: step index exceeds kernel horizon");
    const int nm = kernel.stored_modes();
    out1.assign(nm, cdouble(0.0));
    out2.assign(nm, cdouble(0.0));
    for (int k = 0; k <= n; ++k) {
        const cdouble* h1 = history.u1.data() + static_cast<size_t>(k) * nm;
        const cdouble* h2 = history.u2.data() + static_cast<size_t>(k) * nm;
        for (int mode = 0; mode < nm; ++mode) {
            const Matrix2c& w = kernel.weight(mode, n - k);
            out1[mode] += w(0, 0) * h1[mode] + w(0, 1) * h2[mode];
            out2[mode] += w(1, 0) * h1[mode] + w(1, 1) * h2[mode];
        }
    }
}

ParsevalResult parseval_residual(const TimeSignal& u, const TimeSignal& v, double s1) {
    if (!(s1 > 0.0)) throw InvalidFrequencyError("parseval_residual: s1 must be positive");
    if (u.dt != v.dt || u.samples.size() != v.samples.size())
        throw ShapeError("parseval_residual: signals must share dt and length");
    const int n = static_cast<int>(u.samples.size());
    ParsevalResult r;
    if (n < 3) throw ShapeError("parseval_residual: need at least 3 samples");
    const double dt = u.dt;

    // Time side: composite Simpson of g = u v e^{-2 s1 t} (trapezoid on a
    // trailing odd interval).
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = u.samples[i] * v.samples[i] * std::exp(-2.0 * s1 * i * dt);
    double time_side = 0.0;
    int last = n - 1;
    if (last % 2 == 1) {
        time_side += 0.5 * dt * (g[last - 1] + g[last]);
        last -= 1;
    }
    for (int i = 0; i + 2 <= last; i += 2)
        time_side += dt / 3.0 * (g[i] + 4.0 * g[i + 1] + g[i + 2]);

    // Frequency side: trapezoid-in-time Laplace transforms evaluated on the
    // full sampling band s2 in [-pi/dt, pi/dt) via a padded DFT, then the
    // band integral by the (exact) uniform rule.  The quarter-weight
    // endpoint correction restores plain trapezoid weights in the collapsed
    // time sum.
    const int p = next_pow2(2 * n + 1);
    std::vector<cdouble> a(p, cdouble(0.0)), b(p, cdouble(0.0));
    for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const double damp = std::exp(-s1 * i * dt) * w * dt;
        a[i] = u.samples[i] * damp;
        b[i] = v.samples[i] * damp;
    }
    fft_forward_inplace(a);
    fft_forward_inplace(b);
    cdouble band(0.0);
    for (int k = 0; k < p; ++k) band += a[k] * std::conj(b[k]);
    double freq_side = band.real() / (p * dt);
    freq_side += dt * (g[0] + g[n - 1]) / 4.0;

    r.time_side = time_side;
    r.freq_side = freq_side;
    r.residual = std::abs(freq_side - time_side);
    r.truncation = std::abs(g[n - 1]) / (2.0 * s1);
    return r;
}

double passivity_certificate(const CQKernel& kernel, int trials, std::uint64_t seed) {
    if (kernel.kind() != OperatorKind::C)
        throw DataError("passivity_certificate: kernel must realize s*B (operator kind C)");
    if (trials < 1) throw DataError("passivity_certificate: trials must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> mode_pick(0, kernel.stored_modes() - 1);
    const int nmax = kernel.horizon();
    std::uniform_int_distribution<int> len_pick(std::min(4, nmax), nmax);
    const double dt = kernel.dt();
    const std::vector<double> q = integrator_weights(kernel.generator(), dt, nmax);

    double min_margin = std::numeric_limits<double>::infinity();
    std::vector<cdouble> h1, h2, y1, y2, i1, i2;
    for (int t = 0; t < trials; ++t) {
        const int mode = mode_pick(rng);
        const int len = len_pick(rng) + 1;
        h1.resize(len);
        h2.resize(len);
        for (int k = 0; k < len; ++k) {
            h1[k] = cdouble(gauss(rng), gauss(rng));
            h2[k] = cdouble(gauss(rng), gauss(rng));
        }
        y1.assign(len, cdouble(0.0));
        y2.assign(len, cdouble(0.0));
        for (int nstep = 0; nstep < len; ++nstep) {
            for (int k = 0; k <= nstep; ++k) {
                const Matrix2c& w = kernel.weight(mode, nstep - k);
                y1[nstep] += w(0, 0) * h1[k] + w(0, 1) * h2[k];
                y2[nstep] += w(1, 0) * h1[k] + w(1, 1) * h2[k];
            }
        }
        // Discrete time integral of the convolution output, then pair with
        // the history.
        i1.assign(len, cdouble(0.0));
        i2.assign(len, cdouble(0.0));
        for (int nstep = 0; nstep < len; ++nstep)
            for (int k = 0; k <= nstep; ++k) {
                i1[nstep] += q[nstep - k] * y1[k];
                i2[nstep] += q[nstep - k] * y2[k];
            }
        double margin = 0.0, unorm = 0.0;
        for (int k = 0; k < len; ++k) {
            margin += (i1[k] * std::conj(h1[k]) + i2[k] * std::conj(h2[k])).real() * dt;
            unorm += (std::norm(h1[k]) + std::norm(h2[k])) * dt;
        }
        min_margin = std::min(min_margin, margin / unorm);
    }
    return min_margin;
}

namespace {

const char* generator_name(Generator g) { return g == Generator::BDF1 ? "BDF1" : "BDF2"; }
const char* kind_name(OperatorKind k) { return k == OperatorKind::T ? "T" : "C"; }

}  // namespace

void CQKernel::save(const std::string& path) const {
    nlohmann::json header;
    header["format"] = "slabtbc-cqkernel-v1";
    header["generator"] = generator_name(gen_);
    header["operator_kind"] = kind_name(kind_);
    header["dt"] = dt_;
    header["horizon"] = horizon_;
    header["lambda"] = lambda_;
    header["modes_x"] = modes_x_;
    header["modes_y"] = modes_y_;
    header["half_spectrum"] = half_;
    const std::string hs = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("CQKernel::save: cannot open " + path);
    const std::uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    // Mode-major, then step; each 2x2 as (0,0),(0,1),(1,0),(1,1) re/im pairs.
    for (int mode = 0; mode < stored_modes(); ++mode) {
        for (int n = 0; n <= horizon_; ++n) {
            const Matrix2c& w = weight(mode, n);
            const double vals[8] = {w(0, 0).real(), w(0, 0).imag(), w(0, 1).real(),
                                    w(0, 1).imag(), w(1, 0).real(), w(1, 0).imag(),
                                    w(1, 1).real(), w(1, 1).imag()};
            out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
        }
    }
}

CQKernel CQKernel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("CQKernel::load: cannot open " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    const nlohmann::json header = nlohmann::json::parse(hs);
    if (header.at("format") != "slabtbc-cqkernel-v1")
        throw DataError("CQKernel::load: unrecognized format");
    CQKernel k;
    k.gen_ = header.at("generator") == "BDF1" ? Generator::BDF1 : Generator::BDF2;
    k.kind_ = header.at("operator_kind") == "T" ? OperatorKind::T : OperatorKind::C;
    k.dt_ = header.at("dt");
    k.horizon_ = header.at("horizon");
    k.lambda_ = header.at("lambda");
    k.modes_x_ = header.at("modes_x");
    k.modes_y_ = header.at("modes_y");
    k.half_ = header.at("half_spectrum");
    k.weights_.assign(static_cast<size_t>(k.stored_modes()) * (k.horizon_ + 1),
                      Matrix2c::Zero());
    for (int mode = 0; mode < k.stored_modes(); ++mode) {
        for (int n = 0; n <= k.horizon_; ++n) {
            double vals[8];
            in.read(reinterpret_cast<char*>(vals), sizeof(vals));
            Matrix2c& w = k.weights_[static_cast<size_t>(n) * k.stored_modes() + mode];
            w(0, 0) = {vals[0], vals[1]};
            w(0, 1) = {vals[2], vals[3]};
            w(1, 0) = {vals[4], vals[5]};
            w(1, 1) = {vals[6], vals[7]};
        }
    }
    if (!in) throw DataError("CQKernel::load: truncated weight payload");
    return k;
}

}  // namespace slabtbc::cq
