#include "slabtbc/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace slabtbc::spectral {

namespace {

// FFTW plans are cached per plane shape.  Planning is not thread-safe, so
// it is guarded; execution on caller-owned buffers is safe.
class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan plan(int nx, int ny, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(nx, ny, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<cdouble> buf(static_cast<size_t>(nx) * ny);
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        fftw_plan plan = fftw_plan_dft_2d(nx, ny, p, p, sign, FFTW_ESTIMATE);
        plans_.emplace(key, plan);
        return plan;
    }

  private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void execute_plane(const LateralGrid& g, int sign, const cdouble* in, cdouble* out) {
    fftw_plan plan = PlanCache::instance().plan(g.modes_x(), g.modes_y(), sign);
    std::vector<cdouble> buf(in, in + g.plane_size());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    std::copy(buf.begin(), buf.end(), out);
}

void require_plane(const LateralGrid& g, size_t n) {
    if (n != static_cast<size_t>(g.plane_size()))
        throw ShapeError("spectral: plane array size does not match grid");
}

void require_volume(const LateralGrid& g, size_t n) {
    if (n != static_cast<size_t>(g.volume_size()))
        throw ShapeError("spectral: slab array size does not match grid");
}

double trapezoid_weight(const LateralGrid& g, int k) {
    return (k == 0 || k == g.nz() - 1) ? 0.5 : 1.0;
}

// d/dz of per-mode coefficients at node k, second order.
cdouble dz_fd(const std::vector<cdouble>* planes, size_t idx, int k, int nz, double dz) {
    if (k == 0)
        return (-3.0 * planes[0][idx] + 4.0 * planes[1][idx] - planes[2][idx]) / (2.0 * dz);
    if (k == nz - 1)
        return (3.0 * planes[nz - 1][idx] - 4.0 * planes[nz - 2][idx] + planes[nz - 3][idx]) /
               (2.0 * dz);
    return (planes[k + 1][idx] - planes[k - 1][idx]) / (2.0 * dz);
}

}  // namespace

std::vector<cdouble> forward_lateral(const LateralGrid& g, std::span<const cdouble> samples) {
    require_plane(g, samples.size());
    std::vector<cdouble> out(g.plane_size());
    execute_plane(g, FFTW_FORWARD, samples.data(), out.data());
    const double scale = std::sqrt(g.period_x() * g.period_y()) / g.plane_size();
    for (auto& c : out) c *= scale;
    return out;
}

std::vector<cdouble> inverse_lateral(const LateralGrid& g, std::span<const cdouble> coeffs) {
    require_plane(g, coeffs.size());
    std::vector<cdouble> out(g.plane_size());
    execute_plane(g, FFTW_BACKWARD, coeffs.data(), out.data());
    const double scale = 1.0 / std::sqrt(g.period_x() * g.period_y());
    for (auto& c : out) c *= scale;
    return out;
}

double l2_norm_slab(const LateralGrid& g, std::span<const cdouble> field) {
    require_volume(g, field.size());
    const double dv = g.dx() * g.dy() * g.dz();
    double sum = 0.0;
    for (int k = 0; k < g.nz(); ++k) {
        const double w = trapezoid_weight(g, k);
        const cdouble* plane = field.data() + static_cast<size_t>(k) * g.plane_size();
        double plane_sum = 0.0;
        for (int m = 0; m < g.plane_size(); ++m) plane_sum += std::norm(plane[m]);
        sum += w * plane_sum;
    }
    return std::sqrt(sum * dv);
}

double l2_norm_slab_spectral(const LateralGrid& g, std::span<const cdouble> field) {
    require_volume(g, field.size());
    double sum = 0.0;
    for (int k = 0; k < g.nz(); ++k) {
        auto coeffs = forward_lateral(
            g, field.subspan(static_cast<size_t>(k) * g.plane_size(), g.plane_size()));
        const double w = trapezoid_weight(g, k);
        double plane_sum = 0.0;
        for (const auto& c : coeffs) plane_sum += std::norm(c);
        sum += w * plane_sum;
    }
    return std::sqrt(sum * g.dz());
}

double l2_norm_slab(const LateralGrid& g, const VectorField& u) {
    double a = l2_norm_slab(g, u.c1);
    double b = l2_norm_slab(g, u.c2);
    double c = l2_norm_slab(g, u.c3);
    return std::sqrt(a * a + b * b + c * c);
}

double hcurl_norm(const LateralGrid& g, const VectorField& u) {
    require_volume(g, u.c1.size());
    require_volume(g, u.c2.size());
    require_volume(g, u.c3.size());
    if (g.nz() < 3) throw ShapeError("hcurl_norm: need nz >= 3 for the d/dz stencil");

    const int nz = g.nz();
    const int np = g.plane_size();
    // Per-plane coefficients of the three components.
    std::vector<std::vector<cdouble>> h1(nz), h2(nz), h3(nz);
    for (int k = 0; k < nz; ++k) {
        h1[k] = forward_lateral(g, std::span<const cdouble>(u.c1).subspan(
                                       static_cast<size_t>(k) * np, np));
        h2[k] = forward_lateral(g, std::span<const cdouble>(u.c2).subspan(
                                       static_cast<size_t>(k) * np, np));
        h3[k] = forward_lateral(g, std::span<const cdouble>(u.c3).subspan(
                                       static_cast<size_t>(k) * np, np));
    }

    const double dz = g.dz();
    double sum = 0.0;
    for (int k = 0; k < nz; ++k) {
        const double w = trapezoid_weight(g, k);
        double plane_sum = 0.0;
        for (int ix = 0; ix < g.modes_x(); ++ix) {
            for (int iy = 0; iy < g.modes_y(); ++iy) {
                const size_t m = static_cast<size_t>(ix) * g.modes_y() + iy;
                const Xi xi = g.xi(ix, iy);
                const cdouble i1(0.0, xi.xi1), i2(0.0, xi.xi2);
                const cdouble d1 = dz_fd(h1.data(), m, k, nz, dz);
                const cdouble d2 = dz_fd(h2.data(), m, k, nz, dz);
                const cdouble a = i2 * h3[k][m] - d2;           // (curl u)_1
                const cdouble b = d1 - i1 * h3[k][m];           // (curl u)_2
                const cdouble c = xi.xi1 * h2[k][m] - xi.xi2 * h1[k][m];
                plane_sum += std::norm(h1[k][m]) + std::norm(h2[k][m]) + std::norm(h3[k][m]) +
                             std::norm(a) + std::norm(b) + std::norm(c);
            }
        }
        sum += w * plane_sum;
    }
    return std::sqrt(sum * dz);
}

double trace_norm(const LateralGrid& g, const TangentialTrace& t, TraceNormKind kind,
                  TraceWeight weight) {
    require_plane(g, t.u1.size());
    require_plane(g, t.u2.size());
    double sum = 0.0;
    for (int ix = 0; ix < g.modes_x(); ++ix) {
        for (int iy = 0; iy < g.modes_y(); ++iy) {
            const size_t m = static_cast<size_t>(ix) * g.modes_y() + iy;
            const Xi xi = g.xi(ix, iy);
            const double q = 1.0 + xi.norm2();
            const double w = weight == TraceWeight::Standard ? 1.0 / std::sqrt(q) : q;
            const cdouble u1 = t.u1[m], u2 = t.u2[m];
            double bracket = std::norm(u1) + std::norm(u2);
            if (kind == TraceNormKind::CurlMinusHalf)
                bracket += std::norm(xi.xi1 * u2 - xi.xi2 * u1);
            else
                bracket += std::norm(xi.xi1 * u1 + xi.xi2 * u2);
            sum += w * bracket;
        }
    }
    return std::sqrt(sum);
}

cdouble duality_pairing(const LateralGrid& g, const TangentialTrace& u,
                        const TangentialTrace& v) {
    require_plane(g, u.u1.size());
    require_plane(g, v.u1.size());
    if (u.boundary != v.boundary)
        throw GridMismatchError("duality_pairing: traces live on different boundaries");
    cdouble sum(0.0);
    for (int m = 0; m < g.plane_size(); ++m)
        sum += u.u1[m] * std::conj(v.u1[m]) + u.u2[m] * std::conj(v.u2[m]);
    return sum;
}

TangentialTrace boundary_trace(const LateralGrid& g, const VectorField& u, Boundary b) {
    require_volume(g, u.c1.size());
    const int k = (b == Boundary::Gamma1) ? g.nz() - 1 : 0;
    const size_t off = static_cast<size_t>(k) * g.plane_size();
    TangentialTrace t;
    t.boundary = b;
    t.u1 = forward_lateral(g, std::span<const cdouble>(u.c1).subspan(off, g.plane_size()));
    t.u2 = forward_lateral(g, std::span<const cdouble>(u.c2).subspan(off, g.plane_size()));
    return t;
}

bool hermitian_symmetric(const LateralGrid& g, std::span<const cdouble> coeffs, double tol) {
    require_plane(g, coeffs.size());
    double scale = 0.0;
    for (const auto& c : coeffs) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return true;
    for (int ix = 0; ix < g.modes_x(); ++ix) {
        for (int iy = 0; iy < g.modes_y(); ++iy) {
            const size_t m = static_cast<size_t>(ix) * g.modes_y() + iy;
            const size_t mm =
                static_cast<size_t>(g.mirror_x(ix)) * g.modes_y() + g.mirror_y(iy);
            if (std::abs(coeffs[m] - std::conj(coeffs[mm])) > tol * scale) return false;
        }
    }
    return true;
}

}  // namespace slabtbc::spectral
