#include "slabtbc/stepper.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

#if defined(_OPENMP)
#define SLABTBC_OMP(x) _Pragma(x)
#else
#define SLABTBC_OMP(x)
#endif

namespace slabtbc::stepper {

namespace {

// ---------------------------------------------------------------- r2c FFTs

class RealPlanCache {
  public:
    static RealPlanCache& instance() {
        static RealPlanCache c;
        return c;
    }
    fftw_plan r2c(int nx, int ny) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = r2c_.find({nx, ny});
        if (it != r2c_.end()) return it->second;
        std::vector<double> in(static_cast<size_t>(nx) * ny);
        std::vector<cdouble> out(static_cast<size_t>(nx) * (ny / 2 + 1));
        fftw_plan p = fftw_plan_dft_r2c_2d(nx, ny, in.data(),
                                           reinterpret_cast<fftw_complex*>(out.data()),
                                           FFTW_ESTIMATE);
        r2c_.emplace(std::make_pair(nx, ny), p);
        return p;
    }
    fftw_plan c2r(int nx, int ny) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = c2r_.find({nx, ny});
        if (it != c2r_.end()) return it->second;
        std::vector<cdouble> in(static_cast<size_t>(nx) * (ny / 2 + 1));
        std::vector<double> out(static_cast<size_t>(nx) * ny);
        fftw_plan p = fftw_plan_dft_c2r_2d(nx, ny, reinterpret_cast<fftw_complex*>(in.data()),
                                           out.data(), FFTW_ESTIMATE);
        c2r_.emplace(std::make_pair(nx, ny), p);
        return p;
    }

  private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> r2c_, c2r_;
};

void plane_r2c(const LateralGrid& g, const double* plane, std::vector<cdouble>& out) {
    const int nx = g.modes_x(), ny = g.modes_y();
    out.resize(static_cast<size_t>(nx) * (ny / 2 + 1));
    std::vector<double> in(plane, plane + static_cast<size_t>(nx) * ny);
    fftw_execute_dft_r2c(RealPlanCache::instance().r2c(nx, ny), in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

// c2r destroys its input, so it takes a copy; output is scaled to undo the
// FFTW normalization.
void plane_c2r(const LateralGrid& g, std::vector<cdouble> coeffs, double* plane) {
    const int nx = g.modes_x(), ny = g.modes_y();
    fftw_execute_dft_c2r(RealPlanCache::instance().c2r(nx, ny),
                         reinterpret_cast<fftw_complex*>(coeffs.data()), plane);
    const double scale = 1.0 / (static_cast<double>(nx) * ny);
    for (size_t m = 0; m < static_cast<size_t>(nx) * ny; ++m) plane[m] *= scale;
}

// ------------------------------------------------------------- array utils

struct Layout {
    int nx, ny, nzn, nzc;
    size_t node(int i, int j, int k) const {
        return (static_cast<size_t>(i) * ny + j) * nzn + k;
    }
    size_t cell(int i, int j, int k) const {
        return (static_cast<size_t>(i) * ny + j) * nzc + k;
    }
};

Layout layout_of(const LateralGrid& g) {
    return {g.modes_x(), g.modes_y(), g.nz(), g.nz() - 1};
}

double dot_weighted(const std::vector<double>& w, const std::vector<double>& a,
                    const std::vector<double>& b) {
    double s = 0.0;
    for (size_t m = 0; m < a.size(); ++m) s += w[m] * a[m] * b[m];
    return s;
}

double dot_plain(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t m = 0; m < a.size(); ++m) s += a[m] * b[m];
    return s;
}

bool inside_box(const std::array<double, 3>& lo, const std::array<double, 3>& hi, double x,
                double y, double z) {
    return x >= lo[0] && x <= hi[0] && y >= lo[1] && y <= hi[1] && z >= lo[2] && z <= hi[2];
}

// Plane pairing sum_ij a(i,j) b(i,j) dx dy evaluated from r2c coefficients.
double plane_pairing_r2c(const LateralGrid& g, const std::vector<cdouble>& a1,
                         const std::vector<cdouble>& a2, const std::vector<cdouble>& b1,
                         const std::vector<cdouble>& b2) {
    const int nx = g.modes_x(), ny = g.modes_y(), sy = ny / 2 + 1;
    double sum = 0.0;
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < sy; ++iy) {
            const size_t m = static_cast<size_t>(ix) * sy + iy;
            const double w = (iy == 0 || iy == ny / 2) ? 1.0 : 2.0;
            sum += w * ((a1[m] * std::conj(b1[m])).real() + (a2[m] * std::conj(b2[m])).real());
        }
    }
    const double n2 = static_cast<double>(nx) * ny;
    return sum * g.period_x() * g.period_y() / (n2 * n2);
}

}  // namespace

// ---------------------------------------------------------------- medium

void SlabMedium::fill(const std::function<double(double, double, double)>& eps,
                      const std::function<double(double, double, double)>& mu) {
    const Layout L = layout_of(grid_);
    const double dx = grid_.dx(), dy = grid_.dy(), dz = grid_.dz(), h2 = grid_.h2();
    eps_x_.resize(node_count());
    eps_y_.resize(node_count());
    eps_z_.resize(cell_count());
    mu_x_.resize(cell_count());
    mu_y_.resize(cell_count());
    mu_z_.resize(node_count());
    for (int i = 0; i < L.nx; ++i) {
        for (int j = 0; j < L.ny; ++j) {
            const double x = i * dx, y = j * dy;
            for (int k = 0; k < L.nzn; ++k) {
                const double z = h2 + k * dz;
                eps_x_[L.node(i, j, k)] = eps(x + dx / 2, y, z);
                eps_y_[L.node(i, j, k)] = eps(x, y + dy / 2, z);
                mu_z_[L.node(i, j, k)] = mu(x + dx / 2, y + dy / 2, z);
            }
            for (int k = 0; k < L.nzc; ++k) {
                const double zc = h2 + (k + 0.5) * dz;
                eps_z_[L.cell(i, j, k)] = eps(x, y, zc);
                mu_x_[L.cell(i, j, k)] = mu(x, y + dy / 2, zc);
                mu_y_[L.cell(i, j, k)] = mu(x + dx / 2, y, zc);
            }
        }
    }
    auto scan = [](const std::vector<double>& v, double& lo, double& hi) {
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    };
    eps_min_ = mu_min_ = std::numeric_limits<double>::infinity();
    eps_max_ = mu_max_ = 0.0;
    scan(eps_x_, eps_min_, eps_max_);
    scan(eps_y_, eps_min_, eps_max_);
    scan(eps_z_, eps_min_, eps_max_);
    scan(mu_x_, mu_min_, mu_max_);
    scan(mu_y_, mu_min_, mu_max_);
    scan(mu_z_, mu_min_, mu_max_);
    if (!(eps_min_ > 0.0) || !(mu_min_ > 0.0) || !std::isfinite(eps_max_) ||
        !std::isfinite(mu_max_))
        throw DataError("SlabMedium: eps, mu samples must be positive and finite");
    validate_boundary_layers();
}

void SlabMedium::validate_boundary_layers() const {
    const Layout L = layout_of(grid_);
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(b); };
    for (int i = 0; i < L.nx; ++i) {
        for (int j = 0; j < L.ny; ++j) {
            const bool ok =
                close(eps_x_[L.node(i, j, 0)], ext2_.eps) &&
                close(eps_x_[L.node(i, j, L.nzn - 1)], ext1_.eps) &&
                close(eps_z_[L.cell(i, j, 0)], ext2_.eps) &&
                close(eps_z_[L.cell(i, j, L.nzc - 1)], ext1_.eps) &&
                close(mu_x_[L.cell(i, j, 0)], ext2_.mu) &&
                close(mu_x_[L.cell(i, j, L.nzc - 1)], ext1_.mu) &&
                close(mu_z_[L.node(i, j, 0)], ext2_.mu) &&
                close(mu_z_[L.node(i, j, L.nzn - 1)], ext1_.mu);
            if (!ok)
                throw DataError(
                    "SlabMedium: samples adjacent to the boundary planes must equal the "
                    "exterior constants");
        }
    }
}

SlabMedium SlabMedium::homogeneous(const LateralGrid& grid, double eps, double mu) {
    SlabMedium m(grid, symbols::ExteriorMedium(eps, mu, 1), symbols::ExteriorMedium(eps, mu, 2));
    m.fill([eps](double, double, double) { return eps; },
           [mu](double, double, double) { return mu; });
    return m;
}

SlabMedium SlabMedium::from_profile(const LateralGrid& grid, const sdomain::LayeredProfile& p) {
    if (std::abs(p.h1() - grid.h1()) > 1e-12 || std::abs(p.h2() - grid.h2()) > 1e-12)
        throw DataError("SlabMedium: profile extent must match the grid slab");
    SlabMedium m(grid, p.exterior(1), p.exterior(2));
    m.fill([&p](double, double, double z) { return p.eps_at(z); },
           [&p](double, double, double z) { return p.mu_at(z); });
    return m;
}

SlabMedium SlabMedium::from_samplers(const LateralGrid& grid,
                                     const std::function<double(double, double, double)>& eps,
                                     const std::function<double(double, double, double)>& mu,
                                     const symbols::ExteriorMedium& exterior1,
                                     const symbols::ExteriorMedium& exterior2) {
    SlabMedium m(grid, exterior1, exterior2);
    m.fill(eps, mu);
    return m;
}

double SlabMedium::cfl_limit() const {
    const double cmax = 1.0 / std::sqrt(eps_min_ * mu_min_);
    const double dx = grid_.dx(), dy = grid_.dy(), dz = grid_.dz();
    return 1.0 / (cmax * std::sqrt(1.0 / (dx * dx) + 1.0 / (dy * dy) + 1.0 / (dz * dz)));
}

// ------------------------------------------------------------------- init

namespace {

void check_support(const SlabMedium& med, const SourceTerm& src) {
    if (!src.has_support_box) return;
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz(), h2 = g.h2();
    auto probe = [&](const std::vector<double>& v, bool nodal, double ox, double oy,
                     const char* name) {
        if (v.empty()) return;
        double vmax = 0.0;
        for (double x : v) vmax = std::max(vmax, std::abs(x));
        if (vmax == 0.0) return;
        const int nk = nodal ? L.nzn : L.nzc;
        const double oz = nodal ? 0.0 : 0.5;
        for (int i = 0; i < L.nx; ++i)
            for (int j = 0; j < L.ny; ++j)
                for (int k = 0; k < nk; ++k) {
                    const size_t m = nodal ? L.node(i, j, k) : L.cell(i, j, k);
                    if (v[m] == 0.0) continue;
                    const double x = (i + ox) * dx, y = (j + oy) * dy, z = h2 + (k + oz) * dz;
                    if (!inside_box(src.support_lo, src.support_hi, x, y, z))
                        throw DataError(std::string("init: ") + name +
                                        " violates the declared support box");
                }
    };
    probe(src.e0x, true, 0.5, 0.0, "E0_x");
    probe(src.e0y, true, 0.0, 0.5, "E0_y");
    probe(src.e0z, false, 0.0, 0.0, "E0_z");
    probe(src.h0x, false, 0.0, 0.5, "H0_x");
    probe(src.h0y, false, 0.5, 0.0, "H0_y");
    probe(src.h0z, true, 0.5, 0.5, "H0_z");
}

void resize_or_copy(std::vector<double>& dst, const std::vector<double>& src, size_t n,
                    const char* name) {
    if (src.empty()) {
        dst.assign(n, 0.0);
        return;
    }
    if (src.size() != n) throw ShapeError(std::string("init: bad array size for ") + name);
    dst = src;
}

// One magnetic half/full update: H -= (dt/mu) curl E.
void update_h(FieldState& st, const SlabMedium& med, double dt) {
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    SLABTBC_OMP("omp parallel for collapse(2) schedule(static)")
    for (int i = 0; i < L.nx; ++i) {
        for (int j = 0; j < L.ny; ++j) {
            const int ip = (i + 1) % L.nx, jp = (j + 1) % L.ny;
            for (int k = 0; k < L.nzc; ++k) {
                const size_t c = L.cell(i, j, k);
                const double curl_x = (st.ez[L.cell(i, jp, k)] - st.ez[c]) / dy -
                                      (st.ey[L.node(i, j, k + 1)] - st.ey[L.node(i, j, k)]) / dz;
                const double curl_y = (st.ex[L.node(i, j, k + 1)] - st.ex[L.node(i, j, k)]) / dz -
                                      (st.ez[L.cell(ip, j, k)] - st.ez[c]) / dx;
                st.hx[c] -= dt / med.mu_x()[c] * curl_x;
                st.hy[c] -= dt / med.mu_y()[c] * curl_y;
            }
            for (int k = 0; k < L.nzn; ++k) {
                const size_t nidx = L.node(i, j, k);
                const double curl_z = (st.ey[L.node(ip, j, k)] - st.ey[nidx]) / dx -
                                      (st.ex[L.node(i, jp, k)] - st.ex[nidx]) / dy;
                st.hz[nidx] -= dt / med.mu_z()[nidx] * curl_z;
            }
        }
    }
}

// Electric update away from the z-boundary planes.
void update_e_interior(FieldState& st, const SlabMedium& med, double dt, const double* jx,
                       const double* jy, const double* jz) {
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    SLABTBC_OMP("omp parallel for collapse(2) schedule(static)")
    for (int i = 0; i < L.nx; ++i) {
        for (int j = 0; j < L.ny; ++j) {
            const int im = (i + L.nx - 1) % L.nx, jm = (j + L.ny - 1) % L.ny;
            for (int k = 1; k < L.nzn - 1; ++k) {
                const size_t nidx = L.node(i, j, k);
                double cx = (st.hz[nidx] - st.hz[L.node(i, jm, k)]) / dy -
                            (st.hy[L.cell(i, j, k)] - st.hy[L.cell(i, j, k - 1)]) / dz;
                double cy = (st.hx[L.cell(i, j, k)] - st.hx[L.cell(i, j, k - 1)]) / dz -
                            (st.hz[nidx] - st.hz[L.node(im, j, k)]) / dx;
                if (jx) cx -= jx[nidx];
                if (jy) cy -= jy[nidx];
                st.ex[nidx] += dt / med.eps_x()[nidx] * cx;
                st.ey[nidx] += dt / med.eps_y()[nidx] * cy;
            }
            for (int k = 0; k < L.nzc; ++k) {
                const size_t c = L.cell(i, j, k);
                double cz = (st.hy[c] - st.hy[L.cell(im, j, k)]) / dx -
                            (st.hx[c] - st.hx[L.cell(i, jm, k)]) / dy;
                if (jz) cz -= jz[c];
                st.ez[c] += dt / med.eps_z()[c] * cz;
            }
        }
    }
}

void accumulate_divj(FieldState& st, const SlabMedium& med, const double* jx, const double* jy,
                     const double* jz, double dt) {
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    for (int i = 0; i < L.nx; ++i) {
        for (int j = 0; j < L.ny; ++j) {
            const int im = (i + L.nx - 1) % L.nx, jm = (j + L.ny - 1) % L.ny;
            for (int k = 1; k < L.nzn - 1; ++k) {
                const double div = (jx[L.node(i, j, k)] - jx[L.node(im, j, k)]) / dx +
                                   (jy[L.node(i, j, k)] - jy[L.node(i, jm, k)]) / dy +
                                   (jz[L.cell(i, j, k)] - jz[L.cell(i, j, k - 1)]) / dz;
                st.accum_divj[L.node(i, j, k)] += dt * div;
            }
        }
    }
}

void save_prev(FieldState& st) {
    if (st.track_second_diff) {
        std::swap(st.ex_p2, st.ex_p);
        std::swap(st.ey_p2, st.ey_p);
        std::swap(st.ez_p2, st.ez_p);
        std::swap(st.hx_p2, st.hx_p);
        std::swap(st.hy_p2, st.hy_p);
        std::swap(st.hz_p2, st.hz_p);
    }
    st.ex_p = st.ex;
    st.ey_p = st.ey;
    st.ez_p = st.ez;
    st.hx_p = st.hx;
    st.hy_p = st.hy;
    st.hz_p = st.hz;
}

void compute_discrete_energy(FieldState& st, const SlabMedium& med) {
    // E-update done, H-update not yet: ex holds E^{n+1}, ex_p holds E^n and
    // hx still holds H^{n+1/2}.  The staggered product
    //   1/2 <eps E^{n+1}, E^n> + 1/2 <mu H^{n+1/2}, H^{n+1/2}>
    // is an exact invariant of the PEC scheme with J = 0.
    const LateralGrid& g = med.grid();
    const double dv = g.dx() * g.dy() * g.dz();
    double e = 0.0;
    e += dot_weighted(med.eps_x(), st.ex, st.ex_p);
    e += dot_weighted(med.eps_y(), st.ey, st.ey_p);
    e += dot_weighted(med.eps_z(), st.ez, st.ez_p);
    e += dot_weighted(med.mu_x(), st.hx, st.hx);
    e += dot_weighted(med.mu_y(), st.hy, st.hy);
    e += dot_weighted(med.mu_z(), st.hz, st.hz);
    st.discrete_energy = 0.5 * e * dv;
}

void check_finite(const FieldState& st) {
    auto bad = [](const std::vector<double>& v) {
        double s = 0.0;
        for (size_t m = 0; m < v.size(); m += std::max<size_t>(1, v.size() / 64)) s += v[m];
        return !std::isfinite(s);
    };
    if (bad(st.ex) || bad(st.hz))
        throw std::runtime_error("stepper: non-finite field detected at step " +
                                 std::to_string(st.n));
}

struct JScratch {
    std::vector<double> jx, jy, jz;
};

JScratch* fill_current(const SlabMedium& med, const SourceTerm& src, double t, JScratch& js) {
    if (!src.current) return nullptr;
    js.jx.assign(med.node_count(), 0.0);
    js.jy.assign(med.node_count(), 0.0);
    js.jz.assign(med.cell_count(), 0.0);
    src.current(t, js.jx, js.jy, js.jz);
    return &js;
}

}  // namespace

FieldState init(const SlabMedium& medium, const SourceTerm& source, double dt,
                bool track_second_diff) {
    if (!(dt > 0.0) || dt > medium.cfl_limit())
        throw ConfigurationError("init: dt violates the leapfrog stability bound");
    check_support(medium, source);
    FieldState st;
    st.dt = dt;
    st.track_second_diff = track_second_diff;
    resize_or_copy(st.ex, source.e0x, medium.node_count(), "E0_x");
    resize_or_copy(st.ey, source.e0y, medium.node_count(), "E0_y");
    resize_or_copy(st.ez, source.e0z, medium.cell_count(), "E0_z");
    resize_or_copy(st.hx, source.h0x, medium.cell_count(), "H0_x");
    resize_or_copy(st.hy, source.h0y, medium.cell_count(), "H0_y");
    resize_or_copy(st.hz, source.h0z, medium.node_count(), "H0_z");
    // Stagger H to t = dt/2 with a half magnetic step.
    update_h(st, medium, dt / 2.0);
    st.ex_p = st.ex;
    st.ey_p = st.ey;
    st.ez_p = st.ez;
    st.hx_p = st.hx;
    st.hy_p = st.hy;
    st.hz_p = st.hz;
    if (track_second_diff) {
        st.ex_p2 = st.ex;
        st.ey_p2 = st.ey;
        st.ez_p2 = st.ez;
        st.hx_p2 = st.hx;
        st.hy_p2 = st.hy;
        st.hz_p2 = st.hz;
    }
    st.accum_divj.assign(medium.node_count(), 0.0);
    compute_discrete_energy(st, medium);
    return st;
}

void step_pec(FieldState& st, const SlabMedium& med, const SourceTerm& src) {
    static thread_local JScratch js;
    const double t_mid = (st.n + 0.5) * st.dt;
    JScratch* j = fill_current(med, src, t_mid, js);
    save_prev(st);
    update_e_interior(st, med, st.dt, j ? j->jx.data() : nullptr, j ? j->jy.data() : nullptr,
                      j ? j->jz.data() : nullptr);
    // Tangential E on the boundary planes stays clamped to zero.
    compute_discrete_energy(st, med);
    update_h(st, med, st.dt);
    if (j) accumulate_divj(st, med, j->jx.data(), j->jy.data(), j->jz.data(), st.dt);
    st.n += 1;
    if (st.n % 64 == 0) check_finite(st);
}

TbcKernels make_boundary_kernels(const SlabMedium& med, double dt, int horizon,
                                 cq::Generator gen) {
    const LateralGrid& g = med.grid();
    auto phased = [&g](const symbols::ExteriorMedium& ext) {
        return [&g, ext](int ix, int iy, cdouble s) {
            const ComplexFrequency cs(s.real(), s.imag());
            symbols::Matrix2c b = symbols::capacity_matrix(g.xi(ix, iy), cs, ext).matrix;
            if (ix == g.modes_x() / 2 || iy == g.modes_y() / 2) {
                // The cross coupling and its stagger phase are sign-ambiguous
                // on Nyquist rows for real lattice fields; drop them so the
                // boundary update keeps real fields real.
                b(0, 1) = b(1, 0) = 0.0;
            } else {
                const cdouble p =
                    std::polar(1.0, g.xi1(ix) * g.dx() / 2.0 - g.xi2(iy) * g.dy() / 2.0);
                b(0, 1) *= p;
                b(1, 0) *= std::conj(p);
            }
            return b;
        };
    };
    cq::CQKernel top(g, cq::OperatorKind::T, gen, dt, horizon, phased(med.exterior(1)), true);
    cq::CQKernel bottom(g, cq::OperatorKind::T, gen, dt, horizon, phased(med.exterior(2)), true);
    return TbcKernels{std::move(top), std::move(bottom)};
}

void boundary_rhs_planes(const FieldState& st, const SlabMedium& med, spectral::Boundary b,
                         const double* jx_plane, const double* jy_plane,
                         std::vector<cdouble>& p1, std::vector<cdouble>& p2) {
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    const bool top = b == spectral::Boundary::Gamma1;
    const int kn = top ? L.nzn - 1 : 0;      // boundary node plane
    const int kc = top ? L.nzc - 1 : 0;      // adjacent H cell plane
    const double zsign = top ? -1.0 : 1.0;   // sign of the interior-H ghost term
    std::vector<double> q1(static_cast<size_t>(L.nx) * L.ny),
        q2(static_cast<size_t>(L.nx) * L.ny);
    for (int i = 0; i < L.nx; ++i) {
        for (int j = 0; j < L.ny; ++j) {
            const int im = (i + L.nx - 1) % L.nx, jm = (j + L.ny - 1) % L.ny;
            const size_t m = static_cast<size_t>(i) * L.ny + j;
            double v1 = (st.hz[L.node(i, j, kn)] - st.hz[L.node(i, jm, kn)]) / dy +
                        zsign * (-2.0) * st.hy[L.cell(i, j, kc)] / dz;
            double v2 = -(st.hz[L.node(i, j, kn)] - st.hz[L.node(im, j, kn)]) / dx +
                        zsign * 2.0 * st.hx[L.cell(i, j, kc)] / dz;
            if (jx_plane) v1 -= jx_plane[m];
            if (jy_plane) v2 -= jy_plane[m];
            q1[m] = v1;
            q2[m] = v2;
        }
    }
    plane_r2c(g, q1.data(), p1);
    plane_r2c(g, q2.data(), p2);
}

namespace {

struct BoundaryWorkspace {
    std::vector<cdouble> p1, p2, h1, h2, b1, b2, f1, f2;
    std::vector<double> plane;
};

void push_trace(const LateralGrid& g, const FieldState& st, const SlabMedium& med,
                spectral::Boundary b, cq::TraceHistory& hist) {
    const Layout L = layout_of(g);
    const int kn = b == spectral::Boundary::Gamma1 ? L.nzn - 1 : 0;
    std::vector<double> plane(static_cast<size_t>(L.nx) * L.ny);
    std::vector<cdouble> c1, c2;
    for (int i = 0; i < L.nx; ++i)
        for (int j = 0; j < L.ny; ++j)
            plane[static_cast<size_t>(i) * L.ny + j] = st.ex[L.node(i, j, kn)];
    plane_r2c(g, plane.data(), c1);
    for (int i = 0; i < L.nx; ++i)
        for (int j = 0; j < L.ny; ++j)
            plane[static_cast<size_t>(i) * L.ny + j] = st.ey[L.node(i, j, kn)];
    plane_r2c(g, plane.data(), c2);
    hist.u1.insert(hist.u1.end(), c1.begin(), c1.end());
    hist.u2.insert(hist.u2.end(), c2.begin(), c2.end());
    (void)med;
}

void ensure_tbc_state(FieldState& st, const SlabMedium& med, const TbcKernels& kernels) {
    if (st.tbc) return;
    const LateralGrid& g = med.grid();
    const int sm = kernels.top.stored_modes();
    TbcState tbc;
    tbc.top.history.stored_modes = sm;
    tbc.bottom.history.stored_modes = sm;
    push_trace(g, st, med, spectral::Boundary::Gamma1, tbc.top.history);
    push_trace(g, st, med, spectral::Boundary::Gamma2, tbc.bottom.history);
    auto seed_output = [&](TbcSideState& side, const cq::CQKernel& k) {
        side.y1.assign(sm, cdouble(0.0));
        side.y2.assign(sm, cdouble(0.0));
        for (int mode = 0; mode < sm; ++mode) {
            const auto& w = k.weight(mode, 0);
            side.y1[mode] = w(0, 0) * side.history.u1[mode] + w(0, 1) * side.history.u2[mode];
            side.y2[mode] = w(1, 0) * side.history.u1[mode] + w(1, 1) * side.history.u2[mode];
        }
        side.work += plane_pairing_r2c(g, side.y1, side.y2, side.history.u1, side.history.u2) *
                     st.dt;
    };
    seed_output(tbc.top, kernels.top);
    seed_output(tbc.bottom, kernels.bottom);
    st.tbc = std::move(tbc);
}

void tbc_boundary_update(FieldState& st, const SlabMedium& med, const cq::CQKernel& kernel,
                         spectral::Boundary b, TbcSideState& side, const double* jx_plane,
                         const double* jy_plane, const BoundaryForcing* forcing,
                         BoundaryWorkspace& ws) {
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const bool top = b == spectral::Boundary::Gamma1;
    const int kn = top ? L.nzn - 1 : 0;
    const int n = st.n;
    const int sm = kernel.stored_modes();
    if (n + 1 > kernel.horizon())
        throw KernelTooShortError("step_tbc: kernel horizon exhausted");

    // History part of T[E]^{n+1}: sum_{k<=n} W_{n+1-k} E^k.
    ws.h1.assign(sm, cdouble(0.0));
    ws.h2.assign(sm, cdouble(0.0));
    for (int k = 0; k <= n; ++k) {
        const cdouble* u1 = side.history.u1.data() + static_cast<size_t>(k) * sm;
        const cdouble* u2 = side.history.u2.data() + static_cast<size_t>(k) * sm;
        const int widx = n + 1 - k;
        for (int mode = 0; mode < sm; ++mode) {
            const auto& w = kernel.weight(mode, widx);
            ws.h1[mode] += w(0, 0) * u1[mode] + w(0, 1) * u2[mode];
            ws.h2[mode] += w(1, 0) * u1[mode] + w(1, 1) * u2[mode];
        }
    }

    boundary_rhs_planes(st, med, b, jx_plane, jy_plane, ws.p1, ws.p2);
    if (forcing) {
        ws.f1.assign(sm, cdouble(0.0));
        ws.f2.assign(sm, cdouble(0.0));
        (*forcing)(n, b, ws.f1, ws.f2);
    }

    const double eps_b = med.exterior(top ? 1 : 2).eps;
    const double dz = g.dz();
    const cdouble* en1 = side.history.u1.data() + static_cast<size_t>(n) * sm;
    const cdouble* en2 = side.history.u2.data() + static_cast<size_t>(n) * sm;
    ws.b1.resize(sm);
    ws.b2.resize(sm);
    const int sy = g.modes_y() / 2 + 1;
    for (int mode = 0; mode < sm; ++mode) {
        cdouble r1 = eps_b / st.dt * en1[mode] + ws.p1[mode] -
                     (side.y1[mode] + ws.h1[mode]) / dz;
        cdouble r2 = eps_b / st.dt * en2[mode] + ws.p2[mode] -
                     (side.y2[mode] + ws.h2[mode]) / dz;
        if (forcing) {
            r1 += ws.f1[mode];
            r2 += ws.f2[mode];
        }
        const auto& w0 = kernel.weight(mode, 0);
        symbols::Matrix2c a;
        a(0, 0) = eps_b / st.dt + w0(0, 0) / dz;
        a(0, 1) = w0(0, 1) / dz;
        a(1, 0) = w0(1, 0) / dz;
        a(1, 1) = eps_b / st.dt + w0(1, 1) / dz;
        const cdouble det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        cdouble e1 = (a(1, 1) * r1 - a(0, 1) * r2) / det;
        cdouble e2 = (a(0, 0) * r2 - a(1, 0) * r1) / det;
        const int ix = mode / sy, iy = mode % sy;
        if (g.self_conjugate(ix, iy)) {
            e1 = cdouble(e1.real(), 0.0);
            e2 = cdouble(e2.real(), 0.0);
        }
        ws.b1[mode] = e1;
        ws.b2[mode] = e2;
    }

    // Advance history, cache T[E]^{n+1}, accumulate boundary work.
    side.history.u1.insert(side.history.u1.end(), ws.b1.begin(), ws.b1.end());
    side.history.u2.insert(side.history.u2.end(), ws.b2.begin(), ws.b2.end());
    for (int mode = 0; mode < sm; ++mode) {
        const auto& w0 = kernel.weight(mode, 0);
        side.y1[mode] = ws.h1[mode] + w0(0, 0) * ws.b1[mode] + w0(0, 1) * ws.b2[mode];
        side.y2[mode] = ws.h2[mode] + w0(1, 0) * ws.b1[mode] + w0(1, 1) * ws.b2[mode];
    }
    side.work += plane_pairing_r2c(g, side.y1, side.y2, ws.b1, ws.b2) * st.dt;

    // Scatter the solved boundary trace back to the field planes.
    ws.plane.resize(static_cast<size_t>(L.nx) * L.ny);
    plane_c2r(g, ws.b1, ws.plane.data());
    for (int i = 0; i < L.nx; ++i)
        for (int j = 0; j < L.ny; ++j)
            st.ex[L.node(i, j, kn)] = ws.plane[static_cast<size_t>(i) * L.ny + j];
    plane_c2r(g, ws.b2, ws.plane.data());
    for (int i = 0; i < L.nx; ++i)
        for (int j = 0; j < L.ny; ++j)
            st.ey[L.node(i, j, kn)] = ws.plane[static_cast<size_t>(i) * L.ny + j];
}

}  // namespace

void step_tbc(FieldState& st, const SlabMedium& med, const SourceTerm& src,
              const TbcKernels& kernels, const BoundaryForcing* forcing) {
    static thread_local JScratch js;
    static thread_local BoundaryWorkspace ws_top, ws_bot;
    const LateralGrid& g = med.grid();
    if (kernels.top.modes_x() != g.modes_x() || kernels.top.modes_y() != g.modes_y() ||
        !kernels.top.half_spectrum())
        throw GridMismatchError("step_tbc: kernel mode grid does not match the medium");
    if (kernels.top.dt() != st.dt || kernels.bottom.dt() != st.dt)
        throw GridMismatchError("step_tbc: kernel dt does not match the state");
    ensure_tbc_state(st, med, kernels);

    const double t_mid = (st.n + 0.5) * st.dt;
    JScratch* j = fill_current(med, src, t_mid, js);
    save_prev(st);
    update_e_interior(st, med, st.dt, j ? j->jx.data() : nullptr, j ? j->jy.data() : nullptr,
                      j ? j->jz.data() : nullptr);

    const Layout L = layout_of(g);
    auto jplane = [&](const std::vector<double>& v, int kn, std::vector<double>& buf) {
        buf.resize(static_cast<size_t>(L.nx) * L.ny);
        for (int i = 0; i < L.nx; ++i)
            for (int j2 = 0; j2 < L.ny; ++j2)
                buf[static_cast<size_t>(i) * L.ny + j2] = v[L.node(i, j2, kn)];
        return buf.data();
    };
    static thread_local std::vector<double> jx_top, jy_top, jx_bot, jy_bot;
    const double* jx_t = j ? jplane(j->jx, L.nzn - 1, jx_top) : nullptr;
    const double* jy_t = j ? jplane(j->jy, L.nzn - 1, jy_top) : nullptr;
    const double* jx_b = j ? jplane(j->jx, 0, jx_bot) : nullptr;
    const double* jy_b = j ? jplane(j->jy, 0, jy_bot) : nullptr;

    tbc_boundary_update(st, med, kernels.top, spectral::Boundary::Gamma1, st.tbc->top, jx_t,
                        jy_t, forcing, ws_top);
    tbc_boundary_update(st, med, kernels.bottom, spectral::Boundary::Gamma2, st.tbc->bottom,
                        jx_b, jy_b, forcing, ws_bot);

    compute_discrete_energy(st, med);
    update_h(st, med, st.dt);
    if (j) accumulate_divj(st, med, j->jx.data(), j->jy.data(), j->jz.data(), st.dt);
    st.n += 1;
    if (st.n % 64 == 0) check_finite(st);
}

// ---------------------------------------------------------------- energies

namespace {

double l2_sq(const SlabMedium& med, const std::vector<double>& x, const std::vector<double>& y,
             const std::vector<double>& z) {
    const double dv = med.grid().dx() * med.grid().dy() * med.grid().dz();
    return (dot_plain(x, x) + dot_plain(y, y) + dot_plain(z, z)) * dv;
}

// |curl E|^2 at the H staggering (all rows well-defined).
double curl_e_sq(const FieldState& st, const SlabMedium& med) {
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    const double dv = dx * dy * dz;
    double sum = 0.0;
    for (int i = 0; i < L.nx; ++i) {
        for (int j = 0; j < L.ny; ++j) {
            const int ip = (i + 1) % L.nx, jp = (j + 1) % L.ny;
            for (int k = 0; k < L.nzc; ++k) {
                const size_t c = L.cell(i, j, k);
                const double cx = (st.ez[L.cell(i, jp, k)] - st.ez[c]) / dy -
                                  (st.ey[L.node(i, j, k + 1)] - st.ey[L.node(i, j, k)]) / dz;
                const double cy = (st.ex[L.node(i, j, k + 1)] - st.ex[L.node(i, j, k)]) / dz -
                                  (st.ez[L.cell(ip, j, k)] - st.ez[c]) / dx;
                sum += cx * cx + cy * cy;
            }
            for (int k = 0; k < L.nzn; ++k) {
                const size_t nidx = L.node(i, j, k);
                const double cz = (st.ey[L.node(ip, j, k)] - st.ey[nidx]) / dx -
                                  (st.ex[L.node(i, jp, k)] - st.ex[nidx]) / dy;
                sum += cz * cz;
            }
        }
    }
    return sum * dv;
}

// |curl H|^2 at the E staggering (x,y rows on interior node planes).
double curl_h_sq(const FieldState& st, const SlabMedium& med) {
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    const double dv = dx * dy * dz;
    double sum = 0.0;
    for (int i = 0; i < L.nx; ++i) {
        for (int j = 0; j < L.ny; ++j) {
            const int im = (i + L.nx - 1) % L.nx, jm = (j + L.ny - 1) % L.ny;
            for (int k = 1; k < L.nzn - 1; ++k) {
                const size_t nidx = L.node(i, j, k);
                const double cx = (st.hz[nidx] - st.hz[L.node(i, jm, k)]) / dy -
                                  (st.hy[L.cell(i, j, k)] - st.hy[L.cell(i, j, k - 1)]) / dz;
                const double cy = (st.hx[L.cell(i, j, k)] - st.hx[L.cell(i, j, k - 1)]) / dz -
                                  (st.hz[nidx] - st.hz[L.node(im, j, k)]) / dx;
                sum += cx * cx + cy * cy;
            }
            for (int k = 0; k < L.nzc; ++k) {
                const size_t c = L.cell(i, j, k);
                const double cz = (st.hy[c] - st.hy[L.cell(im, j, k)]) / dx -
                                  (st.hx[c] - st.hx[L.cell(i, jm, k)]) / dy;
                sum += cz * cz;
            }
        }
    }
    return sum * dv;
}

}  // namespace

EnergyEntry energies(const FieldState& st, const SlabMedium& med) {
    const double dv = med.grid().dx() * med.grid().dy() * med.grid().dz();
    EnergyEntry e;
    e.step = st.n;
    e.t = st.n * st.dt;
    // H at the integer time level by averaging the flanking half steps.
    std::vector<double> hxm(st.hx.size()), hym(st.hy.size()), hzm(st.hz.size());
    for (size_t m = 0; m < hxm.size(); ++m) hxm[m] = 0.5 * (st.hx[m] + st.hx_p[m]);
    for (size_t m = 0; m < hym.size(); ++m) hym[m] = 0.5 * (st.hy[m] + st.hy_p[m]);
    for (size_t m = 0; m < hzm.size(); ++m) hzm[m] = 0.5 * (st.hz[m] + st.hz_p[m]);

    double e1 = dot_weighted(med.eps_x(), st.ex, st.ex) +
                dot_weighted(med.eps_y(), st.ey, st.ey) +
                dot_weighted(med.eps_z(), st.ez, st.ez) + dot_weighted(med.mu_x(), hxm, hxm) +
                dot_weighted(med.mu_y(), hym, hym) + dot_weighted(med.mu_z(), hzm, hzm);
    e.e1 = e1 * dv;

    if (st.n >= 1) {
        auto diff_sq = [&](const std::vector<double>& a, const std::vector<double>& b,
                           const std::vector<double>& w) {
            double s = 0.0;
            for (size_t m = 0; m < a.size(); ++m) {
                const double d = (a[m] - b[m]) / st.dt;
                s += w[m] * d * d;
            }
            return s;
        };
        double e2 = diff_sq(st.ex, st.ex_p, med.eps_x()) + diff_sq(st.ey, st.ey_p, med.eps_y()) +
                    diff_sq(st.ez, st.ez_p, med.eps_z()) + diff_sq(st.hx, st.hx_p, med.mu_x()) +
                    diff_sq(st.hy, st.hy_p, med.mu_y()) + diff_sq(st.hz, st.hz_p, med.mu_z());
        e.e2 = e2 * dv;
    }
    if (st.n >= 2 && st.track_second_diff) {
        auto diff2_sq = [&](const std::vector<double>& a, const std::vector<double>& b,
                            const std::vector<double>& c, const std::vector<double>& w) {
            double s = 0.0;
            for (size_t m = 0; m < a.size(); ++m) {
                const double d = (a[m] - 2.0 * b[m] + c[m]) / (st.dt * st.dt);
                s += w[m] * d * d;
            }
            return s;
        };
        double e3 =
            diff2_sq(st.ex, st.ex_p, st.ex_p2, med.eps_x()) +
            diff2_sq(st.ey, st.ey_p, st.ey_p2, med.eps_y()) +
            diff2_sq(st.ez, st.ez_p, st.ez_p2, med.eps_z()) +
            diff2_sq(st.hx, st.hx_p, st.hx_p2, med.mu_x()) +
            diff2_sq(st.hy, st.hy_p, st.hy_p2, med.mu_y()) +
            diff2_sq(st.hz, st.hz_p, st.hz_p2, med.mu_z());
        e.e3 = e3 * dv;
    }

    e.l2_e = std::sqrt(l2_sq(med, st.ex, st.ey, st.ez));
    e.l2_h = std::sqrt(l2_sq(med, hxm, hym, hzm));
    e.hcurl_e = std::sqrt(e.l2_e * e.l2_e + curl_e_sq(st, med));
    {
        FieldState avg;
        avg.hx = hxm;
        avg.hy = hym;
        avg.hz = hzm;
        e.hcurl_h = std::sqrt(e.l2_h * e.l2_h + curl_h_sq(avg, med));
    }
    e.boundary_work = st.tbc ? st.tbc->top.work + st.tbc->bottom.work : 0.0;
    e.discrete_energy = st.discrete_energy;
    return e;
}

double divergence_residual(const FieldState& st, const SlabMedium& med) {
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i < L.nx; ++i) {
        for (int j = 0; j < L.ny; ++j) {
            const int im = (i + L.nx - 1) % L.nx, jm = (j + L.ny - 1) % L.ny;
            for (int k = 1; k < L.nzn - 1; ++k) {
                const double fx1 = med.eps_x()[L.node(i, j, k)] * st.ex[L.node(i, j, k)] / dx;
                const double fx0 = med.eps_x()[L.node(im, j, k)] * st.ex[L.node(im, j, k)] / dx;
                const double fy1 = med.eps_y()[L.node(i, j, k)] * st.ey[L.node(i, j, k)] / dy;
                const double fy0 = med.eps_y()[L.node(i, jm, k)] * st.ey[L.node(i, jm, k)] / dy;
                const double fz1 = med.eps_z()[L.cell(i, j, k)] * st.ez[L.cell(i, j, k)] / dz;
                const double fz0 =
                    med.eps_z()[L.cell(i, j, k - 1)] * st.ez[L.cell(i, j, k - 1)] / dz;
                const double div = (fx1 - fx0) + (fy1 - fy0) + (fz1 - fz0);
                const double res = div + st.accum_divj[L.node(i, j, k)];
                worst = std::max(worst, std::abs(res));
                scale = std::max(scale, std::abs(fx1) + std::abs(fx0) + std::abs(fy1) +
                                            std::abs(fy0) + std::abs(fz1) + std::abs(fz0) +
                                            std::abs(st.accum_divj[L.node(i, j, k)]));
            }
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

RunResult run(const SlabMedium& medium, const SourceTerm& source, const RunSpec& spec) {
    if (spec.steps < 0) throw ConfigurationError("run: steps must be >= 0");
    RunResult result;
    result.state = init(medium, source, spec.dt, spec.track_second_diff);
    std::optional<TbcKernels> kernels;
    if (spec.closure == BoundaryClosure::TBC)
        kernels = make_boundary_kernels(medium, spec.dt, spec.steps + 1, spec.generator);
    EnergyEntry entry = energies(result.state, medium);
    result.report.push_back(entry);
    result.max_e1 = entry.e1;
    for (int n = 0; n < spec.steps; ++n) {
        if (spec.closure == BoundaryClosure::PEC)
            step_pec(result.state, medium, source);
        else
            step_tbc(result.state, medium, source, *kernels);
        if ((n + 1) % spec.energy_stride == 0 || n + 1 == spec.steps) {
            entry = energies(result.state, medium);
            result.report.push_back(entry);
            result.max_e1 = std::max(result.max_e1, entry.e1);
        }
    }
    return result;
}

void derive_e1(const SlabMedium& med, const SourceTerm& src, std::vector<double>& e1x,
               std::vector<double>& e1y, std::vector<double>& e1z) {
    const LateralGrid& g = med.grid();
    const Layout L = layout_of(g);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    FieldState tmp;
    resize_or_copy(tmp.hx, src.h0x, med.cell_count(), "H0_x");
    resize_or_copy(tmp.hy, src.h0y, med.cell_count(), "H0_y");
    resize_or_copy(tmp.hz, src.h0z, med.node_count(), "H0_z");
    static thread_local JScratch js;
    JScratch* j = fill_current(med, src, 0.0, js);
    e1x.assign(med.node_count(), 0.0);
    e1y.assign(med.node_count(), 0.0);
    e1z.assign(med.cell_count(), 0.0);
    for (int i = 0; i < L.nx; ++i) {
        for (int jj = 0; jj < L.ny; ++jj) {
            const int im = (i + L.nx - 1) % L.nx, jm = (jj + L.ny - 1) % L.ny;
            for (int k = 1; k < L.nzn - 1; ++k) {
                const size_t nidx = L.node(i, jj, k);
                double cx = (tmp.hz[nidx] - tmp.hz[L.node(i, jm, k)]) / dy -
                            (tmp.hy[L.cell(i, jj, k)] - tmp.hy[L.cell(i, jj, k - 1)]) / dz;
                double cy = (tmp.hx[L.cell(i, jj, k)] - tmp.hx[L.cell(i, jj, k - 1)]) / dz -
                            (tmp.hz[nidx] - tmp.hz[L.node(im, jj, k)]) / dx;
                if (j) {
                    cx -= j->jx[nidx];
                    cy -= j->jy[nidx];
                }
                e1x[nidx] = cx / med.eps_x()[nidx];
                e1y[nidx] = cy / med.eps_y()[nidx];
            }
            for (int k = 0; k < L.nzc; ++k) {
                const size_t c = L.cell(i, jj, k);
                double cz = (tmp.hy[c] - tmp.hy[L.cell(im, jj, k)]) / dx -
                            (tmp.hx[c] - tmp.hx[L.cell(i, jm, k)]) / dy;
                if (j) cz -= j->jz[c];
                e1z[c] = cz / med.eps_z()[c];
            }
        }
    }
}

ModeProfiles extract_mode(const FieldState& st, const LateralGrid& g, int kx, int ky) {
    const Layout L = layout_of(g);
    const double xi1 = 2.0 * kPi * kx / g.period_x();
    const double xi2 = 2.0 * kPi * ky / g.period_y();
    const double dx = g.dx(), dy = g.dy();
    auto coeff = [&](const std::vector<double>& v, bool nodal, double ox, double oy) {
        const int nk = nodal ? L.nzn : L.nzc;
        std::vector<cdouble> out(nk, cdouble(0.0));
        for (int i = 0; i < L.nx; ++i) {
            for (int j = 0; j < L.ny; ++j) {
                const cdouble ph =
                    std::polar(1.0, -(xi1 * (i + ox) * dx + xi2 * (j + oy) * dy));
                for (int k = 0; k < nk; ++k) {
                    const size_t m = nodal ? L.node(i, j, k) : L.cell(i, j, k);
                    out[k] += v[m] * ph;
                }
            }
        }
        const double scale = 1.0 / (static_cast<double>(L.nx) * L.ny);
        for (auto& c : out) c *= scale;
        return out;
    };
    ModeProfiles p;
    p.ex = coeff(st.ex, true, 0.5, 0.0);
    p.ey = coeff(st.ey, true, 0.0, 0.5);
    p.ez = coeff(st.ez, false, 0.0, 0.0);
    p.hx = coeff(st.hx, false, 0.0, 0.5);
    p.hy = coeff(st.hy, false, 0.5, 0.0);
    p.hz = coeff(st.hz, true, 0.5, 0.5);
    return p;
}

}  // namespace slabtbc::stepper
