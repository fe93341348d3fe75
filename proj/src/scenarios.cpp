#include "slabtbc/scenarios.hpp"

#include <cmath>

namespace slabtbc::scenarios {

namespace {

double bump3(const PulseSpec& p, double x, double y, double z) {
    return p.amplitude * bump((x - p.center[0]) / p.width[0]) *
           bump((y - p.center[1]) / p.width[1]) * bump((z - p.center[2]) / p.width[2]);
}

void set_support(stepper::SourceTerm& s, const PulseSpec& p) {
    s.has_support_box = true;
    for (int d = 0; d < 3; ++d) {
        s.support_lo[d] = p.center[d] - p.width[d];
        s.support_hi[d] = p.center[d] + p.width[d];
    }
}

struct Stagger {
    double ox, oy, oz;
    bool nodal;
};

template <typename F>
void fill_component(const stepper::SlabMedium& med, std::vector<double>& out, Stagger st,
                    F&& f) {
    const LateralGrid& g = med.grid();
    const int nx = g.modes_x(), ny = g.modes_y();
    const int nk = st.nodal ? g.nz() : g.nz() - 1;
    out.assign(static_cast<size_t>(nx) * ny * nk, 0.0);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nk; ++k) {
                const double x = (i + st.ox) * g.dx();
                const double y = (j + st.oy) * g.dy();
                const double z = g.h2() + (k + st.oz) * g.dz();
                out[(static_cast<size_t>(i) * ny + j) * nk + k] = f(x, y, z);
            }
}

constexpr Stagger kEx{0.5, 0.0, 0.0, true};
constexpr Stagger kEy{0.0, 0.5, 0.0, true};
constexpr Stagger kEz{0.0, 0.0, 0.5, false};
constexpr Stagger kHx{0.0, 0.5, 0.5, false};
constexpr Stagger kHy{0.5, 0.0, 0.5, false};
constexpr Stagger kHz{0.5, 0.5, 0.0, true};

}  // namespace

stepper::SourceTerm make_pulse_initial(const stepper::SlabMedium& medium, const PulseSpec& spec,
                                       bool pair_upward) {
    stepper::SourceTerm s;
    const auto& pol = spec.polarization;
    if (pol[0] != 0.0)
        fill_component(medium, s.e0x, kEx,
                       [&](double x, double y, double z) { return pol[0] * bump3(spec, x, y, z); });
    if (pol[1] != 0.0)
        fill_component(medium, s.e0y, kEy,
                       [&](double x, double y, double z) { return pol[1] * bump3(spec, x, y, z); });
    if (pol[2] != 0.0)
        fill_component(medium, s.e0z, kEz,
                       [&](double x, double y, double z) { return pol[2] * bump3(spec, x, y, z); });
    if (pair_upward) {
        // H0 = Y (z_hat x E0): an upward-traveling packet at normal incidence.
        const double admittance =
            std::sqrt(medium.exterior(1).eps / medium.exterior(1).mu);
        if (pol[0] != 0.0)
            fill_component(medium, s.h0y, kHy, [&](double x, double y, double z) {
                return admittance * pol[0] * bump3(spec, x, y, z);
            });
        if (pol[1] != 0.0)
            fill_component(medium, s.h0x, kHx, [&](double x, double y, double z) {
                return -admittance * pol[1] * bump3(spec, x, y, z);
            });
    }
    set_support(s, spec);
    return s;
}

stepper::SourceTerm make_solenoidal_initial(const stepper::SlabMedium& medium,
                                            const PulseSpec& spec) {
    // Vector potential A = polarization * bump at the H staggering; E0 is
    // its mimetic curl, so div_h E0 = 0 exactly on uniform eps.
    const LateralGrid& g = medium.grid();
    const int nx = g.modes_x(), ny = g.modes_y(), nzn = g.nz(), nzc = g.nz() - 1;
    std::vector<double> ax, ay, az;
    const auto& pol = spec.polarization;
    fill_component(medium, ax, kHx,
                   [&](double x, double y, double z) { return pol[0] * bump3(spec, x, y, z); });
    fill_component(medium, ay, kHy,
                   [&](double x, double y, double z) { return pol[1] * bump3(spec, x, y, z); });
    fill_component(medium, az, kHz,
                   [&](double x, double y, double z) { return pol[2] * bump3(spec, x, y, z); });
    stepper::SourceTerm s;
    s.e0x.assign(static_cast<size_t>(nx) * ny * nzn, 0.0);
    s.e0y.assign(static_cast<size_t>(nx) * ny * nzn, 0.0);
    s.e0z.assign(static_cast<size_t>(nx) * ny * nzc, 0.0);
    const double dx = g.dx(), dy = g.dy(), dz = g.dz();
    auto node = [&](int i, int j, int k) { return (static_cast<size_t>(i) * ny + j) * nzn + k; };
    auto cell = [&](int i, int j, int k) { return (static_cast<size_t>(i) * ny + j) * nzc + k; };
    for (int i = 0; i < nx; ++i) {
        const int im = (i + nx - 1) % nx;
        for (int j = 0; j < ny; ++j) {
            const int jm = (j + ny - 1) % ny;
            for (int k = 1; k < nzn - 1; ++k) {
                s.e0x[node(i, j, k)] = (az[node(i, j, k)] - az[node(i, jm, k)]) / dy -
                                       (ay[cell(i, j, k)] - ay[cell(i, j, k - 1)]) / dz;
                s.e0y[node(i, j, k)] = (ax[cell(i, j, k)] - ax[cell(i, j, k - 1)]) / dz -
                                       (az[node(i, j, k)] - az[node(im, j, k)]) / dx;
            }
            for (int k = 0; k < nzc; ++k)
                s.e0z[cell(i, j, k)] = (ay[cell(i, j, k)] - ay[cell(im, j, k)]) / dx -
                                       (ax[cell(i, j, k)] - ax[cell(i, jm, k)]) / dy;
        }
    }
    set_support(s, spec);
    // The discrete curl widens the footprint by one cell.
    for (int d = 0; d < 3; ++d) {
        const double pad = 2.0 * std::max({g.dx(), g.dy(), g.dz()});
        s.support_lo[d] -= pad;
        s.support_hi[d] += pad;
    }
    return s;
}

stepper::SourceTerm make_h0_initial(const stepper::SlabMedium& medium, const PulseSpec& spec) {
    stepper::SourceTerm s;
    const auto& pol = spec.polarization;
    if (pol[0] != 0.0)
        fill_component(medium, s.h0x, kHx,
                       [&](double x, double y, double z) { return pol[0] * bump3(spec, x, y, z); });
    if (pol[1] != 0.0)
        fill_component(medium, s.h0y, kHy,
                       [&](double x, double y, double z) { return pol[1] * bump3(spec, x, y, z); });
    if (pol[2] != 0.0)
        fill_component(medium, s.h0z, kHz,
                       [&](double x, double y, double z) { return pol[2] * bump3(spec, x, y, z); });
    set_support(s, spec);
    return s;
}

double ramp_value(double t, double ramp_time) {
    if (t <= 0.0) return 0.0;
    if (t >= ramp_time) return 1.0;
    const double u = t / ramp_time;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

stepper::SourceTerm make_current_source(const stepper::SlabMedium& medium,
                                        const CurrentSpec& spec) {
    stepper::SourceTerm s;
    set_support(s, spec.pulse);
    const LateralGrid& g = medium.grid();
    const int nx = g.modes_x(), ny = g.modes_y(), nzn = g.nz(), nzc = g.nz() - 1;
    const PulseSpec pulse = spec.pulse;
    const double freq = spec.frequency, ramp = spec.ramp_time;
    const double dx = g.dx(), dy = g.dy(), dz = g.dz(), h2 = g.h2();
    s.current = [=](double t, std::span<double> jx, std::span<double> jy,
                    std::span<double> jz) {
        const double gmod = std::sin(2.0 * kPi * freq * t) * ramp_value(t, ramp);
        if (gmod == 0.0) return;
        auto fill = [&](std::span<double> out, const Stagger& st, double pol) {
            if (pol == 0.0) return;
            const int nk = st.nodal ? nzn : nzc;
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int k = 0; k < nk; ++k) {
                        const double x = (i + st.ox) * dx, y = (j + st.oy) * dy,
                                     z = h2 + (k + st.oz) * dz;
                        out[(static_cast<size_t>(i) * ny + j) * nk + k] =
                            pol * bump3(pulse, x, y, z) * gmod;
                    }
        };
        fill(jx, kEx, pulse.polarization[0]);
        fill(jy, kEy, pulse.polarization[1]);
        fill(jz, kEz, pulse.polarization[2]);
    };
    return s;
}

stepper::SourceTerm make_mode_current(const stepper::SlabMedium& medium, int kx, int ky,
                                      const std::array<cdouble, 3>& amplitude, double z_center,
                                      double z_width, double frequency, double ramp_time) {
    stepper::SourceTerm s;
    const LateralGrid& g = medium.grid();
    const int nx = g.modes_x(), ny = g.modes_y(), nzn = g.nz(), nzc = g.nz() - 1;
    const double xi1 = 2.0 * kPi * kx / g.period_x();
    const double xi2 = 2.0 * kPi * ky / g.period_y();
    const double dx = g.dx(), dy = g.dy(), dz = g.dz(), h2 = g.h2();
    s.current = [=](double t, std::span<double> jx, std::span<double> jy,
                    std::span<double> jz) {
        const double gmod = std::sin(2.0 * kPi * frequency * t) * ramp_value(t, ramp_time);
        if (gmod == 0.0) return;
        auto fill = [&](std::span<double> out, const Stagger& st, cdouble amp) {
            if (amp == cdouble(0.0)) return;
            const int nk = st.nodal ? nzn : nzc;
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j) {
                    const cdouble lat =
                        amp * std::polar(1.0, xi1 * (i + st.ox) * dx + xi2 * (j + st.oy) * dy);
                    for (int k = 0; k < nk; ++k) {
                        const double z = h2 + (k + st.oz) * dz;
                        out[(static_cast<size_t>(i) * ny + j) * nk + k] =
                            lat.real() * bump((z - z_center) / z_width) * gmod;
                    }
                }
        };
        fill(jx, kEx, amplitude[0]);
        fill(jy, kEy, amplitude[1]);
        fill(jz, kEz, amplitude[2]);
    };
    return s;
}

}  // namespace slabtbc::scenarios
