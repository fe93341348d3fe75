#pragma once

#include "slabtbc/stepper.hpp"

namespace slabtbc::scenarios {

// C^3 compactly supported bump, 1 on nothing, 0 outside |u| >= 1.
inline double bump(double u) {
    const double v = 1.0 - u * u;
    return v > 0.0 ? v * v * v * v : 0.0;
}

struct PulseSpec {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    std::array<double, 3> width{0.25, 0.25, 0.25};
    std::array<double, 3> polarization{1.0, 0.0, 0.0};
    double amplitude = 1.0;
};

// E0 = polarization * product bump; optional paired H0 = (z_hat x E0) * Y
// launching the packet towards Gamma_1 in a homogeneous medium.
stepper::SourceTerm make_pulse_initial(const stepper::SlabMedium& medium, const PulseSpec& spec,
                                       bool pair_upward);

// Divergence-free E0 assembled as the discrete curl of a bump-shaped vector
// potential sampled at the H staggering.
stepper::SourceTerm make_solenoidal_initial(const stepper::SlabMedium& medium,
                                            const PulseSpec& spec);

// H0-only data (E0 = 0, so E1 = eps^{-1} curl H0 drives the field).
stepper::SourceTerm make_h0_initial(const stepper::SlabMedium& medium, const PulseSpec& spec);

struct CurrentSpec {
    PulseSpec pulse;
    double frequency = 1.0;   // carrier of sin(2 pi f t)
    double ramp_time = 0.5;   // C^2 smoothstep ramp, J(.,0) = 0
};

// J(x,t) = polarization * bump(x) * sin(2 pi f t) * ramp(t).
stepper::SourceTerm make_current_source(const stepper::SlabMedium& medium,
                                        const CurrentSpec& spec);

double ramp_value(double t, double ramp_time);

// Single lateral mode current: J = Re[amp e^{i xi.rho}] bump(z) g(t).
stepper::SourceTerm make_mode_current(const stepper::SlabMedium& medium, int kx, int ky,
                                      const std::array<cdouble, 3>& amplitude, double z_center,
                                      double z_width, double frequency, double ramp_time);

}  // namespace slabtbc::scenarios
