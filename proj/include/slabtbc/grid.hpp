#pragma once

#include "slabtbc/common.hpp"

namespace slabtbc {

// Lateral Fourier grid on the periodized plane [0,Lx) x [0,Ly), together
// with the slab extent h2 < z < h1 sampled by nz nodes.  FFT index i maps
// to the signed mode k = i (i < N/2) or i - N (i >= N/2), so the mode range
// is [-N/2, N/2-1] with the Nyquist mode at index N/2.
class LateralGrid {
  public:
    LateralGrid(double period_x, double period_y, int modes_x, int modes_y,
                double h1, double h2, int nz)
        : period_x_(period_x), period_y_(period_y), modes_x_(modes_x),
          modes_y_(modes_y), h1_(h1), h2_(h2), nz_(nz) {
        if (!(period_x > 0.0) || !(period_y > 0.0))
            throw ShapeError("LateralGrid: periods must be positive");
        if (!(h1 > h2))
            throw ShapeError("LateralGrid: require h1 > h2");
        if (modes_x < 4 || modes_y < 4 || modes_x % 2 != 0 || modes_y % 2 != 0)
            throw ShapeError("LateralGrid: modes_x, modes_y must be even and >= 4");
        if (nz < 2)
            throw ShapeError("LateralGrid: nz must be >= 2");
    }

    double period_x() const { return period_x_; }
    double period_y() const { return period_y_; }
    int modes_x() const { return modes_x_; }
    int modes_y() const { return modes_y_; }
    double h1() const { return h1_; }
    double h2() const { return h2_; }
    int nz() const { return nz_; }

    double dx() const { return period_x_ / modes_x_; }
    double dy() const { return period_y_ / modes_y_; }
    double dz() const { return (h1_ - h2_) / (nz_ - 1); }
    double height() const { return h1_ - h2_; }

    int plane_size() const { return modes_x_ * modes_y_; }
    int volume_size() const { return plane_size() * nz_; }

    int signed_kx(int ix) const { return ix < modes_x_ / 2 ? ix : ix - modes_x_; }
    int signed_ky(int iy) const { return iy < modes_y_ / 2 ? iy : iy - modes_y_; }
    double xi1(int ix) const { return 2.0 * kPi * signed_kx(ix) / period_x_; }
    double xi2(int iy) const { return 2.0 * kPi * signed_ky(iy) / period_y_; }
    Xi xi(int ix, int iy) const { return {xi1(ix), xi2(iy)}; }

    // Index of the conjugate mode -k (mod N).
    int mirror_x(int ix) const { return ix == 0 ? 0 : modes_x_ - ix; }
    int mirror_y(int iy) const { return iy == 0 ? 0 : modes_y_ - iy; }

    bool self_conjugate(int ix, int iy) const {
        return mirror_x(ix) == ix && mirror_y(iy) == iy;
    }

    bool same_layout(const LateralGrid& o) const {
        return period_x_ == o.period_x_ && period_y_ == o.period_y_ &&
               modes_x_ == o.modes_x_ && modes_y_ == o.modes_y_;
    }

    double x(int i) const { return i * dx(); }
    double y(int j) const { return j * dy(); }
    double z(int k) const { return h2_ + k * dz(); }

  private:
    double period_x_;
    double period_y_;
    int modes_x_;
    int modes_y_;
    double h1_;
    double h2_;
    int nz_;
};

}  // namespace slabtbc
