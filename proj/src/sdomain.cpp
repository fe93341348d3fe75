#include "slabtbc/sdomain.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace slabtbc::sdomain {

LayeredProfile::LayeredProfile(std::vector<double> breakpoints, std::vector<double> eps,
                               std::vector<double> mu)
    : breakpoints_(std::move(breakpoints)), eps_(std::move(eps)), mu_(std::move(mu)) {
    if (breakpoints_.size() < 2 || eps_.size() != breakpoints_.size() - 1 ||
        mu_.size() != eps_.size())
        throw DataError("LayeredProfile: need m+1 breakpoints and m layer constants");
    for (size_t i = 0; i + 1 < breakpoints_.size(); ++i)
        if (!(breakpoints_[i] < breakpoints_[i + 1]))
            throw DataError("LayeredProfile: breakpoints must be strictly increasing");
    for (size_t i = 0; i < eps_.size(); ++i)
        if (!(eps_[i] > 0.0) || !(mu_[i] > 0.0))
            throw DataError("LayeredProfile: layer constants must be positive");
}

int LayeredProfile::layer_of(double z) const {
    if (z <= breakpoints_.front()) return 0;
    if (z >= breakpoints_.back()) return layers() - 1;
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), z);
    return static_cast<int>(it - breakpoints_.begin()) - 1;
}

double LayeredProfile::mu_average(double za, double zb) const {
    if (!(zb > za)) throw DataError("LayeredProfile::mu_average: need zb > za");
    double acc = 0.0;
    for (int l = 0; l < layers(); ++l) {
        const double lo = std::max(za, breakpoints_[l]);
        const double hi = std::min(zb, breakpoints_[l + 1]);
        if (hi > lo) acc += (hi - lo) * mu_[l];
    }
    // Clamp into the end layers for intervals poking past the slab.
    if (za < breakpoints_.front()) acc += (breakpoints_.front() - za) * mu_.front();
    if (zb > breakpoints_.back()) acc += (zb - breakpoints_.back()) * mu_.back();
    return acc / (zb - za);
}

symbols::ExteriorMedium LayeredProfile::exterior(int side) const {
    if (side == 1) return symbols::ExteriorMedium(eps_.back(), mu_.back(), 1);
    return symbols::ExteriorMedium(eps_.front(), mu_.front(), 2);
}

namespace {

// Nodal material values; a node sitting exactly on an interior breakpoint
// takes the mean of the two adjacent layers.
double eps_node(const LayeredProfile& p, double z) {
    for (size_t i = 1; i + 1 < p.breakpoints().size(); ++i)
        if (z == p.breakpoints()[i]) return 0.5 * (p.eps()[i - 1] + p.eps()[i]);
    return p.eps_at(z);
}

double mu_node(const LayeredProfile& p, double z) {
    for (size_t i = 1; i + 1 < p.breakpoints().size(); ++i)
        if (z == p.breakpoints()[i]) return 0.5 * (p.mu()[i - 1] + p.mu()[i]);
    return p.mu_at(z);
}

}  // namespace

ModeSolution solve_mode(const Xi& xi, const ComplexFrequency& s, const LayeredProfile& profile,
                        int nz, const ModeSource* source, const ModeBoundaryData* boundary_data) {
    if (nz < 4) throw ShapeError("solve_mode: need nz >= 4 for the boundary stencils");
    if (source) {
        if (source->f1.size() != static_cast<size_t>(nz) ||
            source->f2.size() != static_cast<size_t>(nz) ||
            source->f3.size() != static_cast<size_t>(nz))
            throw ShapeError("solve_mode: source must be sampled on the nz-node grid");
    }
    const double h2 = profile.h2(), h1 = profile.h1();
    const double dz = (h1 - h2) / (nz - 1);
    const cdouble sv = s.value();
    const cdouble i1(0.0, xi.xi1), i2(0.0, xi.xi2);

    const int dim = 3 * nz;
    std::vector<Eigen::Triplet<cdouble>> trip;
    trip.reserve(static_cast<size_t>(dim) * 9);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);

    auto idx = [nz](int node, int comp) { return 3 * node + comp; };
    auto add = [&trip](int r, int c, cdouble v) { trip.emplace_back(r, c, v); };

    std::vector<cdouble> alpha_node(nz), alpha_half(nz - 1);
    std::vector<double> eps_n(nz);
    for (int k = 0; k < nz; ++k) {
        const double z = h2 + k * dz;
        alpha_node[k] = 1.0 / (mu_node(profile, z) * sv);
        eps_n[k] = eps_node(profile, z);
    }
    for (int k = 0; k + 1 < nz; ++k) {
        const double za = h2 + k * dz;
        alpha_half[k] = 1.0 / (profile.mu_average(za, za + dz) * sv);
    }

    if (source) {
        for (int k = 0; k < nz; ++k) {
            rhs[idx(k, 0)] = source->f1[k];
            rhs[idx(k, 1)] = source->f2[k];
            rhs[idx(k, 2)] = source->f3[k];
        }
    }

    // Interior rows for E1, E2 (flux form).
    for (int k = 1; k + 1 < nz; ++k) {
        const cdouble ap = alpha_half[k], am = alpha_half[k - 1], an = alpha_node[k];
        const cdouble diag_flux = (ap + am) / (dz * dz);
        // E1 row
        {
            const int r = idx(k, 0);
            add(r, idx(k + 1, 0), -ap / (dz * dz));
            add(r, idx(k, 0), diag_flux + xi.xi2 * xi.xi2 * an + eps_n[k] * sv);
            add(r, idx(k - 1, 0), -am / (dz * dz));
            add(r, idx(k, 1), -xi.xi1 * xi.xi2 * an);
            add(r, idx(k + 1, 2), i1 * ap / (2.0 * dz));
            add(r, idx(k, 2), i1 * (ap - am) / (2.0 * dz));
            add(r, idx(k - 1, 2), -i1 * am / (2.0 * dz));
        }
        // E2 row
        {
            const int r = idx(k, 1);
            add(r, idx(k + 1, 1), -ap / (dz * dz));
            add(r, idx(k, 1), diag_flux + xi.xi1 * xi.xi1 * an + eps_n[k] * sv);
            add(r, idx(k - 1, 1), -am / (dz * dz));
            add(r, idx(k, 0), -xi.xi1 * xi.xi2 * an);
            add(r, idx(k + 1, 2), i2 * ap / (2.0 * dz));
            add(r, idx(k, 2), i2 * (ap - am) / (2.0 * dz));
            add(r, idx(k - 1, 2), -i2 * am / (2.0 * dz));
        }
    }

    // E3 rows (algebraic in E3, first derivatives of E1, E2) at every node.
    for (int k = 0; k < nz; ++k) {
        const int r = idx(k, 2);
        const cdouble an = alpha_node[k];
        add(r, idx(k, 2), an * xi.norm2() + eps_n[k] * sv);
        // d/dz weights: centered inside, one-sided second order at the ends.
        int ks[3];
        double cs[3];
        if (k == 0) {
            ks[0] = 0; ks[1] = 1; ks[2] = 2;
            cs[0] = -1.5; cs[1] = 2.0; cs[2] = -0.5;
        } else if (k == nz - 1) {
            ks[0] = nz - 1; ks[1] = nz - 2; ks[2] = nz - 3;
            cs[0] = 1.5; cs[1] = -2.0; cs[2] = 0.5;
        } else {
            ks[0] = k + 1; ks[1] = k - 1; ks[2] = k;
            cs[0] = 0.5; cs[1] = -0.5; cs[2] = 0.0;
        }
        for (int t = 0; t < 3; ++t) {
            if (cs[t] == 0.0) continue;
            add(r, idx(ks[t], 0), i1 * an * cs[t] / dz);
            add(r, idx(ks[t], 1), i2 * an * cs[t] / dz);
        }
    }

    // Boundary rows: (ATBC) with 3-point one-sided derivatives.
    const symbols::Matrix2c b_top =
        symbols::capacity_matrix(xi, s, profile.exterior(1)).matrix;
    const symbols::Matrix2c b_bot =
        symbols::capacity_matrix(xi, s, profile.exterior(2)).matrix;
    const cdouble alpha_top = 1.0 / (profile.mu().back() * sv);
    const cdouble alpha_bot = 1.0 / (profile.mu().front() * sv);

    {
        const int k = nz - 1;
        const double w0 = 1.5 / dz, w1 = -2.0 / dz, w2 = 0.5 / dz;
        // alpha (E1' - i xi1 E3) + B11 E1 + B12 E2 = g1
        int r = idx(k, 0);
        add(r, idx(k, 0), alpha_top * w0 + b_top(0, 0));
        add(r, idx(k - 1, 0), alpha_top * w1);
        add(r, idx(k - 2, 0), alpha_top * w2);
        add(r, idx(k, 2), -alpha_top * i1);
        add(r, idx(k, 1), b_top(0, 1));
        rhs[r] = boundary_data ? boundary_data->top1 : cdouble(0.0);
        // alpha (E2' - i xi2 E3) + B21 E1 + B22 E2 = g2
        r = idx(k, 1);
        add(r, idx(k, 1), alpha_top * w0 + b_top(1, 1));
        add(r, idx(k - 1, 1), alpha_top * w1);
        add(r, idx(k - 2, 1), alpha_top * w2);
        add(r, idx(k, 2), -alpha_top * i2);
        add(r, idx(k, 0), b_top(1, 0));
        rhs[r] = boundary_data ? boundary_data->top2 : cdouble(0.0);
    }
    {
        const int k = 0;
        const double w0 = -1.5 / dz, w1 = 2.0 / dz, w2 = -0.5 / dz;
        // -alpha (E1' - i xi1 E3) + B11 E1 + B12 E2 = g1
        int r = idx(k, 0);
        add(r, idx(k, 0), -alpha_bot * w0 + b_bot(0, 0));
        add(r, idx(k + 1, 0), -alpha_bot * w1);
        add(r, idx(k + 2, 0), -alpha_bot * w2);
        add(r, idx(k, 2), alpha_bot * i1);
        add(r, idx(k, 1), b_bot(0, 1));
        rhs[r] = boundary_data ? boundary_data->bottom1 : cdouble(0.0);
        // +alpha (i xi2 E3 - E2') + B21 E1 + B22 E2 = g2
        r = idx(k, 1);
        add(r, idx(k, 1), -alpha_bot * w0 + b_bot(1, 1));
        add(r, idx(k + 1, 1), -alpha_bot * w1);
        add(r, idx(k + 2, 1), -alpha_bot * w2);
        add(r, idx(k, 2), alpha_bot * i2);
        add(r, idx(k, 0), b_bot(1, 0));
        rhs[r] = boundary_data ? boundary_data->bottom2 : cdouble(0.0);
    }

    Eigen::SparseMatrix<cdouble> mat(dim, dim);
    mat.setFromTriplets(trip.begin(), trip.end());
    mat.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<cdouble>> lu;
    lu.analyzePattern(mat);
    lu.factorize(mat);
    if (lu.info() != Eigen::Success)
        throw IllConditionedSolveError(
            "solve_mode: singular per-mode factorization (unexpected for s1 > 0)");
    const Eigen::VectorXcd x = lu.solve(rhs);

    ModeSolution sol;
    sol.xi = xi;
    sol.s = sv;
    sol.nz = nz;
    sol.dz = dz;
    sol.e1.resize(nz);
    sol.e2.resize(nz);
    sol.e3.resize(nz);
    for (int k = 0; k < nz; ++k) {
        sol.e1[k] = x[idx(k, 0)];
        sol.e2[k] = x[idx(k, 1)];
        sol.e3[k] = x[idx(k, 2)];
    }
    const double bnorm = rhs.norm();
    sol.residual = bnorm > 0.0 ? (mat * x - rhs).norm() / bnorm : (mat * x).norm();
    return sol;
}

cdouble outgoing_extension(cdouble trace_value, const Xi& xi, const ComplexFrequency& s,
                           const symbols::ExteriorMedium& medium, double boundary_z, double z) {
    const cdouble b = symbols::beta(xi, s, medium);
    const double dist = medium.side == 1 ? z - boundary_z : boundary_z - z;
    if (dist < 0.0)
        throw DomainError("outgoing_extension: z must lie outside the slab on the given side");
    return trace_value * std::exp(-b * dist);
}

ModeCurl mode_curl(const ModeSolution& sol) {
    const int nz = sol.nz;
    const double dz = sol.dz;
    const cdouble i1(0.0, sol.xi.xi1), i2(0.0, sol.xi.xi2);
    auto ddz = [&](const std::vector<cdouble>& f, int k) -> cdouble {
        if (k == 0) return (-1.5 * f[0] + 2.0 * f[1] - 0.5 * f[2]) / dz;
        if (k == nz - 1) return (1.5 * f[nz - 1] - 2.0 * f[nz - 2] + 0.5 * f[nz - 3]) / dz;
        return (f[k + 1] - f[k - 1]) / (2.0 * dz);
    };
    ModeCurl c;
    c.c1.resize(nz);
    c.c2.resize(nz);
    c.c3.resize(nz);
    for (int k = 0; k < nz; ++k) {
        c.c1[k] = i2 * sol.e3[k] - ddz(sol.e2, k);
        c.c2[k] = ddz(sol.e1, k) - i1 * sol.e3[k];
        c.c3[k] = i1 * sol.e2[k] - i2 * sol.e1[k];
    }
    return c;
}

double mode_l2(std::span<const cdouble> f, double dz) {
    double sum = 0.0;
    const size_t n = f.size();
    for (size_t k = 0; k < n; ++k) {
        const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
        sum += w * std::norm(f[k]);
    }
    return std::sqrt(sum * dz);
}

double mode_l2(const std::vector<cdouble>& f1, const std::vector<cdouble>& f2,
               const std::vector<cdouble>& f3, double dz) {
    const double a = mode_l2(f1, dz), b = mode_l2(f2, dz), c = mode_l2(f3, dz);
    return std::sqrt(a * a + b * b + c * c);
}

double theorem_at_check(const ModeSolution& solution, const ModeSource& source,
                        const ComplexFrequency& s) {
    const double fnorm = mode_l2(source.f1, source.f2, source.f3, solution.dz);
    if (fnorm == 0.0) throw UndefinedRatioError("theorem_at_check: zero source");
    const ModeCurl c = mode_curl(solution);
    const double curl = mode_l2(c.c1, c.c2, c.c3, solution.dz);
    const double su = std::abs(solution.s) * mode_l2(solution.e1, solution.e2, solution.e3,
                                                     solution.dz);
    return (curl + su) * s.s1() / (std::abs(solution.s) * fnorm);
}

namespace {

double trace_div_norm(const Xi& xi, cdouble g1, cdouble g2) {
    const double q = 1.0 + xi.norm2();
    return std::sqrt((std::norm(g1) + std::norm(g2) + std::norm(xi.xi1 * g1 + xi.xi2 * g2)) /
                     std::sqrt(q));
}

}  // namespace

double lemma_es_check(const ModeSolution& solution, const ModeSource& source_term,
                      const ModeBoundaryData& boundary, const ComplexFrequency& s) {
    const double jnorm =
        mode_l2(source_term.f1, source_term.f2, source_term.f3, solution.dz);
    const double smod = std::abs(solution.s);
    const double vtop = trace_div_norm(solution.xi, boundary.top1, boundary.top2);
    const double vbot = trace_div_norm(solution.xi, boundary.bottom1, boundary.bottom2);
    const double rhs = smod * jnorm + (smod + smod * smod) * (vtop + vbot);
    if (rhs == 0.0) throw UndefinedRatioError("lemma_es_check: zero data");
    const ModeCurl c = mode_curl(solution);
    const double lhs = mode_l2(c.c1, c.c2, c.c3, solution.dz) +
                       smod * mode_l2(solution.e1, solution.e2, solution.e3, solution.dz);
    return lhs / (rhs / s.s1());
}

}  // namespace slabtbc::sdomain
