#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "swirl/fields.hpp"
#include "swirl/interp.hpp"
#include "swirl/meshmap.hpp"
#include "swirl/stencil.hpp"

namespace swirl {

// ---------------------------------------------------------------------------
// Maximum tracking
// ---------------------------------------------------------------------------

struct MaxLocation {
    double R = 0.0, Z = 0.0;   // refined physical location
    double value = 0.0;        // quadratic-fit value at the refined point
    double R_raw = 0.0, Z_raw = 0.0;
    int i = 0, j = 0;          // grid argmax (lowest index wins ties)
};

// Grid argmax refined by a least-squares quadratic fit over the 3x3 physical
// neighborhood; the refinement is clamped to that neighborhood. An axis peak
// mirrors across r=0 (fields are even in r there).
inline MaxLocation track_maximum(const Grid2D& field, const MeshPair& maps) {
    MaxLocation loc;
    double vmax = field.max_value(&loc.i, &loc.j);
    loc.R_raw = maps.r.x(loc.i);
    loc.Z_raw = maps.z.x(loc.j);
    loc.R = loc.R_raw;
    loc.Z = loc.Z_raw;
    loc.value = vmax;

    const int n = field.n_rho(), m = field.n_eta();
    const int bj = std::clamp(loc.j, 1, m - 1);
    const bool mirror = (loc.i == 0);
    const int bi = mirror ? 0 : std::clamp(loc.i, 1, n - 1);

    double xs[3], ys[3], vs[3][3];
    for (int a = -1; a <= 1; ++a) {
        int gi = bi + a;
        xs[a + 1] = gi >= 0 ? maps.r.x(gi) : -maps.r.x(-gi);
        ys[a + 1] = maps.z.x(bj + a);
    }
    for (int b = -1; b <= 1; ++b)
        for (int a = -1; a <= 1; ++a) {
            int gi = std::abs(bi + a);
            vs[a + 1][b + 1] = field.at(gi, bj + b);
        }

    // v ~ c0 + c1 x + c2 y + c3 x^2 + c4 y^2 + c5 xy around the grid peak
    Eigen::Matrix<double, 6, 6> N = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> rhsv = Eigen::Matrix<double, 6, 1>::Zero();
    for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
            double x = xs[a] - loc.R_raw, y = ys[b] - loc.Z_raw;
            Eigen::Matrix<double, 6, 1> phi;
            phi << 1.0, x, y, x * x, y * y, x * y;
            N += phi * phi.transpose();
            rhsv += phi * vs[a][b];
        }
    Eigen::Matrix<double, 6, 1> c = N.ldlt().solve(rhsv);
    const double det = 4.0 * c[3] * c[4] - c[5] * c[5];
    if (std::isfinite(det) && std::abs(det) > 1e-300) {
        double dx = (-2.0 * c[4] * c[1] + c[5] * c[2]) / det;
        double dy = (c[5] * c[1] - 2.0 * c[3] * c[2]) / det;
        dx = std::clamp(dx, xs[0] - loc.R_raw, xs[2] - loc.R_raw);
        dy = std::clamp(dy, ys[0] - loc.Z_raw, ys[2] - loc.Z_raw);
        loc.R = loc.R_raw + dx;
        loc.Z = loc.Z_raw + dy;
        loc.value = c[0] + c[1] * dx + c[2] * dy + c[3] * dx * dx + c[4] * dy * dy +
                    c[5] * dx * dy;
        if (loc.R < 0.0) loc.R = -loc.R;  // mirrored axis peak
    }
    return loc;
}

// ---------------------------------------------------------------------------
// Scalar diagnostics
// ---------------------------------------------------------------------------

// E = 1/2 int (|u^r|^2 + |u^theta|^2 + |u^z|^2) r dr dz by mapped trapezoid
// quadrature (weights r r_rho z_eta h_rho h_eta, halved on the boundary).
inline double kinetic_energy(const VelocityGrids& vel, const MeshPair& maps) {
    const int n = maps.r.n(), m = maps.z.n();
    const double hh = maps.r.h() * maps.z.h();
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) {
        const double wz = (j == 0 || j == m) ? 0.5 : 1.0;
        const double zp = maps.z.xp(j);
        double rowacc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double wr = (i == 0 || i == n) ? 0.5 : 1.0;
            const double q = sqr(vel.ur.at(i, j)) + sqr(vel.utheta.at(i, j)) +
                             sqr(vel.uz.at(i, j));
            rowacc += wr * q * maps.r.x(i) * maps.r.xp(i);
        }
        acc += wz * zp * rowacc;
    }
    return 0.5 * acc * hh;
}

inline double bkm_accumulate(double bkm_prev, double t_prev, double wmax_prev, double t,
                             double wmax) {
    if (t < t_prev) throw domain_error("bkm_accumulate: time regression");
    return bkm_prev + 0.5 * (t - t_prev) * (wmax + wmax_prev);
}

// One row of the diagnostics CSV.
struct DiagnosticsRecord {
    double t = 0.0, dt = 0.0;
    double u1_max = 0.0, w1_max = 0.0, w_max = 0.0;
    double psi1_max = 0.0, psi1z_max = 0.0, u_max = 0.0;
    double energy = 0.0;
    double R = 0.0, Z = 0.0, R_over_Z = 0.0;
    double alignment = 0.0;
    double bkm = 0.0;
    double R_raw = 0.0, Z_raw = 0.0;

    static std::vector<std::string> csv_header() {
        return {"t",     "dt",        "u1_max", "w1_max", "w_max",  "psi1_max",
                "psi1z_max", "u_max", "energy", "R",      "Z",      "R_over_Z",
                "alignment", "bkm",   "R_raw",  "Z_raw"};
    }
    std::vector<double> csv_row() const {
        return {t, dt,     u1_max, w1_max, w_max, psi1_max, psi1z_max, u_max,
                energy, R, Z,      R_over_Z, alignment, bkm, R_raw,   Z_raw};
    }
};

inline DiagnosticsRecord compute_diagnostics(const FieldState& s, const VelocityGrids& vel,
                                             const MeshPair& maps, double dt,
                                             const DiagnosticsRecord* prev = nullptr) {
    DiagnosticsRecord d;
    d.t = s.t;
    d.dt = dt;
    d.u1_max = s.u1.max_abs();
    d.w1_max = s.w1.max_abs();
    d.psi1_max = s.psi1.max_abs();
    d.psi1z_max = vel.psi1z.max_abs();
    const VorticityVector w = vorticity_vector(s.u1, s.w1, maps);
    d.w_max = w.mag.max_abs();
    const int n = maps.r.n(), m = maps.z.n();
    double umax2 = 0.0;
    for (int j = 0; j <= m; ++j)
        for (int i = 0; i <= n; ++i)
            umax2 = std::max(umax2, sqr(vel.ur.at(i, j)) + sqr(vel.utheta.at(i, j)) +
                                        sqr(vel.uz.at(i, j)));
    d.u_max = std::sqrt(umax2);
    d.energy = kinetic_energy(vel, maps);

    MaxLocation loc = track_maximum(s.u1, maps);
    d.R = loc.R;
    d.Z = loc.Z;
    d.R_raw = loc.R_raw;
    d.Z_raw = loc.Z_raw;
    d.R_over_Z = loc.Z != 0.0 ? loc.R / loc.Z : 0.0;
    FieldSampler su1(s.u1, maps, Parity::even, Parity::odd);
    FieldSampler spz(vel.psi1z, maps, Parity::even, Parity::even);
    double u1_at = su1(loc.R, loc.Z);
    d.alignment = u1_at != 0.0 ? spz(loc.R, loc.Z) / u1_at : 0.0;

    if (prev)
        d.bkm = bkm_accumulate(prev->bkm, prev->t, prev->w_max, d.t, d.w_max);
    else
        d.bkm = 0.0;
    return d;
}

// ---------------------------------------------------------------------------
// Cross sections and spectra
// ---------------------------------------------------------------------------

struct CrossSections {
    std::vector<double> r;           // grid line r_i
    std::vector<double> u1_along_r;  // u1(r_i, Z)
    std::vector<double> psi1z_along_r;
    std::vector<double> z;           // grid line z_j
    std::vector<double> u1_along_z;  // u1(R, z_j)
    std::vector<double> psi1z_along_z;
};

// 1-D profiles along the grid lines through (R, Z), cubic in the transverse
// coordinate so the section lands exactly on R (or Z).
inline CrossSections cross_sections(const Grid2D& u1, const Grid2D& psi1z,
                                    const MeshPair& maps, double R, double Z) {
    CrossSections cs;
    const int n = maps.r.n(), m = maps.z.n();
    const double pe = maps.z.inverse(std::clamp(Z, 0.0, 0.5)) / maps.z.h();
    const double pr = maps.r.inverse(std::clamp(R, 0.0, 1.0)) / maps.r.h();
    cs.r.resize(n + 1);
    cs.u1_along_r.resize(n + 1);
    cs.psi1z_along_r.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        cs.r[i] = maps.r.x(i);
        cs.u1_along_r[i] = interp_line_eta(u1, i, pe);
        cs.psi1z_along_r[i] = interp_line_eta(psi1z, i, pe);
    }
    cs.z.resize(m + 1);
    cs.u1_along_z.resize(m + 1);
    cs.psi1z_along_z.resize(m + 1);
    for (int j = 0; j <= m; ++j) {
        cs.z[j] = maps.z.x(j);
        cs.u1_along_z[j] = interp_line_rho(u1, pr, j);
        cs.psi1z_along_z[j] = interp_line_rho(psi1z, pr, j);
    }
    return cs;
}

// Soft cutoff: smoothstep ramps on [0, ramp] and [1-ramp, 1], identically 1
// in between.
inline double soft_cutoff(double eta, double ramp = 0.1) {
    if (eta < ramp) return smoothstep(eta / ramp);
    if (eta > 1.0 - ramp) return smoothstep((1.0 - eta) / ramp);
    return 1.0;
}

// Fourier magnitudes of the z cross-section at r=R, taken as a function of
// eta: normalize by the section max, apply the soft cutoff, DFT over the n1
// samples. Returns modes 0..n1/2.
inline std::vector<double> spectrum_z(const Grid2D& field, const MeshPair& maps, double R,
                                      bool apply_cutoff = true, double ramp = 0.1) {
    const int m = maps.z.n();
    const double pr = maps.r.inverse(std::clamp(R, 0.0, 1.0)) / maps.r.h();
    std::vector<double> g(m);
    double norm = 0.0;
    for (int j = 0; j < m; ++j) {
        g[j] = interp_line_rho(field, pr, j);
        norm = std::max(norm, std::abs(g[j]));
    }
    if (norm > 0.0)
        for (auto& v : g) v /= norm;
    if (apply_cutoff)
        for (int j = 0; j < m; ++j) g[j] *= soft_cutoff(j * maps.z.h(), ramp);
    std::vector<double> mag(m / 2 + 1);
    for (int k = 0; k <= m / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (int j = 0; j < m; ++j) {
            double ang = -2.0 * kPi * k * j / m;
            re += g[j] * std::cos(ang);
            im += g[j] * std::sin(ang);
        }
        mag[k] = std::hypot(re, im);
    }
    return mag;
}

// ---------------------------------------------------------------------------
// Streamlines
// ---------------------------------------------------------------------------

// Interpolates the axisymmetric velocity triplet at arbitrary (r, z), with
// the parity/period extensions of each component.
class VelocitySampler {
  public:
    VelocitySampler(const VelocityGrids& vel, const MeshPair& maps)
        : ur_(vel.ur, maps, Parity::odd, Parity::even),
          ut_(vel.utheta, maps, Parity::odd, Parity::odd),
          uz_(vel.uz, maps, Parity::even, Parity::odd) {}

    // (u^r, u^theta, u^z); r must be >= 0
    std::array<double, 3> operator()(double r, double z) const {
        return {ur_(r, z), ut_(r, z), uz_(r, z)};
    }

  private:
    FieldSampler ur_, ut_, uz_;
};

struct StreamlinePoint {
    double s, x, y, z, r;
};

struct Streamline {
    std::vector<StreamlinePoint> points;
    bool truncated = false;  // non-finite sample or domain exit
};

// Classical 4-stage one-step integration of dX/ds = u(X) in Cartesian
// coordinates; terminates at max_steps or on domain exit (r > 1).
inline Streamline trace_streamline(const VelocitySampler& sampler, double r0, double z0,
                                   double theta0, double ds, int max_steps) {
    Streamline line;
    double x = r0 * std::cos(2.0 * kPi * theta0);
    double y = r0 * std::sin(2.0 * kPi * theta0);
    double z = z0;
    auto eval = [&](double px, double py, double pz, std::array<double, 3>& out) {
        double r = std::hypot(px, py);
        if (r > 1.0) return false;
        auto v = sampler(r, pz);
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2])) return false;
        if (r > 1e-14) {
            out = {v[0] * px / r - v[1] * py / r, v[0] * py / r + v[1] * px / r, v[2]};
        } else {
            out = {0.0, 0.0, v[2]};
        }
        return true;
    };
    line.points.push_back({0.0, x, y, z, std::hypot(x, y)});
    for (int k = 0; k < max_steps; ++k) {
        std::array<double, 3> k1{}, k2{}, k3{}, k4{};
        if (!eval(x, y, z, k1) ||
            !eval(x + 0.5 * ds * k1[0], y + 0.5 * ds * k1[1], z + 0.5 * ds * k1[2], k2) ||
            !eval(x + 0.5 * ds * k2[0], y + 0.5 * ds * k2[1], z + 0.5 * ds * k2[2], k3) ||
            !eval(x + ds * k3[0], y + ds * k3[1], z + ds * k3[2], k4)) {
            line.truncated = true;
            break;
        }
        x += ds / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y += ds / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        z += ds / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
        line.points.push_back({(k + 1) * ds, x, y, z, std::hypot(x, y)});
        if (std::hypot(x, y) > 1.0) {
            line.truncated = true;
            break;
        }
    }
    return line;
}

}  // namespace swirl
