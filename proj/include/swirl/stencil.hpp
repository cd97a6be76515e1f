#pragma once

#include <cmath>
#include <functional>

#include "swirl/fields.hpp"
#include "swirl/meshmap.hpp"

namespace swirl {

// Second-order centered differences in the computational coordinate, mapped
// to physical derivatives by the chain rule:
//   v_x  = v_rho / x_rho
//   v_xx = (v_rhorho - v_rho * x_rhorho / x_rho) / x_rho^2
// Ghost layers must be primed for the field's parity before calling.

struct Deriv1 {
    double d1;  // first physical derivative
    double d2;  // second physical derivative
};

inline double d_rho(const Grid2D& v, int i, int j, double h) {
    return (v.at(i + 1, j) - v.at(i - 1, j)) / (2.0 * h);
}
inline double d_eta(const Grid2D& v, int i, int j, double h) {
    return (v.at(i, j + 1) - v.at(i, j - 1)) / (2.0 * h);
}
inline double d2_rho(const Grid2D& v, int i, int j, double h) {
    return (v.at(i + 1, j) - 2.0 * v.at(i, j) + v.at(i - 1, j)) / (h * h);
}
inline double d2_eta(const Grid2D& v, int i, int j, double h) {
    return (v.at(i, j + 1) - 2.0 * v.at(i, j) + v.at(i, j - 1)) / (h * h);
}

inline Deriv1 deriv_r(const Grid2D& v, int i, int j, const MeshMap& mr) {
    const double h = mr.h();
    const double vp = d_rho(v, i, j, h);
    const double vpp = d2_rho(v, i, j, h);
    const double xp = mr.xp(i), xpp = mr.xpp(i);
    return {vp / xp, (vpp - vp * xpp / xp) / (xp * xp)};
}

inline Deriv1 deriv_z(const Grid2D& v, int i, int j, const MeshMap& mz) {
    const double h = mz.h();
    const double vp = d_eta(v, i, j, h);
    const double vpp = d2_eta(v, i, j, h);
    const double xp = mz.xp(j), xpp = mz.xpp(j);
    return {vp / xp, (vpp - vp * xpp / xp) / (xp * xp)};
}

inline Grid2D d_dr(const Grid2D& v, const MeshMap& mr) {
    Grid2D out(v.n_rho(), v.n_eta());
    for (int j = 0; j <= v.n_eta(); ++j)
        for (int i = 0; i <= v.n_rho(); ++i) out.at(i, j) = deriv_r(v, i, j, mr).d1;
    return out;
}

inline Grid2D d_dz(const Grid2D& v, const MeshMap& mz) {
    Grid2D out(v.n_rho(), v.n_eta());
    for (int j = 0; j <= v.n_eta(); ++j)
        for (int i = 0; i <= v.n_rho(); ++i) out.at(i, j) = deriv_z(v, i, j, mz).d1;
    return out;
}

inline Grid2D d2_dr2(const Grid2D& v, const MeshMap& mr) {
    Grid2D out(v.n_rho(), v.n_eta());
    for (int j = 0; j <= v.n_eta(); ++j)
        for (int i = 0; i <= v.n_rho(); ++i) out.at(i, j) = deriv_r(v, i, j, mr).d2;
    return out;
}

inline Grid2D d2_dz2(const Grid2D& v, const MeshMap& mz) {
    Grid2D out(v.n_rho(), v.n_eta());
    for (int j = 0; j <= v.n_eta(); ++j)
        for (int i = 0; i <= v.n_rho(); ++i) out.at(i, j) = deriv_z(v, i, j, mz).d2;
    return out;
}

// Per-axis chain-rule factors hoisted out of the stencil loops.
struct AxisCoef {
    std::vector<double> inv_xp;   // 1 / x_rho
    std::vector<double> curv;     // x_rhorho / x_rho (for the second-derivative map term)
    std::vector<double> x;        // physical coordinate
    double h;

    explicit AxisCoef(const MeshMap& m) : h(m.h()) {
        const int n = m.n();
        inv_xp.resize(n + 1);
        curv.resize(n + 1);
        x.resize(n + 1);
        for (int i = 0; i <= n; ++i) {
            inv_xp[i] = 1.0 / m.xp(i);
            curv[i] = m.xpp(i) * inv_xp[i];
            x[i] = m.x(i);
        }
    }
};

// In-plane and swirl velocities recovered from the stream function:
//   u^r = -r psi1_z,  u^z = 2 psi1 + r psi1_r,  u^theta = r u1.
struct VelocityGrids {
    Grid2D ur, uz, utheta;
    Grid2D psi1z, u1z, u1r;  // caches reused by the vorticity vector and diagnostics
};

inline void velocity_from_psi(const Grid2D& psi1, const Grid2D& u1, const MeshPair& maps,
                              VelocityGrids& out) {
    const int n = psi1.n_rho(), m = psi1.n_eta();
    if (!out.ur.same_shape(psi1)) {
        out.ur = Grid2D(n, m);
        out.uz = Grid2D(n, m);
        out.utheta = Grid2D(n, m);
        out.psi1z = Grid2D(n, m);
        out.u1z = Grid2D(n, m);
        out.u1r = Grid2D(n, m);
    }
    const AxisCoef cr(maps.r), cz(maps.z);
    const double ihr = 1.0 / (2.0 * cr.h), ihz = 1.0 / (2.0 * cz.h);
    for (int j = 0; j <= m; ++j) {
        const double izp = cz.inv_xp[j] * ihz;
        for (int i = 0; i <= n; ++i) {
            const double r = cr.x[i];
            const double irp = cr.inv_xp[i] * ihr;
            const double pz = (psi1.at(i, j + 1) - psi1.at(i, j - 1)) * izp;
            const double pr = (psi1.at(i + 1, j) - psi1.at(i - 1, j)) * irp;
            out.psi1z.at(i, j) = pz;
            out.ur.at(i, j) = -r * pz;
            out.uz.at(i, j) = 2.0 * psi1.at(i, j) + r * pr;
            out.utheta.at(i, j) = r * u1.at(i, j);
            out.u1z.at(i, j) = (u1.at(i, j + 1) - u1.at(i, j - 1)) * izp;
            out.u1r.at(i, j) = (u1.at(i + 1, j) - u1.at(i - 1, j)) * irp;
        }
    }
}

inline VelocityGrids velocity_from_psi(const Grid2D& psi1, const Grid2D& u1,
                                       const MeshPair& maps) {
    VelocityGrids v;
    velocity_from_psi(psi1, u1, maps, v);
    return v;
}

// omega = (omega^theta, omega^r, omega^z) = (r w1, -r u1_z, 2 u1 + r u1_r).
struct VorticityVector {
    Grid2D w_theta, w_r, w_z, mag;
};

inline VorticityVector vorticity_vector(const Grid2D& u1, const Grid2D& w1,
                                        const MeshPair& maps) {
    const int n = u1.n_rho(), m = u1.n_eta();
    VorticityVector out{Grid2D(n, m), Grid2D(n, m), Grid2D(n, m), Grid2D(n, m)};
    for (int j = 0; j <= m; ++j) {
        for (int i = 0; i <= n; ++i) {
            const double r = maps.r.x(i);
            const double wt = r * w1.at(i, j);
            const double wr = -r * deriv_z(u1, i, j, maps.z).d1;
            const double wz = 2.0 * u1.at(i, j) + r * deriv_r(u1, i, j, maps.r).d1;
            out.w_theta.at(i, j) = wt;
            out.w_r.at(i, j) = wr;
            out.w_z.at(i, j) = wz;
            out.mag.at(i, j) = std::sqrt(wt * wt + wr * wr + wz * wz);
        }
    }
    return out;
}

struct Tendencies {
    Grid2D du1, dw1;
};

// Optional manufactured source; add(t, i, j) returns (f_u1, f_w1).
using SourceTerm = std::function<std::pair<double, double>(double t, int i, int j)>;

// Right-hand sides of the transformed momentum/vorticity equations:
//   u1_t = -u^r u1_r - u^z u1_z + 2 u1 psi1_z + nu (u1_rr + (3/r) u1_r + u1_zz)
//   w1_t = -u^r w1_r - u^z w1_z + 2 u1 u1_z  + nu (w1_rr + (3/r) w1_r + w1_zz)
// The (3/r) d_r term at the axis column takes its even-field limit 3 d_rr.
inline void rhs(const FieldState& s, const VelocityGrids& vel, const MeshPair& maps,
                double nu, Tendencies& out, const SourceTerm* src = nullptr) {
    const int n = s.u1.n_rho(), m = s.u1.n_eta();
    if (!out.du1.same_shape(s.u1)) {
        out.du1 = Grid2D(n, m);
        out.dw1 = Grid2D(n, m);
    }
    const AxisCoef cr(maps.r), cz(maps.z);
    const double ihr = 1.0 / (2.0 * cr.h), ihr2 = 1.0 / (cr.h * cr.h);
    const double ihz = 1.0 / (2.0 * cz.h), ihz2 = 1.0 / (cz.h * cz.h);
    for (int j = 0; j <= m; ++j) {
        const bool boundary_row = (j == 0 || j == m);
        const double izp = boundary_row ? 0.0 : cz.inv_xp[j];
        const double zcurv = boundary_row ? 0.0 : cz.curv[j];
        for (int i = 0; i <= n; ++i) {
            if (boundary_row || i == n) {
                out.du1.at(i, j) = 0.0;
                out.dw1.at(i, j) = 0.0;
                continue;
            }
            const double irp = cr.inv_xp[i];
            const auto drv = [&](const Grid2D& v) {
                const double vp = (v.at(i + 1, j) - v.at(i - 1, j)) * ihr;
                const double vpp = (v.at(i + 1, j) - 2.0 * v.at(i, j) + v.at(i - 1, j)) * ihr2;
                return Deriv1{vp * irp, (vpp - vp * cr.curv[i]) * irp * irp};
            };
            const auto dzv = [&](const Grid2D& v) {
                const double vp = (v.at(i, j + 1) - v.at(i, j - 1)) * ihz;
                const double vpp = (v.at(i, j + 1) - 2.0 * v.at(i, j) + v.at(i, j - 1)) * ihz2;
                return Deriv1{vp * izp, (vpp - vp * zcurv) * izp * izp};
            };
            const auto u_r = drv(s.u1);
            const auto u_z = dzv(s.u1);
            const auto w_r = drv(s.w1);
            const auto w_z = dzv(s.w1);
            const double ur = vel.ur.at(i, j), uz = vel.uz.at(i, j);
            const double psz = vel.psi1z.at(i, j);

            double visc_u = 0.0, visc_w = 0.0;
            if (nu != 0.0) {
                if (i == 0) {
                    visc_u = nu * (4.0 * u_r.d2 + u_z.d2);
                    visc_w = nu * (4.0 * w_r.d2 + w_z.d2);
                } else {
                    const double three_over_r = 3.0 / cr.x[i];
                    visc_u = nu * (u_r.d2 + three_over_r * u_r.d1 + u_z.d2);
                    visc_w = nu * (w_r.d2 + three_over_r * w_r.d1 + w_z.d2);
                }
            }
            double du = -ur * u_r.d1 - uz * u_z.d1 + 2.0 * s.u1.at(i, j) * psz + visc_u;
            double dw = -ur * w_r.d1 - uz * w_z.d1 + 2.0 * s.u1.at(i, j) * u_z.d1 + visc_w;
            if (src) {
                auto [fu, fw] = (*src)(s.t, i, j);
                du += fu;
                dw += fw;
            }
            out.du1.at(i, j) = du;
            out.dw1.at(i, j) = dw;
        }
    }
}

inline Tendencies rhs(const FieldState& s, const VelocityGrids& vel, const MeshPair& maps,
                      double nu, const SourceTerm* src = nullptr) {
    Tendencies t;
    rhs(s, vel, maps, nu, t, src);
    return t;
}

}  // namespace swirl
