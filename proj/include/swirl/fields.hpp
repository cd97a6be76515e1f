#pragma once

#include <cmath>

#include "swirl/grid.hpp"
#include "swirl/meshmap.hpp"

namespace swirl {

enum class SimMode { euler, navier_stokes };

// Primitive state of the transformed system: u1 = u^theta/r, w1 = omega^theta/r,
// psi1 = psi^theta/r, node-centered over (rho, eta) in [0,1]^2.
struct FieldState {
    Grid2D u1, w1, psi1;
    double t = 0.0;
    long long step = 0;

    FieldState() = default;
    FieldState(int n_rho, int n_eta) : u1(n_rho, n_eta), w1(n_rho, n_eta), psi1(n_rho, n_eta) {}
};

// Closed-form swirl profiles of the four initial-condition cases.
inline double initial_u1(int case_id, double r, double z) {
    const double s2 = sqr(std::sin(kPi * z));
    const double denom = 1.0 + 12.5 * s2;
    const double base = 12000.0 * std::pow(1.0 - r * r, 18);
    switch (case_id) {
        case 1:
            return base * std::sin(2.0 * kPi * z) / denom;
        case 2:
            return (base * std::sin(2.0 * kPi * z) +
                    std::pow(1.0 - r * r, 10) * std::sin(6.0 * kPi * z)) /
                   denom;
        case 3:
            return (base * std::sin(2.0 * kPi * z) +
                    42.0 * std::pow(1.0 - r * r, 6) * std::sin(10.0 * kPi * z)) /
                   denom;
        case 4:
            return base * std::sin(4.0 * kPi * z) / denom;
        default:
            throw domain_error("initial_u1: unknown case " + std::to_string(case_id));
    }
}

// Zero the impermeable-wall rows/columns and refresh all ghost bands. The
// transformed variables are even in r at the axis and odd in z about both
// z=0 and z=1/2; at r=1 all three are pinned to zero for Euler runs (psi1
// always, by no-flow). In Navier-Stokes mode the wall vorticity row is owned
// by the stepper, so only u1 and psi1 get pinned here.
inline void enforce_symmetry(FieldState& s, SimMode mode = SimMode::euler) {
    const int m = s.u1.n_eta();
    for (Grid2D* g : {&s.u1, &s.w1, &s.psi1}) {
        zero_row(*g, 0);
        zero_row(*g, m);
    }
    zero_col(s.u1, s.u1.n_rho());
    zero_col(s.psi1, s.psi1.n_rho());
    if (mode == SimMode::euler) zero_col(s.w1, s.w1.n_rho());
    fill_ghosts(s.u1, Parity::even, Parity::odd, Parity::odd);
    fill_ghosts(s.psi1, Parity::even, Parity::odd, Parity::odd);
    // w1 wall ghosts: Dirichlet reflection in Euler mode; even reflection in
    // NS mode so one-sided information is not destroyed near the wall row.
    fill_ghosts(s.w1, Parity::even, mode == SimMode::euler ? Parity::odd : Parity::even,
                Parity::odd);
}

// Sample the chosen case at the physical grid points. omega1 starts at zero;
// psi1 is filled by the caller's Poisson solve (identically zero forcing).
inline FieldState init_case(int case_id, const MeshPair& maps) {
    FieldState s(maps.r.n(), maps.z.n());
    for (int j = 0; j <= maps.z.n(); ++j) {
        double z = maps.z.x(j);
        for (int i = 0; i <= maps.r.n(); ++i) s.u1.at(i, j) = initial_u1(case_id, maps.r.x(i), z);
    }
    enforce_symmetry(s);
    return s;
}

// Full-period extension for dipole visualization: r in [-1,1], z in [-1/2,1/2].
// u1, w1, psi1 are all even in r and odd in z.
struct FullDomainGrids {
    std::vector<double> r, z;             // sizes 2n2+1, 2n1+1
    std::vector<std::vector<double>> u1, w1, psi1;  // [z index][r index]
};

inline FullDomainGrids extend_full_domain(const FieldState& s, const MeshPair& maps) {
    const int n2 = maps.r.n(), n1 = maps.z.n();
    FullDomainGrids out;
    out.r.resize(2 * n2 + 1);
    out.z.resize(2 * n1 + 1);
    for (int i = -n2; i <= n2; ++i) out.r[i + n2] = maps.r.x(std::abs(i)) * (i < 0 ? -1.0 : 1.0);
    for (int j = -n1; j <= n1; ++j) out.z[j + n1] = maps.z.x(std::abs(j)) * (j < 0 ? -1.0 : 1.0);
    auto extend = [&](const Grid2D& g) {
        std::vector<std::vector<double>> e(2 * n1 + 1, std::vector<double>(2 * n2 + 1));
        for (int j = -n1; j <= n1; ++j) {
            double sz = j < 0 ? -1.0 : 1.0;
            for (int i = -n2; i <= n2; ++i) e[j + n1][i + n2] = sz * g.at(std::abs(i), std::abs(j));
        }
        return e;
    };
    out.u1 = extend(s.u1);
    out.w1 = extend(s.w1);
    out.psi1 = extend(s.psi1);
    return out;
}

// Pole-condition defect: the second-order one-sided rho-derivative at the
// axis, relative to the field magnitude. Even fields have all odd derivatives
// vanishing at rho=0, so this quotient is O(h^3) and the invariant suite
// asserts it below 10 h^2.
inline double pole_parity_defect(const Grid2D& g, double h_rho) {
    const double norm = g.max_abs();
    if (norm == 0.0) return 0.0;
    double worst = 0.0;
    for (int j = 0; j <= g.n_eta(); ++j) {
        double one_sided =
            (-3.0 * g.at(0, j) + 4.0 * g.at(1, j) - g.at(2, j)) / (2.0 * h_rho);
        worst = std::max(worst, std::abs(one_sided) / norm);
    }
    return worst;
}

}  // namespace swirl
