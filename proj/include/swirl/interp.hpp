#pragma once

#include <array>
#include <cmath>

#include "swirl/grid.hpp"
#include "swirl/meshmap.hpp"

namespace swirl {

// Cubic Lagrange along one grid line at fractional node position pos (in
// units of the computational spacing). Stencils shift at the ends, so only
// the interior values [0, n] are read.
inline double interp_line_rho(const Grid2D& g, double pos, int j) {
    const int n = g.n_rho();
    int base = std::clamp(static_cast<int>(std::floor(pos)), 1, n - 2);
    auto w = lagrange4_weights(pos - base);
    return w[0] * g.at(base - 1, j) + w[1] * g.at(base, j) + w[2] * g.at(base + 1, j) +
           w[3] * g.at(base + 2, j);
}

inline double interp_line_eta(const Grid2D& g, int i, double pos) {
    const int m = g.n_eta();
    int base = std::clamp(static_cast<int>(std::floor(pos)), 1, m - 2);
    auto w = lagrange4_weights(pos - base);
    return w[0] * g.at(i, base - 1) + w[1] * g.at(i, base) + w[2] * g.at(i, base + 1) +
           w[3] * g.at(i, base + 2);
}

// Bicubic point sampler in physical coordinates, extended across the
// symmetry boundaries by the field's parities (r about the axis, z about
// both z=0 and z=1/2, plus z-period 1). Points beyond r=1 return 0 and are
// counted as clipped.
class FieldSampler {
  public:
    FieldSampler(const Grid2D& g, const MeshPair& maps, Parity parity_r, Parity parity_z)
        : g_(&g), maps_(&maps), pr_(parity_r), pz_(parity_z) {}

    double operator()(double r, double z) const {
        double sign = 1.0;
        z -= std::floor(z + 0.5);  // wrap into [-1/2, 1/2)
        if (z < 0.0) {
            z = -z;
            if (pz_ == Parity::odd) sign = -sign;
        }
        if (z > 0.5) z = 0.5;
        if (r < 0.0) {
            r = -r;
            if (pr_ == Parity::odd) sign = -sign;
        }
        if (r > 1.0) {
            ++clipped_;
            return 0.0;
        }
        double rho = maps_->r.inverse(r);
        double eta = maps_->z.inverse(z);
        const int n = g_->n_rho(), m = g_->n_eta();
        double pr = rho / maps_->r.h(), pe = eta / maps_->z.h();
        int bi = std::clamp(static_cast<int>(std::floor(pr)), 1, n - 2);
        int bj = std::clamp(static_cast<int>(std::floor(pe)), 1, m - 2);
        auto wi = lagrange4_weights(pr - bi);
        auto wj = lagrange4_weights(pe - bj);
        double acc = 0.0;
        for (int q = 0; q < 4; ++q) {
            double rowv = wi[0] * g_->at(bi - 1, bj - 1 + q) + wi[1] * g_->at(bi, bj - 1 + q) +
                          wi[2] * g_->at(bi + 1, bj - 1 + q) + wi[3] * g_->at(bi + 2, bj - 1 + q);
            acc += wj[q] * rowv;
        }
        return sign * acc;
    }

    long long clipped() const { return clipped_; }
    void reset_clipped() const { clipped_ = 0; }

  private:
    const Grid2D* g_;
    const MeshPair* maps_;
    Parity pr_, pz_;
    mutable long long clipped_ = 0;
};

}  // namespace swirl
