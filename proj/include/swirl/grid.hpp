#pragma once

#include <cmath>
#include <cstring>
#include <vector>

#include "swirl/num.hpp"

namespace swirl {

// Node-centered scalar field over the computational unit square.
// Interior nodes are (i,j) with i in [0,n_rho], j in [0,n_eta]; a ghost band
// of width 2 (the stencil half-width) surrounds them. Storage is rho-fastest.
class Grid2D {
  public:
    static constexpr int ghost = 2;

    Grid2D() = default;
    Grid2D(int n_rho, int n_eta)
        : nr_(n_rho), ne_(n_eta), stride_(n_rho + 1 + 2 * ghost),
          data_((n_rho + 1 + 2 * ghost) * (n_eta + 1 + 2 * ghost), 0.0) {}

    int n_rho() const { return nr_; }
    int n_eta() const { return ne_; }

    double& at(int i, int j) { return data_[(j + ghost) * stride_ + (i + ghost)]; }
    double at(int i, int j) const { return data_[(j + ghost) * stride_ + (i + ghost)]; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    double max_abs() const {
        double m = 0.0;
        for (int j = 0; j <= ne_; ++j)
            for (int i = 0; i <= nr_; ++i) m = std::max(m, std::abs(at(i, j)));
        return m;
    }

    // Signed maximum over interior nodes; ties take the lowest (j,i) pair.
    double max_value(int* arg_i = nullptr, int* arg_j = nullptr) const {
        double m = -std::numeric_limits<double>::infinity();
        int bi = 0, bj = 0;
        for (int j = 0; j <= ne_; ++j)
            for (int i = 0; i <= nr_; ++i)
                if (at(i, j) > m) {
                    m = at(i, j);
                    bi = i;
                    bj = j;
                }
        if (arg_i) *arg_i = bi;
        if (arg_j) *arg_j = bj;
        return m;
    }

    bool all_finite() const {
        for (int j = 0; j <= ne_; ++j)
            for (int i = 0; i <= nr_; ++i)
                if (!std::isfinite(at(i, j))) return false;
        return true;
    }

    bool same_shape(const Grid2D& o) const { return nr_ == o.nr_ && ne_ == o.ne_; }

    bool operator==(const Grid2D& o) const {
        return nr_ == o.nr_ && ne_ == o.ne_ && data_ == o.data_;
    }

    const std::vector<double>& raw() const { return data_; }

  private:
    int nr_ = 0, ne_ = 0, stride_ = 0;
    std::vector<double> data_;
};

enum class Parity { even, odd };

// Populate the ghost band from the interior values:
//  - rho=0 axis: even or odd reflection (pole condition),
//  - rho=1 wall: odd reflection about a pinned zero row (Dirichlet) or even
//    reflection (zero normal derivative),
//  - eta boundaries: periodic-odd (odd about both z=0 and z=1/2) for odd
//    fields, even reflection otherwise.
inline void fill_ghosts(Grid2D& g, Parity rho0, Parity rho1, Parity eta) {
    const int n = g.n_rho(), m = g.n_eta();
    const double sr0 = rho0 == Parity::even ? 1.0 : -1.0;
    const double sr1 = rho1 == Parity::even ? 1.0 : -1.0;
    const double se = eta == Parity::even ? 1.0 : -1.0;
    for (int j = 0; j <= m; ++j) {
        for (int k = 1; k <= Grid2D::ghost; ++k) {
            g.at(-k, j) = sr0 * g.at(k, j);
            g.at(n + k, j) = sr1 * g.at(n - k, j);
        }
    }
    for (int k = 1; k <= Grid2D::ghost; ++k) {
        for (int i = -Grid2D::ghost; i <= n + Grid2D::ghost; ++i) {
            g.at(i, -k) = se * g.at(i, k);
            g.at(i, m + k) = se * g.at(i, m - k);
        }
    }
}

inline void zero_row(Grid2D& g, int j) {
    for (int i = 0; i <= g.n_rho(); ++i) g.at(i, j) = 0.0;
}

inline void zero_col(Grid2D& g, int i) {
    for (int j = 0; j <= g.n_eta(); ++j) g.at(i, j) = 0.0;
}

}  // namespace swirl
