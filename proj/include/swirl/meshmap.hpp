#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swirl/grid.hpp"
#include "swirl/num.hpp"

namespace swirl {

// Multi-phase mesh density specification: physical node k must land at mesh
// fraction k. Phase k spans [fraction k, fraction k+1] with a near-constant
// density, blended smoothly across phase boundaries.
struct PhaseSpec {
    std::vector<double> nodes;      // ascending, in (0, L)
    std::vector<double> fractions;  // ascending, in (0, 1)
    double transition_fraction = 0.3;

    void validate(double domain_length) const {
        if (nodes.size() != fractions.size())
            throw construction_error("PhaseSpec: nodes/fractions length mismatch");
        if (!(transition_fraction >= 0.0 && transition_fraction < 0.5))
            throw construction_error("PhaseSpec: transition_fraction outside [0, 0.5)");
        double prev_x = 0.0, prev_s = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (!(nodes[k] > prev_x))
                throw construction_error("PhaseSpec: phase " + std::to_string(k) +
                                         " has non-increasing physical nodes");
            if (!(fractions[k] > prev_s))
                throw construction_error("PhaseSpec: phase " + std::to_string(k) +
                                         " has non-increasing fractions");
            prev_x = nodes[k];
            prev_s = fractions[k];
        }
        if (!nodes.empty() && !(nodes.back() < domain_length))
            throw construction_error("PhaseSpec: last node not inside (0, L)");
        if (!fractions.empty() && !(fractions.back() < 1.0))
            throw construction_error("PhaseSpec: last fraction not inside (0, 1)");
    }

    bool operator==(const PhaseSpec&) const = default;

    std::string serialize() const {
        std::ostringstream os;
        os << "nodes=";
        for (std::size_t k = 0; k < nodes.size(); ++k) os << (k ? "," : "") << fmt_double(nodes[k]);
        os << ";fractions=";
        for (std::size_t k = 0; k < fractions.size(); ++k)
            os << (k ? "," : "") << fmt_double(fractions[k]);
        os << ";tf=" << fmt_double(transition_fraction);
        return os.str();
    }

    static PhaseSpec deserialize(const std::string& s) {
        PhaseSpec spec;
        spec.nodes.clear();
        spec.fractions.clear();
        auto parse_list = [](const std::string& body) {
            std::vector<double> out;
            std::string cur;
            std::istringstream is(body);
            while (std::getline(is, cur, ','))
                if (!cur.empty()) out.push_back(parse_double(cur));
            return out;
        };
        std::istringstream is(s);
        std::string part;
        while (std::getline(is, part, ';')) {
            auto eq = part.find('=');
            if (eq == std::string::npos) throw io_error("PhaseSpec: bad field '" + part + "'");
            std::string key = part.substr(0, eq), val = part.substr(eq + 1);
            if (key == "nodes")
                spec.nodes = parse_list(val);
            else if (key == "fractions")
                spec.fractions = parse_list(val);
            else if (key == "tf")
                spec.transition_fraction = parse_double(val);
            else
                throw io_error("PhaseSpec: unknown field '" + key + "'");
        }
        return spec;
    }
};

// Analytic monotone mesh map x = map(rho), rho in [0,1], with piecewise
// polynomial density (constant phase levels joined by C1 smoothstep ramps).
// The closed-form antiderivative makes map evaluation and phase-mass
// accounting exact, so node constraints are enforced to the fixed-point
// tolerance rather than a quadrature tolerance.
class MeshMap {
  public:
    static MeshMap build(const PhaseSpec& spec, int n, double domain_length) {
        spec.validate(domain_length);
        if (n < 2) throw construction_error("MeshMap: n must be >= 2");
        MeshMap m;
        m.spec_ = spec;
        m.n_ = n;
        m.h_ = 1.0 / n;
        m.L_ = domain_length;

        const std::size_t np = spec.nodes.size() + 1;  // phase count
        std::vector<double> S(np + 1), X(np + 1);
        S[0] = 0.0;
        X[0] = 0.0;
        for (std::size_t k = 0; k < spec.nodes.size(); ++k) {
            S[k + 1] = spec.fractions[k];
            X[k + 1] = spec.nodes[k];
        }
        S[np] = 1.0;
        X[np] = domain_length;

        std::vector<double> target(np), level(np);
        for (std::size_t k = 0; k < np; ++k) {
            target[k] = X[k + 1] - X[k];
            level[k] = target[k] / (S[k + 1] - S[k]);
            if (!(level[k] > 0.0))
                throw construction_error("MeshMap: phase " + std::to_string(k) +
                                         " implies non-positive density level");
        }
        std::vector<double> window(np + 1, 0.0);
        for (std::size_t k = 1; k < np; ++k)
            window[k] =
                spec.transition_fraction * std::min(S[k] - S[k - 1], S[k + 1] - S[k]);

        // Fixed-point rescaling of the levels so each phase carries exactly
        // its target mass despite the blend ramps. When neighboring levels
        // differ so much that a ramp alone overfills a narrow phase, the
        // windows are halved and the iteration retried; the piecewise-constant
        // limit is always feasible.
        bool converged = false;
        for (int attempt = 0; attempt < 8 && !converged; ++attempt) {
            for (std::size_t k = 0; k < np; ++k) level[k] = target[k] / (S[k + 1] - S[k]);
            for (int it = 0; it < 80; ++it) {
                m.build_segments(S, level, window);
                double worst = 0.0;
                for (std::size_t k = 0; k < np; ++k) {
                    double mass = m.map_unchecked(S[k + 1]) - m.map_unchecked(S[k]);
                    double ratio = target[k] / mass;
                    worst = std::max(worst, std::abs(ratio - 1.0));
                    level[k] *= ratio;
                }
                if (worst <= 1e-14) {
                    converged = true;
                    break;
                }
            }
            if (!converged)
                for (auto& w : window) w *= 0.5;
        }
        if (!converged)
            throw construction_error("MeshMap: node-constraint iteration did not converge");
        m.build_segments(S, level, window);

        // Final global normalization keeps map(1) = L to roundoff.
        double total = m.map_unchecked(1.0);
        double scale = domain_length / total;
        for (auto& l : level) l *= scale;
        m.build_segments(S, level, window);

        m.map_.resize(n + 1);
        m.dens_.resize(n + 1);
        m.dens1_.resize(n + 1);
        for (int i = 0; i <= n; ++i) {
            double rho = i * m.h_;
            m.map_[i] = m.map_unchecked(rho);
            m.dens_[i] = m.density_unchecked(rho);
            m.dens1_[i] = m.density_deriv_unchecked(rho);
        }
        m.map_[n] = domain_length;
        return m;
    }

    int n() const { return n_; }
    double h() const { return h_; }
    double domain_length() const { return L_; }
    const PhaseSpec& spec() const { return spec_; }

    double map(double rho) const {
        check_domain(rho);
        return map_unchecked(rho);
    }
    double density(double rho) const {
        check_domain(rho);
        return density_unchecked(rho);
    }
    double density_deriv(double rho) const {
        check_domain(rho);
        return density_deriv_unchecked(rho);
    }

    // Physical -> computational, by bisection + Newton to ~1e-13.
    double inverse(double x) const {
        if (x < -1e-12 || x > L_ + 1e-12) throw domain_error("MeshMap::inverse: x outside [0, L]");
        if (x <= 0.0) return 0.0;
        if (x >= L_) return 1.0;
        double rho = newton_bisect([&](double r) { return map_unchecked(r) - x; },
                                   [&](double r) { return density_unchecked(r); }, 0.0, 1.0,
                                   1e-13 * std::max(1.0, L_));
        return std::clamp(rho, 0.0, 1.0);
    }

    // Sampled values with parity extension: the map is odd about rho=0 and
    // about rho=1 (even density), so ghosts follow r(-s) = -r(s).
    double x(int i) const {
        if (i < 0) return -map_[-i];
        if (i > n_) return 2.0 * L_ - map_[2 * n_ - i];
        return map_[i];
    }
    double xp(int i) const {
        if (i < 0) return dens_[-i];
        if (i > n_) return dens_[2 * n_ - i];
        return dens_[i];
    }
    double xpp(int i) const {
        if (i < 0) return -dens1_[-i];
        if (i > n_) return -dens1_[2 * n_ - i];
        return dens1_[i];
    }

    double min_density() const {
        double m = dens_[0];
        for (double d : dens_) m = std::min(m, d);
        return m;
    }

    std::uint64_t fingerprint() const {
        std::uint64_t h = fnv1a64(&n_, sizeof(n_));
        h = fnv1a64(&L_, sizeof(L_), h);
        h = fnv1a64_doubles(map_, h);
        h = fnv1a64_doubles(dens_, h);
        return h;
    }

    bool operator==(const MeshMap& o) const {
        return n_ == o.n_ && L_ == o.L_ && map_ == o.map_ && dens_ == o.dens_;
    }

  private:
    struct Segment {
        double lo, hi;   // rho range
        double c[8];     // density = sum c_k u^k, u = (rho-lo)/(hi-lo)
        double cum;      // integral of density over [0, lo]
    };

    static void check_domain(double rho) {
        if (rho < -1e-15 || rho > 1.0 + 1e-15)
            throw domain_error("MeshMap: rho outside [0, 1]");
    }

    void build_segments(const std::vector<double>& S, const std::vector<double>& level,
                        const std::vector<double>& window) {
        segments_.clear();
        const std::size_t np = level.size();
        auto push_const = [&](double lo, double hi, double l) {
            if (hi - lo <= 0.0) return;
            segments_.push_back({lo, hi, {l, 0, 0, 0, 0, 0, 0, 0}, 0.0});
        };
        // C3 ramp (Perlin smootherstep of degree 7) keeps the map C4, which
        // the fourth-order inter-mesh transfer needs.
        auto push_blend = [&](double lo, double hi, double la, double lb) {
            if (hi - lo <= 0.0) return;
            double d = lb - la;
            segments_.push_back(
                {lo, hi, {la, 0, 0, 0, 35.0 * d, -84.0 * d, 70.0 * d, -20.0 * d}, 0.0});
        };
        double cursor = 0.0;
        for (std::size_t k = 0; k < np; ++k) {
            double hi_const = (k + 1 < np) ? S[k + 1] - 0.5 * window[k + 1] : 1.0;
            push_const(cursor, hi_const, level[k]);
            cursor = hi_const;
            if (k + 1 < np && window[k + 1] > 0.0) {
                push_blend(cursor, S[k + 1] + 0.5 * window[k + 1], level[k], level[k + 1]);
                cursor = S[k + 1] + 0.5 * window[k + 1];
            }
        }
        double acc = 0.0;
        for (auto& seg : segments_) {
            seg.cum = acc;
            acc += segment_mass(seg);
        }
    }

    static double segment_mass(const Segment& s) {
        double acc = 0.0;
        for (int k = 7; k >= 0; --k) acc = acc + s.c[k] / (k + 1);
        return (s.hi - s.lo) * acc;
    }

    const Segment& locate(double rho) const {
        int lo = 0, hi = static_cast<int>(segments_.size()) - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (rho > segments_[mid].hi)
                lo = mid + 1;
            else
                hi = mid;
        }
        return segments_[lo];
    }

    double map_unchecked(double rho) const {
        rho = std::clamp(rho, 0.0, 1.0);
        const Segment& s = locate(rho);
        double len = s.hi - s.lo;
        double u = (rho - s.lo) / len;
        double integ = 0.0;
        for (int k = 7; k >= 0; --k) integ = (integ + s.c[k] / (k + 1)) * u;
        return s.cum + len * integ;
    }

    double density_unchecked(double rho) const {
        rho = std::clamp(rho, 0.0, 1.0);
        const Segment& s = locate(rho);
        double u = (rho - s.lo) / (s.hi - s.lo);
        double acc = 0.0;
        for (int k = 7; k >= 0; --k) acc = acc * u + s.c[k];
        return acc;
    }

    double density_deriv_unchecked(double rho) const {
        rho = std::clamp(rho, 0.0, 1.0);
        const Segment& s = locate(rho);
        double len = s.hi - s.lo;
        double u = (rho - s.lo) / len;
        double acc = 0.0;
        for (int k = 7; k >= 1; --k) acc = acc * u + k * s.c[k];
        return acc / len;
    }

    PhaseSpec spec_;
    int n_ = 0;
    double h_ = 0.0, L_ = 0.0;
    std::vector<Segment> segments_;
    std::vector<double> map_, dens_, dens1_;
};

struct MeshPair {
    MeshMap r;  // L = 1
    MeshMap z;  // L = 1/2
};

// ---------------------------------------------------------------------------
// Mesh effectiveness
// ---------------------------------------------------------------------------

struct MEReport {
    Grid2D me_rho, me_eta;
    double mem_rho = 0.0, mem_eta = 0.0;
};

// ME_rho(v) = h_rho v_rho / ||v||_inf (and the eta analogue), with the same
// centered differences the solver uses. Ghosts are filled from the given
// parities before differencing.
inline MEReport mesh_effectiveness(Grid2D v, Parity rho0, Parity rho1, Parity eta) {
    const int n = v.n_rho(), m = v.n_eta();
    double norm = v.max_abs();
    if (norm == 0.0) throw domain_error("mesh_effectiveness: field is identically zero");
    fill_ghosts(v, rho0, rho1, eta);
    MEReport rep;
    rep.me_rho = Grid2D(n, m);
    rep.me_eta = Grid2D(n, m);
    for (int j = 0; j <= m; ++j) {
        for (int i = 0; i <= n; ++i) {
            double mr = (v.at(i + 1, j) - v.at(i - 1, j)) / (2.0 * norm);
            double me = (v.at(i, j + 1) - v.at(i, j - 1)) / (2.0 * norm);
            rep.me_rho.at(i, j) = mr;
            rep.me_eta.at(i, j) = me;
            rep.mem_rho = std::max(rep.mem_rho, std::abs(mr));
            rep.mem_eta = std::max(rep.mem_eta, std::abs(me));
        }
    }
    return rep;
}

inline MEReport mesh_effectiveness_default(const Grid2D& v) {
    return mesh_effectiveness(v, Parity::even, Parity::odd, Parity::odd);
}

// ---------------------------------------------------------------------------
// Period-dependent remesh policy
// ---------------------------------------------------------------------------

struct RemeshThresholds {
    double r_trigger = 0.2;      // fire when J_r < r_trigger * n2
    double z_trigger_p12 = 0.25; // fire when I < z_trigger_p12 * n1 (periods 1-2)
    double z_trigger_p3 = 0.23;  // fire when I_wz < z_trigger_p3 * n1 (period 3)
};

struct RemeshIndices {
    int J = 0;     // rho index of the 2D max of u1
    int J_r = 0;   // rho index of the max of u1_r along the row of u1's max
    int I = 0;     // eta index of the 2D max of omega1
    int I_wz = 0;  // eta index of the max of omega1_z along the column of omega1's max
    double w1_max = 0.0;
};

struct RemeshProposal {
    std::optional<PhaseSpec> r_spec, z_spec;
};

// Locate the peak/gradient-peak indices that drive the mesh update. Ghosts of
// u1 and w1 must be primed. Ties break to the lowest index.
inline RemeshIndices compute_remesh_indices(const Grid2D& u1, const Grid2D& w1,
                                            const MeshMap& mr, const MeshMap& mz) {
    RemeshIndices idx;
    int ju = 0;
    u1.max_value(&idx.J, &ju);
    int iw = 0;
    idx.w1_max = w1.max_value(&iw, &idx.I);
    // u1_r along the peak row (chain rule; r_rho > 0 so the argmax of u1_rho
    // weighted by 1/r_rho is what we scan)
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= u1.n_rho(); ++i) {
        double d = (u1.at(i + 1, ju) - u1.at(i - 1, ju)) / (2.0 * mr.h() * mr.xp(i));
        if (d > best) {
            best = d;
            idx.J_r = i;
        }
    }
    best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= w1.n_eta(); ++j) {
        double d = (w1.at(iw, j + 1) - w1.at(iw, j - 1)) / (2.0 * mz.h() * mz.xp(j));
        if (d > best) {
            best = d;
            idx.I_wz = j;
        }
    }
    return idx;
}

// Returns the new phase specs demanded by the active period's update rules,
// or nothing when no trigger fires. Pure in its inputs.
inline RemeshProposal remesh_check(const RemeshIndices& idx, const MeshMap& mr,
                                   const MeshMap& mz, int period,
                                   const RemeshThresholds& thr = {},
                                   double transition_fraction = 0.3) {
    RemeshProposal out;
    const int n2 = mr.n(), n1 = mz.n();

    auto three_node_spec = [&](double s1, double s2, double s3, double peak, double grad,
                               double k_up, double k_dn, double k_far) {
        double d = peak - grad;
        if (!(d > 0.0))
            throw numerical_error("remesh_check: degenerate peak (peak and gradient-peak coincide)");
        double x2 = peak + k_up * d;
        double x1 = std::max((s1 / s2) * x2, grad - k_dn * d);
        double x3 = std::max(k_far * peak, (x2 - x1) * (s3 - s2) / (s2 - s1) + x2);
        PhaseSpec s;
        s.nodes = {x1, x2, x3};
        s.fractions = {s1, s2, s3};
        s.transition_fraction = transition_fraction;
        return s;
    };

    if (period <= 2) {
        if (idx.w1_max > 0.0 && idx.I < thr.z_trigger_p12 * n1) {
            double zI = mz.x(idx.I);
            if (zI > 0.0) {
                PhaseSpec s;
                s.nodes = {2.0 * zI, 10.0 * zI};
                s.fractions = {0.6, 0.9};
                s.transition_fraction = transition_fraction;
                out.z_spec = s;
            }
        }
    } else {
        if (idx.w1_max > 0.0 && idx.I_wz < thr.z_trigger_p3 * n1)
            out.z_spec = three_node_spec(0.05, 0.65, 0.9, mz.x(idx.I), mz.x(idx.I_wz), 2.0,
                                         16.0, 2.3);
    }
    // The r update measures the front by the gap between the u1 peak and its
    // gradient peak, which only exists once the peak has left the axis.
    if (period == 2) {
        if (idx.J > 0 && idx.J_r < thr.r_trigger * n2)
            out.r_spec = three_node_spec(0.05, 0.6, 0.9, mr.x(idx.J), mr.x(idx.J_r), 2.0,
                                         5.0, 3.0);
    } else if (period == 3) {
        if (idx.J > 0 && idx.J_r < thr.r_trigger * n2)
            out.r_spec = three_node_spec(0.05, 0.65, 0.9, mr.x(idx.J), mr.x(idx.J_r), 10.0,
                                         3.0, 2.3);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Inter-mesh field transfer
// ---------------------------------------------------------------------------

// Resample a field living on (old_r, old_z) at the physical grid points of
// (new_r, new_z). Piecewise cubic Lagrange in each computational coordinate,
// applied tensor-product; stencils shift at the boundary so polynomials up to
// cubic in the old computational coordinates transfer exactly. Values at
// coincident nodes are snapped (bitwise no-op when the maps are identical).
inline Grid2D resample_field(const Grid2D& f, const MeshMap& old_r, const MeshMap& old_z,
                             const MeshMap& new_r, const MeshMap& new_z) {
    const int no_r = old_r.n(), no_z = old_z.n();
    const int nn_r = new_r.n(), nn_z = new_z.n();

    struct Loc {
        int base;
        double s;
        int exact;  // >= 0: coincident old node
    };
    auto locate_all = [](const MeshMap& om, const MeshMap& nm) {
        std::vector<Loc> locs(nm.n() + 1);
        for (int i = 0; i <= nm.n(); ++i) {
            double x = nm.x(i);
            double rho = om.inverse(std::clamp(x, 0.0, om.domain_length()));
            double pos = rho / om.h();
            int nearest = static_cast<int>(std::lround(pos));
            if (nearest >= 0 && nearest <= om.n() &&
                std::abs(x - om.x(nearest)) <= 1e-13 * std::max(1.0, std::abs(x))) {
                locs[i] = {nearest, 0.0, nearest};
                continue;
            }
            int base = std::clamp(static_cast<int>(std::floor(pos)), 1, om.n() - 2);
            locs[i] = {base, pos - base, -1};
        }
        return locs;
    };
    const auto lr = locate_all(old_r, new_r);
    const auto lz = locate_all(old_z, new_z);

    Grid2D tmp(nn_r, no_z);
    for (int j = 0; j <= no_z; ++j) {
        for (int i = 0; i <= nn_r; ++i) {
            const Loc& L = lr[i];
            if (L.exact >= 0) {
                tmp.at(i, j) = f.at(L.exact, j);
            } else {
                auto w = lagrange4_weights(L.s);
                tmp.at(i, j) = w[0] * f.at(L.base - 1, j) + w[1] * f.at(L.base, j) +
                               w[2] * f.at(L.base + 1, j) + w[3] * f.at(L.base + 2, j);
            }
        }
    }
    Grid2D out(nn_r, nn_z);
    for (int j = 0; j <= nn_z; ++j) {
        const Loc& L = lz[j];
        for (int i = 0; i <= nn_r; ++i) {
            if (L.exact >= 0) {
                out.at(i, j) = tmp.at(i, L.exact);
            } else {
                auto w = lagrange4_weights(L.s);
                out.at(i, j) = w[0] * tmp.at(i, L.base - 1) + w[1] * tmp.at(i, L.base) +
                               w[2] * tmp.at(i, L.base + 1) + w[3] * tmp.at(i, L.base + 2);
            }
        }
    }
    return out;
}

}  // namespace swirl
