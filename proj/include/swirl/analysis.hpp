#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "swirl/diagnostics.hpp"
#include "swirl/interp.hpp"
#include "swirl/io.hpp"
#include "swirl/stencil.hpp"

namespace swirl {

// ---------------------------------------------------------------------------
// Power-law fitting
// ---------------------------------------------------------------------------

enum class Transform {
    plain,          // g = y            (linear decay, e.g. Z(t) for case 4)
    inverse,        // g = 1/y
    inverse_power,  // g = y^(-q)
    square,         // g = y^2
    log_corrected,  // g = (log(y2) * y)^(-2), takes a second series
};

struct FitResult {
    Transform transform = Transform::inverse;
    double q = 0.0;
    double slope = 0.0, intercept = 0.0;
    double T_est = 0.0;  // -intercept/slope: the time where the fitted line crosses zero
    double r_square = 0.0;
    double t1 = 0.0, t2 = 0.0;
    int samples = 0;
};

inline const char* transform_name(Transform t) {
    switch (t) {
        case Transform::plain: return "plain";
        case Transform::inverse: return "inverse";
        case Transform::inverse_power: return "inverse_power";
        case Transform::square: return "square";
        case Transform::log_corrected: return "log_corrected";
    }
    return "?";
}

// Ordinary least squares of g(y) against t over the window [t1, t2].
inline FitResult fit_power_law(const std::vector<double>& t, const std::vector<double>& y,
                               Transform transform, double t1, double t2, double q = 0.0,
                               const std::vector<double>* y2 = nullptr) {
    if (t.size() != y.size()) throw domain_error("fit_power_law: series length mismatch");
    if (transform == Transform::log_corrected && (!y2 || y2->size() != y.size()))
        throw domain_error("fit_power_law: log_corrected needs the companion series");

    std::vector<double> ts, gs;
    std::string offending;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t1 || t[k] > t2) continue;
        double g;
        switch (transform) {
            case Transform::plain: g = y[k]; break;
            case Transform::square: g = y[k] * y[k]; break;
            case Transform::inverse:
            case Transform::inverse_power: {
                if (y[k] <= 0.0) {
                    offending += " (t=" + fmt_double(t[k]) + ", y=" + fmt_double(y[k]) + ")";
                    continue;
                }
                g = transform == Transform::inverse ? 1.0 / y[k] : std::pow(y[k], -q);
                break;
            }
            case Transform::log_corrected: {
                double yy2 = (*y2)[k];
                if (y[k] <= 0.0 || yy2 <= 0.0) {
                    offending += " (t=" + fmt_double(t[k]) + ")";
                    continue;
                }
                double base = std::log(yy2) * y[k];
                if (base == 0.0) {
                    offending += " (t=" + fmt_double(t[k]) + ")";
                    continue;
                }
                g = 1.0 / (base * base);
                break;
            }
            default: throw domain_error("fit_power_law: bad transform");
        }
        ts.push_back(t[k]);
        gs.push_back(g);
    }
    if (!offending.empty())
        throw domain_error("fit_power_law: non-positive samples under a power transform:" +
                           offending);
    if (ts.size() < 10)
        throw domain_error("fit_power_law: need >= 10 samples in window, have " +
                           std::to_string(ts.size()));

    const std::size_t n = ts.size();
    double tbar = 0.0, gbar = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        tbar += ts[k];
        gbar += gs[k];
    }
    tbar /= double(n);
    gbar /= double(n);
    double stt = 0.0, stg = 0.0, sgg = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double dt = ts[k] - tbar, dg = gs[k] - gbar;
        stt += dt * dt;
        stg += dt * dg;
        sgg += dg * dg;
    }
    FitResult f;
    f.transform = transform;
    f.q = q;
    f.t1 = t1;
    f.t2 = t2;
    f.samples = static_cast<int>(n);
    f.slope = stg / stt;
    f.intercept = gbar - f.slope * tbar;
    f.T_est = f.slope != 0.0 ? tbar - gbar / f.slope : std::numeric_limits<double>::quiet_NaN();
    double ss_res = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        ss_res += sqr(gs[k] - (f.intercept + f.slope * ts[k]));
    f.r_square = sgg > 0.0 ? 1.0 - ss_res / sgg : 1.0;
    return f;
}

// ---------------------------------------------------------------------------
// Dynamically rescaled profiles
// ---------------------------------------------------------------------------

struct RescaledProfile {
    std::vector<double> xi, zeta;
    std::vector<std::vector<double>> values;  // [zeta index][xi index]
    double R = 0.0, Z = 0.0, t = 0.0, norm = 1.0;
    double clipped_fraction = 0.0;
};

// Sample field(R + Z xi, Z zeta) on an m x m grid, optionally normalized by
// the field's sup norm. Points beyond r=1 or past the z period are clipped
// to zero and counted.
inline RescaledProfile rescale_profile(const Grid2D& field, const MeshPair& maps, double R,
                                       double Z, double xi_min, double xi_max, double zeta_min,
                                       double zeta_max, int m, bool normalize = true,
                                       Parity parity_r = Parity::even,
                                       Parity parity_z = Parity::odd, double t = 0.0) {
    if (!(Z > 0.0)) throw domain_error("rescale_profile: Z must be > 0");
    if (m < 2) throw domain_error("rescale_profile: m must be >= 2");
    RescaledProfile p;
    p.R = R;
    p.Z = Z;
    p.t = t;
    p.norm = normalize ? field.max_abs() : 1.0;
    if (p.norm == 0.0) p.norm = 1.0;
    p.xi.resize(m);
    p.zeta.resize(m);
    for (int k = 0; k < m; ++k) {
        p.xi[k] = xi_min + (xi_max - xi_min) * k / (m - 1);
        p.zeta[k] = zeta_min + (zeta_max - zeta_min) * k / (m - 1);
    }
    FieldSampler sampler(field, maps, parity_r, parity_z);
    sampler.reset_clipped();
    p.values.assign(m, std::vector<double>(m, 0.0));
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a)
            p.values[b][a] = sampler(R + Z * p.xi[a], Z * p.zeta[b]) / p.norm;
    p.clipped_fraction = double(sampler.clipped()) / double(m) / double(m);
    return p;
}

inline double profile_sup_distance(const RescaledProfile& a, const RescaledProfile& b) {
    if (a.values.size() != b.values.size()) throw domain_error("profile grids differ");
    double d = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j)
        for (std::size_t i = 0; i < a.values[j].size(); ++i)
            d = std::max(d, std::abs(a.values[j][i] - b.values[j][i]));
    return d;
}

// ---------------------------------------------------------------------------
// Resolution study
// ---------------------------------------------------------------------------

struct ErrorRow {
    double p = 0.0;
    double e = 0.0;
    double beta = std::numeric_limits<double>::quiet_NaN();
};

using ErrorTable = std::map<std::string, std::vector<ErrorRow>>;

// beta_p = log_{p/p_prev}(e_prev / e_p), the observed order between
// consecutive meshes. Pure algebra, exposed for unit testing.
inline void fill_betas(std::vector<ErrorRow>& rows) {
    for (std::size_t k = 1; k < rows.size(); ++k) {
        double ratio = rows[k].p / rows[k - 1].p;
        if (rows[k].e > 0.0 && rows[k - 1].e > 0.0 && ratio > 1.0)
            rows[k].beta = std::log(rows[k - 1].e / rows[k].e) / std::log(ratio);
    }
}

namespace detail {
struct SnapshotFields {
    MeshPair maps;
    Grid2D u1, w1, psi1;
    VelocityGrids vel;
    VorticityVector wv;
    double energy = 0.0;
};

inline SnapshotFields prepare_snapshot(const SnapshotData& s) {
    SnapshotFields f{s.build_maps(), s.u1, s.w1, s.psi1, {}, {}, 0.0};
    fill_ghosts(f.u1, Parity::even, Parity::odd, Parity::odd);
    fill_ghosts(f.w1, Parity::even, Parity::odd, Parity::odd);
    fill_ghosts(f.psi1, Parity::even, Parity::odd, Parity::odd);
    velocity_from_psi(f.psi1, f.u1, f.maps, f.vel);
    f.wv = vorticity_vector(f.u1, f.w1, f.maps);
    f.energy = kinetic_energy(f.vel, f.maps);
    return f;
}
}  // namespace detail

// Sup-norm relative errors of each coarse run against the reference run
// (interpolated to the coarse mesh), plus scalar-norm errors, at one matched
// time. runs/ps must be ordered coarse to fine.
inline ErrorTable resolution_study(const std::vector<SnapshotData>& runs,
                                   const std::vector<double>& ps, const SnapshotData& reference,
                                   double t_tol = 1e-9) {
    if (runs.size() != ps.size() || runs.empty())
        throw domain_error("resolution_study: runs/ps mismatch");
    for (const auto& r : runs)
        if (std::abs(r.t - reference.t) > t_tol)
            throw domain_error("resolution_study: snapshot times mismatch: " + fmt_double(r.t) +
                               " vs " + fmt_double(reference.t));

    auto ref = detail::prepare_snapshot(reference);
    ErrorTable table;

    auto func_error = [&](const detail::SnapshotFields& run, const Grid2D& coarse,
                          const Grid2D& fine, Parity pr, Parity pz) {
        FieldSampler sampler(fine, ref.maps, pr, pz);
        double num = 0.0, den = 0.0;
        const int n = run.maps.r.n(), m = run.maps.z.n();
        for (int j = 0; j <= m; ++j)
            for (int i = 0; i <= n; ++i) {
                double hat = sampler(run.maps.r.x(i), run.maps.z.x(j));
                num = std::max(num, std::abs(coarse.at(i, j) - hat));
                den = std::max(den, std::abs(hat));
            }
        return num / den;
    };

    for (std::size_t k = 0; k < runs.size(); ++k) {
        auto run = detail::prepare_snapshot(runs[k]);
        const double p = ps[k];
        table["u1"].push_back({p, func_error(run, run.u1, ref.u1, Parity::even, Parity::odd)});
        table["w1"].push_back({p, func_error(run, run.w1, ref.w1, Parity::even, Parity::odd)});
        table["psi1"].push_back(
            {p, func_error(run, run.psi1, ref.psi1, Parity::even, Parity::odd)});
        table["ur"].push_back(
            {p, func_error(run, run.vel.ur, ref.vel.ur, Parity::odd, Parity::even)});
        table["uz"].push_back(
            {p, func_error(run, run.vel.uz, ref.vel.uz, Parity::even, Parity::odd)});

        // vector field: combined-magnitude sup error
        {
            FieldSampler st(ref.wv.w_theta, ref.maps, Parity::odd, Parity::odd);
            FieldSampler sr(ref.wv.w_r, ref.maps, Parity::odd, Parity::even);
            FieldSampler sz(ref.wv.w_z, ref.maps, Parity::even, Parity::odd);
            double num = 0.0, den = 0.0;
            const int n = run.maps.r.n(), m = run.maps.z.n();
            for (int j = 0; j <= m; ++j)
                for (int i = 0; i <= n; ++i) {
                    double r = run.maps.r.x(i), z = run.maps.z.x(j);
                    double ht = st(r, z), hr = sr(r, z), hz = sz(r, z);
                    double dt = run.wv.w_theta.at(i, j) - ht;
                    double dr = run.wv.w_r.at(i, j) - hr;
                    double dz = run.wv.w_z.at(i, j) - hz;
                    num = std::max(num, std::sqrt(dt * dt + dr * dr + dz * dz));
                    den = std::max(den, std::sqrt(ht * ht + hr * hr + hz * hz));
                }
            table["w_vec"].push_back({p, num / den});
        }

        auto scalar_err = [](double v, double ref_v) { return std::abs(v - ref_v) / std::abs(ref_v); };
        table["u1_max"].push_back({p, scalar_err(run.u1.max_abs(), ref.u1.max_abs())});
        table["w1_max"].push_back({p, scalar_err(run.w1.max_abs(), ref.w1.max_abs())});
        table["w_max"].push_back({p, scalar_err(run.wv.mag.max_abs(), ref.wv.mag.max_abs())});
        table["psi1_max"].push_back({p, scalar_err(run.psi1.max_abs(), ref.psi1.max_abs())});
        table["energy"].push_back({p, scalar_err(run.energy, ref.energy)});
    }
    for (auto& [name, rows] : table) fill_betas(rows);
    return table;
}

// ---------------------------------------------------------------------------
// Case 4 two-scale report
// ---------------------------------------------------------------------------

struct NamedFit {
    std::string name;
    FitResult fit;
};

// Two-scale scaling fits for a case-4 run (R^{3/2}, Z, 1/||u1||, ||w1||^{-1/2})
// plus the contrasting one-scale fits from a companion case-1 run (Z^2,
// ||w1||^{-2/3}). Windows are truncated to the available data.
inline std::vector<NamedFit> case4_two_scale_report(const CsvTable& diag_case4,
                                                    const CsvTable& diag_case1, double t1,
                                                    double t2) {
    auto window_end = [&](const CsvTable& tab) {
        const auto ts = tab.col("t");
        return std::min(t2, ts.empty() ? t2 : ts.back());
    };
    std::vector<NamedFit> out;
    {
        const auto t = diag_case4.col("t");
        const double w2 = window_end(diag_case4);
        out.push_back({"case4_R_pow_3_2", fit_power_law(t, diag_case4.col("R"),
                                                        Transform::inverse_power, t1, w2, -1.5)});
        out.push_back({"case4_Z_linear",
                       fit_power_law(t, diag_case4.col("Z"), Transform::plain, t1, w2)});
        out.push_back({"case4_u1_inverse", fit_power_law(t, diag_case4.col("u1_max"),
                                                         Transform::inverse, t1, w2)});
        out.push_back({"case4_w1_inv_sqrt",
                       fit_power_law(t, diag_case4.col("w1_max"), Transform::inverse_power, t1,
                                     w2, 0.5)});
        out.push_back({"case4_Z_square",
                       fit_power_law(t, diag_case4.col("Z"), Transform::square, t1, w2)});
    }
    {
        const auto t = diag_case1.col("t");
        const double w2 = window_end(diag_case1);
        out.push_back({"case1_Z_square",
                       fit_power_law(t, diag_case1.col("Z"), Transform::square, t1, w2)});
        out.push_back({"case1_Z_linear",
                       fit_power_law(t, diag_case1.col("Z"), Transform::plain, t1, w2)});
        out.push_back({"case1_w1_inv_2_3",
                       fit_power_law(t, diag_case1.col("w1_max"), Transform::inverse_power, t1,
                                     w2, 2.0 / 3.0)});
    }
    return out;
}

}  // namespace swirl
