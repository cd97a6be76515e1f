#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "swirl/num.hpp"

namespace swirl {
namespace toys {

// ---------------------------------------------------------------------------
// Riccati: u_t = u^2, u(0) = 1 blows up at T* = 1; the linearized
// perturbation grows like 1/(T*-t)^2 even though the blow-up time itself
// moves only by eps/(1+eps) under u(0) = 1+eps.
// ---------------------------------------------------------------------------

struct RiccatiSample {
    double u;
    double v_ratio;  // v(t)/v(0)
};

inline RiccatiSample riccati(double t) {
    if (!(t >= 0.0 && t < 1.0)) throw domain_error("riccati: t must be in [0, 1)");
    return {1.0 / (1.0 - t), 1.0 / sqr(1.0 - t)};
}

inline double riccati_perturbed_blowup(double eps) { return 1.0 / (1.0 + eps); }

// ---------------------------------------------------------------------------
// Inviscid Burgers via characteristics
// ---------------------------------------------------------------------------

inline double burgers_u0(double x) { return -x / (1.0 + x * x); }
inline double burgers_u0_prime(double x) {
    const double d = 1.0 + x * x;
    return (x * x - 1.0) / (d * d);
}

// Odd C^2-flat bump, compactly supported on [-eps, eps], with
// ||d^j v||_inf <= c_j eps^{4-j}.
inline double default_bump(double eps, double x) {
    if (std::abs(x) >= eps) return 0.0;
    const double s = x / eps;
    return std::pow(eps, 4) * std::sin(kPi * s) * std::pow(1.0 - s * s, 3);
}

struct BurgersProblem {
    std::function<double(double)> u0 = burgers_u0;
    std::function<double(double)> u0_prime = burgers_u0_prime;
    double T_star = 1.0;  // 1 / max(-u0')
    double u0_bound = 0.5;  // sup |u0|, used to bracket the characteristic foot

    static BurgersProblem standard() { return {}; }
};

// u(t,x) solves u = u0(x - t u). The characteristic foot x0 satisfies the
// monotone relation x0 + t u0(x0) = x for t < T*; solved to |residual|<=1e-13.
inline double burgers_eval(const BurgersProblem& p, double t, double x) {
    if (!(t >= 0.0 && t < p.T_star)) throw domain_error("burgers_eval: t must be in [0, T*)");
    const double pad = t * p.u0_bound + 1.0;
    double x0 = newton_bisect([&](double s) { return s + t * p.u0(s) - x; },
                              [&](double s) { return 1.0 + t * p.u0_prime(s); }, x - pad,
                              x + pad, 1e-13);
    return p.u0(x0);
}

inline double burgers_slope(const BurgersProblem& p, double t, double x) {
    const double pad = t * p.u0_bound + 1.0;
    double x0 = newton_bisect([&](double s) { return s + t * p.u0(s) - x; },
                              [&](double s) { return 1.0 + t * p.u0_prime(s); }, x - pad,
                              x + pad, 1e-13);
    const double up = p.u0_prime(x0);
    return up / (1.0 + t * up);
}

// Blow-up time of the perturbed data u0 + v0^eps: 1 / max(-(u0+v0)'), located
// by dense sampling plus golden-section refinement. The derivative is taken
// by a central difference so this path stays independent of any analytic
// bump derivative.
inline double burgers_perturbed_blowup(const BurgersProblem& p, double eps,
                                       int samples = 20001) {
    auto w0 = [&](double x) { return p.u0(x) + default_bump(eps, x); };
    const double fd = 1e-6;
    auto neg_slope = [&](double x) { return -(w0(x + fd) - w0(x - fd)) / (2.0 * fd); };
    const double lo = -0.5, hi = 0.5;
    double best_x = 0.0, best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        double x = lo + (hi - lo) * k / (samples - 1);
        double v = neg_slope(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    if (!(best > 0.0))
        throw domain_error("burgers_perturbed_blowup: perturbed profile not monotone");
    const double span = (hi - lo) / (samples - 1);
    double x_star = golden_max(neg_slope, best_x - 2.0 * span, best_x + 2.0 * span, 1e-12);
    double m = std::max(best, neg_slope(x_star));
    for (double x : {x_star - fd, x_star + fd}) m = std::max(m, neg_slope(x));
    return 1.0 / m;
}

// Cross-method oracle: first divergence time of the linearized slope along
// characteristics, min over feet of -1/w0'(x0) for w0' < 0.
inline double burgers_blowup_by_characteristics(const BurgersProblem& p, double eps,
                                                int samples = 20001) {
    auto w0 = [&](double x) { return p.u0(x) + default_bump(eps, x); };
    const double fd = 1e-6;
    auto slope = [&](double x) { return (w0(x + fd) - w0(x - fd)) / (2.0 * fd); };
    const double lo = -0.5, hi = 0.5;
    double best_x = 0.0, most_neg = 0.0;
    for (int k = 0; k < samples; ++k) {
        double x = lo + (hi - lo) * k / (samples - 1);
        double s = slope(x);
        if (s < most_neg) {
            most_neg = s;
            best_x = x;
        }
    }
    if (!(most_neg < 0.0))
        throw domain_error("burgers_blowup_by_characteristics: no compressive foot");
    const double span = (hi - lo) / (samples - 1);
    double x_star =
        golden_max([&](double x) { return -slope(x); }, best_x - 2.0 * span,
                   best_x + 2.0 * span, 1e-12);
    double m = std::max(-most_neg, -slope(x_star));
    return 1.0 / m;
}

// Growth of the linearized perturbation transported by the unperturbed flow:
// v_t + u v_x + u_x v = 0. Along the characteristic from x0,
// v(t) = v0(x0) / (1 + t u0'(x0)), and with dx = (1 + t u0') dx0 the L^p mass
// becomes int |v0|^p (1 + t u0')^{1-p} dx0 — integrated by composite Simpson
// over the transported sample set.
inline double perturbation_growth(const BurgersProblem& p, double eps, double t, double pnorm,
                                  int points = 4097) {
    if (!(t >= 0.0 && t < p.T_star))
        throw domain_error("perturbation_growth: t must be in [0, T*)");
    if (!(eps > 0.0)) throw domain_error("perturbation_growth: zero perturbation");
    if (points % 2 == 0) ++points;
    double mass_t = 0.0, mass_0 = 0.0, vmax = 0.0;
    const double h = 2.0 * eps / (points - 1);
    for (int k = 0; k < points; ++k) {
        double x0 = -eps + k * h;
        double w = (k == 0 || k == points - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        double v0 = std::abs(default_bump(eps, x0));
        vmax = std::max(vmax, v0);
        double jac = 1.0 + t * p.u0_prime(x0);
        mass_0 += w * std::pow(v0, pnorm);
        mass_t += w * std::pow(v0, pnorm) * std::pow(jac, 1.0 - pnorm);
    }
    if (vmax == 0.0) throw domain_error("perturbation_growth: zero perturbation");
    return std::pow(mass_t / mass_0, 1.0 / pnorm);
}

// eps choice of the lower-bound argument: min(1/3, sqrt((T*-t)/20)).
inline double growth_eps(const BurgersProblem& p, double t) {
    return std::min(1.0 / 3.0, std::sqrt((p.T_star - t) / 20.0));
}

}  // namespace toys
}  // namespace swirl
