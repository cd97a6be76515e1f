#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "swirl/toys.hpp"

using namespace swirl;
using namespace swirl::toys;

TEST_CASE("riccati exact values and perturbed blow-up time") {
    auto r0 = riccati(0.0);
    REQUIRE(r0.u == 1.0);
    REQUIRE(r0.v_ratio == 1.0);
    auto r5 = riccati(0.5);
    REQUIRE(r5.u == Catch::Approx(2.0).epsilon(1e-15));
    REQUIRE(r5.v_ratio == Catch::Approx(4.0).epsilon(1e-15));
    REQUIRE_THROWS_AS(riccati(1.0), domain_error);
    REQUIRE_THROWS_AS(riccati(-0.1), domain_error);
    for (double eps : {0.1, 0.01, 0.5}) {
        double T = riccati_perturbed_blowup(eps);
        REQUIRE(T == Catch::Approx(1.0 / (1.0 + eps)).epsilon(1e-15));
        REQUIRE(std::abs(T - 1.0) == Catch::Approx(eps / (1.0 + eps)).epsilon(1e-13));
    }
}

TEST_CASE("burgers T* = 1 for the default profile") {
    auto p = BurgersProblem::standard();
    REQUIRE(p.T_star == 1.0);
    REQUIRE(burgers_u0_prime(0.0) == -1.0);
    // perturbed with eps = 0 reduces to T*
    REQUIRE(burgers_perturbed_blowup(p, 0.0) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("burgers implicit relation holds to 1e-12 on random queries") {
    auto p = BurgersProblem::standard();
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> ut(0.0, 0.99), ux(-3.0, 3.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        double t = ut(rng), x = ux(rng);
        double u = burgers_eval(p, t, x);
        worst = std::max(worst, std::abs(u - p.u0(x - t * u)));
    }
    REQUIRE(worst <= 1e-12);
    REQUIRE_THROWS_AS(burgers_eval(p, 1.0, 0.1), domain_error);
}

TEST_CASE("burgers oddness and the x=0 fixed point") {
    auto p = BurgersProblem::standard();
    for (double t : {0.1, 0.5, 0.9}) {
        REQUIRE(burgers_eval(p, t, 0.0) == Catch::Approx(0.0).margin(1e-13));
        for (double x : {0.3, 0.77, 2.0})
            REQUIRE(burgers_eval(p, t, -x) ==
                    Catch::Approx(-burgers_eval(p, t, x)).margin(1e-12));
    }
}

TEST_CASE("slope at the origin follows the characteristic Jacobian formula") {
    auto p = BurgersProblem::standard();
    // u_x(0.5, 0) = u0'(0) / (1 + 0.5 u0'(0)) = -2
    REQUIRE(burgers_slope(p, 0.5, 0.0) == Catch::Approx(-2.0).epsilon(1e-10));
    // finite-difference oracle around x=0
    const double d = 1e-6;
    double fd = (burgers_eval(p, 0.5, d) - burgers_eval(p, 0.5, -d)) / (2.0 * d);
    REQUIRE(fd == Catch::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("perturbed blow-up time shifts at order >= 2.7 in eps") {
    auto p = BurgersProblem::standard();
    std::vector<double> gaps;
    for (double eps : {0.1, 0.05, 0.025})
        gaps.push_back(std::abs(burgers_perturbed_blowup(p, eps) - p.T_star));
    REQUIRE(std::log2(gaps[0] / gaps[1]) >= 2.7);
    REQUIRE(std::log2(gaps[1] / gaps[2]) >= 2.7);
    // |T_eps - 1| <= K eps^3 with K estimated from the samples
    double K = gaps[0] / std::pow(0.1, 3);
    REQUIRE(gaps[1] <= 1.2 * K * std::pow(0.05, 3));
    REQUIRE(gaps[2] <= 1.2 * K * std::pow(0.025, 3));
}

TEST_CASE("blow-up time agrees across methods to 1e-6") {
    auto p = BurgersProblem::standard();
    for (double eps : {0.1, 0.05}) {
        double a = burgers_perturbed_blowup(p, eps);
        double b = burgers_blowup_by_characteristics(p, eps);
        REQUIRE(std::abs(a - b) <= 1e-6);
    }
}

TEST_CASE("perturbation growth: degenerate input, t=0, and the lower bound") {
    auto p = BurgersProblem::standard();
    REQUIRE_THROWS_AS(perturbation_growth(p, 0.0, 0.5, 2.0), domain_error);
    REQUIRE(perturbation_growth(p, 0.2, 0.0, 2.0) == Catch::Approx(1.0).epsilon(1e-12));
    // t = 0.9, p = 2, eps = min(1/3, sqrt((T*-t)/20)): ratio >= 10^(1/4)
    double eps = growth_eps(p, 0.9);
    REQUIRE(eps == Catch::Approx(std::sqrt(0.005)).epsilon(1e-12));
    double ratio = perturbation_growth(p, eps, 0.9, 2.0);
    REQUIRE(ratio >= std::pow(10.0, 0.25));
    REQUIRE(ratio >= 1.778);
}

TEST_CASE("default bump satisfies the derivative scaling bounds") {
    // ||d^j v||_inf <= c_j eps^(4-j): check the scaling collapses across eps
    auto deriv_sup = [](double eps, int order) {
        double sup = 0.0;
        const int N = 4000;
        const double h = 1e-5 * eps;
        for (int k = 0; k <= N; ++k) {
            double x = -eps + 2.0 * eps * k / N;
            double v;
            switch (order) {
                case 0: v = default_bump(eps, x); break;
                case 1: v = (default_bump(eps, x + h) - default_bump(eps, x - h)) / (2.0 * h); break;
                case 2:
                    v = (default_bump(eps, x + h) - 2.0 * default_bump(eps, x) +
                         default_bump(eps, x - h)) / (h * h);
                    break;
                default:
                    v = (default_bump(eps, x + 2 * h) - 2.0 * default_bump(eps, x + h) +
                         2.0 * default_bump(eps, x - h) - default_bump(eps, x - 2 * h)) /
                        (2.0 * h * h * h);
            }
            sup = std::max(sup, std::abs(v));
        }
        return sup;
    };
    for (int j = 0; j <= 3; ++j) {
        double c1 = deriv_sup(0.2, j) / std::pow(0.2, 4 - j);
        double c2 = deriv_sup(0.1, j) / std::pow(0.1, 4 - j);
        REQUIRE(c1 == Catch::Approx(c2).epsilon(0.05));  // same constant across eps
    }
    // support edges: v and two derivatives vanish
    for (double eps : {0.1, 0.3}) {
        REQUIRE(default_bump(eps, eps) == 0.0);
        REQUIRE(default_bump(eps, -eps) == 0.0);
        double h = 1e-7;
        REQUIRE(std::abs(default_bump(eps, eps - h)) < 1e-12);
        REQUIRE(std::abs(default_bump(eps, eps - h) - 2 * default_bump(eps, eps - h / 2)) < 1e-12);
    }
    // oddness
    for (double x : {0.01, 0.05, 0.09})
        REQUIRE(default_bump(0.1, -x) == Catch::Approx(-default_bump(0.1, x)).margin(1e-18));
}

TEST_CASE("characteristic transport keeps the support image") {
    auto p = BurgersProblem::standard();
    const double eps = 0.2, t = 0.8;
    // support endpoints transported by the unperturbed flow
    double left = -eps + t * p.u0(-eps);
    double right = eps + t * p.u0(eps);
    const int N = 501;
    for (int k = 0; k < N; ++k) {
        double x0 = -eps + 2.0 * eps * k / (N - 1);
        double xt = x0 + t * p.u0(x0);
        REQUIRE(xt >= left - 1e-12);
        REQUIRE(xt <= right + 1e-12);
    }
}
