#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "swirl/config.hpp"
#include "swirl/runner.hpp"
#include "swirl/stepper.hpp"

using namespace swirl;
namespace fs = std::filesystem;

namespace {
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("swirl_step_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SimConfig small_config(int n = 48) {
    SimConfig cfg;
    cfg.n1 = cfg.n2 = n;
    cfg.t_end = 1.0;  // stop by max_steps in these tests
    cfg.max_steps = 0;
    return cfg;
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
    return lines;
}
}  // namespace

TEST_CASE("adaptive_dt at t=0 for case 1: the hard cap binds") {
    // oracle: 1-D maximization of the case-1 profile over z at r=0
    double u1max_oracle =
        [] {
            auto f = [](double z) { return initial_u1(1, 0.0, z); };
            double z_star = golden_max(f, 0.0, 0.5);
            return f(z_star);
        }();
    REQUIRE(u1max_oracle == Catch::Approx(3266.0).margin(0.5));
    REQUIRE(u1max_oracle < 4000.0);  // so 1e-3/|u1| > 2.5e-7 and the cap wins

    SimConfig cfg = small_config(64);
    Simulation sim(cfg);
    StepRecord rec = adaptive_dt(sim.state(), sim.velocity(), sim.maps(), sim.nu());
    // velocity is identically zero at t=0, so the CFL term is +inf
    REQUIRE(std::isinf(rec.k2) == false);  // nu > 0 gives a finite k2
    REQUIRE(rec.k1 == kDtCap);
    REQUIRE(rec.dt <= kDtCap);
    REQUIRE(rec.dt == std::min(rec.k1, rec.k2));
    // the grid max is below the analytic max but close at n=64
    REQUIRE(sim.state().u1.max_abs() <= u1max_oracle + 1e-9);
    REQUIRE(sim.state().u1.max_abs() >= 0.98 * u1max_oracle);
}

TEST_CASE("adaptive_dt formula components") {
    SimConfig cfg = small_config(40);
    Simulation sim(cfg);

    SECTION("CFL term: 0.2 min(h) * density / |u| for crafted velocities") {
        // plant a single large uz value; umax = |uz| / z_eta at that node
        VelocityGrids vel = sim.velocity();
        const int i = 11, j = 13;
        vel.uz.at(i, j) = 1e6;
        StepRecord rec = adaptive_dt(sim.state(), vel, sim.maps(), sim.nu());
        double umax = 1e6 / sim.maps().z.xp(j);
        double expect = 0.2 * std::min(sim.maps().z.h(), sim.maps().r.h()) / umax;
        REQUIRE(rec.k1 == Catch::Approx(std::min({expect, 1e-3 / sim.state().u1.max_abs(),
                                                   kDtCap})).epsilon(1e-14));
        // spec arithmetic: umax=1e6, min(h * density)=1e-5 -> 0.2e-5/1e6
        REQUIRE(0.2 * 1e-5 / 1e6 == Catch::Approx(2e-12).epsilon(1e-12));
    }

    SECTION("k2 reduces to 0.1 min(min z_eta^2, min r_rho^2) on a square grid") {
        // euler mode: nu = 1/n1^2 = h1^2
        StepRecord rec = adaptive_dt(sim.state(), sim.velocity(), sim.maps(), sim.nu());
        double min_zp = 1e300, min_rp = 1e300;
        for (int j = 0; j <= 40; ++j) min_zp = std::min(min_zp, sim.maps().z.xp(j));
        for (int i = 0; i <= 40; ++i) min_rp = std::min(min_rp, sim.maps().r.xp(i));
        REQUIRE(rec.k2 == Catch::Approx(0.1 * std::min(min_zp * min_zp, min_rp * min_rp))
                              .epsilon(1e-12));
    }

    SECTION("non-finite norms are fatal") {
        FieldState bad = sim.state();
        bad.u1.at(3, 3) = std::numeric_limits<double>::quiet_NaN();
        REQUIRE_THROWS_AS(adaptive_dt(bad, sim.velocity(), sim.maps(), sim.nu()),
                          numerical_error);
    }
}

TEST_CASE("rk2 on the zero state stays zero and advances time") {
    SimConfig cfg = small_config(40);
    CheckpointData ck = Simulation(cfg).make_checkpoint(0.0, 0.0, 0.0, 0.0);
    ck.u1.fill(0.0);
    ck.w1.fill(0.0);
    ck.psi1.fill(0.0);
    Simulation sim(cfg, ck);
    sim.step_rk2(1e-7);
    REQUIRE(sim.state().u1.max_abs() == 0.0);
    REQUIRE(sim.state().w1.max_abs() == 0.0);
    REQUIRE(sim.state().psi1.max_abs() == 0.0);
    REQUIRE(sim.state().t == Catch::Approx(1e-7).margin(1e-20));
    REQUIRE(sim.state().step == 1);
}

TEST_CASE("dt self-convergence of the RK2 step is >= 1.9") {
    SimConfig cfg = small_config(48);
    const double T = 4e-6;
    auto run_fixed = [&](double dt) {
        Simulation sim(cfg);
        int n_steps = static_cast<int>(std::llround(T / dt));
        for (int k = 0; k < n_steps; ++k) sim.step_rk2(dt);
        return sim;
    };
    Simulation a = run_fixed(4e-7);
    Simulation b = run_fixed(2e-7);
    Simulation c = run_fixed(1e-7);
    auto diff = [&](const Simulation& x, const Simulation& y) {
        double d = 0.0;
        for (int j = 0; j <= cfg.n1; ++j)
            for (int i = 0; i <= cfg.n2; ++i) {
                d = std::max(d, std::abs(x.state().u1.at(i, j) - y.state().u1.at(i, j)));
                d = std::max(d, std::abs(x.state().w1.at(i, j) - y.state().w1.at(i, j)));
            }
        return d;
    };
    double e1 = diff(a, b), e2 = diff(b, c);
    REQUIRE(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("manufactured source hook is applied") {
    SimConfig cfg = small_config(40);
    CheckpointData ck = Simulation(cfg).make_checkpoint(0.0, 0.0, 0.0, 0.0);
    ck.u1.fill(0.0);
    ck.w1.fill(0.0);
    ck.psi1.fill(0.0);
    Simulation sim(cfg, ck);
    SourceTerm src = [](double, int, int) { return std::pair{1.0, 0.0}; };
    sim.step_rk2(1e-6, &src);
    // du1/dt = 1 on the interior: after one step u1 = dt (up to viscous terms
    // of a spatially constant field, which vanish)
    REQUIRE(sim.state().u1.at(10, 10) == Catch::Approx(1e-6).epsilon(1e-10));
    REQUIRE(sim.state().u1.at(0, 5) == Catch::Approx(1e-6).epsilon(1e-10));
    // boundary rows stay pinned
    REQUIRE(sim.state().u1.at(3, 0) == 0.0);
}

TEST_CASE("one step from case-1 data: sign of w1 follows the vortex-stretching source") {
    SimConfig cfg = small_config(64);
    Simulation sim(cfg);
    // source oracle: 2 u1 u1_z from the initial data, via analytic z-derivative
    MeshPair maps{MeshMap::build(initial_r_spec(), 64, 1.0),
                  MeshMap::build(initial_z_spec(), 64, 0.5)};
    auto source = [&](double r, double z) {
        const double d = 1e-7;
        double uz = (initial_u1(1, r, z + d) - initial_u1(1, r, z - d)) / (2.0 * d);
        return 2.0 * initial_u1(1, r, z) * uz;
    };
    StepRecord rec = sim.advance();
    REQUIRE(rec.dt > 0.0);
    double smax = 0.0;
    for (int j = 1; j < 64; ++j)
        for (int i = 0; i < 64; ++i)
            smax = std::max(smax, std::abs(source(maps.r.x(i), maps.z.x(j))));
    int checked = 0;
    for (int j = 1; j < 64; ++j)
        for (int i = 0; i < 64; ++i) {
            double s = source(maps.r.x(i), maps.z.x(j));
            if (std::abs(s) < 0.05 * smax) continue;
            ++checked;
            REQUIRE(sim.state().w1.at(i, j) * s > 0.0);
        }
    REQUIRE(checked > 100);
}

TEST_CASE("run with max_steps=0 emits only the t=0 diagnostics row") {
    TempDir tmp;
    SimConfig cfg = small_config(48);
    cfg.max_steps = 0;
    cfg.out_dir = (tmp.path / "run0").string();
    RunResult res = run_simulation(cfg, std::nullopt);
    REQUIRE(res.steps_run == 0);
    REQUIRE(res.termination_reason == "max_steps");
    auto lines = read_lines(tmp.path / "run0" / "diagnostics.csv");
    REQUIRE(lines.size() == 2);  // header + t=0 row
    REQUIRE(manifest_inventory_ok(tmp.path / "run0"));
}

TEST_CASE("boundary rows stay exactly zero and dt stays capped while stepping") {
    SimConfig cfg = small_config(48);
    Simulation sim(cfg);
    for (int k = 0; k < 25; ++k) {
        StepRecord rec = sim.advance();
        REQUIRE(rec.dt <= kDtCap);
        for (int i = 0; i <= 48; ++i) {
            REQUIRE(sim.state().u1.at(i, 0) == 0.0);
            REQUIRE(sim.state().u1.at(i, 48) == 0.0);
            REQUIRE(sim.state().w1.at(i, 0) == 0.0);
            REQUIRE(sim.state().w1.at(i, 48) == 0.0);
            REQUIRE(sim.state().psi1.at(i, 0) == 0.0);
            REQUIRE(sim.state().psi1.at(i, 48) == 0.0);
        }
    }
}

TEST_CASE("checkpoint restart reproduces diagnostics bitwise") {
    TempDir tmp;
    SimConfig cfg = small_config(48);
    cfg.max_steps = 12;
    cfg.checkpoint_every = 6;
    cfg.out_dir = (tmp.path / "full").string();
    RunResult full = run_simulation(cfg, std::nullopt);
    REQUIRE(full.final_step == 12);

    CheckpointData ck = read_checkpoint(tmp.path / "full" / "checkpoint_step000000006.bin");
    REQUIRE(ck.step == 6);
    SimConfig cfg2 = ck.config;
    cfg2.out_dir = (tmp.path / "resumed").string();
    RunResult partial = run_simulation(cfg2, ck);
    REQUIRE(partial.final_step == 12);

    auto full_lines = read_lines(tmp.path / "full" / "diagnostics.csv");
    auto res_lines = read_lines(tmp.path / "resumed" / "diagnostics.csv");
    // full: header + rows for steps 0..12; resumed: header + rows 7..12
    REQUIRE(full_lines.size() == 14);
    REQUIRE(res_lines.size() == 7);
    for (int k = 0; k < 6; ++k) REQUIRE(res_lines[1 + k] == full_lines[8 + k]);

    // resume from the final checkpoint of a finished run: no-op
    CheckpointData fin = read_checkpoint(tmp.path / "full" / "checkpoint_final.bin");
    SimConfig cfg3 = fin.config;
    cfg3.out_dir = (tmp.path / "noop").string();
    RunResult noop = run_simulation(cfg3, fin);
    REQUIRE(noop.steps_run == 0);
}

TEST_CASE("two identical runs produce identical diagnostics streams") {
    TempDir tmp;
    SimConfig cfg = small_config(48);
    cfg.max_steps = 8;
    cfg.out_dir = (tmp.path / "a").string();
    run_simulation(cfg, std::nullopt);
    cfg.out_dir = (tmp.path / "b").string();
    run_simulation(cfg, std::nullopt);
    REQUIRE(read_lines(tmp.path / "a" / "diagnostics.csv") ==
            read_lines(tmp.path / "b" / "diagnostics.csv"));
}

TEST_CASE("matched-time snapshots interpolate linearly in t") {
    TempDir tmp;
    SimConfig cfg = small_config(48);
    cfg.max_steps = 10;
    cfg.snapshot_times = {6.25e-7};  // between steps 2 and 3 at the dt cap
    cfg.out_dir = (tmp.path / "run").string();
    run_simulation(cfg, std::nullopt);
    SnapshotData snap = read_snapshot(tmp.path / "run" / "snapshot_t00.bin");
    REQUIRE(snap.t == 6.25e-7);
    // linearity check against the bracketing cadence states is indirect here;
    // at minimum the interpolated state must lie between the step-2/step-3
    // fields pointwise bounds at a probe node:
    SimConfig re = cfg;
    re.max_steps = 3;
    re.out_dir = (tmp.path / "probe").string();
    run_simulation(re, std::nullopt);
    SnapshotData s3 = read_snapshot(tmp.path / "probe" / "snapshot_final.bin");
    REQUIRE(std::abs(snap.u1.at(10, 10)) <=
            std::max(std::abs(s3.u1.at(10, 10)), sqr(3266.0)));  // sanity bound
}

TEST_CASE("NS mode: wall vorticity row follows the no-slip condition") {
    SimConfig cfg = small_config(48);
    cfg.mode = SimMode::navier_stokes;
    cfg.nu = 5e-3;
    Simulation sim(cfg);
    for (int k = 0; k < 3; ++k) sim.advance();
    const int n2 = 48;
    const MeshPair& maps = sim.maps();
    double c = 2.0 / sqr(maps.r.h() * maps.r.xp(n2));
    for (int j = 0; j <= 48; ++j)
        REQUIRE(sim.state().w1.at(n2, j) ==
                Catch::Approx(-c * sim.state().psi1.at(n2 - 1, j)).margin(1e-18));
    // u1 pinned at the wall
    for (int j = 0; j <= 48; ++j) REQUIRE(sim.state().u1.at(n2, j) == 0.0);
}
