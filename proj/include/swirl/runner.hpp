#pragma once

#include <algorithm>
#include <functional>
#include <optional>

#include "swirl/diagnostics.hpp"
#include "swirl/io.hpp"
#include "swirl/stepper.hpp"

namespace swirl {

struct RunResult {
    std::string termination_reason;  // t_end | max_steps | dt_underflow | numerical:<what>
    long long steps_run = 0;
    long long final_step = 0;
    double final_t = 0.0;
    bool numerical_failure = false;
    fs::path dir;
};

namespace detail {
inline std::string step_name(const char* prefix, long long step) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_step%09lld.bin", prefix, step);
    return buf;
}
}  // namespace detail

// Full run loop: {remesh check -> optional interpolate+reassemble ->
// adaptive dt -> RK2 step -> diagnostics record}, with cadence snapshots,
// matched-time snapshots (linear interpolation in t between the bracketing
// states), cadence checkpoints, and a manifest of everything written.
inline RunResult run_simulation(const SimConfig& cfg, std::optional<CheckpointData> resume_from,
                                const SourceTerm* src = nullptr) {
    RunResult result;
    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir);
    RunManifest man(resume_from ? "resume" : "run", dir);
    man.set_config(cfg);

    Simulation sim = resume_from ? Simulation(cfg, *resume_from) : Simulation(cfg);

    CsvWriter diag(dir / "diagnostics.csv", DiagnosticsRecord::csv_header());
    man.add_file(dir / "diagnostics.csv");
    std::ofstream remesh_log(dir / "remesh_log.csv");
    remesh_log << "step,t,axis,J,J_r,I,I_wz,r_peak,r_grad,z_peak,z_grad,spec_r,spec_z\n";
    man.add_file(dir / "remesh_log.csv");

    DiagnosticsRecord prev;
    bool have_prev = false;
    double last_dt = 0.0;
    if (resume_from) {
        prev.t = resume_from->t_prev_diag;
        prev.w_max = resume_from->wmax_prev_diag;
        prev.bkm = resume_from->bkm;
        have_prev = true;
        last_dt = resume_from->dt;
    }

    long long last_diag_step = -1;
    auto write_diag_row = [&](double dt_used) {
        DiagnosticsRecord rec = compute_diagnostics(sim.state(), sim.velocity(), sim.maps(),
                                                    dt_used, have_prev ? &prev : nullptr);
        diag.row(rec.csv_row());
        prev = rec;
        have_prev = true;
        last_diag_step = sim.state().step;
    };

    auto write_snapshot_file = [&](const std::string& name, double t, long long step,
                                   const Grid2D& u1, const Grid2D& w1, const Grid2D& psi1) {
        SnapshotData s;
        s.n1 = cfg.n1;
        s.n2 = cfg.n2;
        s.t = t;
        s.step = step;
        s.spec_r = sim.spec_r();
        s.spec_z = sim.spec_z();
        s.u1 = u1;
        s.w1 = w1;
        s.psi1 = psi1;
        write_snapshot(dir / name, s);
        man.add_file(dir / name);
    };
    auto snapshot_current = [&](const std::string& name) {
        write_snapshot_file(name, sim.state().t, sim.state().step, sim.state().u1,
                            sim.state().w1, sim.state().psi1);
    };
    auto checkpoint_current = [&](const std::string& name) {
        write_checkpoint(dir / name,
                         sim.make_checkpoint(last_dt, prev.bkm, prev.t, prev.w_max));
        man.add_file(dir / name);
    };

    // matched-time snapshot machinery
    std::vector<double> pending = cfg.snapshot_times;
    std::sort(pending.begin(), pending.end());
    std::vector<int> pending_index(pending.size());
    for (std::size_t k = 0; k < pending.size(); ++k) pending_index[k] = static_cast<int>(k);
    {
        std::size_t skip = 0;
        while (skip < pending.size() && pending[skip] <= sim.state().t) ++skip;
        pending.erase(pending.begin(), pending.begin() + skip);
        pending_index.erase(pending_index.begin(), pending_index.begin() + skip);
    }
    FieldState pre_state;
    bool pre_valid = false;
    std::function<void(const FieldState&, double)> pre_hook =
        [&](const FieldState& st, double dt) {
            pre_valid = false;
            if (!pending.empty() && pending.front() > st.t &&
                pending.front() <= st.t + dt * (1.0 + 1e-9)) {
                pre_state.u1 = st.u1;
                pre_state.w1 = st.w1;
                pre_state.psi1 = st.psi1;
                pre_state.t = st.t;
                pre_valid = true;
            }
        };

    if (!resume_from) {
        last_dt = adaptive_dt(sim.state(), sim.velocity(), sim.maps(), sim.nu()).dt;
        write_diag_row(last_dt);
        if (cfg.snapshot_every > 0) snapshot_current(detail::step_name("snapshot", 0));
    }

    result.termination_reason = "t_end";
    try {
        while (sim.state().t < cfg.t_end && sim.state().step < cfg.max_steps) {
            StepRecord rec = sim.advance(src, &pre_hook);
            if (rec.dt < kDtUnderflow) {
                result.termination_reason = "dt_underflow";
                result.numerical_failure = true;
                break;
            }
            ++result.steps_run;
            last_dt = rec.dt;
            if (rec.remeshed) {
                const auto& ev = sim.last_remesh();
                remesh_log << ev.step << "," << fmt_double(ev.t) << ","
                           << (ev.did_r ? (ev.did_z ? "rz" : "r") : "z") << "," << ev.idx.J
                           << "," << ev.idx.J_r << "," << ev.idx.I << "," << ev.idx.I_wz << ","
                           << fmt_double(ev.r_peak) << "," << fmt_double(ev.r_grad) << ","
                           << fmt_double(ev.z_peak) << "," << fmt_double(ev.z_grad) << ",\""
                           << sim.spec_r().serialize() << "\",\"" << sim.spec_z().serialize()
                           << "\"\n";
                remesh_log.flush();
            }

            while (!pending.empty() && pending.front() <= sim.state().t) {
                const double tau = pending.front();
                char name[64];
                std::snprintf(name, sizeof(name), "snapshot_t%02d.bin", pending_index.front());
                pending.erase(pending.begin());
                pending_index.erase(pending_index.begin());
                if (pre_valid && sim.state().t > pre_state.t) {
                    const double theta = (tau - pre_state.t) / (sim.state().t - pre_state.t);
                    Grid2D u1(cfg.n2, cfg.n1), w1(cfg.n2, cfg.n1), psi1(cfg.n2, cfg.n1);
                    for (int j = 0; j <= cfg.n1; ++j)
                        for (int i = 0; i <= cfg.n2; ++i) {
                            u1.at(i, j) = (1.0 - theta) * pre_state.u1.at(i, j) +
                                          theta * sim.state().u1.at(i, j);
                            w1.at(i, j) = (1.0 - theta) * pre_state.w1.at(i, j) +
                                          theta * sim.state().w1.at(i, j);
                            psi1.at(i, j) = (1.0 - theta) * pre_state.psi1.at(i, j) +
                                            theta * sim.state().psi1.at(i, j);
                        }
                    write_snapshot_file(name, tau, sim.state().step, u1, w1, psi1);
                } else {
                    write_snapshot_file(name, tau, sim.state().step, sim.state().u1,
                                        sim.state().w1, sim.state().psi1);
                }
            }

            const long long step = sim.state().step;
            if (step % cfg.diag_every == 0) write_diag_row(rec.dt);
            if (step % cfg.snapshot_every == 0)
                snapshot_current(detail::step_name("snapshot", step));
            if (step % cfg.checkpoint_every == 0) {
                if (last_diag_step != step) write_diag_row(rec.dt);
                checkpoint_current(detail::step_name("checkpoint", step));
            }
        }
        if (result.termination_reason == "t_end" && sim.state().step >= cfg.max_steps &&
            sim.state().t < cfg.t_end)
            result.termination_reason = "max_steps";
    } catch (const numerical_error& e) {
        result.termination_reason = std::string("numerical:") + e.what();
        result.numerical_failure = true;
    }

    if (last_diag_step != sim.state().step) write_diag_row(last_dt);
    snapshot_current("snapshot_final.bin");
    checkpoint_current("checkpoint_final.bin");
    if (result.numerical_failure) {
        nlohmann::json fail;
        fail["reason"] = result.termination_reason;
        fail["step"] = sim.state().step;
        fail["t"] = sim.state().t;
        fail["last_checkpoint"] = "checkpoint_final.bin";
        std::ofstream out(dir / "failure.json");
        out << fail.dump(2) << "\n";
        man.add_file(dir / "failure.json");
    }

    remesh_log.close();
    result.final_step = sim.state().step;
    result.final_t = sim.state().t;
    result.dir = dir;
    man.set("steps_run", result.steps_run);
    man.set("final_step", result.final_step);
    man.set("final_t", result.final_t);
    man.set("remesh_count", sim.remesh_count());
    man.set("remesh_skipped", sim.remesh_skipped());
    man.set("residual_violations", sim.residual_violations());
    man.finish(result.termination_reason);
    return result;
}

}  // namespace swirl
