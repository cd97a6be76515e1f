// Command-line front end: run/resume simulations and drive the
// post-processing toolbox over their artifacts.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "swirl/analysis.hpp"
#include "swirl/config.hpp"
#include "swirl/diagnostics.hpp"
#include "swirl/io.hpp"
#include "swirl/runner.hpp"
#include "swirl/toys.hpp"

namespace fs = std::filesystem;
using namespace swirl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

fs::path resolve_out_dir(const std::string& dir) {
    fs::path p(dir);
    if (p.is_absolute()) return p;
    if (const char* root = std::getenv("SWIRL_OUTPUT_ROOT")) return fs::path(root) / p;
    return p;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ','))
        if (!tok.empty()) out.push_back(parse_double(tok));
    return out;
}

// Mirror every config key as a --key flag; --set key=value also accepted.
void add_config_flags(CLI::App* app, std::vector<std::pair<std::string, std::string>>& kv) {
    static const char* keys[] = {
        "case", "mode", "nu", "numerical_viscosity", "n1", "n2", "t_end", "max_steps",
        "diag_every", "snapshot_every", "checkpoint_every", "snapshot_times", "out_dir",
        "transition_fraction", "remesh_guard_rel", "poisson", "psi_solves_per_step",
        "r_trigger", "z_trigger_p12", "z_trigger_p3", "period1_base", "period2_base"};
    for (const char* key : keys) {
        app->add_option_function<std::string>(
            std::string("--") + key,
            [&kv, key](const std::string& v) { kv.emplace_back(key, v); });
    }
    app->add_option_function<std::string>("--set", [&kv](const std::string& v) {
        auto eq = v.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--set expects key=value");
        kv.emplace_back(v.substr(0, eq), v.substr(eq + 1));
    });
}

SimConfig load_config(const std::string& config_path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
    SimConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw io_error("cannot open config '" + config_path + "'");
        cfg = parse_config(in, config_path);
    }
    for (const auto& [k, v] : overrides) config_set(cfg, k, v);
    cfg.validate();
    return cfg;
}

int report_run(const RunResult& res) {
    std::cout << "run finished: reason=" << res.termination_reason << " steps=" << res.steps_run
              << " final_step=" << res.final_step << " final_t=" << fmt_double(res.final_t)
              << " dir=" << res.dir.string() << "\n";
    return res.numerical_failure ? kExitNumerical : kExitOk;
}

int cmd_diagnose(const std::string& run_dir, bool dipole) {
    fs::path dir(run_dir);
    std::vector<fs::path> snaps;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename().string().starts_with("snapshot_") &&
            e.path().extension() == ".bin")
            snaps.push_back(e.path());
    if (snaps.empty()) throw io_error("no snapshots in " + dir.string());
    std::vector<SnapshotData> data;
    for (const auto& p : snaps) data.push_back(read_snapshot(p));
    std::sort(data.begin(), data.end(),
              [](const SnapshotData& a, const SnapshotData& b) { return a.t < b.t; });

    RunManifest man("diagnose", dir);
    CsvWriter out(dir / "diagnostics_recomputed.csv", DiagnosticsRecord::csv_header());
    man.add_file(dir / "diagnostics_recomputed.csv");
    DiagnosticsRecord prev;
    bool have_prev = false;
    for (const auto& s : data) {
        MeshPair maps = s.build_maps();
        FieldState st;
        st.u1 = s.u1;
        st.w1 = s.w1;
        st.psi1 = s.psi1;
        st.t = s.t;
        st.step = s.step;
        fill_ghosts(st.u1, Parity::even, Parity::odd, Parity::odd);
        fill_ghosts(st.w1, Parity::even, Parity::odd, Parity::odd);
        fill_ghosts(st.psi1, Parity::even, Parity::odd, Parity::odd);
        VelocityGrids vel = velocity_from_psi(st.psi1, st.u1, maps);
        DiagnosticsRecord rec =
            compute_diagnostics(st, vel, maps, 0.0, have_prev ? &prev : nullptr);
        out.row(rec.csv_row());
        prev = rec;
        have_prev = true;
    }
    if (dipole) {
        const SnapshotData& s = data.back();
        MeshPair maps = s.build_maps();
        FieldState st;
        st.u1 = s.u1;
        st.w1 = s.w1;
        st.psi1 = s.psi1;
        FullDomainGrids full = extend_full_domain(st, maps);
        std::ofstream f(dir / "dipole_w1.csv");
        f << "r,z,w1\n";
        for (std::size_t j = 0; j < full.z.size(); ++j)
            for (std::size_t i = 0; i < full.r.size(); ++i)
                f << fmt_double(full.r[i]) << "," << fmt_double(full.z[j]) << ","
                  << fmt_double(full.w1[j][i]) << "\n";
        man.add_file(dir / "dipole_w1.csv");
    }
    man.finish("ok");
    return kExitOk;
}

Transform transform_from_name(const std::string& name) {
    if (name == "plain") return Transform::plain;
    if (name == "inverse") return Transform::inverse;
    if (name == "inverse_power") return Transform::inverse_power;
    if (name == "square") return Transform::square;
    if (name == "log_corrected") return Transform::log_corrected;
    throw config_error("unknown transform '" + name + "'");
}

void write_fits_csv(const fs::path& path, const std::vector<NamedFit>& fits) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path.string());
    out << "name,transform,q,t1,t2,slope,intercept,T_est,r_square,samples\n";
    for (const auto& nf : fits) {
        const FitResult& f = nf.fit;
        out << nf.name << "," << transform_name(f.transform) << "," << fmt_double(f.q) << ","
            << fmt_double(f.t1) << "," << fmt_double(f.t2) << "," << fmt_double(f.slope) << ","
            << fmt_double(f.intercept) << "," << fmt_double(f.T_est) << ","
            << fmt_double(f.r_square) << "," << f.samples << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"axisymmetric Euler blow-up solver laboratory"};
    app.require_subcommand(1);

    // --- run ---
    auto* run = app.add_subcommand("run", "run a simulation from t=0");
    std::string run_config;
    std::vector<std::pair<std::string, std::string>> run_overrides;
    run->add_option("-c,--config", run_config, "key=value config file");
    add_config_flags(run, run_overrides);

    // --- resume ---
    auto* resume = app.add_subcommand("resume", "continue from a checkpoint");
    std::string resume_ck, resume_out;
    double resume_t_end = -1.0;
    long long resume_max_steps = -1;
    resume->add_option("--checkpoint", resume_ck, "checkpoint file")->required();
    resume->add_option("--out-dir", resume_out, "output directory")->required();
    resume->add_option("--t-end", resume_t_end, "override t_end");
    resume->add_option("--max-steps", resume_max_steps, "override max_steps");

    // --- diagnose ---
    auto* diagnose = app.add_subcommand("diagnose", "recompute diagnostics from snapshots");
    std::string diag_run;
    bool diag_dipole = false;
    diagnose->add_option("--run", diag_run, "run directory")->required();
    diagnose->add_flag("--dipole", diag_dipole, "export the full-domain dipole grid");

    // --- fit ---
    auto* fit = app.add_subcommand("fit", "power-law fit of a diagnostics series");
    std::string fit_run, fit_series = "u1_max", fit_series2, fit_transform = "inverse",
                fit_window, fit_out, fit_two_scale;
    double fit_q = 0.0;
    fit->add_option("--run", fit_run, "run directory with diagnostics.csv")->required();
    fit->add_option("--series", fit_series, "column to fit");
    fit->add_option("--series2", fit_series2, "companion column (log_corrected)");
    fit->add_option("--transform", fit_transform, "plain|inverse|inverse_power|square|log_corrected");
    fit->add_option("--q", fit_q, "exponent for inverse_power");
    fit->add_option("--window", fit_window, "t1,t2 fitting window")->required();
    fit->add_option("--out", fit_out, "output directory (default: run dir)");
    fit->add_option("--two-scale-with", fit_two_scale,
                    "case-1 run directory: emit the two-scale fit bundle of --run (a case-4 "
                    "run) with one-scale contrast fits from this companion run");

    // --- rescale ---
    auto* rescale = app.add_subcommand("rescale", "dynamically rescaled profile from a snapshot");
    std::string rs_snapshot, rs_field = "u1", rs_xi = "-1,1", rs_zeta = "0,2", rs_out;
    int rs_m = 129;
    bool rs_no_normalize = false;
    rescale->add_option("--snapshot", rs_snapshot)->required();
    rescale->add_option("--field", rs_field, "u1|w1|psi1");
    rescale->add_option("--xi", rs_xi, "xi range min,max");
    rescale->add_option("--zeta", rs_zeta, "zeta range min,max");
    rescale->add_option("--m", rs_m, "samples per axis");
    rescale->add_flag("--no-normalize", rs_no_normalize);
    rescale->add_option("--out", rs_out, "output directory")->required();

    // --- resolution-study ---
    auto* study = app.add_subcommand("resolution-study", "convergence orders vs a reference run");
    std::string st_snapshots, st_ps, st_reference, st_out;
    study->add_option("--snapshots", st_snapshots, "comma list of matched-time snapshots")
        ->required();
    study->add_option("--ps", st_ps, "comma list of mesh factors p (coarse to fine)")->required();
    study->add_option("--reference", st_reference, "reference snapshot")->required();
    study->add_option("--out", st_out, "output directory")->required();

    // --- streamline ---
    auto* stream = app.add_subcommand("streamline", "trace a streamline of a snapshot");
    std::string sl_snapshot, sl_seed = "0.8,0.2,0", sl_out;
    double sl_ds = 1e-4;
    int sl_steps = 200000;
    stream->add_option("--snapshot", sl_snapshot)->required();
    stream->add_option("--seed", sl_seed, "r0,z0,theta0");
    stream->add_option("--ds", sl_ds, "arc parameter step");
    stream->add_option("--steps", sl_steps, "max steps");
    stream->add_option("--out", sl_out, "output directory")->required();

    // --- toys ---
    auto* toys_cmd = app.add_subcommand("toys", "Riccati/Burgers stability tables");
    std::string toys_out;
    toys_cmd->add_option("--out", toys_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            SimConfig cfg = load_config(run_config, run_overrides);
            cfg.out_dir = resolve_out_dir(cfg.out_dir).string();
            return report_run(run_simulation(cfg, std::nullopt));
        }
        if (*resume) {
            CheckpointData ck = read_checkpoint(resume_ck);
            SimConfig cfg = ck.config;
            if (resume_t_end > 0.0) cfg.t_end = resume_t_end;
            if (resume_max_steps >= 0) cfg.max_steps = resume_max_steps;
            cfg.out_dir = resolve_out_dir(resume_out).string();
            return report_run(run_simulation(cfg, ck));
        }
        if (*diagnose) return cmd_diagnose(diag_run, diag_dipole);
        if (*fit) {
            CsvTable tab = read_csv(fs::path(fit_run) / "diagnostics.csv");
            auto w = parse_list(fit_window);
            if (w.size() != 2) throw config_error("--window expects t1,t2");
            if (!fit_two_scale.empty()) {
                CsvTable companion = read_csv(fs::path(fit_two_scale) / "diagnostics.csv");
                auto fits = case4_two_scale_report(tab, companion, w[0], w[1]);
                fs::path out_dir = fit_out.empty() ? fs::path(fit_run) : fs::path(fit_out);
                fs::create_directories(out_dir);
                RunManifest man("fit", out_dir);
                write_fits_csv(out_dir / "fit_two_scale.csv", fits);
                man.add_file(out_dir / "fit_two_scale.csv");
                man.finish("ok");
                for (const auto& nf : fits)
                    std::cout << nf.name << ": T_est=" << fmt_double(nf.fit.T_est)
                              << " R2=" << fmt_double(nf.fit.r_square) << "\n";
                return kExitOk;
            }
            std::vector<double> y2;
            const std::vector<double>* y2p = nullptr;
            if (!fit_series2.empty()) {
                y2 = tab.col(fit_series2);
                y2p = &y2;
            }
            FitResult f = fit_power_law(tab.col("t"), tab.col(fit_series),
                                        transform_from_name(fit_transform), w[0], w[1], fit_q,
                                        y2p);
            fs::path out_dir = fit_out.empty() ? fs::path(fit_run) : fs::path(fit_out);
            fs::create_directories(out_dir);
            RunManifest man("fit", out_dir);
            write_fits_csv(out_dir / ("fit_" + fit_series + ".csv"), {{fit_series, f}});
            man.add_file(out_dir / ("fit_" + fit_series + ".csv"));
            man.finish("ok");
            std::cout << "fit " << fit_series << ": slope=" << fmt_double(f.slope)
                      << " T_est=" << fmt_double(f.T_est) << " R2=" << fmt_double(f.r_square)
                      << "\n";
            return kExitOk;
        }
        if (*rescale) {
            SnapshotData s = read_snapshot(rs_snapshot);
            MeshPair maps = s.build_maps();
            const Grid2D& g = rs_field == "w1" ? s.w1 : (rs_field == "psi1" ? s.psi1 : s.u1);
            Grid2D field = g;
            fill_ghosts(field, Parity::even, Parity::odd, Parity::odd);
            FieldState st;
            st.u1 = s.u1;
            fill_ghosts(st.u1, Parity::even, Parity::odd, Parity::odd);
            MaxLocation loc = track_maximum(st.u1, maps);
            auto xi = parse_list(rs_xi), zeta = parse_list(rs_zeta);
            if (xi.size() != 2 || zeta.size() != 2)
                throw config_error("--xi/--zeta expect min,max");
            RescaledProfile p =
                rescale_profile(field, maps, loc.R, loc.Z, xi[0], xi[1], zeta[0], zeta[1], rs_m,
                                !rs_no_normalize, Parity::even, Parity::odd, s.t);
            fs::path out_dir(rs_out);
            fs::create_directories(out_dir);
            RunManifest man("rescale", out_dir);
            fs::path csv = out_dir / ("rescaled_" + rs_field + ".csv");
            std::ofstream f(csv);
            f << "xi,zeta,value\n";
            for (int b = 0; b < rs_m; ++b)
                for (int a = 0; a < rs_m; ++a)
                    f << fmt_double(p.xi[a]) << "," << fmt_double(p.zeta[b]) << ","
                      << fmt_double(p.values[b][a]) << "\n";
            f.close();
            man.add_file(csv);
            man.set("R", p.R);
            man.set("Z", p.Z);
            man.set("t", p.t);
            man.set("clipped_fraction", p.clipped_fraction);
            man.finish("ok");
            return kExitOk;
        }
        if (*study) {
            std::vector<SnapshotData> runs;
            std::istringstream is(st_snapshots);
            std::string tok;
            while (std::getline(is, tok, ','))
                if (!tok.empty()) runs.push_back(read_snapshot(tok));
            std::vector<double> ps = parse_list(st_ps);
            SnapshotData ref = read_snapshot(st_reference);
            ErrorTable table = resolution_study(runs, ps, ref);
            fs::path out_dir(st_out);
            fs::create_directories(out_dir);
            RunManifest man("resolution-study", out_dir);
            fs::path csv = out_dir / "error_table.csv";
            std::ofstream f(csv);
            f << "variable,p,e,beta\n";
            for (const auto& [name, rows] : table)
                for (const auto& row : rows)
                    f << name << "," << fmt_double(row.p) << "," << fmt_double(row.e) << ","
                      << fmt_double(row.beta) << "\n";
            f.close();
            man.add_file(csv);
            man.finish("ok");
            return kExitOk;
        }
        if (*stream) {
            SnapshotData s = read_snapshot(sl_snapshot);
            MeshPair maps = s.build_maps();
            FieldState st;
            st.u1 = s.u1;
            st.w1 = s.w1;
            st.psi1 = s.psi1;
            fill_ghosts(st.u1, Parity::even, Parity::odd, Parity::odd);
            fill_ghosts(st.psi1, Parity::even, Parity::odd, Parity::odd);
            VelocityGrids vel = velocity_from_psi(st.psi1, st.u1, maps);
            VelocitySampler sampler(vel, maps);
            auto seed = parse_list(sl_seed);
            if (seed.size() != 3) throw config_error("--seed expects r0,z0,theta0");
            Streamline line = trace_streamline(sampler, seed[0], seed[1], seed[2], sl_ds, sl_steps);
            fs::path out_dir(sl_out);
            fs::create_directories(out_dir);
            RunManifest man("streamline", out_dir);
            fs::path csv = out_dir / "streamline.csv";
            CsvWriter out(csv, {"s", "x", "y", "z", "r"});
            for (const auto& pt : line.points) out.row({pt.s, pt.x, pt.y, pt.z, pt.r});
            man.add_file(csv);
            man.set("truncated", line.truncated);
            man.finish("ok");
            return kExitOk;
        }
        if (*toys_cmd) {
            fs::path out_dir(toys_out);
            fs::create_directories(out_dir);
            RunManifest man("toys", out_dir);
            auto problem = toys::BurgersProblem::standard();
            {
                CsvWriter out(out_dir / "riccati.csv", {"t", "u", "v_ratio"});
                for (int k = 0; k <= 18; ++k) {
                    double t = k * 0.05;
                    auto r = toys::riccati(t);
                    out.row({t, r.u, r.v_ratio});
                }
                man.add_file(out_dir / "riccati.csv");
            }
            {
                CsvWriter out(out_dir / "burgers_perturbed.csv", {"eps", "T_eps", "gap"});
                for (double eps : {0.2, 0.1, 0.05, 0.025}) {
                    double T = toys::burgers_perturbed_blowup(problem, eps);
                    out.row({eps, T, std::abs(T - problem.T_star)});
                }
                man.add_file(out_dir / "burgers_perturbed.csv");
            }
            {
                CsvWriter out(out_dir / "burgers_growth.csv", {"t", "p", "eps", "ratio"});
                for (double t : {0.5, 0.75, 0.9, 0.95}) {
                    for (double p : {1.5, 2.0, 4.0}) {
                        double eps = toys::growth_eps(problem, t);
                        out.row({t, p, eps, toys::perturbation_growth(problem, eps, t, p)});
                    }
                }
                man.add_file(out_dir / "burgers_growth.csv");
            }
            man.finish("ok");
            return kExitOk;
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const construction_error& e) {
        std::cerr << "construction error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
