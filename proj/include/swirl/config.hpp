#pragma once

#include <cmath>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "swirl/fields.hpp"
#include "swirl/meshmap.hpp"
#include "swirl/poisson.hpp"

namespace swirl {

inline constexpr const char* kVersion = "0.1.0";

struct SimConfig {
    int case_id = 1;
    SimMode mode = SimMode::euler;
    double nu = 0.0;                  // Navier-Stokes viscosity
    bool numerical_viscosity = true;  // Euler mode: apply nu = 1/n1^2
    int n1 = 256;                     // grid count along z
    int n2 = 256;                     // grid count along r
    double t_end = 0.0023;
    long long max_steps = 1000000000;
    int diag_every = 1;
    int snapshot_every = 500;
    int checkpoint_every = 5000;
    std::vector<double> snapshot_times;  // matched-time snapshots (linear in t)
    std::string out_dir = "run_out";
    double transition_fraction = 0.3;
    double remesh_guard_rel = 0.01;  // skip remesh when the new spec moved less than this
    PoissonBackend poisson = PoissonBackend::direct;
    int psi_solves_per_step = 2;
    double r_trigger = 0.2;
    double z_trigger_p12 = 0.25;
    double z_trigger_p3 = 0.23;
    long long period1_base = 45000;  // step boundaries at base * (n1/1536)
    long long period2_base = 60000;

    bool operator==(const SimConfig&) const = default;

    double nu_effective() const {
        if (mode == SimMode::euler) return numerical_viscosity ? 1.0 / (double(n1) * n1) : 0.0;
        return nu;
    }
    long long period1_end() const { return std::llround(period1_base * double(n1) / 1536.0); }
    long long period2_end() const { return std::llround(period2_base * double(n1) / 1536.0); }
    int period_of_step(long long step) const {
        if (step < period1_end()) return 1;
        if (step < period2_end()) return 2;
        return 3;
    }
    RemeshThresholds thresholds() const { return {r_trigger, z_trigger_p12, z_trigger_p3}; }

    void validate() const {
        if (case_id < 1 || case_id > 4) throw config_error("case must be in 1..4");
        if (nu < 0.0) throw config_error("nu must be >= 0");
        if (n1 < 32 || n2 < 32) throw config_error("n1 and n2 must be >= 32");
        if (!(t_end > 0.0)) throw config_error("t_end must be > 0");
        if (max_steps < 0) throw config_error("max_steps must be >= 0");
        if (diag_every < 1) throw config_error("diag_every must be >= 1");
        if (snapshot_every < 1) throw config_error("snapshot_every must be >= 1");
        if (checkpoint_every < 1) throw config_error("checkpoint_every must be >= 1");
        if (!(transition_fraction >= 0.0 && transition_fraction < 0.5))
            throw config_error("transition_fraction must be in [0, 0.5)");
        if (psi_solves_per_step != 1 && psi_solves_per_step != 2)
            throw config_error("psi_solves_per_step must be 1 or 2");
        if (!(remesh_guard_rel >= 0.0)) throw config_error("remesh_guard_rel must be >= 0");
        if (!(r_trigger > 0.0 && z_trigger_p12 > 0.0 && z_trigger_p3 > 0.0))
            throw config_error("remesh triggers must be > 0");
        if (period1_base <= 0 || period2_base <= period1_base)
            throw config_error("period step boundaries must satisfy 0 < period1 < period2");
        for (double t : snapshot_times)
            if (!(t >= 0.0)) throw config_error("snapshot_times must be >= 0");
    }
};

namespace detail {
inline std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}
inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw config_error(key + ": expected on/off, got '" + v + "'");
}
}  // namespace detail

// Apply one key=value pair; unknown keys are rejected.
inline void config_set(SimConfig& c, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    const std::string v = detail::trim(value);
    if (key == "case") c.case_id = static_cast<int>(parse_double(v));
    else if (key == "mode") {
        if (v == "euler") c.mode = SimMode::euler;
        else if (v == "navier_stokes") c.mode = SimMode::navier_stokes;
        else throw config_error("mode: expected euler|navier_stokes, got '" + v + "'");
    }
    else if (key == "nu") c.nu = parse_double(v);
    else if (key == "numerical_viscosity") c.numerical_viscosity = parse_bool(v, key);
    else if (key == "n1") c.n1 = static_cast<int>(parse_double(v));
    else if (key == "n2") c.n2 = static_cast<int>(parse_double(v));
    else if (key == "t_end") c.t_end = parse_double(v);
    else if (key == "max_steps") c.max_steps = static_cast<long long>(parse_double(v));
    else if (key == "diag_every") c.diag_every = static_cast<int>(parse_double(v));
    else if (key == "snapshot_every") c.snapshot_every = static_cast<int>(parse_double(v));
    else if (key == "checkpoint_every") c.checkpoint_every = static_cast<int>(parse_double(v));
    else if (key == "snapshot_times") {
        c.snapshot_times.clear();
        std::istringstream is(v);
        std::string tok;
        while (std::getline(is, tok, ','))
            if (!detail::trim(tok).empty()) c.snapshot_times.push_back(parse_double(tok));
    }
    else if (key == "out_dir") c.out_dir = v;
    else if (key == "transition_fraction") c.transition_fraction = parse_double(v);
    else if (key == "remesh_guard_rel") c.remesh_guard_rel = parse_double(v);
    else if (key == "poisson") {
        if (v == "direct") c.poisson = PoissonBackend::direct;
        else if (v == "iterative") c.poisson = PoissonBackend::iterative;
        else throw config_error("poisson: expected direct|iterative, got '" + v + "'");
    }
    else if (key == "psi_solves_per_step") c.psi_solves_per_step = static_cast<int>(parse_double(v));
    else if (key == "r_trigger") c.r_trigger = parse_double(v);
    else if (key == "z_trigger_p12") c.z_trigger_p12 = parse_double(v);
    else if (key == "z_trigger_p3") c.z_trigger_p3 = parse_double(v);
    else if (key == "period1_base") c.period1_base = static_cast<long long>(parse_double(v));
    else if (key == "period2_base") c.period2_base = static_cast<long long>(parse_double(v));
    else throw config_error("unknown config key '" + key + "'");
}

// Plain-text key=value format; '#' starts a comment, blank lines ignored.
inline SimConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    SimConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(source + ":" + std::to_string(lineno) + ": expected key=value");
        try {
            config_set(c, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const config_error& e) {
            throw config_error(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

inline SimConfig parse_config_string(const std::string& text, const std::string& source = "<config>") {
    std::istringstream is(text);
    return parse_config(is, source);
}

inline std::string emit_config(const SimConfig& c) {
    std::ostringstream os;
    os << "case=" << c.case_id << "\n";
    os << "mode=" << (c.mode == SimMode::euler ? "euler" : "navier_stokes") << "\n";
    os << "nu=" << fmt_double(c.nu) << "\n";
    os << "numerical_viscosity=" << (c.numerical_viscosity ? "on" : "off") << "\n";
    os << "n1=" << c.n1 << "\n";
    os << "n2=" << c.n2 << "\n";
    os << "t_end=" << fmt_double(c.t_end) << "\n";
    os << "max_steps=" << c.max_steps << "\n";
    os << "diag_every=" << c.diag_every << "\n";
    os << "snapshot_every=" << c.snapshot_every << "\n";
    os << "checkpoint_every=" << c.checkpoint_every << "\n";
    os << "snapshot_times=";
    for (std::size_t k = 0; k < c.snapshot_times.size(); ++k)
        os << (k ? "," : "") << fmt_double(c.snapshot_times[k]);
    os << "\n";
    os << "out_dir=" << c.out_dir << "\n";
    os << "transition_fraction=" << fmt_double(c.transition_fraction) << "\n";
    os << "remesh_guard_rel=" << fmt_double(c.remesh_guard_rel) << "\n";
    os << "poisson=" << (c.poisson == PoissonBackend::direct ? "direct" : "iterative") << "\n";
    os << "psi_solves_per_step=" << c.psi_solves_per_step << "\n";
    os << "r_trigger=" << fmt_double(c.r_trigger) << "\n";
    os << "z_trigger_p12=" << fmt_double(c.z_trigger_p12) << "\n";
    os << "z_trigger_p3=" << fmt_double(c.z_trigger_p3) << "\n";
    os << "period1_base=" << c.period1_base << "\n";
    os << "period2_base=" << c.period2_base << "\n";
    return os.str();
}

// Paper parameters of the first-period adaptive mesh.
inline PhaseSpec initial_r_spec(double transition_fraction = 0.3) {
    PhaseSpec s;
    s.nodes = {0.001, 0.05, 0.2};
    s.fractions = {0.001, 0.5, 0.85};
    s.transition_fraction = transition_fraction;
    return s;
}
inline PhaseSpec initial_z_spec(double transition_fraction = 0.3) {
    PhaseSpec s;
    s.nodes = {0.1, 0.25};
    s.fractions = {0.5, 0.85};
    s.transition_fraction = transition_fraction;
    return s;
}

}  // namespace swirl
