#pragma once

#include <bit>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "swirl/config.hpp"
#include "swirl/fields.hpp"
#include "swirl/grid.hpp"
#include "swirl/meshmap.hpp"

namespace swirl {

static_assert(std::endian::native == std::endian::little,
              "binary payloads are little-endian; big-endian hosts unsupported");

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Buffered binary writing with a running CRC32
// ---------------------------------------------------------------------------

class CrcWriter {
  public:
    explicit CrcWriter(const fs::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw io_error("cannot open '" + path.string() + "' for writing");
    }
    void write(const void* data, std::size_t len) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
        crc_ = crc32(data, len, crc_);
    }
    void write_text(const std::string& s) { write(s.data(), s.size()); }
    void write_grid(const Grid2D& g) {
        std::vector<double> row(g.n_rho() + 1);
        for (int j = 0; j <= g.n_eta(); ++j) {
            for (int i = 0; i <= g.n_rho(); ++i) row[i] = g.at(i, j);
            write(row.data(), row.size() * sizeof(double));
        }
    }
    void finish() {
        std::uint32_t c = crc_;
        out_.write(reinterpret_cast<const char*>(&c), sizeof(c));
        out_.close();
        if (!out_) throw io_error("write failed while closing file");
    }

  private:
    std::ofstream out_;
    std::uint32_t crc_ = 0;
};

class CrcReader {
  public:
    explicit CrcReader(const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error("cannot open '" + path.string() + "'");
        buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        if (buf_.size() < 4) throw io_error("file too short: " + path.string());
        std::uint32_t stored;
        std::memcpy(&stored, buf_.data() + buf_.size() - 4, 4);
        if (crc32(buf_.data(), buf_.size() - 4) != stored)
            throw io_error("checksum mismatch in " + path.string());
        buf_.resize(buf_.size() - 4);
    }
    std::string read_line() {
        auto nl = std::find(buf_.begin() + pos_, buf_.end(), '\n');
        if (nl == buf_.end()) throw io_error("unexpected end of header");
        std::string s(buf_.begin() + pos_, nl);
        pos_ = static_cast<std::size_t>(nl - buf_.begin()) + 1;
        return s;
    }
    void read_grid(Grid2D& g) {
        const std::size_t need = std::size_t(g.n_rho() + 1) * (g.n_eta() + 1) * sizeof(double);
        if (pos_ + need > buf_.size()) throw io_error("truncated grid payload");
        for (int j = 0; j <= g.n_eta(); ++j)
            for (int i = 0; i <= g.n_rho(); ++i) {
                std::memcpy(&g.at(i, j), buf_.data() + pos_, sizeof(double));
                pos_ += sizeof(double);
            }
    }
    bool at_end() const { return pos_ == buf_.size(); }

  private:
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Checkpoint: versioned restart container
// ---------------------------------------------------------------------------

struct CheckpointData {
    SimConfig config;
    long long step = 0;
    double t = 0.0, dt = 0.0;
    double bkm = 0.0;
    double t_prev_diag = 0.0, wmax_prev_diag = 0.0;  // trapezoid state for the BKM integral
    PhaseSpec spec_r, spec_z;
    Grid2D u1, w1, psi1;
};

inline void write_checkpoint(const fs::path& path, const CheckpointData& ck) {
    CrcWriter w(path);
    std::ostringstream head;
    head << "SWRLCHK1\n";
    head << "step=" << ck.step << "\n";
    head << "t=" << fmt_double(ck.t) << "\n";
    head << "dt=" << fmt_double(ck.dt) << "\n";
    head << "bkm=" << fmt_double(ck.bkm) << "\n";
    head << "t_prev_diag=" << fmt_double(ck.t_prev_diag) << "\n";
    head << "wmax_prev_diag=" << fmt_double(ck.wmax_prev_diag) << "\n";
    head << "spec_r=" << ck.spec_r.serialize() << "\n";
    head << "spec_z=" << ck.spec_z.serialize() << "\n";
    head << "config_begin\n" << emit_config(ck.config) << "config_end\n";
    head << "end_header\n";
    w.write_text(head.str());
    w.write_grid(ck.u1);
    w.write_grid(ck.w1);
    w.write_grid(ck.psi1);
    w.finish();
}

inline CheckpointData read_checkpoint(const fs::path& path) {
    CrcReader r(path);
    if (r.read_line() != "SWRLCHK1") throw io_error("not a checkpoint file: " + path.string());
    CheckpointData ck;
    std::string config_text;
    for (;;) {
        std::string line = r.read_line();
        if (line == "end_header") break;
        if (line == "config_begin") {
            for (;;) {
                std::string cl = r.read_line();
                if (cl == "config_end") break;
                config_text += cl + "\n";
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw io_error("bad checkpoint header line: " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "step") ck.step = std::stoll(val);
        else if (key == "t") ck.t = parse_double(val);
        else if (key == "dt") ck.dt = parse_double(val);
        else if (key == "bkm") ck.bkm = parse_double(val);
        else if (key == "t_prev_diag") ck.t_prev_diag = parse_double(val);
        else if (key == "wmax_prev_diag") ck.wmax_prev_diag = parse_double(val);
        else if (key == "spec_r") ck.spec_r = PhaseSpec::deserialize(val);
        else if (key == "spec_z") ck.spec_z = PhaseSpec::deserialize(val);
        else throw io_error("unknown checkpoint header key: " + key);
    }
    ck.config = parse_config_string(config_text, path.string());
    ck.u1 = Grid2D(ck.config.n2, ck.config.n1);
    ck.w1 = Grid2D(ck.config.n2, ck.config.n1);
    ck.psi1 = Grid2D(ck.config.n2, ck.config.n1);
    r.read_grid(ck.u1);
    r.read_grid(ck.w1);
    r.read_grid(ck.psi1);
    return ck;
}

// ---------------------------------------------------------------------------
// Snapshot: grid payload with a text header, no restart metadata
// ---------------------------------------------------------------------------

struct SnapshotData {
    int n1 = 0, n2 = 0;
    double t = 0.0;
    long long step = 0;
    PhaseSpec spec_r, spec_z;
    double transition_fraction = 0.3;
    Grid2D u1, w1, psi1;

    MeshPair build_maps() const {
        return {MeshMap::build(spec_r, n2, 1.0), MeshMap::build(spec_z, n1, 0.5)};
    }
};

inline void write_snapshot(const fs::path& path, const SnapshotData& s) {
    CrcWriter w(path);
    std::ostringstream head;
    head << "SWRLSNAP1\n";
    head << "n1=" << s.n1 << "\n";
    head << "n2=" << s.n2 << "\n";
    head << "t=" << fmt_double(s.t) << "\n";
    head << "step=" << s.step << "\n";
    head << "spec_r=" << s.spec_r.serialize() << "\n";
    head << "spec_z=" << s.spec_z.serialize() << "\n";
    head << "end_header\n";
    w.write_text(head.str());
    w.write_grid(s.u1);
    w.write_grid(s.w1);
    w.write_grid(s.psi1);
    w.finish();
}

inline SnapshotData read_snapshot(const fs::path& path) {
    CrcReader r(path);
    if (r.read_line() != "SWRLSNAP1") throw io_error("not a snapshot file: " + path.string());
    SnapshotData s;
    for (;;) {
        std::string line = r.read_line();
        if (line == "end_header") break;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw io_error("bad snapshot header line: " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "n1") s.n1 = std::stoi(val);
        else if (key == "n2") s.n2 = std::stoi(val);
        else if (key == "t") s.t = parse_double(val);
        else if (key == "step") s.step = std::stoll(val);
        else if (key == "spec_r") s.spec_r = PhaseSpec::deserialize(val);
        else if (key == "spec_z") s.spec_z = PhaseSpec::deserialize(val);
        else throw io_error("unknown snapshot header key: " + key);
    }
    if (s.n1 < 2 || s.n2 < 2) throw io_error("snapshot missing grid sizes");
    s.u1 = Grid2D(s.n2, s.n1);
    s.w1 = Grid2D(s.n2, s.n1);
    s.psi1 = Grid2D(s.n2, s.n1);
    r.read_grid(s.u1);
    r.read_grid(s.w1);
    r.read_grid(s.psi1);
    return s;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

class CsvWriter {
  public:
    CsvWriter() = default;
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) { open(path, header); }
    void open(const fs::path& path, const std::vector<std::string>& header) {
        out_.open(path);
        if (!out_) throw io_error("cannot open '" + path.string() + "' for writing");
        for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
        out_ << "\n";
    }
    void row(const std::vector<double>& values) {
        for (std::size_t k = 0; k < values.size(); ++k)
            out_ << (k ? "," : "") << fmt_double(values[k]);
        out_ << "\n";
        out_.flush();
    }
    bool is_open() const { return out_.is_open(); }

  private:
    std::ofstream out_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return static_cast<int>(k);
        throw io_error("CSV column '" + name + "' not found");
    }
    std::vector<double> col(const std::string& name) const {
        int c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r.at(c));
        return out;
    }
};

inline CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty CSV: " + path.string());
    {
        std::istringstream is(line);
        std::string tok;
        while (std::getline(is, tok, ',')) t.header.push_back(tok);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string tok;
        std::vector<double> row;
        while (std::getline(is, tok, ',')) row.push_back(parse_double(tok));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

inline std::uint32_t crc_of_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    std::uint32_t c = 0;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        c = crc32(buf, static_cast<std::size_t>(in.gcount()), c);
    return c;
}

inline std::string iso_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// Inventory of one subcommand invocation: config echo, produced files with
// checksums, and the termination reason.
class RunManifest {
  public:
    RunManifest(std::string subcommand, const fs::path& dir)
        : dir_(dir) {
        j_["tool"] = "swirl";
        j_["version"] = kVersion;
        j_["subcommand"] = std::move(subcommand);
        j_["started_at"] = iso_now();
        j_["files"] = nlohmann::json::array();
    }
    void set_config(const SimConfig& cfg) { j_["config"] = emit_config(cfg); }
    void set(const std::string& key, const nlohmann::json& v) { j_[key] = v; }
    void add_file(const fs::path& path) { files_.push_back(path); }
    void finish(const std::string& termination_reason) {
        j_["termination_reason"] = termination_reason;
        j_["finished_at"] = iso_now();
        for (const auto& f : files_) {
            nlohmann::json e;
            e["path"] = fs::relative(f, dir_).string();
            e["bytes"] = static_cast<std::uint64_t>(fs::file_size(f));
            e["crc32"] = crc_of_file(f);
            j_["files"].push_back(e);
        }
        std::ofstream out(dir_ / "manifest.json");
        if (!out) throw io_error("cannot write manifest in " + dir_.string());
        out << j_.dump(2) << "\n";
    }
    const nlohmann::json& json() const { return j_; }

  private:
    fs::path dir_;
    nlohmann::json j_;
    std::vector<fs::path> files_;
};

// Verify the invariant that every listed file exists with matching checksum.
inline bool manifest_inventory_ok(const fs::path& dir, std::string* why = nullptr) {
    std::ifstream in(dir / "manifest.json");
    if (!in) {
        if (why) *why = "manifest.json missing";
        return false;
    }
    nlohmann::json j;
    in >> j;
    for (const auto& e : j.at("files")) {
        fs::path p = dir / e.at("path").get<std::string>();
        if (!fs::exists(p)) {
            if (why) *why = "missing file " + p.string();
            return false;
        }
        if (crc_of_file(p) != e.at("crc32").get<std::uint32_t>()) {
            if (why) *why = "checksum mismatch on " + p.string();
            return false;
        }
    }
    return true;
}

}  // namespace swirl
