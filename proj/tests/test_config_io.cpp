#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <random>

#include "swirl/config.hpp"
#include "swirl/io.hpp"

using namespace swirl;
namespace fs = std::filesystem;

namespace {
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("swirl_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};
}  // namespace

TEST_CASE("config defaults and overrides") {
    SimConfig c = parse_config_string("");
    REQUIRE(c.case_id == 1);
    REQUIRE(c.mode == SimMode::euler);
    REQUIRE(c.n1 == 256);
    REQUIRE(c.n2 == 256);
    REQUIRE(c.t_end == Catch::Approx(0.0023));
    REQUIRE(c.snapshot_every == 500);
    REQUIRE(c.diag_every == 1);

    SimConfig o = parse_config_string("n1=512\ncase=4\n");
    REQUIRE(o.n1 == 512);
    REQUIRE(o.case_id == 4);
    REQUIRE(o.n2 == 256);
}

TEST_CASE("config rejections carry the line and the constraint") {
    REQUIRE_THROWS_AS(parse_config_string("nu=-1\n"), config_error);
    try {
        parse_config_string("mode=navier_stokes\nnu=-1\n", "test.cfg");
    } catch (const config_error& e) {
        REQUIRE(std::string(e.what()).find("nu") != std::string::npos);
    }
    REQUIRE_THROWS_AS(parse_config_string("bogus_key=3\n"), config_error);
    try {
        parse_config_string("n1=64\nbogus_key=3\n", "test.cfg");
    } catch (const config_error& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("test.cfg:2") != std::string::npos);
        REQUIRE(msg.find("bogus_key") != std::string::npos);
    }
    REQUIRE_THROWS_AS(parse_config_string("n1=16\n"), config_error);
    REQUIRE_THROWS_AS(parse_config_string("case=7\n"), config_error);
    REQUIRE_THROWS_AS(parse_config_string("not a kv line\n"), config_error);
}

TEST_CASE("config round-trip: parse(emit(c)) == c") {
    SimConfig c;
    c.case_id = 3;
    c.mode = SimMode::navier_stokes;
    c.nu = 5e-3;
    c.n1 = 384;
    c.n2 = 320;
    c.t_end = 0.00221;
    c.max_steps = 1234;
    c.snapshot_times = {0.001, 0.002};
    c.out_dir = "some/dir";
    c.numerical_viscosity = false;
    c.poisson = PoissonBackend::iterative;
    c.psi_solves_per_step = 1;
    c.transition_fraction = 0.25;
    SimConfig back = parse_config_string(emit_config(c));
    REQUIRE(back == c);
}

TEST_CASE("nu_effective and period boundaries") {
    SimConfig c;
    c.n1 = c.n2 = 512;
    REQUIRE(c.nu_effective() == Catch::Approx(1.0 / (512.0 * 512.0)).epsilon(1e-15));
    c.numerical_viscosity = false;
    REQUIRE(c.nu_effective() == 0.0);
    c.mode = SimMode::navier_stokes;
    c.nu = 5e-3;
    REQUIRE(c.nu_effective() == 5e-3);
    // period boundaries at 45000*(512/1536)=15000 and 60000*(512/1536)=20000
    c.numerical_viscosity = true;
    REQUIRE(c.period1_end() == 15000);
    REQUIRE(c.period2_end() == 20000);
    REQUIRE(c.period_of_step(0) == 1);
    REQUIRE(c.period_of_step(14999) == 1);
    REQUIRE(c.period_of_step(15000) == 2);
    REQUIRE(c.period_of_step(20000) == 3);
}

TEST_CASE("fmt_double round-trips") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        double x = uni(rng) * std::pow(10.0, int(rng() % 25) - 12);
        REQUIRE(parse_double(fmt_double(x)) == x);
    }
    REQUIRE(parse_double(fmt_double(2.5e-7)) == 2.5e-7);
}

TEST_CASE("checkpoint round-trip is bitwise") {
    TempDir tmp;
    CheckpointData ck;
    ck.config.n1 = 48;
    ck.config.n2 = 40;
    ck.config.case_id = 2;
    ck.step = 77;
    ck.t = 1.2345678901234567e-3;
    ck.dt = 2.5e-7;
    ck.bkm = 42.25;
    ck.t_prev_diag = 1.2e-3;
    ck.wmax_prev_diag = 3.5e4;
    ck.spec_r = initial_r_spec();
    ck.spec_z = initial_z_spec();
    ck.u1 = Grid2D(40, 48);
    ck.w1 = Grid2D(40, 48);
    ck.psi1 = Grid2D(40, 48);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-1e4, 1e4);
    for (int j = 0; j <= 48; ++j)
        for (int i = 0; i <= 40; ++i) {
            ck.u1.at(i, j) = uni(rng);
            ck.w1.at(i, j) = uni(rng);
            ck.psi1.at(i, j) = uni(rng);
        }
    write_checkpoint(tmp.path / "ck.bin", ck);
    CheckpointData rd = read_checkpoint(tmp.path / "ck.bin");
    REQUIRE(rd.step == ck.step);
    REQUIRE(rd.t == ck.t);
    REQUIRE(rd.dt == ck.dt);
    REQUIRE(rd.bkm == ck.bkm);
    REQUIRE(rd.t_prev_diag == ck.t_prev_diag);
    REQUIRE(rd.wmax_prev_diag == ck.wmax_prev_diag);
    REQUIRE(rd.spec_r == ck.spec_r);
    REQUIRE(rd.spec_z == ck.spec_z);
    REQUIRE(rd.config == ck.config);
    REQUIRE(rd.u1 == ck.u1);
    REQUIRE(rd.w1 == ck.w1);
    REQUIRE(rd.psi1 == ck.psi1);
}

TEST_CASE("checkpoint corruption is detected") {
    TempDir tmp;
    CheckpointData ck;
    ck.config.n1 = 32;
    ck.config.n2 = 32;
    ck.spec_r = initial_r_spec();
    ck.spec_z = initial_z_spec();
    ck.u1 = Grid2D(32, 32);
    ck.w1 = Grid2D(32, 32);
    ck.psi1 = Grid2D(32, 32);
    write_checkpoint(tmp.path / "ck.bin", ck);
    // flip one byte in the middle
    auto p = tmp.path / "ck.bin";
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(200);
    char c;
    f.seekg(200);
    f.get(c);
    f.seekp(200);
    f.put(static_cast<char>(c ^ 0x40));
    f.close();
    REQUIRE_THROWS_AS(read_checkpoint(p), io_error);
}

TEST_CASE("snapshot round-trip and map rebuild") {
    TempDir tmp;
    SnapshotData s;
    s.n1 = 48;
    s.n2 = 40;
    s.t = 0.002;
    s.step = 100;
    s.spec_r = initial_r_spec();
    s.spec_z = initial_z_spec();
    s.u1 = Grid2D(40, 48);
    s.w1 = Grid2D(40, 48);
    s.psi1 = Grid2D(40, 48);
    s.u1.at(3, 4) = 1.5;
    write_snapshot(tmp.path / "snap.bin", s);
    SnapshotData rd = read_snapshot(tmp.path / "snap.bin");
    REQUIRE(rd.t == s.t);
    REQUIRE(rd.u1 == s.u1);
    MeshPair maps = rd.build_maps();
    REQUIRE(maps.r.n() == 40);
    REQUIRE(maps.z.n() == 48);
    REQUIRE(maps.z.domain_length() == 0.5);
}

TEST_CASE("CSV writer/reader round-trip") {
    TempDir tmp;
    {
        CsvWriter w(tmp.path / "t.csv", {"a", "b"});
        w.row({1.5, 2.5e-7});
        w.row({-3.25, 1e300});
    }
    CsvTable t = read_csv(tmp.path / "t.csv");
    REQUIRE(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    REQUIRE(t.col("b")[0] == 2.5e-7);
    REQUIRE(t.col("a")[1] == -3.25);
    REQUIRE_THROWS_AS(t.column("missing"), io_error);
}

TEST_CASE("manifest inventory check") {
    TempDir tmp;
    {
        std::ofstream f(tmp.path / "data.txt");
        f << "payload\n";
    }
    RunManifest man("test", tmp.path);
    man.add_file(tmp.path / "data.txt");
    man.finish("ok");
    std::string why;
    REQUIRE(manifest_inventory_ok(tmp.path, &why));
    // tamper
    {
        std::ofstream f(tmp.path / "data.txt");
        f << "tampered\n";
    }
    REQUIRE_FALSE(manifest_inventory_ok(tmp.path, &why));
    REQUIRE(why.find("checksum") != std::string::npos);
}
