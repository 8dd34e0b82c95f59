#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "ksde/experiment.hpp"
#include "ksde/io.hpp"
#include "ksde/sha256.hpp"

using namespace ksde;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("ksde_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("sha256 known-answer vectors", "[experiment]") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("double formatting round-trips", "[experiment]") {
    for (double x : {0.1, -3.0e-7, 1.0 / 3.0, 6.02214076e23, 0.0, -0.0, 2.2250738585072014e-308}) {
        const std::string s = io::format_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
}

TEST_CASE("config file parsing and overrides", "[experiment]") {
    const fs::path dir = fresh_dir("config");
    const fs::path file = dir / "run.cfg";
    io::write_file(file, "alpha = -0.25\nsteps=128 # trailing comment\n\n# full comment line\npaths = 3\n");
    ExperimentConfig cfg;
    apply_config_file(cfg, file);
    CHECK(cfg.alpha == -0.25);
    CHECK(cfg.steps == 128);
    CHECK(cfg.paths == 3);
    CHECK(cfg.is_set("alpha"));
    CHECK_FALSE(cfg.is_set("horizon"));

    io::write_file(file, "bogus = 1\n");
    CHECK_THROWS_AS(apply_config_file(cfg, file), ConfigError);
    io::write_file(file, "alpha -0.25\n");
    CHECK_THROWS_AS(apply_config_file(cfg, file), ConfigError);

    // Per-check defaults only fill fields the user left untouched.
    ExperimentConfig user;
    set_config_field(user, "paths", "7");
    ExperimentConfig defaults;
    defaults.paths = 100;
    defaults.steps = 4096;
    const ExperimentConfig merged = merge_over(defaults, user);
    CHECK(merged.paths == 7);
    CHECK(merged.steps == 4096);
}

TEST_CASE("config validation rules", "[experiment]") {
    ExperimentConfig cfg;
    cfg.alpha = -0.6;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.alpha = -0.25;
    cfg.x0 = 0.0;
    cfg.y0 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // origin needs em + allow flag
    cfg.allow_origin = true;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // still timechange scheme
    cfg.scheme = RunScheme::kEm;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // em with alpha < 0 needs trunc
    cfg.trunc_n = 6;
    CHECK_NOTHROW(cfg.validate());
    cfg.scheme = RunScheme::kBoth;
    cfg.alpha = 0.5;
    cfg.x0 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // timechange needs alpha <= 0
}

TEST_CASE("sample campaign writes reproducible CSVs and manifest", "[experiment]") {
    const fs::path dir1 = fresh_dir("sample1");
    const fs::path dir2 = fresh_dir("sample2");
    ExperimentConfig cfg;
    cfg.alpha = -0.25;
    cfg.steps = 64;
    cfg.paths = 3;
    cfg.seed = 99;
    cfg.scheme = RunScheme::kBoth;
    cfg.trunc_n = 6;

    cfg.out_dir = dir1.string();
    const auto manifest1 = run_sample(cfg);
    cfg.out_dir = dir2.string();
    const auto manifest2 = run_sample(cfg);

    REQUIRE(manifest1["outputs"].size() == 6);  // tc + em per path
    for (const auto& entry : manifest1["outputs"]) {
        const fs::path f = dir1 / entry["file"].get<std::string>();
        REQUIRE(fs::exists(f));
        CHECK(io::sha256_file(f) == entry["sha256"].get<std::string>());
    }
    // Same config, fresh directory: byte-identical outputs.
    for (std::size_t i = 0; i < manifest1["outputs"].size(); ++i)
        CHECK(manifest1["outputs"][i]["sha256"] == manifest2["outputs"][i]["sha256"]);

    // CSV header and line count.
    const std::string csv = io::read_file(dir1 / manifest1["outputs"][0]["file"].get<std::string>());
    CHECK(csv.rfind("t,x,y\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 66);
}

TEST_CASE("zero-noise sample equals the closed-form line", "[experiment]") {
    const fs::path dir = fresh_dir("zeronoise");
    ExperimentConfig cfg;
    cfg.alpha = 0.0;
    cfg.x0 = 1.0;
    cfg.y0 = 0.5;
    cfg.steps = 16;
    cfg.paths = 1;
    cfg.zero_noise = true;
    cfg.out_dir = dir.string();
    run_sample(cfg);

    std::string expected = "t,x,y\n";
    const TimeGrid g = TimeGrid::uniform(1.0, 16);
    for (std::size_t k = 0; k < g.size(); ++k) {
        expected += io::format_double(g.times[k]) + "," +
                    io::format_double(1.0 + 0.5 * g.times[k]) + "," + io::format_double(0.5) + "\n";
    }
    CHECK(io::read_file(dir / "path_00000.csv") == expected);
}

TEST_CASE("named checks run with their reference defaults", "[experiment]") {
    ExperimentConfig user;
    set_config_field(user, "paths", "400");  // keep the unit suite quick

    const CheckResult rt = run_check("roundtrip", user);
    CHECK(rt.pass);
    CHECK(rt.report["pass"] == true);

    const CheckResult ks = run_check("ks-alpha0", user);
    CHECK(ks.pass);

    set_config_field(user, "steps", "256");
    const CheckResult gw = run_check("gronwall", user);
    CHECK(gw.pass);
    CHECK(gw.report["report"]["verdict"] != "violated");

    CHECK_THROWS_AS(run_check("nope", user), ConfigError);
}
