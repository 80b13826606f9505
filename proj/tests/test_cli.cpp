#include "afdm/experiment.hpp"

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace afdm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(AFDM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config: parse, comments, overrides, unknown keys") {
    auto cfg = KeyValueConfig::parse_string("a = 1\n# comment\n b= 2.5 # tail\n\nname=x\n");
    CHECK(cfg.get_int("a", 0) == 1);
    CHECK(cfg.get_double("b", 0.0) == 2.5);
    CHECK(cfg.get_string("name", "") == "x");
    CHECK(cfg.get_int("missing", 7) == 7);  // default recorded
    cfg.finish();
    CHECK(cfg.effective().at("missing") == "7");

    auto bad = KeyValueConfig::parse_string("stray = 1\n");
    CHECK_THROWS_AS(bad.finish(), ConfigError);

    auto typo = KeyValueConfig::parse_string("n = twelve\n");
    CHECK_THROWS_AS(typo.get_int("n", 0), ConfigError);

    CHECK_THROWS_AS(KeyValueConfig::parse_string("no equals sign\n"), ConfigError);
}

TEST_CASE("experiment: unknown kind and unknown key rejected") {
    auto cfg = KeyValueConfig::parse_string("");
    std::ostringstream log;
    CHECK_THROWS_AS(run_experiment("nonsense", cfg, "/tmp", log), ConfigError);
    auto cfg2 = KeyValueConfig::parse_string("definitely_not_a_key = 3\n");
    CHECK_THROWS_AS(run_experiment("af", cfg2, "/tmp", log), ConfigError);
}

TEST_CASE("cli: determinism, echo round-trip, exit codes") {
    const fs::path base = fs::temp_directory_path() / "afdm_cli_test";
    fs::remove_all(base);
    const fs::path out1 = base / "run1";
    const fs::path out2 = base / "run2";
    const fs::path out3 = base / "run3";

    const std::string common =
        " --seed 5 --set snr_db=2,6 --set target_errors=40 --set max_trials=4096";
    REQUIRE(run_cli("ber --out " + out1.string() + " --threads 1" + common) == 0);
    REQUIRE(run_cli("ber --out " + out2.string() + " --threads 2" + common) == 0);

    // Byte-identical outputs for the same config and seed, any thread count.
    for (const auto& name : {"ber_ofdm.csv", "ber_ocdm.csv", "ber_afdm.csv", "ber.echo.cfg"})
        CHECK(slurp(out1 / name) == slurp(out2 / name));

    // The echo is a valid config reproducing the outputs.
    REQUIRE(run_cli("ber --out " + out3.string() + " --config " +
                    (out1 / "ber.echo.cfg").string()) == 0);
    for (const auto& name : {"ber_ofdm.csv", "ber_afdm.csv"})
        CHECK(slurp(out1 / name) == slurp(out3 / name));

    // Exit code 2: config errors (unknown key, bad value, bad file).
    CHECK(run_cli("ber --out " + out1.string() + " --set bogus_key=1") == 2);
    CHECK(run_cli("ber --out " + out1.string() + " --set n=true") == 2);
    CHECK(run_cli("ber --config /nonexistent.cfg --out " + out1.string()) == 2);

    // Exit code 3: a config that parses but is rejected by the library
    // (prefix as long as the symbol).
    CHECK(run_cli("ber --out " + out1.string() + " --set cpp_len=12" + common) == 3);

    fs::remove_all(base);
}

TEST_CASE("cli: af outputs include the lattice sidecar") {
    const fs::path out = fs::temp_directory_path() / "afdm_cli_af";
    fs::remove_all(out);
    REQUIRE(run_cli("af --out " + out.string() +
                    " --set delay_min=-8 --set delay_max=8 --set doppler_min=-0.05"
                    " --set doppler_max=0.05 --set doppler_step=0.005") == 0);
    const std::string lattice = slurp(out / "af_lattice.csv");
    CHECK(lattice.find("area,1/1") != std::string::npos);
    CHECK(lattice.find("generator,") != std::string::npos);
    const std::string echo = slurp(out / "af.echo.cfg");
    CHECK(echo.find("n = 128") != std::string::npos);
    CHECK(echo.find("seed = ") != std::string::npos);
    fs::remove_all(out);
}
