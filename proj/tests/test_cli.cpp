// Integration tests that drive the installed CLI binary end to end.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code;
    std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
    const fs::path out = fs::temp_directory_path() / "edring_cli_stdout.txt";
    std::string cmd = std::string(EDRING_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    int code = -1;
    if (WIFEXITED(status)) code = WEXITSTATUS(status);
    return {code, ss.str()};
}

std::string scenario(const char* name) {
    return (fs::path(EDRING_SCENARIO_DIR) / name).string();
}

fs::path write_temp_config(const char* name, const json& j) {
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream(p) << j.dump();
    return p;
}

json boson_config() {
    return json::parse(R"({
        "name": "tiny-boson",
        "model": {"L": 6, "statistics": "boson",
                   "pseudopotential": {"F": {"0": 1, "1": 1}}},
        "filling": {"p": 1, "q": 2},
        "n_range": [0, 4],
        "checks": ["relation_I", "relation_II", "zero_energy", "incompressibility"]
    })");
}

}  // namespace

TEST_CASE("bundled boson scenario passes verify-relations with exit 0") {
    RunResult r = run_cli("verify-relations --config " +
                          scenario("boson_nu_half_L8.json"));
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.stdout_text);
    CHECK(doc.at("pass") == true);
    bool saw_thm = false;
    for (const auto& rel : doc.at("relations")) {
        if (rel.at("relation_id") == "thm_main") {
            saw_thm = true;
            CHECK(rel.at("pass") == true);
            CHECK(rel.at("label") == "");
        }
    }
    CHECK(saw_thm);
}

TEST_CASE("spectrum reports q_n = 2 at the maximal boson filling") {
    RunResult r = run_cli("spectrum --config " + scenario("boson_nu_half_L8.json") +
                          " --n 4");
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.stdout_text);
    REQUIRE(doc.at("spectra").size() == 1);
    CHECK(doc.at("spectra")[0].at("q_n") == 2);
    CHECK(doc.at("spectra")[0].at("kernel_dim") == 2);
}

TEST_CASE("fermion scenario records the labeled theorem check and exits 0") {
    RunResult r = run_cli("verify-relations --config " +
                          scenario("fermion_nu_third_L9.json"));
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.stdout_text);
    bool saw = false;
    for (const auto& rel : doc.at("relations"))
        if (rel.at("relation_id") == "thm_main") {
            saw = true;
            std::string label = rel.at("label");
            CHECK(label.find("kernel-dim-mismatch") != std::string::npos);
        }
    CHECK(saw);
}

TEST_CASE("missing config and bad check names exit 2") {
    CHECK(run_cli("spectrum --config /no/such/file.json").exit_code == 2);
    json bad = boson_config();
    bad["checks"] = {"bogus"};
    fs::path p = write_temp_config("edring_bad_check.json", bad);
    CHECK(run_cli("verify-relations --config " + p.string()).exit_code == 2);
    CHECK(run_cli("no-such-subcommand").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
}

TEST_CASE("starved solver budget exits 3 with an error record") {
    json cfg = boson_config();
    cfg["solver"] = {{"dense_crossover", 1}, {"use_blocking", false},
                     {"max_iterations", 1}, {"max_restarts", 0}};
    fs::path p = write_temp_config("edring_starved.json", cfg);
    RunResult r = run_cli("verify-relations --config " + p.string());
    CHECK(r.exit_code == 3);
    json doc = json::parse(r.stdout_text);
    CHECK(doc.at("error").at("type") == "no_convergence");
}

TEST_CASE("failing physics flips the exit code to 1") {
    // fermion truncated model at L = 12: zero-energy states survive above n_q,
    // so the unlabeled incompressibility check genuinely fails
    json cfg = json::parse(R"({
        "name": "fermion-L12",
        "model": {"L": 12, "statistics": "fermion",
                   "pseudopotential": {"F": {"1": 1, "3": 0.5}}},
        "filling": {"p": 1, "q": 3},
        "n_range": [0, 5],
        "checks": ["incompressibility"]
    })");
    fs::path p = write_temp_config("edring_fail.json", cfg);
    RunResult r = run_cli("verify-relations --config " + p.string());
    CHECK(r.exit_code == 1);
    json doc = json::parse(r.stdout_text);
    CHECK(doc.at("pass") == false);
}

TEST_CASE("reports are byte-identical apart from the metadata block") {
    fs::path cfg = write_temp_config("edring_repro.json", boson_config());
    fs::path out1 = fs::temp_directory_path() / "edring_repro_out1";
    fs::path out2 = fs::temp_directory_path() / "edring_repro_out2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    REQUIRE(run_cli("verify-relations --format both --config " + cfg.string() +
                    " --out " + out1.string()).exit_code == 0);
    REQUIRE(run_cli("verify-relations --format both --config " + cfg.string() +
                    " --out " + out2.string() + " --threads 2").exit_code == 0);
    json a, b;
    std::ifstream(out1 / "relations.json") >> a;
    std::ifstream(out2 / "relations.json") >> b;
    a.erase("metadata");
    b.erase("metadata");
    CHECK(a.dump() == b.dump());
    std::ifstream c1(out1 / "relations.csv"), c2(out2 / "relations.csv");
    std::stringstream s1, s2;
    s1 << c1.rdbuf();
    s2 << c2.rdbuf();
    CHECK(s1.str() == s2.str());
    CHECK_FALSE(s1.str().empty());
}

TEST_CASE("gram subcommand emits norms and blocks") {
    RunResult r = run_cli("gram --config " + scenario("boson_nu_half_L8.json"));
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(r.stdout_text);
    CHECK(doc.at("gram").at("norm_gram").get<double>() == Catch::Approx(2.0));
    CHECK(doc.at("gram").at("norm_F").get<double>() == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(doc.contains("gram_blocks"));
    CHECK(doc.at("gram_blocks").at("blocks").size() == 8);
}

TEST_CASE("sweep runs every axis point and keeps going after failures") {
    json cfg = json::parse(R"({
        "name": "fermion-sweep",
        "model": {"L": 9, "statistics": "fermion",
                   "pseudopotential": {"F": {"1": 1, "3": 0.5}}},
        "filling": {"p": 1, "q": 3},
        "checks": ["zero_energy", "incompressibility"],
        "sweep": {"axis": "L", "values": [9, 12]}
    })");
    fs::path p = write_temp_config("edring_sweep.json", cfg);
    RunResult r = run_cli("sweep --config " + p.string());
    CHECK(r.exit_code == 1);  // L = 12 incompressibility fails, run continues
    json doc = json::parse(r.stdout_text);
    REQUIRE(doc.at("sweep").size() == 2);
    CHECK(doc.at("sweep")[0].at("L") == 9);
    CHECK(doc.at("sweep")[1].at("L") == 12);
}

TEST_CASE("sweep without a sweep block exits 2") {
    fs::path p = write_temp_config("edring_nosweep.json", boson_config());
    CHECK(run_cli("sweep --config " + p.string()).exit_code == 2);
}
