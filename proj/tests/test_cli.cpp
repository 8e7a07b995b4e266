#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clicktime/cli.hpp"
#include "clicktime/config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace clicktime;
namespace fs = std::filesystem;

namespace {

fs::path test_root() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() /
                     ("clicktime_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

nlohmann::json base_config() {
    nlohmann::json j;
    j["grid"] = {{"e_min", 0.5}, {"e_max", 4.5}, {"n_points", 401}, {"mass", 1.0}};
    j["potential"] = {{"kind", "hard_sphere"}, {"radius", 1.0}, {"ell", 0}};
    j["radial"] = {{"r_max", 40.0}, {"dr", 1e-3}, {"r_match", 35.0}};
    j["detector"] = {{"R", 10.0}, {"rho", 0.0}};
    j["packet"] = {{"k0", 2.0}, {"sigma_k", 0.04}};
    j["time"] = {{"t_min", -40.0}, {"t_max", 50.0}, {"n_t", 1801}};
    j["povm_check"] = {{"n_random_effects", 2}};
    j["output"] = {{"directory", "out"}, {"formats", {"csv"}}};
    return j;
}

fs::path write_config(const std::string& name, const nlohmann::json& j) {
    const fs::path p = test_root() / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(std::initializer_list<std::string> args) {
    return run_cli(std::vector<std::string>(args));
}

}  // namespace

TEST_CASE("config loading validates and names the offending key") {
    auto bad_kind = base_config();
    bad_kind["potential"]["kind"] = "coulomb";
    const fs::path p1 = write_config("bad_kind.json", bad_kind);
    try {
        load_config(p1);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key == "potential.kind");
    }

    auto bad_time = base_config();
    bad_time["time"]["t_max"] = 1e6;  // beyond pi/h
    try {
        load_config(write_config("bad_time.json", bad_time));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key == "time.t_max");
    }

    auto bad_packet = base_config();
    bad_packet["packet"]["k0"] = 1.01;
    try {
        load_config(write_config("bad_packet.json", bad_packet));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key == "packet.k0");
    }

    auto missing = base_config();
    missing.erase("detector");
    try {
        load_config(write_config("missing.json", missing));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key == "detector");
    }

    auto uneven = base_config();
    uneven["radial"]["dr"] = 3e-3;  // hard-sphere wall no longer on a node
    uneven["radial"]["r_match"] = 35.001;  // itself still on a node
    try {
        load_config(write_config("uneven.json", uneven));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key == "potential.radius");
    }
}

TEST_CASE("exit code 2 on config validation failure") {
    auto bad = base_config();
    bad["potential"]["kind"] = "coulomb";
    const fs::path p = write_config("exit2.json", bad);
    CHECK(run({"phase-shifts", "--config", p.string()}) == 2);
    CHECK(run({"density", "--config", p.string()}) == 2);
}

TEST_CASE("phase-shifts: deterministic output with correct analytic content") {
    const fs::path cfg = write_config("ps.json", base_config());
    const fs::path out1 = test_root() / "ps_out1";
    const fs::path out2 = test_root() / "ps_out2";
    CHECK(run({"phase-shifts", "--config", cfg.string(), "--out", out1.string()}) == 0);
    CHECK(run({"phase-shifts", "--config", cfg.string(), "--out", out2.string()}) == 0);

    const std::string a = slurp(out1 / "phase_shifts.csv");
    const std::string b = slurp(out2 / "phase_shifts.csv");
    CHECK(a == b);  // bit-identical reruns

    // header, units row, and the hard-sphere law delta_std = -k a
    std::istringstream lines(a);
    std::string header, units, row;
    std::getline(lines, header);
    std::getline(lines, units);
    CHECK(header == "k,E,delta_std,delta_paper,dDelta_dE");
    CHECK(units == "momentum,energy,rad,rad,time");
    std::getline(lines, row);
    std::istringstream first(row);
    std::string field;
    std::vector<double> vals;
    while (std::getline(first, field, ',')) vals.push_back(std::stod(field));
    CHECK(vals[2] == doctest::Approx(-vals[0]).epsilon(1e-7));
}

TEST_CASE("povm-check passes on a valid configuration") {
    auto j = base_config();
    j["grid"]["n_points"] = 101;
    const fs::path cfg = write_config("povm.json", j);
    const fs::path out = test_root() / "povm_out";
    CHECK(run({"povm-check", "--config", cfg.string(), "--out", out.string(),
               "--format", "csv", "--seed", "7"}) == 0);
    const std::string body = slurp(out / "povm_check.csv");
    CHECK(body.find("FAIL") == std::string::npos);
    CHECK(body.find("additivity") != std::string::npos);
    CHECK(body.find("matrix_vs_kernel_route") != std::string::npos);

    // determinism under a fixed seed
    const fs::path out2 = test_root() / "povm_out2";
    CHECK(run({"povm-check", "--config", cfg.string(), "--out", out2.string(),
               "--format", "csv", "--seed", "7"}) == 0);
    CHECK(slurp(out2 / "povm_check.csv") == body);
}

TEST_CASE("density: happy path, JSON summary, and exit 3 on a short window") {
    const fs::path cfg = write_config("density.json", base_config());
    const fs::path out = test_root() / "density_out";
    CHECK(run({"density", "--config", cfg.string(), "--out", out.string()}) == 0);
    const auto summary = nlohmann::json::parse(slurp(out / "density_summary.json"));
    CHECK(summary["captured_mass_free"].get<double>() > 0.99);
    CHECK(summary["captured_mass_int"].get<double>() > 0.99);
    // free click at m R / k0 = 5 within 2 percent, by mean and by peak
    CHECK(std::abs(summary["mean_time_free"].get<double>() - 5.0) < 0.1);
    CHECK(std::abs(summary["peak_time_free"].get<double>() - 5.0) < 0.1);
    CHECK(std::abs(summary["peak_time_int"].get<double>() - 4.0) < 0.1);

    auto short_window = base_config();
    short_window["time"] = {{"t_min", 0.0}, {"t_max", 2.0}, {"n_t", 101}};
    const fs::path cfg3 = write_config("density_short.json", short_window);
    const fs::path out3 = test_root() / "density_short_out";
    CHECK(run({"density", "--config", cfg3.string(), "--out", out3.string()}) == 3);
}

TEST_CASE("delay: routes agree, exit 4 when the tolerance is squeezed") {
    const fs::path cfg = write_config("delay.json", base_config());
    const fs::path out = test_root() / "delay_out";
    CHECK(run({"delay", "--config", cfg.string(), "--out", out.string(),
               "--format", "json"}) == 0);
    const auto j = nlohmann::json::parse(slurp(out / "delay.json"));
    const auto& cols = j["columns"];
    const auto& row = j["rows"][0];
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return row[i].get<double>();
        FAIL("missing column ", name);
        return 0.0;
    };
    CHECK(col("wigner_delay_at_k0") == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(col("shift_mean") == doctest::Approx(-1.0).epsilon(0.05));

    // impossible agreement demand: the route-disagreement exit path
    auto strict = base_config();
    strict["delay"] = {{"route_tolerance", 1e-9}};
    const fs::path cfg4 = write_config("delay_strict.json", strict);
    const fs::path out4 = test_root() / "delay_strict_out";
    CHECK(run({"delay", "--config", cfg4.string(), "--out", out4.string()}) == 4);
}

TEST_CASE("free potential: all delay routes vanish") {
    auto j = base_config();
    j["potential"] = {{"kind", "free"}, {"ell", 0}};
    j["grid"]["n_points"] = 201;
    j["time"]["n_t"] = 1201;
    const fs::path cfg = write_config("free_delay.json", j);
    const fs::path out = test_root() / "free_delay_out";
    CHECK(run({"delay", "--config", cfg.string(), "--out", out.string(),
               "--format", "json"}) == 0);
    const auto res = nlohmann::json::parse(slurp(out / "delay.json"));
    const auto& cols = res["columns"];
    const auto& row = res["rows"][0];
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const std::string name = cols[i];
        if (name == "shift_mean" || name == "wigner_delay_at_k0" ||
            name == "ew_packet_avg" || name == "operator_delay")
            CHECK(std::abs(row[i].get<double>()) < 1e-4);
    }
}

TEST_CASE("tabulated potential file feeds the whole pipeline") {
    // exponential samples out to r = 30, zero beyond: short range by design
    const fs::path table = test_root() / "potential.dat";
    {
        std::ofstream f(table);
        for (int i = 0; i <= 3000; ++i) {
            const double r = 0.01 * i;
            f << r << " " << 5.0 * std::exp(-r) << "\n";
        }
    }
    auto j = base_config();
    j["potential"] = {{"kind", "tabulated"}, {"file", "potential.dat"}, {"ell", 0}};
    j["grid"]["n_points"] = 201;
    j["detector"]["R"] = 30.0;  // the sampled tail reaches 1e-12 only past r = 28
    const fs::path cfg = write_config("tabulated.json", j);
    const fs::path out = test_root() / "tab_out";
    CHECK(run({"phase-shifts", "--config", cfg.string(), "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "phase_shifts.csv"));

    auto missing = j;
    missing["potential"]["file"] = "nope.dat";
    try {
        load_config(write_config("tab_missing.json", missing));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key == "potential.file");
    }
}

TEST_CASE("rho > 0 detectors are rejected for density and delay") {
    auto j = base_config();
    j["detector"]["rho"] = 0.5;
    const fs::path cfg = write_config("rho.json", j);
    CHECK(run({"density", "--config", cfg.string(), "--out",
               (test_root() / "rho_out").string()}) == 2);
}

TEST_CASE("installed binary: help text carries the schema") {
    const std::string help_file = (test_root() / "help.txt").string();
    const std::string cmd =
        std::string(CLICKTIME_CLI_BINARY) + " --help > " + help_file + " 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    const std::string text = slurp(help_file);
    CHECK(text.find("phase-shifts") != std::string::npos);
    CHECK(text.find("Config schema") != std::string::npos);
    CHECK(text.find("Exit codes") != std::string::npos);
}
