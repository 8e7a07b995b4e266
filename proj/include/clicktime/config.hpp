#pragma once

#include "clicktime/energy_grid.hpp"
#include "clicktime/radial.hpp"
#include "clicktime/shell.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

// JSON run configuration. Loading re-validates every module precondition;
// violations raise ConfigError carrying the offending key path.

namespace clicktime {

struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(std::string key_, const std::string& what_)
        : std::runtime_error(key_ + ": " + what_), key(std::move(key_)) {}
};

struct RunConfig {
    EnergyGrid grid;
    Potential potential;      // carries ell and the grid mass
    RadialParams radial;
    ShellSpec detector;       // carries the grid mass
    double packet_k0 = 0;
    double packet_sigma_k = 0;
    double t_min = 0;
    double t_max = 0;
    int n_t = 0;
    double route_tolerance = 0.05;  // pairwise delay-route agreement
    int n_random_effects = 3;       // extra synthetic effects in the self-check
    std::string out_directory = "out";
    std::vector<std::string> formats = {"csv"};

    std::vector<double> time_points() const;
};

RunConfig load_config(const std::filesystem::path& path);

// One-page schema description, echoed by --help.
std::string config_schema_text();

}  // namespace clicktime
