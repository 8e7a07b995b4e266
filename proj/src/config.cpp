#include "clicktime/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace clicktime {

namespace {

using nlohmann::json;

const json& need(const json& obj, const std::string& parent, const char* key) {
    const std::string path = parent.empty() ? key : parent + "." + key;
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(path, "missing required key");
    return obj.at(key);
}

double need_num(const json& obj, const std::string& parent, const char* key) {
    const json& v = need(obj, parent, key);
    if (!v.is_number()) throw ConfigError(parent + "." + key, "must be a number");
    return v.get<double>();
}

int need_int(const json& obj, const std::string& parent, const char* key) {
    const json& v = need(obj, parent, key);
    if (!v.is_number_integer())
        throw ConfigError(parent + "." + key, "must be an integer");
    return v.get<int>();
}

std::string need_str(const json& obj, const std::string& parent, const char* key) {
    const json& v = need(obj, parent, key);
    if (!v.is_string()) throw ConfigError(parent + "." + key, "must be a string");
    return v.get<std::string>();
}

double opt_num(const json& obj, const std::string& parent, const char* key,
               double fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return need_num(obj, parent, key);
}

int opt_int(const json& obj, const std::string& parent, const char* key,
            int fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return need_int(obj, parent, key);
}

Potential load_potential(const json& j, double mass,
                         const std::filesystem::path& base_dir) {
    const std::string kind = need_str(j, "potential", "kind");
    const int ell = opt_int(j, "potential", "ell", 0);
    if (ell < 0) throw ConfigError("potential.ell", "must be >= 0");
    try {
        if (kind == "free") return free_potential(ell, mass);
        if (kind == "hard_sphere")
            return hard_sphere(need_num(j, "potential", "radius"), ell, mass);
        if (kind == "square_barrier")
            return square_barrier(need_num(j, "potential", "height"),
                                  need_num(j, "potential", "width"), ell, mass);
        if (kind == "exponential")
            return exponential_potential(need_num(j, "potential", "strength"),
                                         need_num(j, "potential", "range"), ell, mass);
        if (kind == "tabulated") {
            const std::string file = need_str(j, "potential", "file");
            std::filesystem::path p(file);
            if (p.is_relative()) p = base_dir / p;
            std::ifstream in(p);
            if (!in)
                throw ConfigError("potential.file", "cannot open " + p.string());
            std::vector<double> r, v;
            double ri, vi;
            while (in >> ri >> vi) {
                r.push_back(ri);
                v.push_back(vi);
            }
            return tabulated_potential(std::move(r), std::move(v), ell, mass);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("potential", e.what());
    }
    throw ConfigError("potential.kind",
                      "unknown kind '" + kind +
                          "' (expected free | hard_sphere | square_barrier | "
                          "exponential | tabulated)");
}

}  // namespace

std::vector<double> RunConfig::time_points() const {
    std::vector<double> t(n_t);
    const double dt = (t_max - t_min) / (n_t - 1);
    for (int i = 0; i < n_t; ++i) t[i] = t_min + i * dt;
    return t;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }

    RunConfig cfg;

    const json& jg = need(j, "", "grid");
    const double e_min = need_num(jg, "grid", "e_min");
    const double e_max = need_num(jg, "grid", "e_max");
    const int n_points = need_int(jg, "grid", "n_points");
    const double mass = opt_num(jg, "grid", "mass", 1.0);
    try {
        cfg.grid = make_grid(e_min, e_max, n_points, mass);
    } catch (const std::exception& e) {
        throw ConfigError("grid", e.what());
    }

    cfg.potential = load_potential(need(j, "", "potential"), mass,
                                   path.parent_path());

    const json jr = j.contains("radial") ? j.at("radial") : json::object();
    cfg.radial.r_max = opt_num(jr, "radial", "r_max", 40.0);
    cfg.radial.dr = opt_num(jr, "radial", "dr", 1e-3);
    cfg.radial.r_match = opt_num(jr, "radial", "r_match", cfg.radial.r_max - 5.0);
    if (!(cfg.radial.dr > 0)) throw ConfigError("radial.dr", "must be > 0");
    if (!(cfg.radial.r_max > cfg.radial.dr))
        throw ConfigError("radial.r_max", "must exceed radial.dr");
    if (!(cfg.radial.r_match > 0) ||
        cfg.radial.r_match + 2 * cfg.radial.dr > cfg.radial.r_max)
        throw ConfigError("radial.r_match",
                          "must lie inside the radial grid with two steps to spare");
    const double k_max = cfg.grid.momentum(cfg.grid.n_points - 1);
    if (!(k_max * cfg.radial.dr < 0.2))
        throw ConfigError("radial.dr",
                          "too coarse for the grid's largest momentum (need k*dr < 0.2)");
    if (cfg.potential.value(cfg.radial.r_match) >= 1e-12)
        throw ConfigError("radial.r_match",
                          "potential is not negligible there (short-range "
                          "requirement V(r_match) < 1e-12)");
    if (cfg.radial.r_match <= cfg.potential.core_radius())
        throw ConfigError("radial.r_match", "lies inside the hard-sphere core");
    auto commensurate = [&](double r) {
        return std::abs(std::round(r / cfg.radial.dr) * cfg.radial.dr - r) <= 1e-9;
    };
    if (!commensurate(cfg.radial.r_match))
        throw ConfigError("radial.r_match", "must be a multiple of radial.dr");
    if (cfg.potential.kind == Potential::Kind::hard_sphere &&
        !commensurate(cfg.potential.radius))
        throw ConfigError("potential.radius", "must be a multiple of radial.dr");

    const json& jd = need(j, "", "detector");
    const double R = need_num(jd, "detector", "R");
    const double rho = opt_num(jd, "detector", "rho", 0.0);
    try {
        cfg.detector = make_shell(R, rho, mass);
    } catch (const std::exception& e) {
        throw ConfigError("detector", e.what());
    }
    if (R + rho + 2 * cfg.radial.dr > cfg.radial.r_max)
        throw ConfigError("detector.R", "shell must sit inside the radial grid");
    if (cfg.potential.value(R) >= 1e-12)
        throw ConfigError("detector.R",
                          "shell must sit beyond the potential range (V(R) < 1e-12)");
    if (R <= cfg.potential.core_radius())
        throw ConfigError("detector.R", "shell lies inside the hard-sphere core");

    const json& jp = need(j, "", "packet");
    cfg.packet_k0 = need_num(jp, "packet", "k0");
    cfg.packet_sigma_k = need_num(jp, "packet", "sigma_k");
    if (!(cfg.packet_k0 > 0)) throw ConfigError("packet.k0", "must be > 0");
    if (!(cfg.packet_sigma_k > 0)) throw ConfigError("packet.sigma_k", "must be > 0");
    const double k_lo = cfg.packet_k0 - 5 * cfg.packet_sigma_k;
    const double k_hi = cfg.packet_k0 + 5 * cfg.packet_sigma_k;
    if (!(k_lo > cfg.grid.momentum(0)) || !(k_hi < k_max))
        throw ConfigError("packet.k0",
                          "5-sigma support must lie strictly inside the grid's "
                          "momentum range");

    const json& jt = need(j, "", "time");
    cfg.t_min = need_num(jt, "time", "t_min");
    cfg.t_max = need_num(jt, "time", "t_max");
    cfg.n_t = need_int(jt, "time", "n_t");
    if (!(cfg.t_min < cfg.t_max)) throw ConfigError("time.t_min", "need t_min < t_max");
    if (cfg.n_t < 2) throw ConfigError("time.n_t", "need at least 2 points");
    const double t_star = cfg.grid.t_star();
    if (std::abs(cfg.t_min) > t_star || std::abs(cfg.t_max) > t_star)
        throw ConfigError("time.t_max",
                          "window exceeds the grid's alias-free horizon pi/h");

    if (j.contains("delay"))
        cfg.route_tolerance = opt_num(j.at("delay"), "delay", "route_tolerance", 0.05);
    if (!(cfg.route_tolerance > 0))
        throw ConfigError("delay.route_tolerance", "must be > 0");
    if (j.contains("povm_check"))
        cfg.n_random_effects =
            opt_int(j.at("povm_check"), "povm_check", "n_random_effects", 3);
    if (cfg.n_random_effects < 0)
        throw ConfigError("povm_check.n_random_effects", "must be >= 0");

    if (j.contains("output")) {
        const json& jo = j.at("output");
        if (jo.contains("directory"))
            cfg.out_directory = need_str(jo, "output", "directory");
        if (jo.contains("formats")) {
            if (!jo.at("formats").is_array())
                throw ConfigError("output.formats", "must be an array");
            cfg.formats.clear();
            for (const auto& f : jo.at("formats"))
                cfg.formats.push_back(f.get<std::string>());
        }
    }
    if (cfg.formats.empty()) throw ConfigError("output.formats", "must not be empty");
    for (const auto& f : cfg.formats)
        if (f != "csv" && f != "json")
            throw ConfigError("output.formats", "unknown format '" + f + "'");
    return cfg;
}

std::string config_schema_text() {
    return R"(Config schema (JSON; hbar = 1, one mass shared by all sections):
{
  "grid":      {"e_min": >0, "e_max": >e_min, "n_points": >=2, "mass": >0 (default 1)},
  "potential": {"kind": "free" | "hard_sphere" | "square_barrier" | "exponential" | "tabulated",
                "ell": >=0 (default 0),
                hard_sphere: "radius"; square_barrier: "height","width";
                exponential: "strength","range"; tabulated: "file" (two columns r V,
                whitespace separated, linear interpolation, 0 beyond last r)},
  "radial":    {"r_max": (default 40), "dr": (default 1e-3), "r_match": (default r_max-5)},
  "detector":  {"R": shell radius, "rho": thickness (default 0; density/delay need 0)},
  "packet":    {"k0": central momentum, "sigma_k": spread (5-sigma support inside grid)},
  "time":      {"t_min", "t_max", "n_t"}  within the alias-free horizon pi/h,
  "delay":     {"route_tolerance": pairwise agreement bound (default 0.05)},
  "povm_check":{"n_random_effects": synthetic effects in the invariant suite (default 3)},
  "output":    {"directory": (default "out"), "formats": ["csv" and/or "json"]}
}
Exit codes: 0 ok, 2 config validation, 3 numerical failure or low captured mass,
4 invariant or route-agreement failure.)";
}

}  // namespace clicktime
