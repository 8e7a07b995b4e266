#include "clicktime/cli.hpp"

#include "clicktime/config.hpp"
#include "clicktime/delay.hpp"
#include "clicktime/povm.hpp"
#include "clicktime/table.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <random>

namespace clicktime {

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_override;
    std::string format_override;
    std::uint64_t seed = 12345;
};

std::vector<std::string> formats_of(const RunConfig& cfg, const CliOptions& opt) {
    if (!opt.format_override.empty()) return {opt.format_override};
    return cfg.formats;
}

std::filesystem::path out_dir_of(const RunConfig& cfg, const CliOptions& opt) {
    std::filesystem::path dir =
        opt.out_override.empty() ? cfg.out_directory : opt.out_override;
    std::filesystem::create_directories(dir);
    return dir;
}

void emit(const ResultTable& table, const RunConfig& cfg, const CliOptions& opt,
          const std::string& stem, const std::string& summary_json = {}) {
    const auto dir = out_dir_of(cfg, opt);
    for (const auto& fmt : formats_of(cfg, opt)) {
        if (fmt == "csv")
            write_csv(table, dir / (stem + ".csv"));
        else
            write_json(table, dir / (stem + ".json"), summary_json);
    }
}

PhaseShiftTable table_for(const Potential& pot, const RunConfig& cfg) {
    return build_phase_table(pot, cfg.grid.momenta(), cfg.radial);
}

int cmd_phase_shifts(const RunConfig& cfg, const CliOptions& opt) {
    const PhaseShiftTable t = table_for(cfg.potential, cfg);
    ResultTable out;
    out.columns = {"k", "E", "delta_std", "delta_paper", "dDelta_dE"};
    out.units = {"momentum", "energy", "rad", "rad", "time"};
    for (int i = 0; i < t.size(); ++i)
        out.rows.push_back({Cell::of(t.k[i]), Cell::of(t.energy(i)),
                            Cell::of(t.delta_std[i]), Cell::of(t.delta_paper[i]),
                            Cell::of(t.dDelta_dE[i])});
    emit(out, cfg, opt, "phase_shifts");
    return 0;
}

struct InvariantRow {
    std::string name;
    double measured;
    double threshold;
    bool lower_bound;  // pass when measured >= threshold instead of <=
    bool pass() const {
        return lower_bound ? measured >= threshold : measured <= threshold;
    }
};

double entrywise_max(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

int cmd_povm_check(const RunConfig& cfg, const CliOptions& opt) {
    const EnergyGrid& g = cfg.grid;
    const double ts = g.t_star();

    std::vector<EffectKernel> effects;
    {
        const PhaseShiftTable t = table_for(cfg.potential, cfg);
        effects.push_back(
            make_effect_kernel(closed_form_c(cfg.detector, t, g).kernel));
    }
    for (int i = 0; i < cfg.n_random_effects; ++i)
        effects.push_back(random_smooth_effect(g, opt.seed + i));

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    double additivity = 0, covariance = 0, normalization = 0;
    double positivity_low = 0, positivity_high = 1;  // eigenvalue envelope
    double partition = 0, oracle = 0, monotonicity = 0;

    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(g.dim(), g.dim());
    for (const EffectKernel& a : effects) {
        const NormalizedKernel c = normalize_kernel(a);

        // additivity over adjacent pieces of a random split
        for (int trial = 0; trial < 3; ++trial) {
            const double t0 = ts * (2.0 * uni(rng) - 1.0);
            const double t1 = t0 + (ts - t0) * uni(rng);
            const double tm = t0 + (t1 - t0) * uni(rng);
            if (!(t0 < tm && tm < t1)) continue;
            const auto whole = interval_kernel(c, {t0, t1});
            const auto left = interval_kernel(c, {t0, tm});
            const auto right = interval_kernel(c, {tm, t1});
            additivity = std::max(
                additivity,
                entrywise_max(whole.kernel.entries,
                              left.kernel.entries + right.kernel.entries));
        }

        // covariance under random time shifts
        for (int trial = 0; trial < 3; ++trial) {
            const double t0 = -ts / 3.0 + (ts / 2.0) * uni(rng);
            const double t1 = t0 + (ts / 4.0) * uni(rng) + 1e-3;
            const double shift = 20.0 * (2.0 * uni(rng) - 1.0);
            if (std::max(std::abs(t0 + shift), std::abs(t1 + shift)) > ts) continue;
            covariance = std::max(
                covariance, shift_interval_covariance_check(c, {t0, t1}, shift));
        }

        // normalization at the full window, on the weighted matrices
        const auto full = interval_kernel(c, {-ts, ts});
        normalization =
            std::max(normalization, (g.w * full.kernel.entries - id).cwiseAbs().maxCoeff());

        // positivity of a sample of interval measures
        for (int trial = 0; trial < 2; ++trial) {
            const double t0 = ts * (uni(rng) - 0.5);
            const double t1 = t0 + 0.4 * ts * uni(rng) + 1e-3;
            if (std::abs(t1) > ts) continue;
            const auto [lo, hi] = eigenvalue_bounds(interval_kernel(c, {t0, t1}).kernel);
            positivity_low = std::min(positivity_low, lo);
            positivity_high = std::max(positivity_high, hi);
        }

        // 64-piece partition of the full window re-sums to the identity
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(g.dim(), g.dim());
        for (int m = 0; m < 64; ++m) {
            const double ta = -ts + 2.0 * ts * m / 64.0;
            const double tb = -ts + 2.0 * ts * (m + 1) / 64.0;
            sum += interval_kernel(c, {ta, tb}).kernel.entries;
        }
        partition = std::max(partition, (g.w * sum - id).cwiseAbs().maxCoeff());

        // matrix route vs kernel route
        for (int trial = 0; trial < 2; ++trial) {
            const double t0 = ts * (uni(rng) - 0.5);
            const double t1 = t0 + 0.3 * ts * uni(rng) + 1e-3;
            if (std::abs(t1) > ts) continue;
            const auto direct = interval_kernel(c, {t0, t1});
            const auto via_matrix = matrix_povm(a, {t0, t1});
            oracle = std::max(oracle, entrywise_max(direct.kernel.entries,
                                                    via_matrix.kernel.entries));
        }

        const NetLimitReport net =
            net_limit_check(a, {ts / 4.0, ts / 2.0, 3.0 * ts / 4.0, ts});
        monotonicity = std::min(monotonicity, net.worst_monotonicity);
    }

    const std::vector<InvariantRow> rows = {
        {"additivity", additivity, 1e-12, false},
        {"covariance", covariance, 1e-12, false},
        {"normalization_full_window", normalization, 1e-10, false},
        {"positivity_eigenvalue_floor", positivity_low, -1e-10, true},
        {"positivity_eigenvalue_ceiling", positivity_high, 1.0 + 1e-10, false},
        {"partition_64_resum", partition, 1e-10, false},
        {"matrix_vs_kernel_route", oracle, 1e-10, false},
        {"resolvent_net_monotone", monotonicity, -1e-10, true},
    };

    ResultTable out;
    out.columns = {"invariant", "measured", "threshold", "pass"};
    out.units = {"-", "-", "-", "-"};
    bool all_pass = true;
    for (const auto& r : rows) {
        all_pass = all_pass && r.pass();
        out.rows.push_back({Cell::of(r.name), Cell::of(r.measured),
                            Cell::of(r.threshold),
                            Cell::of(std::string(r.pass() ? "pass" : "FAIL"))});
    }
    emit(out, cfg, opt, "povm_check");
    if (!all_pass) {
        std::cerr << "povm-check: invariant failure (see povm_check output)\n";
        return 4;
    }
    return 0;
}

int cmd_density(const RunConfig& cfg, const CliOptions& opt) {
    if (cfg.detector.thickness != 0.0)
        throw ConfigError("detector.rho",
                          "density command requires the zero-thickness detector");
    const WavePacket packet{cfg.packet_k0, cfg.packet_sigma_k};
    const std::vector<double> t = cfg.time_points();
    const PhaseShiftTable t_int = table_for(cfg.potential, cfg);
    const PhaseShiftTable t_free =
        table_for(free_potential(cfg.potential.ell, cfg.grid.mass), cfg);
    const PacketDensity p_free =
        packet_click_density(packet, cfg.detector, t_free, cfg.grid, t);
    const PacketDensity p_int =
        packet_click_density(packet, cfg.detector, t_int, cfg.grid, t);

    const double wigner = wigner_delay_at(t_int, cfg.packet_k0);
    const DelayReport rep = measure_shift(p_free.p, p_int.p, t, wigner);

    ResultTable out;
    out.columns = {"t", "p_free", "p_int"};
    out.units = {"time", "1/time", "1/time"};
    for (std::size_t i = 0; i < t.size(); ++i)
        out.rows.push_back(
            {Cell::of(t[i]), Cell::of(p_free.p[i]), Cell::of(p_int.p[i])});

    nlohmann::json summary;
    summary["captured_mass_free"] = p_free.captured_mass;
    summary["captured_mass_int"] = p_int.captured_mass;
    summary["mean_time_free"] = rep.t_mean_free;
    summary["mean_time_int"] = rep.t_mean_int;
    summary["peak_time_free"] = rep.t_peak_free;
    summary["peak_time_int"] = rep.t_peak_int;
    summary["peak_reliable"] = rep.peak_reliable;
    emit(out, cfg, opt, "density", summary.dump());
    {
        const auto dir = out_dir_of(cfg, opt);
        write_text_atomic(dir / "density_summary.json", summary.dump(2) + "\n");
    }

    const double min_mass = std::min(p_free.captured_mass, p_int.captured_mass);
    if (min_mass < 0.99) {
        std::cerr << "density: captured mass " << min_mass
                  << " < 0.99; the time window is too short for this packet\n";
        return 3;
    }
    return 0;
}

int cmd_delay(const RunConfig& cfg, const CliOptions& opt) {
    if (cfg.detector.thickness != 0.0)
        throw ConfigError("detector.rho",
                          "delay command requires the zero-thickness detector");
    const WavePacket packet{cfg.packet_k0, cfg.packet_sigma_k};
    const std::vector<double> t = cfg.time_points();
    const PhaseShiftTable t_int = table_for(cfg.potential, cfg);
    const PhaseShiftTable t_free =
        table_for(free_potential(cfg.potential.ell, cfg.grid.mass), cfg);

    // route (i): click-density shift
    const PacketDensity p_free =
        packet_click_density(packet, cfg.detector, t_free, cfg.grid, t);
    const PacketDensity p_int =
        packet_click_density(packet, cfg.detector, t_int, cfg.grid, t);
    const double wigner = wigner_delay_at(t_int, cfg.packet_k0);
    const DelayReport rep = measure_shift(p_free.p, p_int.p, t, wigner);

    // route (ii): on-shell delay profile averaged over the packet
    const Section phi = packet_section(packet, cfg.grid);
    const OnShellS s = scalar_on_shell(t_int, cfg.grid);
    const Connection d_free = shell_connection(cfg.detector, t_free, cfg.grid);
    const std::vector<double> profile = scalar_delay(eisenbud_wigner(s, d_free));
    const double ew_avg = packet_average(profile, phi);

    // route (iii): time-operator expectation against the free-shell kernel
    const NormalizedKernel c_free = closed_form_c(cfg.detector, t_free, cfg.grid);
    const double op_delay = operator_delay(phi, s, c_free);

    // agreement scale: the route magnitudes, floored at a tenth of the
    // traversal time so that near-zero free delays compare sanely
    const double scale = std::max(
        {std::abs(rep.shift_mean), std::abs(ew_avg), std::abs(op_delay),
         0.1 * cfg.grid.mass * cfg.detector.radius / cfg.packet_k0});
    const double allowed = cfg.route_tolerance * scale;
    const double worst = std::max({std::abs(rep.shift_mean - ew_avg),
                                   std::abs(rep.shift_mean - op_delay),
                                   std::abs(ew_avg - op_delay)});

    ResultTable out;
    out.columns = {"t_mean_free", "t_mean_int", "shift_mean", "shift_peak",
                   "wigner_delay_at_k0", "ew_packet_avg", "operator_delay",
                   "route_disagreement", "l1_overlap_residual", "peak_reliable"};
    out.units = {"time", "time", "time", "time", "time",
                 "time", "time", "time", "-", "-"};
    out.rows.push_back({Cell::of(rep.t_mean_free), Cell::of(rep.t_mean_int),
                        Cell::of(rep.shift_mean), Cell::of(rep.shift_peak),
                        Cell::of(rep.wigner_delay_at_k0), Cell::of(ew_avg),
                        Cell::of(op_delay), Cell::of(worst),
                        Cell::of(rep.l1_overlap_residual),
                        Cell::of(std::string(rep.peak_reliable ? "yes" : "no"))});
    emit(out, cfg, opt, "delay");

    if (worst > allowed) {
        std::cerr << "delay: routes disagree by " << worst << " (allowed " << allowed
                  << ")\n";
        return 4;
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{
        "Occurrence-time statistics of a shell detector: phase shifts, "
        "interval-measure self-checks, click-time densities, and time delays.\n"};
    app.footer(config_schema_text());
    app.require_subcommand(1);

    CliOptions opt;
    int (*handler)(const RunConfig&, const CliOptions&) = nullptr;

    auto add = [&](const char* name, const char* desc,
                   int (*fn)(const RunConfig&, const CliOptions&)) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", opt.config_path, "JSON config path")->required();
        sub->add_option("--out", opt.out_override, "output directory override");
        sub->add_option("--format", opt.format_override, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", opt.seed, "seed for randomized invariant suites");
        sub->callback([&, fn] { handler = fn; });
        return sub;
    };

    add("phase-shifts", "per-momentum phase shifts and their energy derivative",
        &cmd_phase_shifts);
    add("povm-check", "run the interval-measure invariant suite", &cmd_povm_check);
    add("density", "free vs interacting click-time densities", &cmd_density);
    add("delay", "time delay by density shift, on-shell formula, and "
                 "time-operator expectation", &cmd_delay);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const RunConfig cfg = load_config(opt.config_path);
        return handler(cfg, opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace clicktime
