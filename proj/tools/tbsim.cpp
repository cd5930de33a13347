#include "tbsim/config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace tbsim;

struct CommonOptions {
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    int workers = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> grid_override; // "t_max,n_points"
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("config", opt.config_path, "configuration file")->required();
    cmd->add_option("--out", opt.out_path,
                    "output file (default stdout; relative paths resolve under "
                    "$TBSIM_OUT_DIR when set)");
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "override emitter.seed");
    cmd->add_option("--workers", opt.workers, "worker threads for Monte Carlo and sweeps")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--grid-override", opt.grid_override,
                    "override the time grid as 't_max,n_points'");
}

RunConfig load_config(const CommonOptions& opt) {
    RunConfig cfg = parse_config_file(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.grid_override) {
        const auto comma = opt.grid_override->find(',');
        if (comma == std::string::npos)
            throw ConfigError("--grid-override expects 't_max,n_points'");
        cfg.grid = TimeGrid(std::stod(opt.grid_override->substr(0, comma)),
                            std::stoi(opt.grid_override->substr(comma + 1)));
    }
    return cfg;
}

std::string resolve_out_path(const std::string& path) {
    namespace fs = std::filesystem;
    if (path.empty() || fs::path(path).is_absolute()) return path;
    if (const char* dir = std::getenv("TBSIM_OUT_DIR"))
        return (fs::path(dir) / path).string();
    return path;
}

// Writes through a callback either to stdout or to the resolved file.
void with_output(const std::string& out_path, const std::function<void(std::ostream&)>& fn) {
    if (out_path.empty()) {
        fn(std::cout);
        return;
    }
    const std::string resolved = resolve_out_path(out_path);
    std::ofstream out(resolved, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + resolved);
    fn(out);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_purity(const CommonOptions& opt) {
    RunConfig cfg = load_config(opt);
    const DecayRates rates = purcell_adjust(cfg.rates, cfg.purcell);
    const TimeGrid grid = cfg.grid ? *cfg.grid : TimeGrid::default_for(rates);

    CascadeAmplitude amp = build_cascade_amplitude(rates, grid, cfg.grid_allow_truncation);
    const double numeric = purity(reduce_to_b(amp));
    const double analytic = purity_analytic(rates);

    with_output(opt.out_path, [&](std::ostream& out) {
        if (opt.format == "csv") {
            out << "gamma_a,gamma_b,purity_analytic,purity_numeric,difference\n"
                << fmt(rates.gamma_a) << ',' << fmt(rates.gamma_b) << ',' << fmt(analytic)
                << ',' << fmt(numeric) << ',' << fmt(numeric - analytic) << "\n";
        } else {
            out << "{\n  \"gamma_a\": " << fmt(rates.gamma_a)
                << ",\n  \"gamma_b\": " << fmt(rates.gamma_b)
                << ",\n  \"purity_analytic\": " << fmt(analytic)
                << ",\n  \"purity_numeric\": " << fmt(numeric)
                << ",\n  \"error_analytic\": " << fmt(1.0 - analytic)
                << ",\n  \"error_numeric\": " << fmt(1.0 - numeric)
                << ",\n  \"difference\": " << fmt(numeric - analytic) << "\n}\n";
        }
    });
    return 0;
}

int run_gate(const CommonOptions& opt, int scan_points) {
    RunConfig cfg = load_config(opt);
    const DecayRates rates = purcell_adjust(cfg.rates, cfg.purcell);
    const TimeGrid grid = cfg.grid ? *cfg.grid : TimeGrid::default_for(rates);
    CascadeAmplitude amp = build_cascade_amplitude(rates, grid, cfg.grid_allow_truncation);

    if (scan_points > 0) {
        std::vector<double> t1s, dts;
        for (int k = 1; k <= scan_points; ++k)
            t1s.push_back(grid.t_max * 0.5 * k / scan_points);
        auto rows = gating_tradeoff_scan(amp, t1s, t1s, {grid.t_max * 0.25});
        // Keep only the monotone family T2 = T1.
        std::vector<GatingScanRow> family;
        for (const auto& r : rows)
            if (r.t1 == r.t2) family.push_back(r);
        with_output(opt.out_path, [&](std::ostream& out) { write_scan_csv(out, family); });
        return 0;
    }

    if (!cfg.window_a || !cfg.window_b)
        throw ConfigError("gate needs window_a and window_b in the config (or --scan)");
    GatingResult g = apply_windows(amp, *cfg.window_a, *cfg.window_b);
    const double gated_purity = g.amplitude ? purity(reduce_to_b(*g.amplitude)) : 0.0;

    with_output(opt.out_path, [&](std::ostream& out) {
        if (opt.format == "csv") {
            out << "post_selection_probability,purity\n"
                << fmt(g.probability) << ',' << fmt(gated_purity) << "\n";
        } else {
            out << "{\n  \"post_selection_probability\": " << fmt(g.probability)
                << ",\n  \"purity\": " << fmt(gated_purity) << "\n}\n";
        }
    });
    return 0;
}

int run_fringe(const CommonOptions& opt, const std::string& which, int points) {
    RunConfig cfg = load_config(opt);
    const DecayRates rates = purcell_adjust(cfg.rates, cfg.purcell);
    const TimeGrid grid = cfg.grid ? *cfg.grid : TimeGrid::default_for(rates);
    auto envelope = std::make_shared<CascadeAmplitude>(
        build_cascade_amplitude(rates, grid, cfg.grid_allow_truncation));
    TimeBinPairState state = make_pair_state(cfg.pump, envelope);

    const ScanPhase phase = which == "pump" ? ScanPhase::pump
                          : which == "a"    ? ScanPhase::a
                                            : ScanPhase::b;
    auto scan = phase_scan(state, cfg.analyzer, phase, points);

    with_output(opt.out_path, [&](std::ostream& out) {
        if (opt.format == "csv") {
            write_scan_csv(out, scan);
        } else {
            SinusoidFit fit = fit_scan(scan, 0);
            out << "{\n  \"offset\": " << fmt(fit.offset)
                << ",\n  \"amplitude\": " << fmt(fit.amplitude)
                << ",\n  \"phase\": " << fmt(fit.phase)
                << ",\n  \"visibility\": " << fmt(fit.visibility())
                << ",\n  \"residual\": " << fmt(fit.residual) << "\n}\n";
        }
    });
    return 0;
}

int run_swap(const CommonOptions& opt) {
    RunConfig cfg = load_config(opt);
    const DecayRates rates = purcell_adjust(cfg.rates, cfg.purcell);

    std::optional<SwapWindows> windows;
    if (cfg.window_a && cfg.window_b) windows = SwapWindows{*cfg.window_a, *cfg.window_b};

    SwapReport report = swap_error_report(rates, rates, windows, cfg.grid);
    with_output(opt.out_path, [&](std::ostream& out) {
        if (opt.format == "csv") {
            out << "gamma_a,gamma_b,f_a,f_b,error_analytic,error_numeric,gated_error,"
                   "throughput\n";
            out << fmt(cfg.rates.gamma_a) << ',' << fmt(cfg.rates.gamma_b) << ','
                << fmt(cfg.purcell.f_a) << ',' << fmt(cfg.purcell.f_b) << ','
                << fmt(report.error_analytic_1) << ',' << fmt(report.error_numeric) << ',';
            if (report.gated_error) out << fmt(*report.gated_error);
            out << ',';
            if (report.throughput) out << fmt(*report.throughput);
            out << "\n";
        } else {
            write_report_json(out, report);
        }
    });
    return 0;
}

int run_montecarlo(const CommonOptions& opt) {
    RunConfig cfg = load_config(opt);
    EmitterConfig ec{cfg.pump, purcell_adjust(cfg.rates, cfg.purcell), cfg.prep_success,
                     cfg.n_trials, cfg.seed};
    BatchResult batch = simulate_batch(ec, cfg.detector, opt.workers);

    with_output(opt.out_path, [&](std::ostream& out) {
        if (opt.format == "csv") {
            write_records_csv(out, batch.records);
        } else {
            const BatchSummary& s = batch.summary;
            out << "{\n  \"n_trials\": " << s.n_trials
                << ",\n  \"n_early\": " << s.n_early << ",\n  \"n_late\": " << s.n_late
                << ",\n  \"n_none\": " << s.n_none
                << ",\n  \"pair_probability\": " << fmt(s.pair_probability())
                << ",\n  \"early_fraction\": " << fmt(s.early_fraction())
                << ",\n  \"early_fraction_stderr\": "
                << fmt(s.fraction_stderr(s.early_fraction()))
                << ",\n  \"late_fraction\": " << fmt(s.late_fraction())
                << ",\n  \"late_fraction_stderr\": "
                << fmt(s.fraction_stderr(s.late_fraction()))
                << ",\n  \"n_detected_a\": " << s.n_detected_a
                << ",\n  \"n_detected_b\": " << s.n_detected_b << "\n}\n";
        }
    });
    return 0;
}

int run_sweep(const CommonOptions& opt) {
    RunConfig cfg = load_config(opt);
    if (!cfg.sweep) throw ConfigError("sweep needs a sweep.* section in the config");
    const SweepSpec& spec = *cfg.sweep;
    const std::vector<double> values = spec.values();

    const bool pump_sweep = spec.parameter.rfind("pump.", 0) == 0;

    std::optional<SwapWindows> windows;
    if (cfg.window_a && cfg.window_b) windows = SwapWindows{*cfg.window_a, *cfg.window_b};

    struct Row {
        std::string text;
    };
    std::vector<Row> rows(values.size());

    auto compute = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const double v = values[k];
            if (pump_sweep) {
                PumpConfig pump = cfg.pump;
                if (spec.parameter == "pump.p1") pump.p1 = v;
                else pump.p2 = v;
                TimeBinPairState state = make_pair_state(pump, nullptr);
                const double p_emit = state.emission_probability();
                const double balance = p_emit > 0.0 ? bin_balance(state) : 0.0;
                rows[k].text = fmt(pump.p1) + "," + fmt(pump.p2) + "," + fmt(p_emit) + "," +
                               fmt(balance) + "," +
                               fmt(balance * std::sqrt(envelope_indistinguishability(state))) +
                               "\n";
            } else {
                DecayRates base = cfg.rates;
                PurcellFactors factors = cfg.purcell;
                if (spec.parameter == "purcell.f_a") factors = PurcellFactors(v, factors.f_b);
                else if (spec.parameter == "purcell.f_b") factors = PurcellFactors(factors.f_a, v);
                else if (spec.parameter == "rates.gamma_a") base = DecayRates(v, base.gamma_b);
                else base = DecayRates(base.gamma_a, v);
                const DecayRates rates = purcell_adjust(base, factors);
                SwapReport rep = swap_error_report(rates, rates, windows, cfg.grid);
                std::string line = fmt(base.gamma_a) + "," + fmt(base.gamma_b) + "," +
                                   fmt(factors.f_a) + "," + fmt(factors.f_b) + "," +
                                   fmt(rep.error_analytic_1) + "," + fmt(rep.error_numeric) +
                                   ",";
                if (rep.gated_error) line += fmt(*rep.gated_error);
                line += ",";
                if (rep.throughput) line += fmt(*rep.throughput);
                rows[k].text = line + "\n";
            }
        }
    };

    const int workers = std::max(opt.workers, 1);
    if (workers == 1 || values.size() < 2) {
        compute(0, values.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (values.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = std::size_t(w) * chunk;
            if (begin >= values.size()) break;
            pool.emplace_back(compute, begin, std::min(begin + chunk, values.size()));
        }
        for (auto& t : pool) t.join();
    }

    with_output(opt.out_path, [&](std::ostream& out) {
        out << (pump_sweep ? "p1,p2,emission_probability,bin_balance,visibility\n"
                           : "gamma_a,gamma_b,f_a,f_b,error_analytic,error_numeric,"
                             "gated_error,throughput\n");
        for (const Row& r : rows) out << r.text;
    });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-bin entangled photon-pair source simulator"};
    app.require_subcommand(1);
    app.footer(tbsim::config_key_reference());

    CommonOptions purity_opt, gate_opt, fringe_opt, swap_opt, mc_opt, sweep_opt;
    int gate_scan = 0;
    std::string fringe_phase = "a";
    int fringe_points = 64;

    auto* c_purity = app.add_subcommand("purity", "analytic vs numeric reduced-state purity");
    add_common(c_purity, purity_opt);
    auto* c_gate = app.add_subcommand("gate", "windowed post-selection report");
    add_common(c_gate, gate_opt);
    c_gate->add_option("--scan", gate_scan, "emit a T1=T2 trade-off scan with N points");
    auto* c_fringe = app.add_subcommand("fringe", "analytic Franson phase scan");
    add_common(c_fringe, fringe_opt);
    c_fringe->add_option("--phase", fringe_phase, "which phase to scan")
        ->check(CLI::IsMember({"pump", "a", "b"}))
        ->capture_default_str();
    c_fringe->add_option("--points", fringe_points, "scan points")->check(CLI::PositiveNumber);
    auto* c_swap = app.add_subcommand("swap", "entanglement-swapping error report");
    add_common(c_swap, swap_opt);
    auto* c_mc = app.add_subcommand("montecarlo", "emitter Monte Carlo batch");
    add_common(c_mc, mc_opt);
    auto* c_sweep = app.add_subcommand("sweep", "parameter sweep table");
    add_common(c_sweep, sweep_opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_purity->parsed()) return run_purity(purity_opt);
        if (c_gate->parsed()) return run_gate(gate_opt, gate_scan);
        if (c_fringe->parsed()) return run_fringe(fringe_opt, fringe_phase, fringe_points);
        if (c_swap->parsed()) return run_swap(swap_opt);
        if (c_mc->parsed()) return run_montecarlo(mc_opt);
        if (c_sweep->parsed()) return run_sweep(sweep_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
