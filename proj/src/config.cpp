#include "tbsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace tbsim {

std::vector<double> SweepSpec::values() const {
    std::vector<double> v;
    v.reserve(steps);
    if (steps == 1) {
        v.push_back(start);
        return v;
    }
    for (int k = 0; k < steps; ++k) {
        const double f = double(k) / double(steps - 1);
        if (scale == SweepScale::linear)
            v.push_back(start + f * (stop - start));
        else
            v.push_back(start * std::pow(stop / start, f));
    }
    return v;
}

TimeGrid RunConfig::effective_grid() const {
    return grid ? *grid : TimeGrid::default_for(rates);
}

namespace {

struct RawEntry {
    std::string value;
    int line;
    bool used = false;
};

[[noreturn]] void fail(int line, const std::string& key, const std::string& msg) {
    std::ostringstream os;
    os << "config line " << line << ", key '" << key << "': " << msg;
    throw ConfigError(os.str());
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

class KeyTable {
public:
    explicit KeyTable(std::string_view text) {
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            ++line_no;
            const std::size_t eol = text.find('\n', pos);
            std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                         ? std::string_view::npos
                                                         : eol - pos);
            pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

            const std::size_t hash = line.find('#');
            if (hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;

            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                fail(line_no, std::string(line), "expected 'section.key = value'");
            const std::string key{trim(line.substr(0, eq))};
            const std::string value{trim(line.substr(eq + 1))};
            if (key.empty() || value.empty())
                fail(line_no, key, "empty key or value");
            if (entries_.count(key))
                fail(line_no, key, "duplicate key");
            entries_[key] = RawEntry{value, line_no};
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::optional<double> number(const std::string& key) {
        auto* e = find(key);
        if (!e) return std::nullopt;
        try {
            std::size_t used = 0;
            const double v = std::stod(e->value, &used);
            if (used != e->value.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            fail(e->line, key, "not a number: '" + e->value + "'");
        }
    }

    std::optional<std::uint64_t> integer(const std::string& key) {
        auto* e = find(key);
        if (!e) return std::nullopt;
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
        if (ec != std::errc{} || ptr != e->value.data() + e->value.size())
            fail(e->line, key, "not a non-negative integer: '" + e->value + "'");
        return v;
    }

    std::optional<bool> boolean(const std::string& key) {
        auto* e = find(key);
        if (!e) return std::nullopt;
        if (e->value == "true" || e->value == "1") return true;
        if (e->value == "false" || e->value == "0") return false;
        fail(e->line, key, "expected true/false");
    }

    std::optional<std::string> string(const std::string& key) {
        auto* e = find(key);
        if (!e) return std::nullopt;
        return e->value;
    }

    int line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    void reject_unused() const {
        for (const auto& [key, e] : entries_)
            if (!e.used) fail(e.line, key, "unknown key");
    }

private:
    RawEntry* find(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    std::map<std::string, RawEntry> entries_;
};

double checked_range(KeyTable& t, const std::string& key, double fallback, double lo,
                     double hi) {
    auto v = t.number(key);
    if (!v) return fallback;
    if (*v < lo || *v > hi)
        fail(t.line_of(key), key,
             "value out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return *v;
}

double checked_positive(KeyTable& t, const std::string& key, double fallback) {
    auto v = t.number(key);
    if (!v) return fallback;
    if (!(*v > 0.0)) fail(t.line_of(key), key, "value must be positive");
    return *v;
}

// gamma and lifetime forms are interchangeable (gamma = 1/lifetime) but
// may not both be given for the same transition.
std::optional<double> rate_key(KeyTable& t, const std::string& suffix) {
    const std::string gk = "rates.gamma_" + suffix;
    const std::string lk = "rates.lifetime_" + suffix;
    const bool has_g = t.has(gk), has_l = t.has(lk);
    if (has_g && has_l)
        fail(t.line_of(lk), lk, "give either the rate or the lifetime, not both");
    if (has_g) {
        const double g = *t.number(gk);
        if (!(g > 0.0)) fail(t.line_of(gk), gk, "rate must be positive");
        return g;
    }
    if (has_l) {
        const double tau = *t.number(lk);
        if (!(tau > 0.0)) fail(t.line_of(lk), lk, "lifetime must be positive");
        return 1.0 / tau;
    }
    return std::nullopt;
}

} // namespace

RunConfig parse_config(std::string_view text) {
    KeyTable t(text);
    RunConfig cfg;

    cfg.pump.p1 = checked_range(t, "pump.p1", 0.5, 0.0, 1.0);
    cfg.pump.p2 = checked_range(t, "pump.p2", 1.0, 0.0, 1.0);
    cfg.pump.phi_p = t.number("pump.phi_p").value_or(0.0);

    const double ga = rate_key(t, "a").value_or(1.0);
    const double gb = rate_key(t, "b").value_or(1.0);
    std::vector<double> extra;
    if (auto gc = rate_key(t, "c")) extra.push_back(*gc);
    cfg.rates = DecayRates(ga, gb, std::move(extra));

    cfg.grid_allow_truncation = t.boolean("grid.allow_truncation").value_or(false);
    {
        const auto t_max = t.number("grid.t_max");
        const auto n_pts = t.integer("grid.n_points");
        if (t_max || n_pts) {
            const TimeGrid fallback = TimeGrid::default_for(cfg.rates);
            const double tm = t_max.value_or(fallback.t_max);
            const auto np = int(n_pts.value_or(std::uint64_t(fallback.n_points)));
            if (!(tm > 0.0)) fail(t.line_of("grid.t_max"), "grid.t_max", "must be positive");
            if (np < 2) fail(t.line_of("grid.n_points"), "grid.n_points", "need at least 2");
            cfg.grid = TimeGrid(tm, np);
        }
    }

    // Bins default to twice the grid extent apart, comfortably separated.
    cfg.pump.tau_bin = checked_positive(t, "pump.tau_bin", 2.0 * cfg.effective_grid().t_max);

    cfg.detector.jitter_sigma = checked_range(t, "detector.jitter_sigma", 0.0, 0.0, 1e12);
    cfg.detector.efficiency = checked_range(t, "detector.efficiency", 1.0, 0.0, 1.0);
    cfg.detector.dead_time = checked_range(t, "detector.dead_time", 0.0, 0.0, 1e12);

    cfg.purcell = PurcellFactors(checked_positive(t, "purcell.f_a", 1.0),
                                 checked_positive(t, "purcell.f_b", 1.0));

    auto window = [&](const char* prefix) -> std::optional<DetectionWindow> {
        const std::string sk = std::string(prefix) + ".start";
        const std::string ek = std::string(prefix) + ".end";
        const auto s = t.number(sk);
        const auto e = t.number(ek);
        if (!s && !e) return std::nullopt;
        if (!s || !e) fail(t.line_of(s ? sk : ek), prefix, "window needs both start and end");
        if (!(*s >= 0.0) || !(*e > *s))
            fail(t.line_of(ek), ek, "window needs end > start >= 0");
        return DetectionWindow(*s, *e);
    };
    cfg.window_a = window("window_a");
    cfg.window_b = window("window_b");

    cfg.prep_success = checked_range(t, "emitter.prep_success", 0.5, 0.0, 1.0);
    cfg.n_trials = t.integer("emitter.n_trials").value_or(10000);
    if (cfg.n_trials < 1)
        fail(t.line_of("emitter.n_trials"), "emitter.n_trials", "need at least 1 trial");
    cfg.seed = t.integer("emitter.seed").value_or(0);

    cfg.analyzer.phi_a = t.number("analyzer.phi_a").value_or(0.0);
    cfg.analyzer.phi_b = t.number("analyzer.phi_b").value_or(0.0);
    cfg.analyzer.path_delay = checked_positive(t, "analyzer.path_delay", cfg.pump.tau_bin);
    cfg.analyzer.splitting_ratio = checked_range(t, "analyzer.splitting_ratio", 0.5, 1e-9, 1.0 - 1e-9);

    if (auto param = t.string("sweep.parameter")) {
        static const char* kAllowed[] = {"purcell.f_a", "purcell.f_b", "rates.gamma_a",
                                         "rates.gamma_b", "pump.p1", "pump.p2"};
        if (std::find(std::begin(kAllowed), std::end(kAllowed), *param) == std::end(kAllowed))
            fail(t.line_of("sweep.parameter"), "sweep.parameter",
                 "unsupported sweep parameter '" + *param + "'");
        SweepSpec spec;
        spec.parameter = *param;
        const auto start = t.number("sweep.start");
        const auto stop = t.number("sweep.stop");
        const auto steps = t.integer("sweep.steps");
        if (!start || !stop || !steps)
            fail(t.line_of("sweep.parameter"), "sweep",
                 "sweep needs sweep.start, sweep.stop and sweep.steps");
        spec.start = *start;
        spec.stop = *stop;
        spec.steps = int(*steps);
        if (spec.steps < 1)
            fail(t.line_of("sweep.steps"), "sweep.steps", "need at least 1 step");
        if (auto scale = t.string("sweep.scale")) {
            if (*scale == "linear") spec.scale = SweepScale::linear;
            else if (*scale == "log") spec.scale = SweepScale::log;
            else fail(t.line_of("sweep.scale"), "sweep.scale", "expected linear or log");
        }
        if (spec.scale == SweepScale::log && (spec.start <= 0.0 || spec.stop <= 0.0))
            fail(t.line_of("sweep.scale"), "sweep.scale", "log scale needs positive bounds");
        cfg.sweep = spec;
    } else if (t.has("sweep.start") || t.has("sweep.stop") || t.has("sweep.steps") ||
               t.has("sweep.scale")) {
        fail(t.line_of("sweep.start"), "sweep.parameter", "sweep.parameter missing");
    }

    t.reject_unused();
    cfg.pump.validate();
    cfg.detector.validate();
    cfg.analyzer.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_key_reference() {
    return
        "Config keys (flat 'section.key = value', '#' comments, unknown keys rejected):\n"
        "  pump.p1                 excitation probability of pulse 1, in [0,1] (default 0.5)\n"
        "  pump.p2                 excitation probability of pulse 2, in [0,1] (default 1)\n"
        "  pump.phi_p              relative pump phase, radians (default 0)\n"
        "  pump.tau_bin            time-bin separation, ns (default 2 * grid t_max)\n"
        "  rates.gamma_a           amplitude decay rate of the first transition, 1/ns (default 1)\n"
        "  rates.gamma_b           amplitude decay rate of the second transition, 1/ns (default 1)\n"
        "  rates.gamma_c           optional third-transition rate, 1/ns (enables n=3)\n"
        "  rates.lifetime_a|b|c    alternative to the rate: lifetime in ns, gamma = 1/lifetime\n"
        "  grid.t_max              time-axis extent, ns (default 10 / min(2 gamma))\n"
        "  grid.n_points           samples per axis (default 1024, or 256 for n=3)\n"
        "  grid.allow_truncation   accept a grid that truncates the amplitude (default false)\n"
        "  detector.jitter_sigma   Gaussian timestamp noise std-dev, ns (default 0)\n"
        "  detector.efficiency     detection probability per photon, in [0,1] (default 1)\n"
        "  detector.dead_time      per-channel minimum detection separation, ns (default 0)\n"
        "  purcell.f_a             rate multiplier for the first transition (default 1)\n"
        "  purcell.f_b             rate multiplier for the second transition (default 1)\n"
        "  window_a.start/.end     photon-A acceptance window, ns\n"
        "  window_b.start/.end     photon-B acceptance window, ns\n"
        "  emitter.prep_success    probability of reaching the metastable state (default 0.5)\n"
        "  emitter.n_trials        Monte Carlo trials (default 10000)\n"
        "  emitter.seed            64-bit reproducibility seed (default 0)\n"
        "  analyzer.phi_a          station-A analyzer phase, radians (default 0)\n"
        "  analyzer.phi_b          station-B analyzer phase, radians (default 0)\n"
        "  analyzer.path_delay     interferometer path delay, ns (default pump.tau_bin)\n"
        "  analyzer.splitting_ratio beam-splitter transmittance, in (0,1) (default 0.5)\n"
        "  sweep.parameter         one of purcell.f_a, purcell.f_b, rates.gamma_a,\n"
        "                          rates.gamma_b, pump.p1, pump.p2\n"
        "  sweep.start/.stop       sweep bounds (unit of the swept key)\n"
        "  sweep.steps             number of sweep points\n"
        "  sweep.scale             linear (default) or log\n";
}

} // namespace tbsim
