#ifndef TBSIM_CONFIG_HPP
#define TBSIM_CONFIG_HPP

#include "tbsim/cascade.hpp"
#include "tbsim/emitter.hpp"
#include "tbsim/gating.hpp"
#include "tbsim/interferometry.hpp"
#include "tbsim/swapping.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tbsim {

// Parse or validation failure, with the offending line and key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SweepScale { linear, log };

struct SweepSpec {
    std::string parameter;
    double start = 0.0;
    double stop = 0.0;
    int steps = 0;
    SweepScale scale = SweepScale::linear;

    std::vector<double> values() const;
};

// Fully validated run configuration. Times are nanoseconds, rates 1/ns.
struct RunConfig {
    PumpConfig pump;
    DecayRates rates{1.0, 1.0};
    std::optional<TimeGrid> grid; // defaulted from the rates when absent
    bool grid_allow_truncation = false;
    DetectorModel detector;
    PurcellFactors purcell;
    std::optional<DetectionWindow> window_a, window_b;
    double prep_success = 0.5;
    std::uint64_t n_trials = 10000;
    std::uint64_t seed = 0;
    AnalyzerConfig analyzer;
    std::optional<SweepSpec> sweep;

    TimeGrid effective_grid() const;
};

// Flat "section.key = value" format, '#' comments, unknown keys rejected.
// Every diagnostic names the line and key involved.
RunConfig parse_config(std::string_view text);
RunConfig parse_config_file(const std::string& path);

// One line per key: name, meaning, unit, default. Backs the CLI help.
std::string config_key_reference();

} // namespace tbsim

#endif
