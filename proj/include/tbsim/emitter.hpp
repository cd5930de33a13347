#ifndef TBSIM_EMITTER_HPP
#define TBSIM_EMITTER_HPP

#include "tbsim/rng.hpp"
#include "tbsim/timebin.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace tbsim {

// Four-level emitter protocol: prepare the metastable state, fire two
// pulses, emit at most one cascade. prep_success defaults to the 1/2
// relaxation branching into the metastable level.
struct EmitterConfig {
    PumpConfig pump;
    DecayRates rates;
    double prep_success = 0.5;
    std::uint64_t n_trials = 1;
    std::uint64_t seed = 0;
    // Optional metastable decay rate over one protocol cycle; 0 keeps the
    // state effectively infinite-lived, which is the default model.
    double metastable_decay = 0.0;

    void validate() const;
};

struct DetectorModel {
    double jitter_sigma = 0.0;
    double efficiency = 1.0;
    double dead_time = 0.0;

    void validate() const;
};

enum class Bin { early, late, none };

// One Monte Carlo trial. True emission times are relative to the pulse
// that excited the system; detected timestamps are absolute within the
// protocol cycle (late-bin emissions offset by tau_bin) with jitter and
// loss applied.
struct EmissionRecord {
    Bin bin = Bin::none;
    bool prepared = false;
    std::optional<double> t_a_true, t_b_true;
    std::optional<double> t_a_det, t_b_det;
};

struct BatchSummary {
    std::uint64_t n_trials = 0;
    std::uint64_t n_early = 0, n_late = 0, n_none = 0;
    std::uint64_t n_detected_a = 0, n_detected_b = 0;

    double pair_probability() const;
    double early_fraction() const;
    double late_fraction() const;
    // Binomial standard error of a fraction estimated from this batch.
    double fraction_stderr(double fraction) const;
};

struct BatchResult {
    std::vector<EmissionRecord> records;
    BatchSummary summary;
};

// Exact sampler for |psi(tA, tB)|^2: tA ~ Exp(2 gamma_a), and the delay
// tB - tA ~ Exp(2 gamma_b) independently (the squared cascade amplitude
// factorizes in these variables).
std::pair<double, double> sample_cascade_times(const DecayRates& rates, TrialRng& rng);

EmissionRecord run_trial(const EmitterConfig& config, const DetectorModel& detector,
                         TrialRng& rng);

// Deterministic given the seed: trial k always consumes the stream
// TrialRng(seed, k), so worker count does not affect any record.
BatchResult simulate_batch(const EmitterConfig& config, const DetectorModel& detector,
                           int workers = 1);

// CSV with header: trial,prepared,bin,t_a_true,t_b_true,t_a_det,t_b_det.
// Absent values are empty fields; times are in the configured unit.
void write_records_csv(std::ostream& out, const std::vector<EmissionRecord>& records);

const char* to_string(Bin bin);

} // namespace tbsim

#endif
