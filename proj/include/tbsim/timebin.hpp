#ifndef TBSIM_TIMEBIN_HPP
#define TBSIM_TIMEBIN_HPP

#include "tbsim/cascade.hpp"

#include <memory>

namespace tbsim {

// Double-pulse excitation parameters. phi_p is the relative phase between
// the two pump pulses, tau_bin the pulse (and hence time-bin) separation.
struct PumpConfig {
    double p1 = 0.5;
    double p2 = 1.0;
    double phi_p = 0.0;
    double tau_bin = 1.0;

    void validate() const;
};

// Two-bin pair state: sqrt(p1) |early,early> + e^{i phi_p} sqrt((1-p1) p2)
// |late,late>, each bin carrying the same cascade envelope shifted by
// 0 / tau_bin. The squared norm is the pair-emission probability.
struct TimeBinPairState {
    Complex amp_early;
    Complex amp_late;
    std::shared_ptr<const CascadeAmplitude> envelope;
    PumpConfig pump;

    double emission_probability() const;
    // True when tau_bin is shorter than the envelope's support, i.e. the
    // two bins overlap in time.
    bool bins_overlap() const;
};

// n-photon generalization: same two bin amplitudes, n-fold envelope per
// branch (|early...early> + |late...late>).
struct TimeBinNState {
    int n;
    Complex amp_early;
    Complex amp_late;
    std::shared_ptr<const NCascadeAmplitude> envelope;
    PumpConfig pump;

    double emission_probability() const;
};

TimeBinPairState make_pair_state(const PumpConfig& pump,
                                 std::shared_ptr<const CascadeAmplitude> envelope);

TimeBinNState make_n_state(const PumpConfig& pump,
                           std::shared_ptr<const NCascadeAmplitude> envelope);

// 2 |a_e| |a_l| / (|a_e|^2 + |a_l|^2): 1 for balanced bins, 0 when one
// bin amplitude vanishes. Throws on zero emission probability.
double bin_balance(const TimeBinPairState& state);
double bin_balance(const TimeBinNState& state);

} // namespace tbsim

#endif
