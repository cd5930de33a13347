#ifndef TBSIM_INTERFEROMETRY_HPP
#define TBSIM_INTERFEROMETRY_HPP

#include "tbsim/emitter.hpp"
#include "tbsim/timebin.hpp"

#include <array>
#include <ostream>
#include <vector>

namespace tbsim {

// Analyzer settings for the two station interferometers. path_delay must
// match the pump tau_bin for the early/long and late/short alternatives
// to land in the same central time slot.
struct AnalyzerConfig {
    double phi_a = 0.0;
    double phi_b = 0.0;
    double path_delay = 1.0;
    double splitting_ratio = 0.5;

    void validate() const;
};

// Output ports of each station analyzer.
enum class Port { zero = 0, one = 1 };

struct PortPair {
    Port a = Port::zero;
    Port b = Port::zero;
};

struct CoincidenceResult {
    double probability = 0.0;
    // False when the path delay does not match tau_bin and the returned
    // value is the incoherent (fringe-free) rate.
    bool coherent = true;
};

// Central-slot coincidence probability for one port pair, conditioned on
// one pair emitted. The early branch through both long paths interferes
// with the late branch through both short paths, giving
// c0 (1 + s V cos(phi_p - phi_a - phi_b)) with the port-dependent sign s.
CoincidenceResult coincidence_probability(const TimeBinPairState& state,
                                          const AnalyzerConfig& analyzers, PortPair ports);

enum class ScanPhase { pump, a, b };

struct PhaseScanPoint {
    double phase;
    std::array<double, 4> probability; // port pairs (0,0),(0,1),(1,0),(1,1)
};

struct SinusoidFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;     // fitted phase of the cosine
    double residual = 0.0;  // rms residual
    double visibility() const { return offset > 0.0 ? amplitude / offset : 0.0; }
};

std::vector<PhaseScanPoint> phase_scan(const TimeBinPairState& state,
                                       const AnalyzerConfig& base, ScanPhase which,
                                       int n_points);

// Least-squares fit of y = offset + amplitude * cos(x - phase).
SinusoidFit fit_sinusoid(const std::vector<double>& xs, const std::vector<double>& ys);

SinusoidFit fit_scan(const std::vector<PhaseScanPoint>& scan, int port_pair);

// |<envelope_early | envelope_late>|^2; the two branches share one
// envelope (identical time-translates), so this is 1 by construction and
// drops below 1 only for deliberately mismatched branch envelopes.
double envelope_indistinguishability(const TimeBinPairState& state);

struct FringeOptions {
    double coincidence_window = 0.0; // 0: use tau_bin
    int workers = 1;
};

struct FringePoint {
    double phase;
    std::array<std::uint64_t, 4> counts; // central-slot coincidences per port pair
    std::uint64_t trials = 0;
    std::uint64_t pairs_emitted = 0;
};

// Monte Carlo fringe: per trial, sample the joint (slot, port) outcome of
// both photons from the amplitude model, timestamp them through the
// detector, and post-select central-slot coincidences.
std::vector<FringePoint> monte_carlo_fringe(const EmitterConfig& config,
                                            const AnalyzerConfig& analyzers,
                                            const DetectorModel& detector,
                                            const std::vector<double>& pump_phases,
                                            const FringeOptions& options = {});

void write_scan_csv(std::ostream& out, const std::vector<PhaseScanPoint>& scan);
void write_fringe_csv(std::ostream& out, const std::vector<FringePoint>& points);

} // namespace tbsim

#endif
