#ifndef TBSIM_GATING_HPP
#define TBSIM_GATING_HPP

#include "tbsim/cascade.hpp"

#include <optional>
#include <ostream>
#include <vector>

namespace tbsim {

// Detection acceptance interval, relative to the exciting pulse. Edges
// snap to grid cells: floor for start, ceiling for end.
struct DetectionWindow {
    double start;
    double end;

    DetectionWindow(double start_, double end_);

    int first_cell(const TimeGrid& grid) const; // inclusive
    int last_cell(const TimeGrid& grid) const;  // exclusive
};

// Result of windowed post-selection. probability is the kept probability
// mass of the original amplitude; amplitude is absent when nothing
// survives (probability 0), never a NaN-filled matrix.
struct GatingResult {
    double probability = 0.0;
    std::optional<CascadeAmplitude> amplitude;
};

// Zero the amplitude outside win_a x win_b and renormalize. Accepting A
// photons only before T1 and B photons only after T2 > T1 removes the
// time-ordering edge entirely, leaving an exact product state.
GatingResult apply_windows(const CascadeAmplitude& amp, const DetectionWindow& win_a,
                           const DetectionWindow& win_b);

struct GatingScanRow {
    double t1, t2, delta_t;
    double probability;
    double purity;
};

// Sweep win_a = [0, T1], win_b = [T2, T2 + dT] over the given values and
// tabulate the throughput/purity trade-off.
std::vector<GatingScanRow> gating_tradeoff_scan(const CascadeAmplitude& amp,
                                                const std::vector<double>& t1_values,
                                                const std::vector<double>& t2_values,
                                                const std::vector<double>& delta_t_values);

void write_scan_csv(std::ostream& out, const std::vector<GatingScanRow>& rows);

} // namespace tbsim

#endif
