#ifndef TBSIM_SWAPPING_HPP
#define TBSIM_SWAPPING_HPP

#include "tbsim/cascade.hpp"
#include "tbsim/gating.hpp"

#include <optional>
#include <ostream>

namespace tbsim {

// Cavity-induced rate multipliers for the two cascade transitions.
struct PurcellFactors {
    double f_a = 1.0;
    double f_b = 1.0;

    PurcellFactors() = default;
    PurcellFactors(double fa, double fb);
};

DecayRates purcell_adjust(const DecayRates& rates, const PurcellFactors& factors);

// Tr(rho1 rho2). For two sources described by the same mixed state this is
// the average wave-function overlap sum_i p_i^2 of the intermediate
// photons, whose deficit from 1 estimates the swapping error.
double mixed_overlap(const ReducedState& rho1, const ReducedState& rho2);

struct SwapWindows {
    DetectionWindow win_a;
    DetectionWindow win_b;
};

struct SwapReport {
    DecayRates rates1, rates2;
    bool identical_sources = true;
    double error_analytic_1 = 0.0;
    double error_analytic_2 = 0.0;
    double overlap_numeric = 0.0;
    double error_numeric = 0.0;
    std::optional<double> gated_overlap;
    std::optional<double> gated_error;
    std::optional<double> post_selection_single; // per-source window probability
    std::optional<double> throughput;            // squared: both sources gated
};

// Overlap-deficit error estimate for swapping between two sources,
// optionally with product-form detection windows applied to both.
SwapReport swap_error_report(const DecayRates& rates1, const DecayRates& rates2,
                             const std::optional<SwapWindows>& windows = std::nullopt,
                             const std::optional<TimeGrid>& grid = std::nullopt);

void write_report_json(std::ostream& out, const SwapReport& report);

} // namespace tbsim

#endif
