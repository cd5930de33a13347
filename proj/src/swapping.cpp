#include "tbsim/swapping.hpp"

#include <cmath>
#include <cstdio>

namespace tbsim {

PurcellFactors::PurcellFactors(double fa, double fb) : f_a(fa), f_b(fb) {
    if (!(f_a > 0.0) || !(f_b > 0.0))
        throw std::invalid_argument("PurcellFactors: factors must be positive");
}

DecayRates purcell_adjust(const DecayRates& rates, const PurcellFactors& factors) {
    return DecayRates(rates.gamma_a * factors.f_a, rates.gamma_b * factors.f_b, rates.extra);
}

double mixed_overlap(const ReducedState& rho1, const ReducedState& rho2) {
    if (rho1.grid().n_points != rho2.grid().n_points ||
        rho1.grid().t_max != rho2.grid().t_max)
        throw std::invalid_argument("mixed_overlap: states live on different grids");
    // Tr(rho1 rho2) = sum_ij rho1_ij conj(rho2_ij) for Hermitian rho2.
    return rho1.matrix().cwiseProduct(rho2.matrix().conjugate()).sum().real();
}

SwapReport swap_error_report(const DecayRates& rates1, const DecayRates& rates2,
                             const std::optional<SwapWindows>& windows,
                             const std::optional<TimeGrid>& grid) {
    const bool identical =
        rates1.gamma_a == rates2.gamma_a && rates1.gamma_b == rates2.gamma_b;

    // Shared grid covering the slower of the two sources.
    const double min_rate = std::min(rates1.min_rate(), rates2.min_rate());
    const TimeGrid g = grid ? *grid : TimeGrid::default_for(DecayRates(min_rate, min_rate));

    CascadeAmplitude amp1 = build_cascade_amplitude(rates1, g);
    ReducedState rho1 = reduce_to_b(amp1);

    SwapReport report{rates1, rates2, identical,
                      error_analytic(rates1), error_analytic(rates2),
                      0.0, 0.0, {}, {}, {}, {}};

    if (identical) {
        report.overlap_numeric = mixed_overlap(rho1, rho1);
    } else {
        CascadeAmplitude amp2 = build_cascade_amplitude(rates2, g);
        ReducedState rho2 = reduce_to_b(amp2);
        report.overlap_numeric = mixed_overlap(rho1, rho2);
    }
    report.error_numeric = 1.0 - report.overlap_numeric;

    if (windows) {
        GatingResult g1 = apply_windows(amp1, windows->win_a, windows->win_b);
        double overlap = 0.0, throughput = 0.0;
        if (identical) {
            if (g1.amplitude) {
                ReducedState r = reduce_to_b(*g1.amplitude);
                overlap = mixed_overlap(r, r);
            }
            throughput = g1.probability * g1.probability;
        } else {
            CascadeAmplitude amp2 = build_cascade_amplitude(rates2, g);
            GatingResult g2 = apply_windows(amp2, windows->win_a, windows->win_b);
            if (g1.amplitude && g2.amplitude)
                overlap = mixed_overlap(reduce_to_b(*g1.amplitude),
                                        reduce_to_b(*g2.amplitude));
            throughput = g1.probability * g2.probability;
        }
        report.gated_overlap = overlap;
        report.gated_error = 1.0 - overlap;
        report.post_selection_single = g1.probability;
        report.throughput = throughput;
    }
    return report;
}

namespace {

void emit(std::ostream& out, const char* key, double value, bool comma = true) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << "  \"" << key << "\": " << buf << (comma ? ",\n" : "\n");
}

void emit_opt(std::ostream& out, const char* key, const std::optional<double>& value,
              bool comma = true) {
    if (value) {
        emit(out, key, *value, comma);
    } else {
        out << "  \"" << key << "\": null" << (comma ? ",\n" : "\n");
    }
}

} // namespace

void write_report_json(std::ostream& out, const SwapReport& r) {
    out << "{\n";
    emit(out, "gamma_a_1", r.rates1.gamma_a);
    emit(out, "gamma_b_1", r.rates1.gamma_b);
    emit(out, "gamma_a_2", r.rates2.gamma_a);
    emit(out, "gamma_b_2", r.rates2.gamma_b);
    out << "  \"identical_sources\": " << (r.identical_sources ? "true" : "false") << ",\n";
    emit(out, "error_analytic_1", r.error_analytic_1);
    emit(out, "error_analytic_2", r.error_analytic_2);
    emit(out, "overlap_numeric", r.overlap_numeric);
    emit(out, "error_numeric", r.error_numeric);
    emit_opt(out, "gated_overlap", r.gated_overlap);
    emit_opt(out, "gated_error", r.gated_error);
    emit_opt(out, "post_selection_single", r.post_selection_single);
    emit_opt(out, "throughput", r.throughput, false);
    out << "}\n";
}

} // namespace tbsim
