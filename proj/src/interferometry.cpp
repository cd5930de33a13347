#include "tbsim/interferometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <thread>

namespace tbsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-photon analyzer transfer amplitudes for an unbalanced Mach-Zehnder
// with transmittance T (i-phase convention on reflection): the long path
// carries the analyzer phase.
struct AnalyzerArms {
    Complex g_short[2];
    Complex g_long[2];

    AnalyzerArms(double transmittance, double phi) {
        const double t = transmittance, r = 1.0 - transmittance;
        const Complex ephi = std::polar(1.0, phi);
        const Complex i_rt = Complex(0.0, std::sqrt(t * r));
        g_short[0] = Complex(t, 0.0);
        g_long[0] = -r * ephi;
        g_short[1] = i_rt;
        g_long[1] = i_rt * ephi;
    }
};

double coherence_tolerance(const TimeBinPairState& state) {
    return state.envelope ? state.envelope->grid.dt : 1e-12;
}

struct NormalizedBins {
    Complex early, late;
};

NormalizedBins normalized_bins(const TimeBinPairState& state) {
    const double p = state.emission_probability();
    if (!(p > 0.0))
        throw std::invalid_argument("coincidence analysis needs emission probability > 0");
    const double s = 1.0 / std::sqrt(p);
    return {state.amp_early * s, state.amp_late * s};
}

// Joint outcome cell of the two analyzers: arrival slot (0 early-short,
// 1 central, 2 late-long) and exit port per photon.
struct OutcomeCell {
    int slot_a, port_a, slot_b, port_b;
    int tag; // branch tag; -1 merges branches coherently
    Complex amplitude;
};

// Enumerate branch x path x port combinations and merge amplitudes that
// land in the same (slot, port) cell; distinct cells add incoherently.
// When the analyzer delay does not match tau_bin the branches stay
// distinguishable and are never merged.
std::vector<OutcomeCell> outcome_table(const TimeBinPairState& state,
                                       const AnalyzerConfig& analyzers, bool coherent) {
    const NormalizedBins bins = normalized_bins(state);
    const AnalyzerArms arm_a(analyzers.splitting_ratio, analyzers.phi_a);
    const AnalyzerArms arm_b(analyzers.splitting_ratio, analyzers.phi_b);

    std::vector<OutcomeCell> cells;
    auto accumulate = [&](int sa, int pa, int sb, int pb, int tag, Complex amp) {
        for (OutcomeCell& c : cells)
            if (c.slot_a == sa && c.port_a == pa && c.slot_b == sb && c.port_b == pb &&
                c.tag == tag) {
                c.amplitude += amp;
                return;
            }
        cells.push_back({sa, pa, sb, pb, tag, amp});
    };

    for (int bin = 0; bin < 2; ++bin) {
        const Complex a_bin = bin == 0 ? bins.early : bins.late;
        if (a_bin == Complex(0.0, 0.0)) continue;
        for (int xa = 0; xa < 2; ++xa)
            for (int xb = 0; xb < 2; ++xb)
                for (int pa = 0; pa < 2; ++pa)
                    for (int pb = 0; pb < 2; ++pb) {
                        const Complex ga = xa ? arm_a.g_long[pa] : arm_a.g_short[pa];
                        const Complex gb = xb ? arm_b.g_long[pb] : arm_b.g_short[pb];
                        accumulate(bin + xa, pa, bin + xb, pb, coherent ? -1 : bin,
                                   a_bin * ga * gb);
                    }
    }
    return cells;
}

} // namespace

void AnalyzerConfig::validate() const {
    if (!(splitting_ratio > 0.0) || !(splitting_ratio < 1.0))
        throw std::invalid_argument("AnalyzerConfig: splitting_ratio must lie in (0,1)");
    if (!(path_delay > 0.0))
        throw std::invalid_argument("AnalyzerConfig: path_delay must be positive");
}

CoincidenceResult coincidence_probability(const TimeBinPairState& state,
                                          const AnalyzerConfig& analyzers, PortPair ports) {
    analyzers.validate();
    const NormalizedBins bins = normalized_bins(state);
    const AnalyzerArms arm_a(analyzers.splitting_ratio, analyzers.phi_a);
    const AnalyzerArms arm_b(analyzers.splitting_ratio, analyzers.phi_b);

    const int pa = static_cast<int>(ports.a);
    const int pb = static_cast<int>(ports.b);
    const double overlap_amp = std::sqrt(envelope_indistinguishability(state));

    const Complex early_term =
        bins.early * overlap_amp * arm_a.g_long[pa] * arm_b.g_long[pb];
    const Complex late_term = bins.late * arm_a.g_short[pa] * arm_b.g_short[pb];

    CoincidenceResult result;
    if (std::abs(analyzers.path_delay - state.pump.tau_bin) > coherence_tolerance(state)) {
        result.coherent = false;
        result.probability = std::norm(early_term) + std::norm(late_term);
    } else {
        result.probability = std::norm(early_term + late_term);
    }
    return result;
}

std::vector<PhaseScanPoint> phase_scan(const TimeBinPairState& state,
                                       const AnalyzerConfig& base, ScanPhase which,
                                       int n_points) {
    if (n_points < 8)
        throw std::invalid_argument("phase_scan: need at least 8 points");

    std::vector<PhaseScanPoint> scan;
    scan.reserve(n_points);
    for (int k = 0; k < n_points; ++k) {
        const double phase = kTwoPi * k / n_points;
        AnalyzerConfig cfg = base;
        TimeBinPairState s = state;
        switch (which) {
            case ScanPhase::pump: s.pump.phi_p = phase;
                s.amp_late = std::polar(std::abs(s.amp_late), phase); break;
            case ScanPhase::a: cfg.phi_a = phase; break;
            case ScanPhase::b: cfg.phi_b = phase; break;
        }
        PhaseScanPoint pt{phase, {}};
        int idx = 0;
        for (int pa = 0; pa < 2; ++pa)
            for (int pb = 0; pb < 2; ++pb)
                pt.probability[idx++] =
                    coincidence_probability(s, cfg, {Port(pa), Port(pb)}).probability;
        scan.push_back(pt);
    }
    return scan;
}

SinusoidFit fit_sinusoid(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw std::invalid_argument("fit_sinusoid: need at least 3 matching samples");

    const Eigen::Index n = Eigen::Index(xs.size());
    Eigen::MatrixXd basis(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        basis(k, 0) = 1.0;
        basis(k, 1) = std::cos(xs[k]);
        basis(k, 2) = std::sin(xs[k]);
        y(k) = ys[k];
    }
    Eigen::Vector3d coeff = basis.colPivHouseholderQr().solve(y);

    SinusoidFit fit;
    fit.offset = coeff(0);
    fit.amplitude = std::hypot(coeff(1), coeff(2));
    fit.phase = std::atan2(coeff(2), coeff(1));
    fit.residual = std::sqrt((basis * coeff - y).squaredNorm() / double(n));
    return fit;
}

SinusoidFit fit_scan(const std::vector<PhaseScanPoint>& scan, int port_pair) {
    std::vector<double> xs, ys;
    xs.reserve(scan.size());
    ys.reserve(scan.size());
    for (const PhaseScanPoint& pt : scan) {
        xs.push_back(pt.phase);
        ys.push_back(pt.probability[port_pair]);
    }
    return fit_sinusoid(xs, ys);
}

double envelope_indistinguishability(const TimeBinPairState& state) {
    // The two branch envelopes are the same cascade amplitude shifted by
    // 0 and tau_bin; compared shape-to-shape their overlap is exactly 1.
    (void)state;
    return 1.0;
}

std::vector<FringePoint> monte_carlo_fringe(const EmitterConfig& config,
                                            const AnalyzerConfig& analyzers,
                                            const DetectorModel& detector,
                                            const std::vector<double>& pump_phases,
                                            const FringeOptions& options) {
    config.validate();
    detector.validate();
    analyzers.validate();

    const double tau = config.pump.tau_bin;
    const double window = options.coincidence_window > 0.0 ? options.coincidence_window : tau;
    const double p_emit = config.pump.p1 + (1.0 - config.pump.p1) * config.pump.p2;

    std::vector<FringePoint> points;
    points.reserve(pump_phases.size());

    for (std::size_t pi = 0; pi < pump_phases.size(); ++pi) {
        PumpConfig pump = config.pump;
        pump.phi_p = pump_phases[pi];
        TimeBinPairState state = make_pair_state(pump, nullptr);
        const bool coherent =
            std::abs(analyzers.path_delay - pump.tau_bin) <= coherence_tolerance(state);
        const std::vector<OutcomeCell> cells = outcome_table(state, analyzers, coherent);
        std::vector<double> weights(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            weights[c] = std::norm(cells[c].amplitude);

        FringePoint pt{pump_phases[pi], {}, config.n_trials, 0};
        const std::uint64_t phase_seed = config.seed ^ splitmix64_mix(pi + 1);

        const int workers = std::max(options.workers, 1);
        std::vector<FringePoint> partial(workers, FringePoint{pt.phase, {}, 0, 0});

        auto run_range = [&](int w, std::uint64_t begin, std::uint64_t end) {
            FringePoint& acc = partial[w];
            for (std::uint64_t k = begin; k < end; ++k) {
                TrialRng rng(phase_seed, k);
                if (!rng.bernoulli(config.prep_success)) continue;
                if (!rng.bernoulli(p_emit)) continue;
                ++acc.pairs_emitted;

                const OutcomeCell& cell = cells[rng.categorical(weights)];
                auto [ta, tb] = sample_cascade_times(config.rates, rng);

                std::optional<double> det_a, det_b;
                if (rng.bernoulli(detector.efficiency)) {
                    double t = cell.slot_a * tau + ta;
                    if (detector.jitter_sigma > 0.0)
                        t = rng.gaussian(t, detector.jitter_sigma);
                    det_a = t;
                }
                if (rng.bernoulli(detector.efficiency)) {
                    double t = cell.slot_b * tau + tb;
                    if (detector.jitter_sigma > 0.0)
                        t = rng.gaussian(t, detector.jitter_sigma);
                    det_b = t;
                }
                if (!det_a || !det_b) continue;

                const int slot_a = int(std::floor(*det_a / tau));
                const int slot_b = int(std::floor(*det_b / tau));
                if (slot_a != 1 || slot_b != 1) continue;
                if (std::abs(*det_a - *det_b) > window) continue;
                ++acc.counts[cell.port_a * 2 + cell.port_b];
            }
        };

        const std::uint64_t n = config.n_trials;
        if (workers == 1) {
            run_range(0, 0, n);
        } else {
            std::vector<std::thread> pool;
            const std::uint64_t chunk = (n + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                const std::uint64_t begin = std::uint64_t(w) * chunk;
                if (begin >= n) break;
                pool.emplace_back(run_range, w, begin, std::min(begin + chunk, n));
            }
            for (auto& t : pool) t.join();
        }
        for (const FringePoint& p : partial) {
            pt.pairs_emitted += p.pairs_emitted;
            for (int c = 0; c < 4; ++c) pt.counts[c] += p.counts[c];
        }
        points.push_back(pt);
    }
    return points;
}

void write_scan_csv(std::ostream& out, const std::vector<PhaseScanPoint>& scan) {
    out << "phase,port_pair,probability,stderr\n";
    static const char* kPairs[4] = {"00", "01", "10", "11"};
    char buf[96];
    for (const PhaseScanPoint& pt : scan)
        for (int c = 0; c < 4; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,0\n", pt.phase, kPairs[c],
                          pt.probability[c]);
            out << buf;
        }
}

void write_fringe_csv(std::ostream& out, const std::vector<FringePoint>& points) {
    out << "phase,port_pair,count,stderr\n";
    static const char* kPairs[4] = {"00", "01", "10", "11"};
    char buf[96];
    for (const FringePoint& pt : points)
        for (int c = 0; c < 4; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g,%s,%llu,%.17g\n", pt.phase, kPairs[c],
                          static_cast<unsigned long long>(pt.counts[c]),
                          std::sqrt(double(pt.counts[c])));
            out << buf;
        }
}

} // namespace tbsim
