#include "tbsim/emitter.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace tbsim;

namespace {

EmitterConfig basic_config(double p1, double p2, std::uint64_t n, std::uint64_t seed) {
    return EmitterConfig{{p1, p2, 0.0, 100.0}, DecayRates(1.0, 1.0), 1.0, n, seed};
}

// One-sample Kolmogorov-Smirnov statistic against the exponential CDF.
double ks_statistic_exponential(std::vector<double> samples, double rate) {
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double cdf = 1.0 - std::exp(-rate * samples[k]);
        d = std::max(d, std::abs(cdf - double(k) / n));
        d = std::max(d, std::abs(cdf - double(k + 1) / n));
    }
    return d;
}

} // namespace

TEST_CASE("deterministic excitation fills the early bin") {
    EmitterConfig cfg = basic_config(1.0, 1.0, 2000, 3);
    BatchResult batch = simulate_batch(cfg, DetectorModel{});
    CHECK(batch.summary.n_early == cfg.n_trials);
    CHECK(batch.summary.n_late == 0);
}

TEST_CASE("p1=1/2, p2=1 always emits exactly one pair") {
    EmitterConfig cfg = basic_config(0.5, 1.0, 100000, 4);
    BatchResult batch = simulate_batch(cfg, DetectorModel{});
    CHECK(batch.summary.pair_probability() == 1.0);
    const double sigma = std::sqrt(0.25 / double(cfg.n_trials));
    CHECK(std::abs(batch.summary.early_fraction() - 0.5) < 3.0 * sigma);
}

TEST_CASE("preparation failure yields no pair") {
    EmitterConfig cfg = basic_config(1.0, 1.0, 500, 5);
    cfg.prep_success = 0.0;
    BatchResult batch = simulate_batch(cfg, DetectorModel{});
    CHECK(batch.summary.n_none == cfg.n_trials);
    for (const EmissionRecord& r : batch.records) {
        CHECK_FALSE(r.prepared);
        CHECK_FALSE(r.t_a_true.has_value());
    }
}

TEST_CASE("cascade ordering and the mean emission delay") {
    // |psi|^2 factorizes: tA ~ Exp(2 Ga), tB - tA ~ Exp(2 Gb), so the mean
    // delay is 1/(2 Gb).
    const DecayRates rates(1.0, 1.0);
    TrialRng rng(17, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
        auto [ta, tb] = sample_cascade_times(rates, rng);
        CHECK(tb >= ta);
        const double d = tb - ta;
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / n;
    const double stderr_mean = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 0.5) < 3.0 * stderr_mean);
}

TEST_CASE("sampled marginals pass KS tests against the analytic exponentials") {
    const DecayRates rates(1.3, 0.4);
    TrialRng rng(29, 1);
    const std::size_t n = 200000;
    std::vector<double> ta(n), delay(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto [a, b] = sample_cascade_times(rates, rng);
        ta[k] = a;
        delay[k] = b - a;
    }
    const double critical = 1.628 / std::sqrt(double(n)); // 1% level
    CHECK(ks_statistic_exponential(ta, 2.0 * rates.gamma_a) < critical);
    CHECK(ks_statistic_exponential(delay, 2.0 * rates.gamma_b) < critical);
}

TEST_CASE("2-D sample histogram matches |psi|^2 cellwise") {
    const DecayRates rates(1.0, 0.5);
    const int bins = 64;
    const double t_max = 4.0;
    const double cell = t_max / bins;
    std::vector<double> counts(bins * bins, 0.0);

    TrialRng rng(31, 2);
    const std::size_t n = 1000000;
    for (std::size_t k = 0; k < n; ++k) {
        auto [a, b] = sample_cascade_times(rates, rng);
        if (a >= t_max || b >= t_max) continue;
        counts[std::size_t(a / cell) * bins + std::size_t(b / cell)] += 1.0;
    }

    // Expected count per cell from the factorized analytic law: integrate
    // f_A(x) * [F_D(y1 - x) - F_D(y0 - x)] over the cell's x range, which
    // handles the theta edge on diagonal cells exactly. 5 sigma Poisson band.
    const double ra = 2.0 * rates.gamma_a, rb = 2.0 * rates.gamma_b;
    auto delay_cdf = [&](double d) { return d <= 0.0 ? 0.0 : 1.0 - std::exp(-rb * d); };
    int checked = 0;
    for (int i = 0; i < bins; ++i)
        for (int j = i; j < bins; ++j) {
            const double x0 = i * cell, y0 = j * cell, y1 = y0 + cell;
            const int sub = 256;
            double mass = 0.0;
            for (int s = 0; s < sub; ++s) {
                const double x = x0 + (s + 0.5) * cell / sub;
                mass += ra * std::exp(-ra * x) * (delay_cdf(y1 - x) - delay_cdf(y0 - x));
            }
            mass *= cell / sub;
            const double expected = mass * double(n);
            if (expected < 25.0) continue;
            ++checked;
            CHECK(std::abs(counts[i * bins + j] - expected) < 5.0 * std::sqrt(expected));
        }
    CHECK(checked > 500);
}

TEST_CASE("never more than one cascade per trial, structurally") {
    EmitterConfig cfg = basic_config(1.0, 1.0, 200000, 6);
    BatchResult batch = simulate_batch(cfg, DetectorModel{}, 4);
    for (const EmissionRecord& r : batch.records) {
        // a record carries at most one (tA, tB) pair by construction
        if (r.bin == Bin::none) {
            CHECK_FALSE(r.t_a_true.has_value());
        } else {
            CHECK(r.t_a_true.has_value());
            CHECK(r.t_b_true.has_value());
            CHECK(*r.t_b_true >= *r.t_a_true);
        }
    }
    CHECK(batch.summary.n_early + batch.summary.n_late + batch.summary.n_none ==
          cfg.n_trials);
}

TEST_CASE("empirical bin fractions converge to (p1, (1-p1) p2)") {
    TrialRng pick(37, 0);
    for (int c = 0; c < 8; ++c) {
        const double p1 = pick.uniform(), p2 = pick.uniform();
        EmitterConfig cfg = basic_config(p1, p2, 30000, 100 + std::uint64_t(c));
        BatchResult batch = simulate_batch(cfg, DetectorModel{});
        const double pe = p1, pl = (1.0 - p1) * p2;
        const double se = std::sqrt(std::max(pe * (1.0 - pe), 1e-9) / double(cfg.n_trials));
        const double sl = std::sqrt(std::max(pl * (1.0 - pl), 1e-9) / double(cfg.n_trials));
        CHECK(std::abs(batch.summary.early_fraction() - pe) < 4.0 * se + 1e-9);
        CHECK(std::abs(batch.summary.late_fraction() - pl) < 4.0 * sl + 1e-9);
    }
}

TEST_CASE("detector model") {
    SUBCASE("zero efficiency loses every timestamp but keeps the records") {
        EmitterConfig cfg = basic_config(0.5, 1.0, 5000, 7);
        BatchResult batch = simulate_batch(cfg, DetectorModel{0.0, 0.0, 0.0});
        CHECK(batch.summary.n_detected_a == 0);
        CHECK(batch.summary.n_detected_b == 0);
        CHECK(batch.summary.pair_probability() == 1.0);
    }

    SUBCASE("jitter reproduces the configured Gaussian width") {
        EmitterConfig cfg = basic_config(1.0, 1.0, 1000000, 8);
        const double sigma = 0.018; // 18 ps in ns
        BatchResult batch = simulate_batch(cfg, DetectorModel{sigma, 1.0, 0.0}, 4);
        double sum = 0.0, sum2 = 0.0;
        std::size_t n = 0;
        for (const EmissionRecord& r : batch.records) {
            if (!r.t_a_det) continue;
            const double d = *r.t_a_det - *r.t_a_true;
            sum += d;
            sum2 += d * d;
            ++n;
        }
        const double mean = sum / double(n);
        const double sd = std::sqrt(sum2 / double(n) - mean * mean);
        CHECK(std::abs(sd - sigma) / sigma < 0.02);
    }

    SUBCASE("late-bin detections are offset by tau_bin") {
        EmitterConfig cfg = basic_config(0.0, 1.0, 100, 9);
        BatchResult batch = simulate_batch(cfg, DetectorModel{});
        for (const EmissionRecord& r : batch.records) {
            REQUIRE(r.bin == Bin::late);
            CHECK(*r.t_a_det == doctest::Approx(*r.t_a_true + cfg.pump.tau_bin));
        }
    }
}

TEST_CASE("same seed reproduces identical records; workers do not matter") {
    EmitterConfig cfg = basic_config(0.4, 0.9, 20000, 42);
    BatchResult serial = simulate_batch(cfg, DetectorModel{0.01, 0.8, 0.0}, 1);
    BatchResult again = simulate_batch(cfg, DetectorModel{0.01, 0.8, 0.0}, 1);
    BatchResult parallel = simulate_batch(cfg, DetectorModel{0.01, 0.8, 0.0}, 4);

    auto same = [](const EmissionRecord& a, const EmissionRecord& b) {
        return a.bin == b.bin && a.prepared == b.prepared && a.t_a_true == b.t_a_true &&
               a.t_b_true == b.t_b_true && a.t_a_det == b.t_a_det && a.t_b_det == b.t_b_det;
    };
    for (std::size_t k = 0; k < serial.records.size(); ++k) {
        CHECK(same(serial.records[k], again.records[k]));
        CHECK(same(serial.records[k], parallel.records[k]));
    }
}

TEST_CASE("records CSV round-trips its documented shape") {
    EmitterConfig cfg = basic_config(0.5, 1.0, 50, 11);
    BatchResult batch = simulate_batch(cfg, DetectorModel{0.0, 0.5, 0.0});

    std::ostringstream os;
    write_records_csv(os, batch.records);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "trial,prepared,bin,t_a_true,t_b_true,t_a_det,t_b_det");

    std::string line;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
        ++rows;
    }
    CHECK(rows == batch.records.size());

    // byte determinism
    std::ostringstream os2;
    write_records_csv(os2, simulate_batch(cfg, DetectorModel{0.0, 0.5, 0.0}).records);
    CHECK(os.str() == os2.str());
}

TEST_CASE("config validation") {
    EmitterConfig cfg = basic_config(0.5, 1.0, 0, 0);
    CHECK_THROWS_AS(simulate_batch(cfg, DetectorModel{}), std::invalid_argument);
    cfg.n_trials = 10;
    cfg.prep_success = 1.5;
    CHECK_THROWS_AS(simulate_batch(cfg, DetectorModel{}), std::invalid_argument);
    cfg.prep_success = 1.0;
    CHECK_THROWS_AS(simulate_batch(cfg, DetectorModel{-0.1, 1.0, 0.0}),
                    std::invalid_argument);
}
