#include "tbsim/swapping.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace tbsim;

TEST_CASE("purcell adjustment scales the rates") {
    DecayRates rates(1.0 / 0.6, 1.0 / 1.4);
    SUBCASE("identity") {
        DecayRates same = purcell_adjust(rates, PurcellFactors(1.0, 1.0));
        CHECK(same.gamma_a == rates.gamma_a);
        CHECK(same.gamma_b == rates.gamma_b);
    }
    SUBCASE("cavity scenario: factors (20, 2) reach the 5 percent level") {
        DecayRates adjusted = purcell_adjust(rates, PurcellFactors(20.0, 2.0));
        CHECK(error_analytic(adjusted) == doctest::Approx(1.2 / 29.2).epsilon(1e-12));
        CHECK(error_analytic(adjusted) < 0.05);
    }
    SUBCASE("equal factors leave the error unchanged") {
        DecayRates adjusted = purcell_adjust(rates, PurcellFactors(2.0, 2.0));
        CHECK(error_analytic(adjusted) == doctest::Approx(error_analytic(rates)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(PurcellFactors(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("mixed overlap of identical states is the purity") {
    DecayRates rates(1.0, 1.0);
    CascadeAmplitude amp = build_cascade_amplitude(rates, TimeGrid::default_for(rates));
    ReducedState rho = reduce_to_b(amp);
    CHECK(mixed_overlap(rho, rho) == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(std::abs(mixed_overlap(rho, rho) - purity(rho)) < 1e-12);
}

TEST_CASE("overlap of a pure state with itself is 1") {
    // product-form gated amplitude is pure
    DecayRates rates(1.0, 1.0);
    CascadeAmplitude amp = build_cascade_amplitude(rates, TimeGrid(20.0, 512));
    GatingResult g = apply_windows(amp, DetectionWindow(0.0, 2.0), DetectionWindow(3.0, 8.0));
    REQUIRE(g.amplitude.has_value());
    ReducedState rho = reduce_to_b(*g.amplitude);
    CHECK(mixed_overlap(rho, rho) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("overlap of distinct states against a doubled-resolution oracle") {
    DecayRates r1(4.0, 1.0), r2(1.0, 4.0);
    TimeGrid coarse(20.0, 1024), fine(20.0, 2048);

    auto overlap_at = [&](const TimeGrid& g) {
        ReducedState rho1 = reduce_to_b(build_cascade_amplitude(r1, g));
        ReducedState rho2 = reduce_to_b(build_cascade_amplitude(r2, g));
        return mixed_overlap(rho1, rho2);
    };
    const double v_coarse = overlap_at(coarse);
    const double v_fine = overlap_at(fine);
    CHECK(v_coarse == doctest::Approx(v_fine).epsilon(3e-3));
    CHECK(v_coarse > 0.0);
    CHECK(v_coarse <= 1.0);
}

TEST_CASE("mixed overlap is symmetric, bounded, and grid-checked") {
    DecayRates r1(2.0, 1.0), r2(1.0, 2.0);
    TimeGrid grid(20.0, 256);
    ReducedState rho1 = reduce_to_b(build_cascade_amplitude(r1, grid));
    ReducedState rho2 = reduce_to_b(build_cascade_amplitude(r2, grid));
    CHECK(mixed_overlap(rho1, rho2) == doctest::Approx(mixed_overlap(rho2, rho1)).epsilon(1e-12));
    CHECK(mixed_overlap(rho1, rho2) > 0.0);
    CHECK(mixed_overlap(rho1, rho2) <= 1.0);

    ReducedState other = reduce_to_b(build_cascade_amplitude(r1, TimeGrid(20.0, 128)));
    CHECK_THROWS_AS(mixed_overlap(rho1, other), std::invalid_argument);
}

TEST_CASE("numeric overlap deficit tracks the analytic error across ratios") {
    for (double ratio : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        DecayRates rates(ratio, 1.0);
        SwapReport rep = swap_error_report(rates, rates);
        CHECK(rep.identical_sources);
        CHECK(std::abs(rep.error_numeric - rep.error_analytic_1) < 2e-3);
    }
}

TEST_CASE("swap error report for the quantum-dot lifetimes") {
    DecayRates bare(1.0 / 0.6, 1.0 / 1.4);
    SUBCASE("no cavity: error 0.3") {
        SwapReport rep = swap_error_report(bare, bare);
        CHECK(rep.error_analytic_1 == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(rep.error_numeric == doctest::Approx(0.3).epsilon(1e-2));
    }
    SUBCASE("with Purcell (20,2): error at most 5 percent") {
        DecayRates adjusted = purcell_adjust(bare, PurcellFactors(20.0, 2.0));
        SwapReport rep = swap_error_report(adjusted, adjusted);
        CHECK(rep.error_numeric <= 0.05);
        CHECK(rep.error_analytic_1 == doctest::Approx(1.2 / 29.2).epsilon(1e-12));
    }
    SUBCASE("gating drives the error below 1e-5 at quadratic throughput cost") {
        TimeGrid grid = TimeGrid::default_for(bare);
        SwapWindows windows{DetectionWindow(0.0, 0.2 * grid.t_max),
                            DetectionWindow(0.25 * grid.t_max, 0.6 * grid.t_max)};
        SwapReport rep = swap_error_report(bare, bare, windows);
        REQUIRE(rep.gated_error.has_value());
        CHECK(*rep.gated_error <= 1e-5);
        REQUIRE(rep.post_selection_single.has_value());
        CHECK(*rep.throughput ==
              doctest::Approx(*rep.post_selection_single * *rep.post_selection_single));
    }
}

TEST_CASE("gated overlap reaches 1 for random rate pairs") {
    for (double ga : {0.5, 1.0, 4.0}) {
        DecayRates rates(ga, 1.0);
        TimeGrid grid = TimeGrid::default_for(rates);
        SwapWindows windows{DetectionWindow(0.0, 0.15 * grid.t_max),
                            DetectionWindow(0.2 * grid.t_max, 0.5 * grid.t_max)};
        SwapReport rep = swap_error_report(rates, rates, windows);
        CHECK(*rep.gated_error <= 1e-5);
    }
}

TEST_CASE("mismatched sources are computed but labeled") {
    SwapReport rep = swap_error_report(DecayRates(2.0, 1.0), DecayRates(1.0, 1.0));
    CHECK_FALSE(rep.identical_sources);
    CHECK(rep.error_numeric > 0.0);
}

TEST_CASE("report JSON is emitted with all documented keys") {
    DecayRates rates(1.0, 1.0);
    SwapReport rep = swap_error_report(rates, rates);
    std::ostringstream os;
    write_report_json(os, rep);
    const std::string json = os.str();
    for (const char* key :
         {"gamma_a_1", "gamma_b_1", "identical_sources", "error_analytic_1",
          "overlap_numeric", "error_numeric", "gated_error", "throughput"})
        CHECK(json.find(std::string("\"") + key + "\"") != std::string::npos);
}
