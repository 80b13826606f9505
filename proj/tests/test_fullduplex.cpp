#include "afdm/fullduplex.hpp"

#include "doctest.h"

#include <cmath>

using namespace afdm;

namespace {

FdScenario default_scenario() {
    FdScenario sc;
    sc.cfg = ChirpConfig::from_ratio(64, 3, 0.0, 1.0, 4);
    sc.pilot_a = 10;
    sc.pilot_b = 42;
    sc.guard_each_side = 8;
    sc.guard_band_half = 8;
    sc.max_delay = 1;
    sc.max_alpha = 1;
    sc.snr_db = 15.0;
    sc.trials = 50;
    sc.seed = 11;
    sc.threads = 2;
    return sc;
}

}  // namespace

TEST_CASE("fullduplex: scenario invariant violations rejected at construction") {
    FdScenario sc = default_scenario();
    sc.pilot_b = 20;  // pilot windows collide
    CHECK_THROWS_AS(simulate_fullduplex(sc), std::invalid_argument);
    sc = default_scenario();
    sc.guard_each_side = 7;  // narrower than twice the shift span (2*(3*1+1))
    CHECK_THROWS_AS(simulate_fullduplex(sc), std::invalid_argument);
    sc = default_scenario();
    sc.guard_band_half = 5;  // cannot isolate the remote pilot window
    CHECK_THROWS_AS(simulate_fullduplex(sc), std::invalid_argument);
    sc = default_scenario();
    sc.max_delay = 6;  // beyond the prefix
    CHECK_THROWS_AS(simulate_fullduplex(sc), std::invalid_argument);
}

TEST_CASE("fullduplex: silent remote user flags BER undefined, sensing exact") {
    FdScenario sc = default_scenario();
    sc.ba_gain = 0.0;
    sc.snr_db = std::numeric_limits<double>::infinity();
    sc.trials = 20;
    const FdReport r = simulate_fullduplex(sc);
    CHECK_FALSE(r.ber_defined);
    CHECK(r.sensing_delay_mse <= 0.01);    // integer-cell search, exact hits
    CHECK(r.sensing_doppler_mse <= 0.01);
}

TEST_CASE("fullduplex: zero echo reproduces the half-duplex baseline exactly") {
    FdScenario sc = default_scenario();
    sc.aa_gain = 0.0;
    sc.trials = 40;
    const FdReport r = simulate_fullduplex(sc);
    CHECK(r.errors_remote == r.errors_halfduplex);
    for (const auto& row : r.trial_rows) CHECK(row.errors_fd == row.errors_hd);
}

TEST_CASE("fullduplex: genie-aided subtraction equals half-duplex on paired seeds") {
    FdScenario sc = default_scenario();
    sc.genie_aa = true;
    sc.trials = 60;
    const FdReport r = simulate_fullduplex(sc);
    CHECK(r.errors_remote == r.errors_halfduplex);
    CHECK(r.mean_residual_db <= -80.0);
}

TEST_CASE("fullduplex: estimated subtraction keeps residual low and BER near baseline") {
    FdScenario sc = default_scenario();
    sc.trials = 100;
    const FdReport r = simulate_fullduplex(sc);
    CHECK(r.mean_residual_db <= -25.0);
    CHECK(r.errors_halfduplex > 0);  // the comparison is meaningful
    CHECK(static_cast<double>(r.errors_remote) <=
          2.0 * static_cast<double>(r.errors_halfduplex));
}

TEST_CASE("fullduplex: swapped user roles behave statistically alike") {
    FdScenario ab = default_scenario();
    ab.trials = 120;
    FdScenario ba = ab;
    std::swap(ba.pilot_a, ba.pilot_b);
    ba.seed += 1;
    const FdReport r1 = simulate_fullduplex(ab);
    const FdReport r2 = simulate_fullduplex(ba);
    REQUIRE(r1.bits == r2.bits);
    const double p1 = r1.ber_remote, p2 = r2.ber_remote;
    const double pooled = (p1 + p2) / 2.0;
    const double sigma = std::sqrt(2.0 * pooled * (1.0 - pooled) / r1.bits);
    CHECK(std::abs(p1 - p2) <= 5.0 * sigma + 1e-9);
}
