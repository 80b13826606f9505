#include "afdm/dechirp.hpp"
#include "afdm/rng.hpp"

#include "doctest.h"

#include <cmath>

using namespace afdm;

namespace {

// N=128, k=2, generous guards; delays up to 4 samples, small Doppler.
DechirpPipeline default_pipeline(double max_delay = 4.0, double max_doppler = 0.25 / 144.0) {
    const auto cfg = ChirpConfig::from_ratio(128, 2, 0.0, 1.0, 16);
    const auto layout = GridLayout::embedded_pilot(128, 64, 26);
    DechirpDsp dsp;
    dsp.decimation = 4;
    return DechirpPipeline(cfg, layout, dsp, max_delay, max_doppler);
}

}  // namespace

TEST_CASE("dechirp: pilot SI collapses to DC and is fully blocked") {
    const auto pipe = default_pipeline();
    Rng rng(90);
    DechirpScenario sc;
    sc.m_symbols = 4;
    sc.si_amplitude = 100.0;
    sc.echo_gain = cplx{0.05, 0.02};
    sc.target_delay = 2.0;
    sc.target_doppler = 0.0;
    sc.snr_db = std::numeric_limits<double>::infinity();
    const DechirpResult r = pipe.run_scenario(sc, rng);
    CHECK(r.diag.si_residual_db <= -80.0);
}

TEST_CASE("dechirp: static target lands within half a beat bin") {
    const auto pipe = default_pipeline();
    Rng rng(91);
    DechirpScenario sc;
    sc.m_symbols = 1;
    sc.si_amplitude = 30.0;
    sc.echo_gain = cplx{0.1, -0.05};
    sc.target_delay = 2.5;  // fractional cell
    sc.target_doppler = 0.0;
    sc.snr_db = 20.0;
    const DechirpResult r = pipe.run_scenario(sc, rng);
    CHECK(std::abs(r.estimate.delay_s - 2.5) <= 0.5 * r.delay_bin_s);
}

TEST_CASE("dechirp: moving target recovers delay and Doppler over 32 symbols") {
    const auto pipe = default_pipeline();
    DechirpScenario sc;
    sc.m_symbols = 32;
    sc.si_amplitude = 30.0;
    sc.target_doppler = 0.3 / (32.0 * 144.0) * 8.0;  // well inside slow-time Nyquist
    sc.snr_db = 10.0;
    int hits = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::stream(92, 1, static_cast<std::uint64_t>(t));
        DechirpScenario trial = sc;
        trial.target_delay = rng.uniform(1.0, 4.0);
        trial.target_doppler = rng.uniform(-1.0, 1.0) * 0.4 / (32.0 * 144.0) * 16.0;
        trial.echo_gain = std::polar(0.1, rng.uniform(0.0, kTwoPi));
        const DechirpResult r = pipe.run_scenario(trial, rng);
        const bool delay_ok = std::abs(r.estimate.delay_s - trial.target_delay) <=
                              0.5 * r.delay_bin_s;
        const bool doppler_ok = std::abs(r.estimate.doppler_hz - trial.target_doppler) <=
                                0.5 * r.doppler_bin_hz;
        if (delay_ok && doppler_ok) ++hits;
    }
    CHECK(hits >= 36);  // >= 90%
}

TEST_CASE("dechirp: pipeline output on SI+echo+data equals echo alone within -40 dB") {
    const auto pipe = default_pipeline();
    Rng rng(93);
    DechirpScenario sc;
    sc.m_symbols = 8;
    sc.si_amplitude = 30.0;
    sc.echo_gain = cplx{0.1, 0.0};
    sc.target_delay = 3.0;
    sc.target_doppler = 1e-4;
    sc.snr_db = std::numeric_limits<double>::infinity();
    const DechirpResult r = pipe.run_scenario(sc, rng);
    CHECK(r.diag.leakage_db <= -40.0);
}

TEST_CASE("dechirp: configuration-time rejections") {
    const auto cfg = ChirpConfig::from_ratio(128, 2, 0.0, 1.0, 16);
    DechirpDsp dsp;
    dsp.decimation = 4;
    // Guards too narrow for the configured spreads.
    const auto narrow = GridLayout::embedded_pilot(128, 64, 6);
    CHECK_THROWS_AS(DechirpPipeline(cfg, narrow, dsp, 4.0, 0.002),
                    std::invalid_argument);
    // Decimation must divide N.
    DechirpDsp bad = dsp;
    bad.decimation = 5;
    const auto wide = GridLayout::embedded_pilot(128, 64, 26);
    CHECK_THROWS_AS(DechirpPipeline(cfg, wide, bad, 4.0, 0.002), std::invalid_argument);
    // OFDM mode has no chirp to dechirp.
    CHECK_THROWS_AS(DechirpPipeline(ChirpConfig::ofdm(128, 1.0, 16), wide, dsp, 4.0, 0.002),
                    std::invalid_argument);
    // Delay beyond the prefix.
    CHECK_THROWS_AS(DechirpPipeline(cfg, wide, dsp, 20.0, 0.002), std::invalid_argument);
}
