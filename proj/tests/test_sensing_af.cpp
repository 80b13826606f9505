#include "afdm/ambiguity.hpp"
#include "afdm/constellation.hpp"
#include "afdm/mf.hpp"
#include "afdm/rng.hpp"
#include "afdm/waveform.hpp"

#include "doctest.h"

#include <cmath>

using namespace afdm;

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return v;
}

TimeFrame random_qpsk_frame(const ChirpConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const auto c = Constellation::make(ConstellationKind::qpsk);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(2 * cfg.n));
    for (auto& b : bits) b = rng.bit() ? 1 : 0;
    return modulate(c.map_bits(bits), cfg);
}

}  // namespace

TEST_CASE("ambiguity_function: A(0,0) equals frame energy, conjugate symmetry") {
    // Symbol-rate frame on integer delays: symmetry is exact index algebra.
    const auto cfg = ChirpConfig::from_ratio(32, 3, 0.2, 1.0, 4);
    const TimeFrame frame = random_qpsk_frame(cfg, 70);
    const auto delays = linspace(-6.0, 6.0, 13);
    const auto dopplers = linspace(-0.2, 0.2, 41);
    const AmbiguitySurface s = ambiguity_function(frame, delays, dopplers);
    const double e = energy(frame.samples);
    CHECK(std::abs(s.values(6, 20) - cplx{e, 0.0}) <= 1e-9 * e);
    for (int d = 0; d < 13; ++d)
        for (int j = 0; j < 41; ++j)
            CHECK(std::abs(std::abs(s.values(d, j)) - std::abs(s.values(12 - d, 40 - j))) <=
                  1e-9 * e);

    // Oversampled shaped frame: fractional delays interpolate without spectral
    // wrap, so the symmetry carries over.
    const RrcConfig rrc{0.25, 12, 8};
    const TimeFrame shaped = pulse_shape(frame, rrc);
    const auto frac_delays = linspace(-1.5, 1.5, 13);  // quarter-sample steps
    const auto frac_dopplers = linspace(-0.02, 0.02, 9);
    const AmbiguitySurface s2 = ambiguity_function(shaped, frac_delays, frac_dopplers);
    const double e2 = energy(shaped.samples);
    CHECK(std::abs(s2.values(6, 4) - cplx{e2, 0.0}) <= 1e-9 * e2);
    for (int d = 0; d < 13; ++d)
        for (int j = 0; j < 9; ++j)
            CHECK(std::abs(std::abs(s2.values(d, j)) - std::abs(s2.values(12 - d, 8 - j))) <=
                  1e-9 * e2);
}

TEST_CASE("ambiguity_function: rectangular tone has a triangular zero-Doppler cut") {
    TimeFrame tone;
    tone.samples.assign(64, cplx{1.0, 0.0});
    tone.sample_interval = 1.0;
    const auto delays = linspace(-16.0, 16.0, 33);  // integer steps
    const std::vector<double> dopplers = {0.0};
    const AmbiguitySurface s = ambiguity_function(tone, delays, dopplers);
    for (int i = 0; i < 33; ++i) {
        const double d = std::abs(delays[static_cast<std::size_t>(i)]);
        CHECK(std::abs(std::abs(s.values(i, 0)) - (64.0 - d)) < 1e-9 * 64.0);
    }
}

TEST_CASE("ambiguity_function: direct double-sum oracle on N=32") {
    const auto cfg = ChirpConfig::from_ratio(32, 5, 0.7, 1.0, 4);
    const TimeFrame frame = random_qpsk_frame(cfg, 71);
    const int len = static_cast<int>(frame.samples.size());
    std::vector<double> delays;
    for (int d = -8; d <= 8; ++d) delays.push_back(static_cast<double>(d));
    const auto dopplers = linspace(-0.2, 0.2, 17);
    const AmbiguitySurface s = ambiguity_function(frame, delays, dopplers);
    const double e = energy(frame.samples);
    // Independent oracle: plain indexing, no FFT shifts, no probe recurrences.
    for (std::size_t di = 0; di < delays.size(); ++di) {
        const int d = static_cast<int>(delays[di]);
        for (std::size_t ji = 0; ji < dopplers.size(); ++ji) {
            cplx acc{0.0, 0.0};
            for (int n = 0; n < len; ++n) {
                const int lagged = n - d;
                if (lagged < 0 || lagged >= len) continue;
                acc += frame.samples[static_cast<std::size_t>(n)] *
                       std::conj(frame.samples[static_cast<std::size_t>(lagged)]) *
                       std::exp(cplx{0.0, -kTwoPi * dopplers[ji] * n});
            }
            CHECK(std::abs(s.values(static_cast<int>(di), static_cast<int>(ji)) - acc) <=
                  1e-9 * e);
        }
    }
}

TEST_CASE("ambiguity_function: grid exceeding the frame support is rejected") {
    const auto cfg = ChirpConfig::from_ratio(16, 1, 0.0, 1.0, 2);
    const TimeFrame frame = random_qpsk_frame(cfg, 72);
    CHECK_THROWS_AS(ambiguity_function(frame, linspace(-40.0, 40.0, 11), {0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ambiguity_function(frame, {0.0}, linspace(-2.0, 2.0, 11)),
                    std::invalid_argument);
    CHECK_THROWS_AS(ambiguity_function(frame, {1.0, 1.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("unambiguity_parallelogram: exact unit area, sheared by c1") {
    const auto cfg9 = ChirpConfig::from_ratio(128, 9, 0.0);
    const auto cfg7 = ChirpConfig::from_ratio(128, 7, 0.0);
    const auto r9 = unambiguity_parallelogram(cfg9);
    const auto r7 = unambiguity_parallelogram(cfg7);
    CHECK(r9.area.num == 1);
    CHECK(r9.area.den == 1);
    CHECK(r7.area.num == 1);
    CHECK(r7.area.den == 1);
    CHECK(r9.g1_doppler.value() == doctest::Approx(9.0 / 128.0));
    CHECK(r7.g1_doppler.value() == doctest::Approx(7.0 / 128.0));
    CHECK(r9.g1_doppler.value() != r7.g1_doppler.value());

    // c1 = 0 degenerates to the unit rectangle.
    const auto r0 = unambiguity_parallelogram(ChirpConfig::ofdm(64));
    CHECK(r0.g1_doppler.num == 0);
    for (const auto& v : r0.vertices) {
        CHECK(std::abs(std::abs(v[0]) - 0.5) < 1e-15);
        CHECK(std::abs(std::abs(v[1]) - 0.5) < 1e-15);
    }

    CHECK_THROWS_AS(unambiguity_parallelogram(ChirpConfig::from_real(64, 0.013)),
                    std::invalid_argument);
}

TEST_CASE("point-pilot AF replicas sit on the predicted lattice (N=64, c1=5/2N)") {
    const int n = 64;
    const auto cfg = ChirpConfig::from_ratio(n, 5, 0.0, 1.0, 0);
    const auto grid = build_grid(GridLayout::point_pilot(n, 0), {}, cplx{1.0, 0.0});
    const TimeFrame frame = modulate(grid, cfg);  // L = 0, payload only

    std::vector<double> delays;
    for (int d = -20; d <= 20; ++d) delays.push_back(static_cast<double>(d));
    std::vector<double> dopplers;
    const double dstep = 1.0 / (4.0 * n);
    for (int j = -64; j <= 64; ++j) dopplers.push_back(j * dstep);
    const AmbiguitySurface s = ambiguity_function(frame, delays, dopplers);

    const auto region = unambiguity_parallelogram(cfg);
    const auto predicted = region.replica_peaks(20.0, 64.0 * dstep);
    REQUIRE(predicted.size() >= 4);  // origin plus replicas inside the window

    const auto peaks = find_peaks(s, 0.45);
    // Every strong measured peak must be within one grid cell of a lattice
    // point, and each predicted lattice point must be hit.
    int matched_predictions = 0;
    for (const auto& [pd, pv] : predicted) {
        bool hit = false;
        for (const auto& [ri, ci] : peaks) {
            const double dd = std::abs(delays[static_cast<std::size_t>(ri)] - pd);
            const double dv = std::abs(dopplers[static_cast<std::size_t>(ci)] - pv);
            if (dd <= 1.0 && dv <= dstep) hit = true;
        }
        if (hit) ++matched_predictions;
    }
    CHECK(matched_predictions == static_cast<int>(predicted.size()));
    for (const auto& [ri, ci] : peaks) {
        double best = 1e9;
        for (const auto& [pd, pv] : predicted) {
            best = std::min(best,
                            std::max(std::abs(delays[static_cast<std::size_t>(ri)] - pd),
                                     std::abs(dopplers[static_cast<std::size_t>(ci)] - pv) / dstep));
        }
        CHECK(best <= 1.0);
    }
}

TEST_CASE("point-pilot AF mainlobe is within two resolution cells wide") {
    // Oversampled RRC point pilot, N=128, c1=9/(2N): -3 dB widths along each
    // axis may not exceed two cells (delay cell dt, Doppler cell 1/(N dt)).
    const int n = 128;
    const auto cfg = ChirpConfig::from_ratio(n, 9, 0.0, 1.0, 16);
    const auto grid = build_grid(GridLayout::point_pilot(n, 0), {}, cplx{1.0, 0.0});
    const RrcConfig rrc{0.25, 24, 8};
    const TimeFrame shaped = pulse_shape(modulate(grid, cfg), rrc);

    const double delay_cell = 1.0;            // dt = 1 in normalized units
    const double doppler_cell = 1.0 / n;      // subcarrier spacing
    std::vector<double> delays, dopplers;
    for (int i = -16; i <= 16; ++i) delays.push_back(i * delay_cell / 8.0);
    for (int i = -16; i <= 16; ++i) dopplers.push_back(i * doppler_cell / 8.0);
    const AmbiguitySurface s = ambiguity_function(shaped, delays, dopplers);
    const double peak = std::abs(s.values(16, 16));
    CHECK(peak == doctest::Approx(s.frame_energy).epsilon(1e-6));

    auto width_cells = [&](bool along_delay, double cell) {
        int lo = 16, hi = 16;
        for (int i = 16; i >= 0; --i) {
            const double v = std::abs(along_delay ? s.values(i, 16) : s.values(16, i));
            if (v < peak / std::sqrt(2.0)) break;
            lo = i;
        }
        for (int i = 16; i <= 32; ++i) {
            const double v = std::abs(along_delay ? s.values(i, 16) : s.values(16, i));
            if (v < peak / std::sqrt(2.0)) break;
            hi = i;
        }
        return (hi - lo) * (cell / 8.0) / cell;
    };
    CHECK(width_cells(true, delay_cell) <= 2.0);
    CHECK(width_cells(false, doppler_cell) <= 2.0);
}

TEST_CASE("expected_squared_af: zero-lag cell matches the mean energy squared") {
    ExpectedAfConfig cfg;
    cfg.cfg = ChirpConfig::from_ratio(32, 4, 0.0, 1.0, 4);
    cfg.layout = GridLayout::all_data(32);
    cfg.constellation = "16qam";
    cfg.rrc = RrcConfig{0.25, 12, 4};
    cfg.trials = 60;
    cfg.seed = 5;
    cfg.delay_s = {-1.0, 0.0, 1.0};
    cfg.doppler_hz = {-0.01, 0.0, 0.01};
    const AmbiguitySurface s = expected_squared_af(cfg);
    CHECK(s.magnitude_squared);
    const double zero_cell = s.values(1, 1).real();
    const double mean_e = s.frame_energy;
    // |A(0,0)|^2 == (frame energy)^2 per draw; compare against the squared
    // mean energy within Monte Carlo spread.
    CHECK(std::abs(zero_cell - mean_e * mean_e) < 0.05 * mean_e * mean_e);
    CHECK_THROWS_AS([&] {
        ExpectedAfConfig bad = cfg;
        bad.trials = 10;
        return expected_squared_af(bad);
    }(), std::invalid_argument);
}

TEST_CASE("expected_squared_af: identical result for 1 and 2 threads") {
    ExpectedAfConfig cfg;
    cfg.cfg = ChirpConfig::from_ratio(16, 2, 0.0, 1.0, 2);
    cfg.layout = GridLayout::all_data(16);
    cfg.constellation = "qpsk";
    cfg.rrc = RrcConfig{0.25, 8, 4};
    cfg.trials = 50;
    cfg.seed = 9;
    cfg.delay_s = linspace(-2.0, 2.0, 9);
    cfg.doppler_hz = linspace(-0.05, 0.05, 9);
    cfg.threads = 1;
    const AmbiguitySurface a = expected_squared_af(cfg);
    cfg.threads = 2;
    const AmbiguitySurface b = expected_squared_af(cfg);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}
