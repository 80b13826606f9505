#include "afdm/channel.hpp"
#include "afdm/constellation.hpp"
#include "afdm/crb.hpp"
#include "afdm/fft.hpp"
#include "afdm/mf.hpp"
#include "afdm/pulse.hpp"
#include "afdm/rng.hpp"
#include "afdm/waveform.hpp"

#include "doctest.h"

#include <cmath>

using namespace afdm;

namespace {

TimeFrame random_frame(const ChirpConfig& cfg, std::uint64_t seed, int n_symbols = 1) {
    Rng rng(seed);
    const auto c = Constellation::make(ConstellationKind::qpsk);
    std::vector<CVec> grids;
    for (int s = 0; s < n_symbols; ++s) {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(2 * cfg.n));
        for (auto& b : bits) b = rng.bit() ? 1 : 0;
        grids.push_back(c.map_bits(bits));
    }
    return modulate_symbols(grids, cfg);
}

std::vector<double> steps(double lo, double hi, double step) {
    std::vector<double> v;
    for (double x = lo; x <= hi + 1e-12; x += step) v.push_back(x);
    return v;
}

}  // namespace

TEST_CASE("matched_filter: noiseless single target at integer delay is recovered exactly") {
    const auto cfg = ChirpConfig::from_ratio(64, 3, 0.1, 1.0, 8);
    const TimeFrame tx = random_frame(cfg, 80, 2);
    LtvChannel ch;
    ch.paths.push_back({cplx{0.8, -0.2}, 3.0, 0.0});
    const TimeFrame rx = apply_channel(tx, ch, ChannelMode::comm);
    const auto delays = steps(0.0, 8.0, 1.0);
    const auto dopplers = steps(-0.02, 0.02, 0.005);
    const auto result = matched_filter(rx, tx, cfg, MfDomain::time, delays, dopplers);
    CHECK(result.estimate.delay_s == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(std::abs(result.estimate.doppler_hz) < 1e-9);
}

TEST_CASE("matched_filter: time and DAFT domains agree to 1e-8 on integer shifts") {
    Rng rng(81);
    for (int rep = 0; rep < 10; ++rep) {
        const auto cfg = ChirpConfig::from_ratio(32, 1 + rep % 4, 0.3, 1.0, 6);
        const TimeFrame tx = random_frame(cfg, 82 + static_cast<std::uint64_t>(rep), 2);
        LtvChannel ch;
        ch.paths.push_back({rng.cgauss(), static_cast<double>(rng.uniform_int(0, 5)),
                            rng.uniform_int(-2, 2) / 32.0});
        TimeFrame rx = apply_channel(tx, ch, ChannelMode::comm);
        rx = add_awgn(rx, 15.0, rng);
        const auto delays = steps(0.0, 6.0, 1.0);
        const auto dopplers = steps(-3.0 / 32.0, 3.0 / 32.0, 1.0 / 32.0);
        const auto t = matched_filter(rx, tx, cfg, MfDomain::time, delays, dopplers);
        const auto d = matched_filter(rx, tx, cfg, MfDomain::daft, delays, dopplers);
        const double scale = t.surface.values.cwiseAbs().maxCoeff();
        CHECK((t.surface.values - d.surface.values).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    }
}

TEST_CASE("matched_filter: two equal-power targets two cells apart are resolved") {
    const auto cfg = ChirpConfig::from_ratio(64, 3, 0.0, 1.0, 8);
    const TimeFrame tx = random_frame(cfg, 83, 2);
    LtvChannel ch;
    ch.paths.push_back({cplx{0.7, 0.0}, 2.0, 0.0});
    ch.paths.push_back({cplx{0.0, 0.7}, 4.0, 0.0});
    Rng rng(84);
    TimeFrame rx = apply_channel(tx, ch, ChannelMode::comm);
    rx = add_awgn(rx, 20.0, rng);
    const auto delays = steps(0.0, 7.0, 1.0);
    const std::vector<double> dopplers = {0.0};
    const auto result = matched_filter(rx, tx, cfg, MfDomain::time, delays, dopplers);
    const auto peaks = find_peaks(result.surface, 0.5);
    bool saw_2 = false, saw_4 = false;
    for (const auto& [ri, ci] : peaks) {
        if (delays[static_cast<std::size_t>(ri)] == 2.0) saw_2 = true;
        if (delays[static_cast<std::size_t>(ri)] == 4.0) saw_4 = true;
    }
    CHECK(saw_2);
    CHECK(saw_4);
}

TEST_CASE("matched_filter: replica-reaching search grid raises the warning flag") {
    const auto cfg = ChirpConfig::from_ratio(32, 4, 0.0, 1.0, 8);  // replicas every 8 delay cells
    const TimeFrame tx = random_frame(cfg, 85);
    LtvChannel ch;
    ch.paths.push_back({cplx{1.0, 0.0}, 1.0, 0.0});
    const TimeFrame rx = apply_channel(tx, ch, ChannelMode::comm);
    const auto narrow = matched_filter(rx, tx, cfg, MfDomain::time, steps(0.0, 3.0, 1.0),
                                       {-0.01, 0.0, 0.01});
    CHECK_FALSE(narrow.estimate.outside_unambiguous);
    const auto wide = matched_filter(rx, tx, cfg, MfDomain::time, steps(0.0, 9.0, 1.0),
                                     steps(-0.2, 0.2, 0.05));
    CHECK(wide.estimate.outside_unambiguous);
}

TEST_CASE("fim_for_signal: spectral derivatives match central finite differences") {
    const auto cfg = ChirpConfig::from_ratio(32, 3, 0.2, 1e-6, 4);
    const RrcConfig rrc{0.25, 12, 8};
    const TimeFrame shaped = pulse_shape(random_frame(cfg, 86), rrc);
    const double ts = shaped.sample_interval;
    CrbTarget target;
    target.delay_s = 4.3 * ts;
    target.doppler_hz = 3000.0;
    target.amplitude = cplx{0.8, 0.3};
    const CrbSample s = fim_for_signal(shaped.samples, ts, target, 10.0);

    // Finite-difference J_tautau: rebuild mu at tau +- h with the library's
    // delay operator but no spectral differentiation.
    const double h = ts / 100.0;
    auto build_mu = [&](double tau) {
        const int raw = static_cast<int>(shaped.samples.size());
        const int pad = static_cast<int>(std::ceil(std::abs(tau / ts))) + 16;
        CVec buf(static_cast<std::size_t>(raw + 2 * pad), cplx{0.0, 0.0});
        for (int i = 0; i < raw; ++i) buf[static_cast<std::size_t>(pad + i)] = shaped.samples[static_cast<std::size_t>(i)];
        CVec delayed = fractional_delay_circular(buf, tau / ts);
        for (std::size_t i = 0; i < delayed.size(); ++i)
            delayed[i] *= target.amplitude *
                          std::polar(1.0, kTwoPi * target.doppler_hz * static_cast<double>(i) * ts);
        return delayed;
    };
    const CVec mu_p1 = build_mu(target.delay_s + h);
    const CVec mu_m1 = build_mu(target.delay_s - h);
    const CVec mu_p2 = build_mu(target.delay_s + 2.0 * h);
    const CVec mu_m2 = build_mu(target.delay_s - 2.0 * h);
    REQUIRE(mu_p1.size() == mu_m1.size());
    double fd_norm2 = 0.0;
    for (std::size_t i = 0; i < mu_p1.size(); ++i) {
        // Fourth-order central difference keeps the truncation error well
        // below the comparison tolerance at the band edge.
        const cplx d = (-mu_p2[i] + 8.0 * mu_p1[i] - 8.0 * mu_m1[i] + mu_m2[i]) / (12.0 * h);
        fd_norm2 += std::norm(d);
    }
    const double mean_power = energy(build_mu(target.delay_s)) / shaped.samples.size();
    const double sigma2 = mean_power / 10.0;
    const double fd_j = 2.0 / sigma2 * fd_norm2;
    CHECK(std::abs(fd_j - s.fim(0, 0)) <= 1e-6 * std::abs(s.fim(0, 0)));
}

TEST_CASE("fim_for_signal: single RRC pulse matches the closed-form delay CRB") {
    const RrcConfig rrc{0.25, 24, 8};
    const auto taps = rrc_taps(rrc);
    CVec pulse(taps.size());
    for (std::size_t i = 0; i < taps.size(); ++i) pulse[i] = cplx{taps[i], 0.0};
    const double ts = 1e-6 / 8.0;
    CrbTarget target;
    target.delay_s = 2.4 * ts;
    target.doppler_hz = 0.0;
    target.amplitude = cplx{0.8, 0.3};
    const double snr_db = 12.0;
    const CrbSample s = fim_for_signal(pulse, ts, target, snr_db);

    // Closed form for a real symmetric pulse with unknown complex amplitude
    // and Doppler: CRB_tau = sigma^2 / (2 |A|^2 ||g'||^2).
    const int w = 4096;
    CVec padded(w, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < pulse.size(); ++i) padded[i] = pulse[i];
    const CVec spec = fft::fft(padded);
    double d_norm2 = 0.0;
    for (int k = 0; k < w; ++k) {
        const double f = ((k <= w / 2) ? k : k - w) / (w * ts);
        d_norm2 += std::norm(spec[static_cast<std::size_t>(k)]) * kTwoPi * kTwoPi * f * f;
    }
    d_norm2 /= w;  // Parseval back to a time-domain sum
    const double mean_power =
        std::norm(target.amplitude) * energy(pulse) / static_cast<double>(pulse.size());
    const double sigma2 = mean_power / std::pow(10.0, snr_db / 10.0);
    const double closed_form = sigma2 / (2.0 * std::norm(target.amplitude) * d_norm2);
    CHECK(std::abs(s.crb_delay_s2 - closed_form) <= 0.01 * closed_form);
}

TEST_CASE("fim_crb_for_grid: FIM symmetric positive semidefinite") {
    CrbConfig cfg;
    cfg.cfg = ChirpConfig::from_ratio(64, 5, 0.15, 0.78e-6, 8);
    cfg.layout = GridLayout::all_data(64);
    cfg.rrc = RrcConfig{0.25, 12, 8};
    cfg.target.delay_s = 3.3356e-6;
    cfg.target.doppler_hz = 33356.0;
    Rng rng(87);
    const auto c = Constellation::make(ConstellationKind::qpsk);
    std::vector<std::uint8_t> bits(128);
    for (auto& b : bits) b = rng.bit() ? 1 : 0;
    const CrbSample s = fim_crb_for_grid(cfg, c.map_bits(bits));
    CHECK((s.fim - s.fim.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * s.fim.norm());
    const Eigen::Vector4d eig = s.fim.selfadjointView<Eigen::Lower>().eigenvalues();
    for (int i = 0; i < 4; ++i) CHECK(eig(i) >= -1e-9 * s.fim.norm());
    CHECK(s.crb_delay_s2 > 0.0);
    CHECK(s.crb_doppler_hz2 > 0.0);
}

TEST_CASE("fim_crb_for_grid: doubling SNR halves both CRBs exactly") {
    CrbConfig cfg;
    cfg.cfg = ChirpConfig::from_ratio(32, 3, 0.1, 0.78e-6, 4);
    cfg.layout = GridLayout::all_data(32);
    cfg.rrc = RrcConfig{0.25, 12, 8};
    cfg.target.delay_s = 2.5e-6;
    cfg.target.doppler_hz = 20000.0;
    cfg.snr_db = 10.0;
    Rng rng(88);
    const auto c = Constellation::make(ConstellationKind::qpsk);
    std::vector<std::uint8_t> bits(64);
    for (auto& b : bits) b = rng.bit() ? 1 : 0;
    const CVec grid = c.map_bits(bits);
    const CrbSample low = fim_crb_for_grid(cfg, grid);
    cfg.snr_db = 10.0 + 10.0 * std::log10(2.0);
    const CrbSample high = fim_crb_for_grid(cfg, grid);
    CHECK(std::abs(high.crb_delay_s2 - 0.5 * low.crb_delay_s2) <= 1e-9 * low.crb_delay_s2);
    CHECK(std::abs(high.crb_doppler_hz2 - 0.5 * low.crb_doppler_hz2) <=
          1e-9 * low.crb_doppler_hz2);
}

TEST_CASE("fim_for_signal: degenerate signal rejected with a diagnostic") {
    CVec zeros(64, cplx{0.0, 0.0});
    CrbTarget target;
    CHECK_THROWS_AS(fim_for_signal(zeros, 1e-6, target, 10.0), std::invalid_argument);
}

TEST_CASE("fim_crb: Monte Carlo report carries conversions and echo") {
    CrbConfig cfg;
    cfg.cfg = ChirpConfig::from_ratio(32, 2, 0.0, 0.78e-6, 4);
    cfg.layout = GridLayout::all_data(32);
    cfg.rrc = RrcConfig{0.25, 12, 8};
    cfg.constellation = "qpsk";
    cfg.target.delay_s = 3.3356e-6;
    cfg.target.doppler_hz = 33356.0;
    cfg.trials = 16;
    cfg.threads = 2;
    const CrbReport report = fim_crb(cfg);
    CHECK(report.crb_distance_m2 ==
          doctest::Approx(kSpeedOfLight * kSpeedOfLight * report.crb_delay_s2));
    const double scale = kSpeedOfLight / (2.0 * cfg.carrier_hz);
    CHECK(report.crb_velocity_ms2 == doctest::Approx(scale * scale * report.crb_doppler_hz2));
    CHECK(report.config_echo.count("distance_convention") == 1);
    CHECK(report.config_echo.at("constellation") == "qpsk");
}
