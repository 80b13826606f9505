#include "afdm/dechirp.hpp"

#include "afdm/constellation.hpp"
#include "afdm/fft.hpp"
#include "afdm/pulse.hpp"
#include "afdm/transforms.hpp"
#include "afdm/waveform.hpp"

#include <cmath>
#include <stdexcept>

namespace afdm {

namespace {

// Contiguous isolation bins (guard or guard band) on each side of the pilot.
int min_guard_each_side(const GridLayout& layout) {
    const int n = layout.n();
    if (layout.pilot_index < 0)
        throw std::invalid_argument("dechirp: layout carries no pilot");
    auto isolated = [&](int idx) {
        const BinRole r = layout.roles[static_cast<std::size_t>(((idx % n) + n) % n)];
        return r == BinRole::guard || r == BinRole::guard_band;
    };
    int up = 0;
    while (up < n - 1 && isolated(layout.pilot_index + 1 + up)) ++up;
    int down = 0;
    while (down < n - 1 && isolated(layout.pilot_index - 1 - down)) ++down;
    return std::min(up, down);
}

double bessel_i0(double x) {
    double term = 1.0, sum = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= q / (k * k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

// Kaiser-windowed sinc. The data tones of the self-interference can sit
// ~50 dB above the echo, so the stopband has to be deep; beta = 12 buys
// roughly 120 dB.
std::vector<double> lowpass_taps(double cutoff_cps, int n_taps, double beta = 12.0) {
    std::vector<double> h(static_cast<std::size_t>(n_taps));
    const int mid = (n_taps - 1) / 2;
    const double i0b = bessel_i0(beta);
    double sum = 0.0;
    for (int i = 0; i < n_taps; ++i) {
        const double t = static_cast<double>(i - mid);
        const double x = 2.0 * cutoff_cps * t;
        double v = std::abs(x) < 1e-12 ? 1.0 : std::sin(kPi * x) / (kPi * x);
        v *= 2.0 * cutoff_cps;
        const double r = 2.0 * i / (n_taps - 1) - 1.0;
        v *= bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[static_cast<std::size_t>(i)] = v;
        sum += v;
    }
    for (auto& v : h) v /= sum;  // unit DC gain
    return h;
}

double parabolic_peak(double lo, double mid, double hi) {
    const double den = lo - 2.0 * mid + hi;
    if (den >= 0.0) return 0.0;
    double off = 0.5 * (lo - hi) / den;
    return std::clamp(off, -0.5, 0.5);
}

}  // namespace

DechirpPipeline::DechirpPipeline(const ChirpConfig& cfg, const GridLayout& layout,
                                 const DechirpDsp& dsp, double max_delay,
                                 double max_doppler)
    : cfg_(cfg), layout_(layout), dsp_(dsp), max_delay_(max_delay),
      max_doppler_(max_doppler) {
    cfg_.validate();
    layout_.validate();
    if (!cfg_.c1_exact || cfg_.c1_num < 1)
        throw std::invalid_argument("dechirp: needs c1 = k/(2N) with k >= 1");
    if (max_delay_ < 0.0 || max_delay_ > cfg_.cpp_len)
        throw std::invalid_argument("dechirp: max delay must fit inside the prefix");
    const int n = cfg_.n;
    if (dsp_.decimation < 1 || n % dsp_.decimation != 0)
        throw std::invalid_argument("dechirp: decimation must divide N");

    if (dsp_.fir_taps <= 0) dsp_.fir_taps = std::min(n - 1, 127);
    if (dsp_.fir_taps >= n || dsp_.fir_taps % 2 == 0)
        throw std::invalid_argument("dechirp: FIR length must be odd and below N");

    const double k = static_cast<double>(cfg_.c1_num);
    const double span_bins = k * max_delay_ + max_doppler_ * n;  // beat band, in 1/N units
    if (dsp_.lowpass_cutoff <= 0.0) dsp_.lowpass_cutoff = (span_bins + 1.0) / n;
    const double transition_bins = 8.0 / dsp_.fir_taps * n;  // Kaiser beta = 12
    const int guard = min_guard_each_side(layout_);
    // Data tones shifted toward DC by the echo spread must stay beyond the
    // filter transition band.
    const double nearest_data_bin = static_cast<double>(guard + 1) - span_bins;
    if (nearest_data_bin < dsp_.lowpass_cutoff * n + transition_bins)
        throw std::invalid_argument(
            "dechirp: guard band too narrow for the configured max delay/Doppler");
    if ((dsp_.lowpass_cutoff + transition_bins / (2.0 * n)) * dsp_.decimation > 0.5)
        throw std::invalid_argument("dechirp: decimation aliases the beat band");

    CVec pilot_grid(static_cast<std::size_t>(n), cplx{0.0, 0.0});
    pilot_grid[static_cast<std::size_t>(layout_.pilot_index)] =
        cplx{layout_.pilot_amplitude, 0.0};
    pilot_payload_ = idaft(pilot_grid, cfg_);
    fir_ = lowpass_taps(dsp_.lowpass_cutoff, dsp_.fir_taps);
}

double DechirpPipeline::delay_bin_samples() const {
    return static_cast<double>(cfg_.n) / static_cast<double>(cfg_.c1_num) / cfg_.n;  // 1/k
}

double DechirpPipeline::doppler_bin_cps(int m_symbols) const {
    return 1.0 / (static_cast<double>(m_symbols) * cfg_.symbol_len());
}

CVec DechirpPipeline::dechirp_symbol(const CVec& payload) const {
    CVec z(payload.size());
    for (std::size_t i = 0; i < payload.size(); ++i)
        z[i] = payload[i] * std::conj(pilot_payload_[i]);
    if (dsp_.dc_blocker) {
        cplx mean{0.0, 0.0};
        for (const auto& v : z) mean += v;
        mean /= static_cast<double>(z.size());
        for (auto& v : z) v -= mean;
    }
    return z;
}

CVec DechirpPipeline::filter_decimate(const CVec& z) const {
    const int n = static_cast<int>(z.size());
    // Cyclic FIR: every component of the dechirped symbol is (chirp-)periodic
    // over the payload, so circular filtering avoids edge transients.
    CVec taps(static_cast<std::size_t>(n), cplx{0.0, 0.0});
    const int mid = (static_cast<int>(fir_.size()) - 1) / 2;
    for (int i = 0; i < static_cast<int>(fir_.size()); ++i) {
        const int idx = ((i - mid) % n + n) % n;  // zero-phase placement
        taps[static_cast<std::size_t>(idx)] += fir_[static_cast<std::size_t>(i)];
    }
    const CVec zf = fft::fft(z);
    const CVec hf = fft::fft(taps);
    CVec prod(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        prod[static_cast<std::size_t>(i)] =
            zf[static_cast<std::size_t>(i)] * hf[static_cast<std::size_t>(i)];
    CVec filtered = fft::ifft(prod);
    const double scale = 1.0 / n;
    for (auto& v : filtered) v *= scale;
    CVec out(static_cast<std::size_t>(n / dsp_.decimation));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = filtered[i * static_cast<std::size_t>(dsp_.decimation)];
    return out;
}

SensingEstimate DechirpPipeline::process(const TimeFrame& rx) const {
    const int n = cfg_.n;
    const int sym_len = cfg_.symbol_len();
    const int m_symbols = static_cast<int>(rx.samples.size()) / sym_len;
    if (m_symbols < 1) throw std::invalid_argument("dechirp: frame shorter than one symbol");

    const int nd = n / dsp_.decimation;
    const int fast_fft = 4 * nd;  // zero-padded for parabolic refinement
    std::vector<CVec> fast_spectra(static_cast<std::size_t>(m_symbols));
    std::vector<double> mean_mag2(static_cast<std::size_t>(fast_fft), 0.0);
    for (int s = 0; s < m_symbols; ++s) {
        const CVec payload = remove_cpp(rx, cfg_, s);
        const CVec y = filter_decimate(dechirp_symbol(payload));
        CVec padded(static_cast<std::size_t>(fast_fft), cplx{0.0, 0.0});
        for (std::size_t i = 0; i < y.size(); ++i) padded[i] = y[i];
        fast_spectra[static_cast<std::size_t>(s)] = fft::fft(padded);
        for (int b = 0; b < fast_fft; ++b)
            mean_mag2[static_cast<std::size_t>(b)] +=
                std::norm(fast_spectra[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)]);
    }

    int peak_bin = 0;
    double peak_val = -1.0;
    for (int b = 0; b < fast_fft; ++b) {
        if (mean_mag2[static_cast<std::size_t>(b)] > peak_val) {
            peak_val = mean_mag2[static_cast<std::size_t>(b)];
            peak_bin = b;
        }
    }
    const double mag_lo = std::sqrt(mean_mag2[static_cast<std::size_t>((peak_bin - 1 + fast_fft) % fast_fft)]);
    const double mag_mid = std::sqrt(peak_val);
    const double mag_hi = std::sqrt(mean_mag2[static_cast<std::size_t>((peak_bin + 1) % fast_fft)]);
    const double frac = parabolic_peak(mag_lo, mag_mid, mag_hi);
    double beat_bins = static_cast<double>(peak_bin) + frac;  // of the padded FFT
    if (beat_bins > fast_fft / 2.0) beat_bins -= fast_fft;    // signed frequency
    // Padded bin spacing is 1/(4N) cycles per symbol-rate sample.
    const double beat_cps = beat_bins / (4.0 * n);

    // Slow time: complex peak-bin samples across symbols.
    const int slow_fft = 8 * std::max(1, m_symbols);
    CVec slow(static_cast<std::size_t>(slow_fft), cplx{0.0, 0.0});
    for (int s = 0; s < m_symbols; ++s)
        slow[static_cast<std::size_t>(s)] =
            fast_spectra[static_cast<std::size_t>(s)][static_cast<std::size_t>(peak_bin)];
    const CVec slow_spec = fft::fft(slow);
    int slow_bin = 0;
    double slow_val = -1.0;
    for (int b = 0; b < slow_fft; ++b) {
        if (std::abs(slow_spec[static_cast<std::size_t>(b)]) > slow_val) {
            slow_val = std::abs(slow_spec[static_cast<std::size_t>(b)]);
            slow_bin = b;
        }
    }
    const double s_lo = std::abs(slow_spec[static_cast<std::size_t>((slow_bin - 1 + slow_fft) % slow_fft)]);
    const double s_hi = std::abs(slow_spec[static_cast<std::size_t>((slow_bin + 1) % slow_fft)]);
    double slow_bins = static_cast<double>(slow_bin) + parabolic_peak(s_lo, slow_val, s_hi);
    if (slow_bins > slow_fft / 2.0) slow_bins -= slow_fft;
    // The echo advances as e^{+j 2 pi nu (N+L) i} across symbols, so the FFT
    // peak sits at +nu (N+L) cycles/symbol.
    const double nu_cps = slow_bins / static_cast<double>(slow_fft) / sym_len;

    const double k = static_cast<double>(cfg_.c1_num);
    const double delay_samples = (nu_cps - beat_cps) * n / k;

    SensingEstimate est;
    est.delay_s = delay_samples * cfg_.sample_interval;
    est.doppler_hz = nu_cps / cfg_.sample_interval;
    est.peak_magnitude = mag_mid;
    est.method = "dechirp";
    return est;
}

DechirpResult DechirpPipeline::run_scenario(const DechirpScenario& sc, Rng& rng) const {
    const Constellation constellation = Constellation::from_name(sc.constellation);
    const auto data_idx = layout_.indices(BinRole::data);
    const cplx pilot_value{layout_.pilot_amplitude, 0.0};

    std::vector<CVec> grids, pilot_grids;
    for (int s = 0; s < sc.m_symbols; ++s) {
        std::vector<std::uint8_t> bits(data_idx.size() *
                                       static_cast<std::size_t>(constellation.bits_per_symbol()));
        for (auto& b : bits) b = rng.bit() ? 1 : 0;
        const DaftGrid grid = build_grid(layout_, constellation.map_bits(bits), pilot_value);
        grids.push_back(grid.values);
        pilot_grids.push_back(build_grid(GridLayout::point_pilot(cfg_.n, layout_.pilot_index),
                                         {}, pilot_value)
                                  .values);
    }
    const TimeFrame tx = modulate_symbols(grids, cfg_);
    const TimeFrame tx_pilot = modulate_symbols(pilot_grids, cfg_);
    // Exact chirp-domain delay: each subcarrier is shifted within its own
    // chirp-periodic extension, the model the prefix is designed for.
    const TimeFrame echo =
        delayed_echo_frame(grids, cfg_, sc.target_delay, sc.target_doppler, sc.echo_gain);

    TimeFrame rx_clean = tx;
    for (std::size_t i = 0; i < rx_clean.samples.size(); ++i)
        rx_clean.samples[i] = sc.si_amplitude * tx.samples[i] + echo.samples[i];

    DechirpResult result;

    // Pilot-SI rejection by the DC blocker, no filtering involved.
    {
        double p_in = 0.0, p_res = 0.0;
        for (int s = 0; s < sc.m_symbols; ++s) {
            CVec payload = remove_cpp(tx_pilot, cfg_, s);
            for (auto& v : payload) v *= sc.si_amplitude;
            CVec raw(payload.size());
            for (std::size_t i = 0; i < payload.size(); ++i)
                raw[i] = payload[i] * std::conj(pilot_payload_[i]);
            p_in += energy(raw);
            cplx mean{0.0, 0.0};
            for (const auto& v : raw) mean += v;
            mean /= static_cast<double>(raw.size());
            for (const auto& v : raw) p_res += std::norm(v - mean);
        }
        result.diag.si_residual_db =
            p_res > 0.0 && p_in > 0.0 ? 10.0 * std::log10(p_res / p_in) : -300.0;
    }

    // Pipeline linearity: full noiseless input vs echo alone.
    {
        double num = 0.0, den = 0.0;
        for (int s = 0; s < sc.m_symbols; ++s) {
            const CVec full = filter_decimate(dechirp_symbol(remove_cpp(rx_clean, cfg_, s)));
            const CVec only = filter_decimate(dechirp_symbol(remove_cpp(echo, cfg_, s)));
            for (std::size_t i = 0; i < full.size(); ++i) {
                num += std::norm(full[i] - only[i]);
                den += std::norm(only[i]);
            }
        }
        result.diag.leakage_db =
            num > 0.0 && den > 0.0 ? 10.0 * std::log10(num / den) : -300.0;
    }

    TimeFrame rx = rx_clean;
    if (!std::isinf(sc.snr_db)) {
        const double echo_power = energy(echo.samples) / echo.samples.size();
        const double noise_var = echo_power / std::pow(10.0, sc.snr_db / 10.0);
        for (auto& v : rx.samples) v += rng.cgauss(noise_var);
    }
    result.estimate = process(rx);
    result.delay_bin_s = delay_bin_samples() * cfg_.sample_interval;
    result.doppler_bin_hz = doppler_bin_cps(sc.m_symbols) / cfg_.sample_interval;
    return result;
}

}  // namespace afdm
