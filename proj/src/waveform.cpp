#include "afdm/waveform.hpp"

#include "afdm/fft.hpp"
#include "afdm/transforms.hpp"

#include <cmath>
#include <stdexcept>

namespace afdm {

TimeFrame modulate(const CVec& grid, const ChirpConfig& cfg) {
    TimeFrame frame;
    frame.samples = add_cpp(idaft(grid, cfg), cfg);
    frame.osf = 1;
    frame.has_cpp = true;
    frame.sample_interval = cfg.sample_interval;
    frame.n_symbols = 1;
    return frame;
}

TimeFrame modulate(const DaftGrid& grid, const ChirpConfig& cfg) {
    return modulate(grid.values, cfg);
}

TimeFrame modulate_symbols(const std::vector<CVec>& grids, const ChirpConfig& cfg) {
    if (grids.empty()) throw std::invalid_argument("modulate_symbols: no symbols");
    TimeFrame frame;
    frame.osf = 1;
    frame.has_cpp = true;
    frame.sample_interval = cfg.sample_interval;
    frame.n_symbols = static_cast<int>(grids.size());
    frame.samples.reserve(grids.size() * static_cast<std::size_t>(cfg.symbol_len()));
    for (const auto& g : grids) {
        const CVec block = add_cpp(idaft(g, cfg), cfg);
        frame.samples.insert(frame.samples.end(), block.begin(), block.end());
    }
    return frame;
}

CVec demodulate(const TimeFrame& frame, const ChirpConfig& cfg, int symbol_index) {
    return daft(remove_cpp(frame, cfg, symbol_index), cfg);
}

TimeFrame delayed_echo_frame(const std::vector<CVec>& grids, const ChirpConfig& cfg,
                             double delay_samples, double doppler_cps, cplx gain) {
    if (grids.empty()) throw std::invalid_argument("delayed_echo_frame: no symbols");
    if (delay_samples < 0.0 || delay_samples > cfg.cpp_len)
        throw std::invalid_argument(
            "delayed_echo_frame: delay must lie within the chirp-periodic prefix");
    const int n = cfg.n;
    const int l = cfg.cpp_len;
    TimeFrame frame;
    frame.osf = 1;
    frame.has_cpp = true;
    frame.sample_interval = cfg.sample_interval;
    frame.n_symbols = static_cast<int>(grids.size());
    frame.samples.reserve(grids.size() * static_cast<std::size_t>(n + l));
    std::size_t global = 0;
    for (const auto& grid : grids) {
        if (static_cast<int>(grid.size()) != n)
            throw std::invalid_argument("delayed_echo_frame: grid length mismatch");
        // sum_m x[m] e^{j2pi(c2 m^2 + (t-d) m/N)} evaluated on the integer
        // grid via a phase ramp folded into the spectrum.
        CVec pre(static_cast<std::size_t>(n));
        for (int m = 0; m < n; ++m) {
            const double cycles = chirp_cycles(cfg.c2, m) -
                                  std::fmod(delay_samples * m / n, 1.0);
            pre[static_cast<std::size_t>(m)] =
                grid[static_cast<std::size_t>(m)] * std::polar(1.0, kTwoPi * cycles);
        }
        const CVec core = fft::ifft_unitary(pre);
        for (int idx = -l; idx < n; ++idx) {
            const double t = static_cast<double>(idx) - delay_samples;
            const double chirp = std::fmod(cfg.c1 * t * t, 1.0);
            const int bin = ((idx % n) + n) % n;
            const cplx doppler =
                std::polar(1.0, kTwoPi * doppler_cps * static_cast<double>(global));
            frame.samples.push_back(gain * doppler * std::polar(1.0, kTwoPi * chirp) *
                                    core[static_cast<std::size_t>(bin)]);
            ++global;
        }
    }
    return frame;
}

TimeFrame subcarrier_waveform(int m, const ChirpConfig& cfg, int osf, const RrcConfig* rrc) {
    if (m < 0 || m >= cfg.n)
        throw std::invalid_argument("subcarrier_waveform: bin index out of range");
    if (osf < 1) throw std::invalid_argument("subcarrier_waveform: osf must be >= 1");
    CVec grid(static_cast<std::size_t>(cfg.n), cplx{0.0, 0.0});
    grid[static_cast<std::size_t>(m)] = cplx{1.0, 0.0};
    TimeFrame frame = modulate(grid, cfg);
    if (osf == 1) return frame;
    RrcConfig shaping = rrc ? *rrc : RrcConfig{};
    shaping.osf = osf;
    return pulse_shape(frame, shaping);
}

}  // namespace afdm
