// dechirp.hpp - self-interference-free sensing by dechirping the pilot
//
// Multiplying the received symbol-rate samples by the conjugate of the
// transmitted pilot chirp turns the pilot self-interference into an exact
// DC level (removed by mean subtraction), target echoes into beat tones at
// nu - (k/N) * delay cycles/sample, and the data chirps into tones outside
// the guard band (removed by a low-pass filter). The filtered signal is
// decimated, so the fast-time processing runs far below the signal
// bandwidth. Fast-time FFT peaks give the beat frequency; the slow-time
// phase across symbols gives Doppler, which then corrects the beat-derived
// delay for range-Doppler coupling.
#pragma once

#include "afdm/config.hpp"
#include "afdm/grid.hpp"
#include "afdm/mf.hpp"
#include "afdm/rng.hpp"
#include "afdm/types.hpp"

#include <cstdint>
#include <string>

namespace afdm {

struct DechirpDsp {
    bool dc_blocker = true;
    double lowpass_cutoff = 0.0;  // cycles/sample at symbol rate; 0 = auto from guards
    int decimation = 4;
    int fir_taps = 0;  // 0 = auto (odd, below N)
};

struct DechirpDiagnostics {
    double si_residual_db = -300.0;    // pilot SI after DC blocking, pre-filter
    double leakage_db = -300.0;        // full-input vs echo-only pipeline output
};

struct DechirpResult {
    SensingEstimate estimate;
    DechirpDiagnostics diag;
    double delay_bin_s = 0.0;    // beat-frequency bin expressed as delay
    double doppler_bin_hz = 0.0; // slow-time bin
};

struct DechirpScenario {
    int m_symbols = 32;
    double si_amplitude = 30.0;        // linear gain of the direct leakage
    cplx echo_gain = cplx{1.0, 0.0};
    double target_delay = 2.5;         // symbol-rate samples, fractional allowed
    double target_doppler = 0.0;       // cycles/sample
    double snr_db = 10.0;              // echo power over noise power
    std::string constellation = "qpsk";
};

class DechirpPipeline {
public:
    // Rejects layouts whose guards cannot keep the post-dechirp pilot-echo
    // band and the data band disjoint for the configured spreads.
    DechirpPipeline(const ChirpConfig& cfg, const GridLayout& layout,
                    const DechirpDsp& dsp, double max_delay, double max_doppler);

    // Symbol-rate received frame (prefixed, m_symbols blocks) to an estimate.
    SensingEstimate process(const TimeFrame& rx) const;

    // Synthesis plus processing plus noiseless diagnostics.
    DechirpResult run_scenario(const DechirpScenario& sc, Rng& rng) const;

    double delay_bin_samples() const;      // 1/k samples
    double doppler_bin_cps(int m_symbols) const;
    const CVec& pilot_reference() const { return pilot_payload_; }

private:
    CVec dechirp_symbol(const CVec& payload) const;  // multiply, DC-block
    CVec filter_decimate(const CVec& z) const;

    ChirpConfig cfg_;
    GridLayout layout_;
    DechirpDsp dsp_;
    double max_delay_ = 0.0;
    double max_doppler_ = 0.0;
    CVec pilot_payload_;       // transmitted pilot chirp, one symbol, no prefix
    std::vector<double> fir_;  // low-pass taps
};

}  // namespace afdm
