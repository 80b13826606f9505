// ber.hpp - uncoded BER Monte Carlo over random delay-Doppler channels
//
// Each trial draws a fresh channel, runs the full modulate / channel / AWGN /
// demodulate chain and detects jointly with the per-trial effective matrix.
// Trials are seeded by absolute trial index, executed in fixed-size blocks,
// and accumulated in block order, so a curve is byte-identical for any
// thread count.
#pragma once

#include "afdm/channel.hpp"
#include "afdm/config.hpp"
#include "afdm/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace afdm {

enum class WaveformKind { ofdm, ocdm, afdm };

const char* waveform_name(WaveformKind kind);

struct BerPoint {
    double snr_db = 0.0;
    long long bit_errors = 0;
    long long bits = 0;
    double ber = 0.0;
    double ci95_half = 0.0;  // 95% confidence half-width on ber
};

struct BerCurve {
    std::string label;
    std::vector<BerPoint> points;
    std::map<std::string, std::string> config_echo;
};

struct BerConfig {
    int n = 12;
    int cpp_len = 2;
    WaveformKind waveform = WaveformKind::afdm;
    long afdm_k = -1;  // c1 = k/(2N); -1 selects the smallest separating k
    double c2 = 0.0;   // AFDM only; OFDM/OCDM fix their own parameters
    std::string constellation = "bpsk";

    int n_paths = 4;
    double max_delay = 2.0;            // samples
    double max_doppler = 1.0 / 12.0;   // cycles/sample
    bool integer_doppler = true;

    std::vector<double> snr_db;
    long long target_errors = 200;
    long long max_trials = 4000000;

    enum class Detector { ml, mmse } detector = Detector::ml;
    std::uint64_t seed = 1;
    int threads = 1;
};

BerCurve run_ber(const BerConfig& cfg);

// Negated least-squares slope of log10(BER) against log10(SNR_linear) over
// points inside [snr_lo_db, snr_hi_db] that carry at least min_errors errors.
double estimate_diversity_order(const BerCurve& curve, double snr_lo_db,
                                double snr_hi_db, long long min_errors = 200);

}  // namespace afdm
