// config.hpp - chirp waveform parameters and time-domain frames
#pragma once

#include "afdm/types.hpp"

#include <cstdint>
#include <stdexcept>

namespace afdm {

/**
 * AFDM waveform parameters.
 *
 * c1 sets the common chirp slope of all subcarriers, c2 their initial
 * phase. c1 is usually an integer multiple k/(2N); when constructed that
 * way the integer k is kept so that prefix phases and replica-lattice
 * predictions stay exact. c1 = c2 = 0 degenerates every transform in this
 * library to the plain DFT/IDFT (OFDM); c1 = c2 = 1/(2N) gives OCDM.
 */
struct ChirpConfig {
    int n = 0;                     // subcarriers N (>= 2)
    double c1 = 0.0;               // chirp slope, dimensionless
    double c2 = 0.0;               // chirp phase, dimensionless
    double sample_interval = 1.0;  // symbol-rate sample interval, seconds
    int cpp_len = 0;               // chirp-periodic prefix length L (< N)
    bool c1_exact = false;         // c1 == c1_num / (2N) exactly
    long c1_num = 0;               // k, valid when c1_exact

    static ChirpConfig from_ratio(int n, long k, double c2 = 0.0,
                                  double sample_interval = 1.0, int cpp_len = 0) {
        ChirpConfig cfg;
        cfg.n = n;
        cfg.c1 = static_cast<double>(k) / (2.0 * n);
        cfg.c2 = c2;
        cfg.sample_interval = sample_interval;
        cfg.cpp_len = cpp_len;
        cfg.c1_exact = true;
        cfg.c1_num = k;
        cfg.validate();
        return cfg;
    }

    static ChirpConfig from_real(int n, double c1, double c2 = 0.0,
                                 double sample_interval = 1.0, int cpp_len = 0) {
        ChirpConfig cfg;
        cfg.n = n;
        cfg.c1 = c1;
        cfg.c2 = c2;
        cfg.sample_interval = sample_interval;
        cfg.cpp_len = cpp_len;
        cfg.validate();
        return cfg;
    }

    static ChirpConfig ofdm(int n, double sample_interval = 1.0, int cpp_len = 0) {
        return from_ratio(n, 0, 0.0, sample_interval, cpp_len);
    }

    static ChirpConfig ocdm(int n, double sample_interval = 1.0, int cpp_len = 0) {
        return from_ratio(n, 1, 1.0 / (2.0 * n), sample_interval, cpp_len);
    }

    void validate() const {
        if (n < 2) throw std::invalid_argument("ChirpConfig: N must be >= 2");
        if (cpp_len < 0 || cpp_len >= n)
            throw std::invalid_argument("ChirpConfig: cpp_len must satisfy 0 <= L < N");
    }

    // Samples per symbol including the prefix.
    int symbol_len() const { return n + cpp_len; }

    // Subcarrier spacing 1/(N dt), Hz.
    double subcarrier_spacing_hz() const { return 1.0 / (n * sample_interval); }
};

/**
 * A block of baseband samples. osf == 1 means symbol-rate sampling;
 * pulse-shaped frames carry osf > 1 and a filter tail beyond the nominal
 * osf * (N + L) * n_symbols length.
 */
struct TimeFrame {
    CVec samples;
    int osf = 1;
    bool has_cpp = false;
    double sample_interval = 1.0;  // seconds between consecutive samples
    int n_symbols = 1;
    int filter_tail = 0;  // extra samples from pulse-shaping convolution

    double duration() const { return sample_interval * static_cast<double>(samples.size()); }
};

}  // namespace afdm
