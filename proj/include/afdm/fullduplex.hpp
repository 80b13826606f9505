// fullduplex.hpp - two-user DAFT-domain full-duplex sensing and comms
//
// Both users transmit simultaneously on the band. Each grid embeds its own
// pilot with guards and zeroes a guard band around the other user's pilot
// window, so at user A's receiver the local echo pilot and the remote pilot
// remain separable after the DAFT. A's echo is estimated from its pilot
// window, refined by full-frame least squares once the remote signal has
// been reconstructed and removed, then subtracted; the remote link is
// estimated from B's pilot window and detected with MMSE.
#pragma once

#include "afdm/config.hpp"
#include "afdm/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace afdm {

struct FdScenario {
    ChirpConfig cfg;  // shared waveform, c1 = k/(2N) exact
    int pilot_a = 10;
    int pilot_b = 42;
    int guard_each_side = 8;   // own-pilot isolation, >= 2x shift span
    int guard_band_half = 8;   // zeroed window around the other user's pilot
    double pilot_amplitude = 2.0;  // boosted pilots aid tap detection
    std::string constellation = "qpsk";

    int aa_paths = 1;   // sensing channel A->A
    int ba_paths = 2;   // communication channel B->A
    int max_delay = 1;  // integer-cell spreads for draws and search
    int max_alpha = 1;
    double aa_gain = 1.0;  // echo amplitude scale; 0 removes the echo
    double ba_gain = 1.0;  // remote amplitude scale; 0 silences user B

    double snr_db = 15.0;
    int m_symbols = 2;
    int trials = 500;
    std::uint64_t seed = 1;
    int threads = 1;
    bool genie_aa = false;  // subtract the true echo instead of the estimate
};

struct FdTrialRow {
    long long errors_fd = 0;
    long long errors_hd = 0;
    long long bits = 0;
    double residual_db = -300.0;
    double delay_err_cells = 0.0;
    double doppler_err_cells = 0.0;
};

struct FdReport {
    bool ber_defined = true;  // false when user B is silent
    double ber_remote = 0.0;
    double ber_halfduplex = 0.0;
    long long errors_remote = 0;
    long long errors_halfduplex = 0;
    long long bits = 0;
    double mean_residual_db = -300.0;      // power-averaged over trials
    double sensing_delay_mse = 0.0;        // cells^2
    double sensing_doppler_mse = 0.0;      // cells^2
    std::vector<FdTrialRow> trial_rows;
    std::map<std::string, std::string> config_echo;
};

// Validates the scenario invariants (disjoint pilot regions, guards covering
// the configured spreads) and runs paired full-duplex / half-duplex trials.
FdReport simulate_fullduplex(const FdScenario& sc);

}  // namespace afdm
