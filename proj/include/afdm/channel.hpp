// channel.hpp - doubly-dispersive linear time-variant channels
//
// Paths carry (complex gain, delay, Doppler); delay is measured in
// symbol-rate samples, Doppler in cycles per symbol-rate sample. Comm-mode
// processing works on integer delays inside the prefix; sensing mode allows
// fractional parameters through circular band-limited shifts.
#pragma once

#include "afdm/config.hpp"
#include "afdm/rng.hpp"
#include "afdm/types.hpp"

#include <Eigen/Dense>

namespace afdm {

struct PathEntry {
    cplx gain;
    double delay = 0.0;    // symbol-rate samples
    double doppler = 0.0;  // cycles per symbol-rate sample, |doppler| < 0.5
};

struct LtvChannel {
    std::vector<PathEntry> paths;
    bool normalized = true;  // ensemble satisfies sum E|gain|^2 == 1
};

enum class ChannelMode { comm, sensing };

struct ChannelDrawOptions {
    ChannelMode mode = ChannelMode::comm;
    // Comm mode: quantize Doppler to the alpha/N grid and draw distinct
    // (delay, alpha) pairs; otherwise delays are distinct integers and
    // Doppler is continuous uniform.
    bool integer_doppler = false;
    int doppler_grid_n = 0;  // N used for the alpha grid
};

// P paths with i.i.d. CN(0, 1/P) gains. Comm mode draws integer delays from
// {0..floor(max_delay)}; sensing mode draws uniform real delays. Dopplers are
// uniform in [-max_doppler, +max_doppler] unless integer_doppler is set.
LtvChannel random_channel(int n_paths, double max_delay, double max_doppler, Rng& rng,
                          const ChannelDrawOptions& opt = {});

TimeFrame apply_channel(const TimeFrame& frame, const LtvChannel& ch,
                        ChannelMode mode = ChannelMode::comm);

// Adds circular complex Gaussian noise. The default overload calibrates the
// noise variance to the mean per-sample power of the given frame; the _ref
// variant uses an explicit reference power (the convention used by the BER
// harness, where the nominal transmit power is 1). +inf passes through.
TimeFrame add_awgn(const TimeFrame& frame, double snr_db, Rng& rng);
TimeFrame add_awgn_ref(const TimeFrame& frame, double snr_db, Rng& rng,
                       double reference_power);

// Brute-force DAFT-domain channel matrix: daft o (prefixed channel) o idaft,
// column by column through the same operators the simulation chain uses.
// Comm-only: integer delays not exceeding the prefix.
Eigen::MatrixXcd effective_matrix(const LtvChannel& ch, const ChirpConfig& cfg);

// DAFT-domain index shift of a path with integer delay l and Doppler index
// alpha under this library's kernel and +j Doppler conventions:
// (alpha - 2 N c1 l) mod N. Requires exact-rational c1.
int daft_shift_of_path(const ChirpConfig& cfg, int delay, int doppler_index);

// Smallest k >= 1 such that c1 = k/(2N) maps every (delay, alpha) pair with
// delay <= max_delay and |alpha| <= max_alpha to a distinct DAFT shift.
int separability_min_k(int n, int max_delay, int max_alpha);

}  // namespace afdm
