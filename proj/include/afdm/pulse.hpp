// pulse.hpp - root-raised-cosine shaping and band-limited delays
#pragma once

#include "afdm/config.hpp"
#include "afdm/types.hpp"

namespace afdm {

struct RrcConfig {
    double beta = 0.25;     // roll-off in [0, 1]
    int span_symbols = 24;  // filter span, symbol intervals
    int osf = 8;            // oversampling factor

    int n_taps() const { return span_symbols * osf + 1; }
};

// Unit-energy, even-symmetric RRC taps at osf samples per symbol.
std::vector<double> rrc_taps(const RrcConfig& rrc);

// Upsample a symbol-rate frame by rrc.osf and apply the RRC filter
// (full convolution; the tail is recorded in filter_tail).
TimeFrame pulse_shape(const TimeFrame& frame, const RrcConfig& rrc);

// Matched RRC filter plus symbol-rate downsampling, group delay removed.
CVec matched_filter_downsample(const TimeFrame& shaped, const RrcConfig& rrc, int n_out);

// Circular band-limited delay by a (possibly fractional) number of samples.
CVec fractional_delay_circular(const CVec& x, double shift_samples);

}  // namespace afdm
