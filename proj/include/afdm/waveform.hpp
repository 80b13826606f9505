// waveform.hpp - DAFT-domain grids to time-domain frames and back
#pragma once

#include "afdm/config.hpp"
#include "afdm/grid.hpp"
#include "afdm/pulse.hpp"
#include "afdm/types.hpp"

namespace afdm {

// IDAFT plus chirp-periodic prefix; symbol-rate frame.
TimeFrame modulate(const CVec& grid, const ChirpConfig& cfg);
TimeFrame modulate(const DaftGrid& grid, const ChirpConfig& cfg);

// Concatenation of per-symbol modulated blocks.
TimeFrame modulate_symbols(const std::vector<CVec>& grids, const ChirpConfig& cfg);

// daft(remove_cpp(frame)) for one symbol.
CVec demodulate(const TimeFrame& frame, const ChirpConfig& cfg, int symbol_index = 0);

// Time waveform of a unit DAFT-domain impulse at bin m. osf == 1 returns the
// prefixed symbol-rate samples; osf > 1 applies RRC shaping at that rate.
TimeFrame subcarrier_waveform(int m, const ChirpConfig& cfg, int osf,
                              const RrcConfig* rrc = nullptr);

// Exact chirp-domain echo synthesis: every subcarrier is delayed inside its
// own chirp-periodic extension (valid for delay <= cpp_len, fractional
// allowed), then scaled and Doppler-rotated along the global sample index.
// One unitary IDFT per symbol plus pointwise chirp phases.
TimeFrame delayed_echo_frame(const std::vector<CVec>& grids, const ChirpConfig& cfg,
                             double delay_samples, double doppler_cps, cplx gain);

}  // namespace afdm
