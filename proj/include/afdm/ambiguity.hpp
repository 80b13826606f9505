// ambiguity.hpp - delay-Doppler ambiguity surfaces of baseband frames
//
// A(tau, nu) = sum_n s[n] conj(s[n - tau/Ts]) exp(-j 2 pi nu n Ts), evaluated
// on a caller grid. Fractional delays use circular band-limited shifts on a
// zero-padded copy of the frame; un-normalized, so A(0,0) equals the frame
// energy. The replica lattice of a chirp-subcarrier pilot and its unit-area
// unambiguity cell are predicted exactly from c1 = k/(2N).
#pragma once

#include "afdm/config.hpp"
#include "afdm/grid.hpp"
#include "afdm/pulse.hpp"
#include "afdm/rng.hpp"
#include "afdm/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <utility>

namespace afdm {

struct AmbiguitySurface {
    std::vector<double> delay_axis;    // seconds
    std::vector<double> doppler_axis;  // Hz
    Eigen::MatrixXcd values;           // rows follow delay_axis, cols doppler_axis
    bool magnitude_squared = false;    // true for data-averaged surfaces
    double frame_energy = 0.0;

    double abs_at(int delay_idx, int doppler_idx) const {
        const cplx v = values(delay_idx, doppler_idx);
        return magnitude_squared ? std::sqrt(std::abs(v.real())) : std::abs(v);
    }
};

AmbiguitySurface ambiguity_function(const TimeFrame& frame,
                                    const std::vector<double>& delay_s,
                                    const std::vector<double>& doppler_hz);

// Exact small-fraction arithmetic for the replica lattice geometry.
struct Fraction {
    long long num = 0;
    long long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct UnambiguityRegion {
    // Lattice generators in normalized units (delay in samples of dt,
    // Doppler in cycles per sample): g1 = (1, k/N), g2 = (0, 1).
    Fraction g1_delay, g1_doppler;
    Fraction g2_delay, g2_doppler;
    Fraction area;  // |cross(g1, g2)|, identically 1
    std::array<std::array<double, 2>, 4> vertices;  // centered cell corners

    // Predicted replica peaks a*g1 + b*g2 inside the window (includes the
    // origin), normalized units.
    std::vector<std::pair<double, double>> replica_peaks(double max_delay,
                                                         double max_doppler) const;
};

UnambiguityRegion unambiguity_parallelogram(const ChirpConfig& cfg);

struct ExpectedAfConfig {
    ChirpConfig cfg;
    GridLayout layout;
    std::string constellation = "16qam";
    RrcConfig rrc;
    int trials = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    std::vector<double> delay_s;
    std::vector<double> doppler_hz;
};

// Monte Carlo mean of |A|^2 over i.i.d. random data grids, RRC-shaped.
AmbiguitySurface expected_squared_af(const ExpectedAfConfig& cfg);

}  // namespace afdm
