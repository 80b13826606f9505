// crb.hpp - Fisher information and Cramer-Rao bounds for delay-Doppler
//
// FIM over theta = (tau, nu, Re A, Im A) of a single-target echo
// mu[n] = A s(t_n - tau) exp(j 2 pi nu t_n) built from the oversampled
// RRC-shaped frame; derivatives taken spectrally. CRBs marginalize the
// complex amplitude (inverse-FIM diagonal entries). Distance uses the
// round-trip convention R = c tau; velocity uses the monostatic factor
// nu = 2 v fc / c.
#pragma once

#include "afdm/config.hpp"
#include "afdm/grid.hpp"
#include "afdm/pulse.hpp"
#include "afdm/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>

namespace afdm {

struct CrbTarget {
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    cplx amplitude = cplx{1.0, 0.0};
};

struct CrbSample {
    Eigen::Matrix4d fim;
    double crb_delay_s2 = 0.0;
    double crb_doppler_hz2 = 0.0;
};

// FIM/CRB of one known signal (oversampled samples at spacing ts seconds).
// SNR fixes the noise variance against the mean echo power per sample:
// the measured power of this draw by default, or a caller-supplied
// per-sample reference (reference_power > 0) when the noise floor must stay
// fixed across a data ensemble.
CrbSample fim_for_signal(const CVec& signal, double ts, const CrbTarget& target,
                         double snr_db, double reference_power = -1.0);

struct CrbConfig {
    ChirpConfig cfg;
    GridLayout layout;
    RrcConfig rrc;
    std::string constellation = "qpsk";
    CrbTarget target;
    double snr_db = 10.0;
    double carrier_hz = 60e9;
    int trials = 1000;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct CrbReport {
    Eigen::Matrix4d fim;  // mean over data draws
    // Mean of the per-draw CRBs (each draw's FIM inverted separately).
    double crb_delay_s2 = 0.0;
    double crb_doppler_hz2 = 0.0;
    double crb_distance_m2 = 0.0;
    double crb_velocity_ms2 = 0.0;
    // Ergodic bounds: the data-averaged FIM inverted once. Insensitive to
    // draw-to-draw spectrum fluctuation, the quantity behind the
    // waveform-comparison claims.
    double ergodic_crb_delay_s2 = 0.0;
    double ergodic_crb_doppler_hz2 = 0.0;
    double ergodic_crb_distance_m2 = 0.0;
    double ergodic_crb_velocity_ms2 = 0.0;
    std::map<std::string, std::string> config_echo;
};

// Single draw for a given grid (exposed for oracle tests).
CrbSample fim_crb_for_grid(const CrbConfig& cfg, const CVec& grid);

// Monte Carlo mean of per-draw CRBs over random data grids.
CrbReport fim_crb(const CrbConfig& cfg);

}  // namespace afdm
