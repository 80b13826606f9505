// mf.hpp - matched-filter sensing in the time or DAFT domain
//
// Correlates the received frame against delay/Doppler-shifted copies of the
// known transmitted frame over the prefix-stripped payload samples. The two
// domains compute the same inner products either side of the unitary DAFT,
// so their surfaces agree to numerical precision.
#pragma once

#include "afdm/ambiguity.hpp"
#include "afdm/config.hpp"
#include "afdm/types.hpp"

#include <string>

namespace afdm {

enum class MfDomain { time, daft };

struct SensingEstimate {
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    double peak_magnitude = 0.0;
    std::string method;
    bool outside_unambiguous = false;  // search grid reaches replica territory
};

struct MatchedFilterResult {
    AmbiguitySurface surface;
    SensingEstimate estimate;
};

// rx and tx are symbol-rate frames with prefixes, same geometry. Delays in
// seconds (converted to samples internally, fractional allowed), Dopplers in
// Hz. The estimate is the argmax cell refined by 3-point parabolic
// interpolation along each axis.
MatchedFilterResult matched_filter(const TimeFrame& rx, const TimeFrame& tx,
                                   const ChirpConfig& cfg, MfDomain domain,
                                   const std::vector<double>& delay_s,
                                   const std::vector<double>& doppler_hz);

// Local maxima of |surface| at least peak_floor_rel of the global peak,
// returned as (delay_idx, doppler_idx).
std::vector<std::pair<int, int>> find_peaks(const AmbiguitySurface& surface,
                                            double peak_floor_rel);

}  // namespace afdm
