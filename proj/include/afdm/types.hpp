// types.hpp - shared scalar/vector types for the AFDM baseband library
#pragma once

#include <complex>
#include <vector>

namespace afdm {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double energy(const CVec& x) {
    double e = 0.0;
    for (const auto& v : x) e += std::norm(v);
    return e;
}

inline double rel_error(const CVec& a, const CVec& b) {
    double num = 0.0, den = 0.0;
    const std::size_t n = a.size() < b.size() ? a.size() : b.size();
    for (std::size_t i = 0; i < n; ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace afdm
