// detect.hpp - ML and MMSE detection over the DAFT-domain channel matrix
#pragma once

#include "afdm/constellation.hpp"
#include "afdm/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace afdm {

// Exhaustive joint ML detection: bits of argmin_x ||y - M x||^2 over all
// constellation vectors, ties broken toward the lexicographically lowest
// bit pattern. The search walks an n-ary reflected Gray sequence so each
// candidate costs O(N). Enumeration is refused beyond 2^20 candidates.
std::vector<std::uint8_t> ml_detect(const CVec& y, const Eigen::MatrixXcd& m,
                                    const Constellation& c);

// Linear MMSE equalization followed by per-entry slicing.
std::vector<std::uint8_t> mmse_detect(const CVec& y, const Eigen::MatrixXcd& m,
                                      const Constellation& c, double noise_var);

}  // namespace afdm
