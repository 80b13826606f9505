// transforms.hpp - DAFT/IDAFT, chirp phase vectors, chirp-periodic prefix
//
// Conventions (fixed repo-wide, asserted against the dense matrix oracle):
//
//   idaft:  s[n] = (1/sqrt(N)) sum_m x[m] exp(+j 2 pi (c1 n^2 + c2 m^2 + n m / N))
//   daft:   exact inverse; forward kernel carries exp(-j ...).
//
// The IDAFT factors into chirp scaling, unitary IDFT, chirp scaling, so the
// fast path costs one FFT plus two element-wise products. Phase arguments
// are reduced modulo one full turn before evaluating exp, and configs built
// from an exact ratio c1 = k/(2N) use integer arithmetic for the reduction,
// keeping prefix phases and replica predictions exact.
#pragma once

#include "afdm/config.hpp"
#include "afdm/types.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace afdm {

// Fractional part of c * idx^2 in turns, mapped to [0, 1).
double chirp_cycles(double c, std::int64_t idx);

// Fractional part of (num * value) / den in turns, exact in integers.
double rational_cycles(std::int64_t num, std::int64_t value, std::int64_t den);

// Chirp phase diagonal as a vector: element n = exp(-j 2 pi c n^2).
CVec chirp_phase_vector(double c, int m_len);

// Per-config chirp cycles; uses the exact rational path when available.
double c1_cycles(const ChirpConfig& cfg, std::int64_t idx);

CVec idaft(const CVec& x, const ChirpConfig& cfg);
CVec daft(const CVec& s, const ChirpConfig& cfg);

// Dense forward-DAFT matrix, the oracle for the fast transforms:
// A(m, n) = (1/sqrt(N)) exp(-j 2 pi (c1 n^2 + c2 m^2 + n m / N)),
// so daft(s) == A s and idaft(x) == A^H x. N is capped at 4096.
Eigen::MatrixXcd daft_matrix(const ChirpConfig& cfg);

// Prepend the chirp-periodic prefix:
// out[L + n] = s[n]; out[L + n] = s[N + n] exp(-j 2 pi c1 (N^2 + 2 N n))
// for n in {-L..-1}. Equals a plain cyclic prefix when 2 N c1 is an
// integer and N is even.
CVec add_cpp(const CVec& s, const ChirpConfig& cfg);

// Payload samples of one symbol from a symbol-rate frame with prefixes.
CVec remove_cpp(const TimeFrame& frame, const ChirpConfig& cfg, int symbol_index = 0);

}  // namespace afdm
