// fft.hpp - thin FFTW3 wrapper with a cached plan per size
//
// Plans are created with FFTW_ESTIMATE so planning is deterministic;
// execution is thread-safe, plan creation is serialized internally.
// Transforms here are unnormalized; the *_unitary helpers scale by
// 1/sqrt(N) on both directions.
#pragma once

#include "afdm/types.hpp"

namespace afdm::fft {

// out[k] = sum_n in[n] * exp(-+ j 2 pi n k / n_len); inverse=false gives exp(-j...).
void transform(const cplx* in, cplx* out, int n_len, bool inverse);

CVec fft(const CVec& x);
CVec ifft(const CVec& x);
CVec fft_unitary(const CVec& x);
CVec ifft_unitary(const CVec& x);

}  // namespace afdm::fft
