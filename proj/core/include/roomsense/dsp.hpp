#pragma once

#include "roomsense/types.hpp"

namespace roomsense::dsp {

// Magnitude spectrogram. Hamming window per frame, each frame zero-padded to
// the next power of two before the transform. Frames that would overrun the
// signal are dropped; there is no tail padding.
// Frame count: floor((n_samples - window) / hop) + 1.
Spectrogram stft(const AudioClip& clip, double window_s, double hop_s);

// Per frame: mel filterbank (triangular, unit-sum normalized, 0..Nyquist) ->
// log (floored at log_floor) -> orthonormal DCT-II -> first n_ceps
// coefficients, then +/-2-frame regression deltas appended (edge frames
// replicate). Output frames are 2*n_ceps wide.
FeatureSequence mfcc(const Spectrogram& spec, int n_mel, int n_ceps, double log_floor = 1e-10);

// Orthonormal DCT-II applied to each row independently, truncated to the
// first `keep` coefficients.
Matrix dct_rows(const Matrix& m, Eigen::Index keep);

// Inverse of dct_rows with full keep (orthonormal DCT-III per row).
Matrix idct_rows(const Matrix& coeffs);

Eigen::Index next_pow2(Eigen::Index n);

// Hamming window of length n.
Vector hamming(Eigen::Index n);

} // namespace roomsense::dsp
