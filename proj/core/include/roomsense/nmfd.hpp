#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roomsense/types.hpp"

namespace roomsense::nmfd {

enum class DctAxis {
    Frequency, // DCT over each of the K tail-frame spectra (default)
    Time,      // DCT over each frequency row's K-frame trajectory
};

struct NmfdConfig {
    int k = 20;              // RIR length in frames
    double lambda = 0.1;     // sparsity weight on the source
    double p = 1.2;          // sparsity exponent, in (0, 2]
    int max_iters = 150;
    double rel_tol = 1e-4;   // stop when relative objective change drops below
    uint64_t seed = 101;     // init of S and R
    double eps = 1e-12;      // denominator / ratio floor
    int n_ceps = 20;         // cepstral coefficients kept by parametrize_rir
    DctAxis dct_axis = DctAxis::Frequency;
};

struct NmfdResult {
    Matrix source;                      // F x T, non-negative
    Matrix rir;                         // F x K, non-negative, max of column 0 is 1
    std::vector<double> objective_trace; // objective after each iteration
    int iterations = 0;
};

// Y = sum_k diag(R[:,k]) * (S shifted right by k). Shifts drop overrunning
// columns and zero-fill vacated ones; column 0 of R is the direct path.
Matrix reconstruct(const Matrix& source, const Matrix& rir);

// Generalized KL divergence D(X||Y) plus lambda * sum(S^p), with 0*log(0) = 0.
double objective(const Matrix& x, const Matrix& y, const Matrix& source, const NmfdConfig& cfg);

// Alternating multiplicative updates per iteration: the source update (with
// the lambda*S^(p-1) sparsity term in its denominator) followed by the
// per-lag RIR update. Deterministic for a fixed seed. Throws DataError when X
// is all zero and InternalError if an iterate goes non-finite.
NmfdResult estimate_rir(const Matrix& x, const NmfdConfig& cfg);
NmfdResult estimate_rir(const Spectrogram& x, const NmfdConfig& cfg);

// log (floored) -> orthonormal DCT-II keeping n_ceps coefficients ->
// row-major flatten of the resulting (n_ceps x K) matrix. With DctAxis::Time
// the DCT instead runs along each frequency row, giving an (F x n_ceps)
// matrix before flattening.
Vector parametrize_rir(const Matrix& rir, int n_ceps = 20,
                       DctAxis axis = DctAxis::Frequency, double log_floor = 1e-10);

std::string to_string(DctAxis axis);
DctAxis dct_axis_from_string(const std::string& s);

} // namespace roomsense::nmfd
