#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "roomsense/types.hpp"

namespace roomsense::gmm {

// Diagonal-covariance Gaussian mixture. Rows of means/variances are components.
struct GaussianMixture {
    Vector weights;   // N, on the simplex
    Matrix means;     // N x D
    Matrix variances; // N x D, every entry > 0

    Eigen::Index components() const { return weights.size(); }
    Eigen::Index dim() const { return means.cols(); }
    void validate() const; // throws DataError naming the failed check
};

struct FitOptions {
    int n_components = 64;
    uint64_t seed = 202;
    int max_iters = 100;
    double rel_tol = 1e-5;
    double variance_floor_frac = 1e-4; // of the global per-dimension variance
    double weight_floor = 1e-6;
    int subsample_cap = 200000;
};

struct FitResult {
    GaussianMixture model;
    std::vector<double> log_likelihood_trace; // total data log likelihood per EM iteration
};

// EM with seeded k-means++ initialization. Deterministic given (data, options).
// Data rows are observations. Throws DataError when there are fewer distinct
// points than components.
FitResult fit(const Matrix& data, const FitOptions& opts);

double log_pdf(const GaussianMixture& model, const Vector& x);

// Mixture log density of every row of X.
Vector log_pdf_rows(const GaussianMixture& model, const Matrix& x);

// Within-class / out-of-class models for one label.
struct ScenePair {
    GaussianMixture in_model;
    GaussianMixture out_model;
};

// Sums of per-frame log densities under both models; the caller forms
// in - out. Throws DataError on an empty sequence.
std::pair<double, double> sequence_score(const ScenePair& pair, const FeatureSequence& features);

} // namespace roomsense::gmm
