#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "roomsense/types.hpp"

namespace roomsense::svm {

// RBF-kernel binary SVM with optional Platt sigmoid. Feature standardization
// is baked into the model: support vectors are stored in standardized space.
struct SvmModel {
    Matrix support_vectors; // M x D
    Vector coeffs;          // alpha_i * y_i per support vector
    double bias = 0.0;
    double gamma = 0.0;
    double cbox = 0.0;
    double platt_a = 0.0;
    double platt_b = 0.0;
    bool calibrated = false;
    Vector feat_mean;  // D
    Vector feat_scale; // D, > 0

    Eigen::Index dim() const { return feat_mean.size(); }
    void validate() const;
};

struct GridSpec {
    std::vector<double> cbox_values;
    std::vector<double> gamma_values;
    int folds = 5;
};

struct SmoDiagnostics {
    std::vector<double> dual_objective_trace; // maximized dual, per working-set step
    double kkt_violation = 0.0;               // max violating pair gap at exit
    int iterations = 0;
};

// SMO with maximal-violating-pair working sets, solved to KKT gap <= tol.
// Labels are +/-1. Throws DataError for single-class or non-finite input.
SvmModel train(const Matrix& features, const std::vector<int>& labels, double cbox,
               double gamma, double tol = 1e-3, uint64_t seed = 0,
               SmoDiagnostics* diag = nullptr);

// Stratified seeded cross-validation over the grid; returns the (cbox, gamma)
// with the highest mean accuracy, ties to the smaller cbox then smaller gamma.
std::pair<double, double> grid_search(const Matrix& features, const std::vector<int>& labels,
                                      const GridSpec& grid, uint64_t seed);

double decision_value(const SvmModel& model, const Vector& x);

// Fits P(y=+1|f) = 1/(1+exp(A f + B)) on held-out decision values by
// regularized maximum likelihood (Newton, prior-count target smoothing).
void calibrate(SvmModel& model, const std::vector<double>& decision_values,
               const std::vector<int>& labels);

// (log P(y=+1|f(x)), log P(y=-1|f(x))) under the Platt sigmoid, probabilities
// clamped to [1e-12, 1 - 1e-12] before the logs.
std::pair<double, double> predict_log_probs(const SvmModel& model, const Vector& x);

} // namespace roomsense::svm
