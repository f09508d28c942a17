#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "roomsense/types.hpp"

namespace roomsense::eval {

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0; // fraction of negatives >= threshold
    double fnr = 0.0; // fraction of positives < threshold
};

// Threshold sweep over midpoints of the merged sorted score set, plus
// sentinels below the minimum and above the maximum. FPR is non-increasing
// and FNR non-decreasing along the sweep.
struct RocCurve {
    std::vector<RocPoint> points;
};

struct EerResult {
    double eer = 0.0;
    double threshold = 0.0; // t_C
};

RocCurve roc_curve(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

// EER at the FPR/FNR crossing, linearly interpolated between adjacent sweep
// points when the sign of FPR - FNR changes between them.
EerResult compute_eer(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

// Scores a detector produced for clips of its own label (pos) and all other
// clips (neg). Each entry is (scene log-likelihood ratio, RIR log-probability ratio).
struct LabelScoreSet {
    std::vector<std::pair<double, double>> pos;
    std::vector<std::pair<double, double>> neg;
};

struct AlphaSweepRow {
    double alpha = 0.0;
    double total_eer = 0.0; // unweighted mean of per-label EERs
};

std::vector<AlphaSweepRow> sweep_alpha(const std::map<std::string, LabelScoreSet>& scores,
                                       const std::vector<double>& alphas);

// Argmin of the sweep, ties to the smaller alpha.
double best_alpha(const std::vector<AlphaSweepRow>& rows);

// Rows/columns ordered by `labels`. Cell (i, j) is the mean final confidence
// detector j assigned to rooms whose true label is i. Rows are not normalized.
Matrix confusion_matrix(const std::vector<std::map<std::string, double>>& room_confidences,
                        const std::vector<std::string>& room_true_labels,
                        const std::vector<std::string>& labels);

// Deterministic room-grouped fold assignment: a room's recordings never span
// two folds. Rooms are shuffled within each label (seeded) and dealt
// round-robin, so folds are balanced per label where possible.
// Input is (room_id, label) per recording; output is room_id -> fold.
std::map<std::string, int> assign_room_folds(
    const std::vector<std::pair<std::string, std::string>>& room_labels, int folds, uint64_t seed);

} // namespace roomsense::eval
