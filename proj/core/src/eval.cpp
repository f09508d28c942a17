#include "roomsense/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "roomsense/errors.hpp"
#include "roomsense/util.hpp"

namespace roomsense::eval {

RocCurve roc_curve(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores) {
    if (pos_scores.empty() || neg_scores.empty())
        throw DataError("roc_curve: both score lists must be non-empty");

    std::vector<double> merged = pos_scores;
    merged.insert(merged.end(), neg_scores.begin(), neg_scores.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    std::vector<double> thresholds;
    thresholds.reserve(merged.size() + 1);
    thresholds.push_back(merged.front() - 1.0);
    for (size_t i = 0; i + 1 < merged.size(); ++i)
        thresholds.push_back(0.5 * (merged[i] + merged[i + 1]));
    thresholds.push_back(merged.back() + 1.0);

    std::vector<double> pos_sorted = pos_scores;
    std::vector<double> neg_sorted = neg_scores;
    std::sort(pos_sorted.begin(), pos_sorted.end());
    std::sort(neg_sorted.begin(), neg_sorted.end());

    RocCurve curve;
    curve.points.reserve(thresholds.size());
    for (double t : thresholds) {
        auto neg_ge = neg_sorted.end() -
                      std::lower_bound(neg_sorted.begin(), neg_sorted.end(), t);
        auto pos_lt = std::lower_bound(pos_sorted.begin(), pos_sorted.end(), t) -
                      pos_sorted.begin();
        RocPoint pt;
        pt.threshold = t;
        pt.fpr = static_cast<double>(neg_ge) / static_cast<double>(neg_sorted.size());
        pt.fnr = static_cast<double>(pos_lt) / static_cast<double>(pos_sorted.size());
        curve.points.push_back(pt);
    }
    return curve;
}

EerResult compute_eer(const std::vector<double>& pos_scores,
                      const std::vector<double>& neg_scores) {
    RocCurve curve = roc_curve(pos_scores, neg_scores);
    const auto& pts = curve.points;

    // FPR - FNR is non-increasing along the sweep; find the crossing.
    for (size_t i = 0; i < pts.size(); ++i) {
        double d = pts[i].fpr - pts[i].fnr;
        if (d == 0.0) return {pts[i].fpr, pts[i].threshold};
        if (d < 0.0) {
            if (i == 0) return {pts[0].fpr, pts[0].threshold}; // cannot happen: first point has FNR 0
            const RocPoint& a = pts[i - 1];
            const RocPoint& b = pts[i];
            double da = a.fpr - a.fnr;
            double db = b.fpr - b.fnr;
            double s = da / (da - db);
            EerResult r;
            r.eer = a.fpr + s * (b.fpr - a.fpr);
            r.threshold = a.threshold + s * (b.threshold - a.threshold);
            return r;
        }
    }
    const RocPoint& last = pts.back();
    return {last.fpr, last.threshold};
}

std::vector<AlphaSweepRow> sweep_alpha(const std::map<std::string, LabelScoreSet>& scores,
                                       const std::vector<double>& alphas) {
    if (scores.empty()) throw UsageError("sweep_alpha: no labels");
    std::vector<AlphaSweepRow> rows;
    rows.reserve(alphas.size());
    std::vector<double> pos, neg;
    for (double alpha : alphas) {
        double total = 0.0;
        for (const auto& [label, set] : scores) {
            pos.clear();
            neg.clear();
            for (const auto& [scene, rir] : set.pos) pos.push_back(alpha * scene + (1.0 - alpha) * rir);
            for (const auto& [scene, rir] : set.neg) neg.push_back(alpha * scene + (1.0 - alpha) * rir);
            total += compute_eer(pos, neg).eer;
        }
        rows.push_back({alpha, total / static_cast<double>(scores.size())});
    }
    return rows;
}

double best_alpha(const std::vector<AlphaSweepRow>& rows) {
    if (rows.empty()) throw UsageError("best_alpha: empty sweep");
    size_t best = 0;
    for (size_t i = 1; i < rows.size(); ++i)
        if (rows[i].total_eer < rows[best].total_eer ||
            (rows[i].total_eer == rows[best].total_eer && rows[i].alpha < rows[best].alpha))
            best = i;
    return rows[best].alpha;
}

Matrix confusion_matrix(const std::vector<std::map<std::string, double>>& room_confidences,
                        const std::vector<std::string>& room_true_labels,
                        const std::vector<std::string>& labels) {
    if (room_confidences.size() != room_true_labels.size())
        throw UsageError("confusion_matrix: room/label count mismatch");
    const auto l = static_cast<Eigen::Index>(labels.size());
    Matrix sums = Matrix::Zero(l, l);
    Vector counts = Vector::Zero(l);
    auto index_of = [&](const std::string& name) {
        auto it = std::find(labels.begin(), labels.end(), name);
        if (it == labels.end()) throw UsageError("confusion_matrix: unknown label " + name);
        return static_cast<Eigen::Index>(it - labels.begin());
    };
    for (size_t r = 0; r < room_confidences.size(); ++r) {
        Eigen::Index row = index_of(room_true_labels[r]);
        counts(row) += 1.0;
        for (const auto& [candidate, conf] : room_confidences[r])
            sums(row, index_of(candidate)) += conf;
    }
    for (Eigen::Index i = 0; i < l; ++i)
        if (counts(i) > 0.0) sums.row(i) /= counts(i);
    return sums;
}

std::map<std::string, int> assign_room_folds(
    const std::vector<std::pair<std::string, std::string>>& room_labels, int folds,
    uint64_t seed) {
    if (folds < 2) throw UsageError("assign_room_folds: fold count must be >= 2");

    // label -> ordered distinct rooms
    std::map<std::string, std::vector<std::string>> by_label;
    std::set<std::string> seen;
    size_t n_rooms = 0;
    for (const auto& [room, label] : room_labels) {
        if (seen.insert(room).second) {
            by_label[label].push_back(room);
            ++n_rooms;
        }
    }
    if (n_rooms < static_cast<size_t>(folds))
        throw DataError("assign_room_folds: fewer rooms than folds");

    std::map<std::string, int> fold_of;
    int cursor = 0;
    uint64_t label_idx = 0;
    for (auto& [label, rooms] : by_label) {
        std::mt19937_64 rng(mix_seed(seed, label_idx++));
        std::shuffle(rooms.begin(), rooms.end(), rng);
        for (const auto& room : rooms) {
            fold_of[room] = cursor % folds;
            ++cursor;
        }
    }
    return fold_of;
}

} // namespace roomsense::eval
