#include "roomsense/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "roomsense/errors.hpp"

namespace roomsense::svm {
namespace {

constexpr double kTau = 1e-12;

Matrix squared_distances(const Matrix& a, const Matrix& b) {
    Vector na = a.rowwise().squaredNorm();
    Vector nb = b.rowwise().squaredNorm();
    Matrix d2 = (-2.0 * a * b.transpose());
    d2.colwise() += na;
    d2.rowwise() += nb.transpose();
    return d2.cwiseMax(0.0);
}

struct Standardizer {
    Vector mean;
    Vector scale;

    static Standardizer fit(const Matrix& x) {
        Standardizer s;
        s.mean = x.colwise().mean();
        Vector var = ((x.rowwise() - s.mean.transpose()).array().square().colwise().sum() /
                      static_cast<double>(x.rows()))
                         .matrix();
        s.scale = var.array().sqrt().matrix();
        for (Eigen::Index i = 0; i < s.scale.size(); ++i)
            if (s.scale(i) < 1e-12) s.scale(i) = 1.0;
        return s;
    }

    Matrix apply(const Matrix& x) const {
        return ((x.rowwise() - mean.transpose()).array().rowwise() /
                scale.transpose().array())
            .matrix();
    }
};

struct SmoSolution {
    Vector alpha;
    double bias = 0.0;
    int iterations = 0;
    double kkt_violation = 0.0;
};

// Two-variable SMO over a precomputed kernel matrix.
SmoSolution smo_solve(const Matrix& kernel, const std::vector<int>& y, double c, double tol,
                      std::vector<double>* dual_trace) {
    const auto n = static_cast<Eigen::Index>(y.size());
    Vector alpha = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0);
    double dual = 0.0; // maximized dual objective: sum(alpha) - 0.5 alpha'Q alpha
    if (dual_trace) dual_trace->push_back(dual);

    const long max_iter = std::max<long>(100000, 100 * n);
    long iter = 0;
    double gap = 0.0;
    for (; iter < max_iter; ++iter) {
        // Maximal violating pair.
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        Eigen::Index i = -1, j = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            double v = -y[static_cast<size_t>(t)] * grad(t);
            bool in_up = (y[static_cast<size_t>(t)] > 0) ? (alpha(t) < c) : (alpha(t) > 0.0);
            bool in_low = (y[static_cast<size_t>(t)] > 0) ? (alpha(t) > 0.0) : (alpha(t) < c);
            if (in_up && v > m_up) {
                m_up = v;
                i = t;
            }
            if (in_low && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        gap = m_up - m_low;
        if (i < 0 || j < 0 || gap <= tol) break;

        const int yi = y[static_cast<size_t>(i)];
        const int yj = y[static_cast<size_t>(j)];
        const double qii = kernel(i, i);
        const double qjj = kernel(j, j);
        const double qij = yi * yj * kernel(i, j);
        double old_i = alpha(i), old_j = alpha(j);

        if (yi != yj) {
            double quad = std::max(qii + qjj + 2.0 * qij, kTau);
            double delta = (-grad(i) - grad(j)) / quad;
            double diff = old_i - old_j;
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0.0) {
                if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = diff; }
            } else {
                if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = -diff; }
            }
            if (diff > 0.0) {
                if (alpha(i) > c) { alpha(i) = c; alpha(j) = c - diff; }
            } else {
                if (alpha(j) > c) { alpha(j) = c; alpha(i) = c + diff; }
            }
        } else {
            double quad = std::max(qii + qjj - 2.0 * qij, kTau);
            double delta = (grad(i) - grad(j)) / quad;
            double sum = old_i + old_j;
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > c) {
                if (alpha(i) > c) { alpha(i) = c; alpha(j) = sum - c; }
            } else {
                if (alpha(j) < 0.0) { alpha(j) = 0.0; alpha(i) = sum; }
            }
            if (sum > c) {
                if (alpha(j) > c) { alpha(j) = c; alpha(i) = sum - c; }
            } else {
                if (alpha(i) < 0.0) { alpha(i) = 0.0; alpha(j) = sum; }
            }
        }

        double di = alpha(i) - old_i;
        double dj = alpha(j) - old_j;
        if (di == 0.0 && dj == 0.0) break; // numerically stuck; gap reported as-is
        // Dual change from the pair step, using the pre-update gradient.
        dual -= grad(i) * di + grad(j) * dj +
                0.5 * (qii * di * di + 2.0 * qij * di * dj + qjj * dj * dj);
        if (dual_trace) dual_trace->push_back(dual);
        for (Eigen::Index t = 0; t < n; ++t) {
            int yt = y[static_cast<size_t>(t)];
            grad(t) += yt * (yi * kernel(t, i) * di + yj * kernel(t, j) * dj);
        }
    }

    // Bias from free support vectors, falling back to the bound midpoint.
    double b_sum = 0.0;
    int b_count = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha(t) > 0.0 && alpha(t) < c) {
            b_sum += -y[static_cast<size_t>(t)] * grad(t);
            ++b_count;
        }
    }
    SmoSolution sol;
    if (b_count > 0) {
        sol.bias = b_sum / b_count;
    } else {
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            double v = -y[static_cast<size_t>(t)] * grad(t);
            bool in_up = (y[static_cast<size_t>(t)] > 0) ? (alpha(t) < c) : (alpha(t) > 0.0);
            bool in_low = (y[static_cast<size_t>(t)] > 0) ? (alpha(t) > 0.0) : (alpha(t) < c);
            if (in_up) m_up = std::max(m_up, v);
            if (in_low) m_low = std::min(m_low, v);
        }
        sol.bias = 0.5 * (m_up + m_low);
    }
    sol.alpha = std::move(alpha);
    sol.iterations = static_cast<int>(iter);
    sol.kkt_violation = std::max(gap, 0.0);
    return sol;
}

void check_labels(const Matrix& features, const std::vector<int>& labels) {
    if (static_cast<size_t>(features.rows()) != labels.size())
        throw UsageError("svm: feature/label count mismatch");
    if (!features.allFinite()) throw DataError("svm: non-finite feature");
    int pos = 0, neg = 0;
    for (int y : labels) {
        if (y == 1) ++pos;
        else if (y == -1) ++neg;
        else throw UsageError("svm: labels must be +1 or -1");
    }
    if (pos == 0 || neg == 0) throw DataError("svm: both classes must be present");
}

// Stratified fold ids, seeded: shuffle within each class, deal round-robin.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> fold_of(labels.size(), 0);
    for (int cls : {+1, -1}) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) idx.push_back(i);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (size_t r = 0; r < idx.size(); ++r) fold_of[idx[r]] = static_cast<int>(r % folds);
    }
    return fold_of;
}

} // namespace

void SvmModel::validate() const {
    if (support_vectors.rows() != coeffs.size())
        throw DataError("svm model: support vector / coefficient count mismatch");
    if (support_vectors.cols() != feat_mean.size() || feat_mean.size() != feat_scale.size())
        throw DataError("svm model: inconsistent dimensionality");
    if ((feat_scale.array() <= 0.0).any()) throw DataError("svm model: non-positive scale");
    if (gamma <= 0.0) throw DataError("svm model: non-positive gamma");
    if (!support_vectors.allFinite() || !coeffs.allFinite() || !std::isfinite(bias))
        throw DataError("svm model: non-finite parameter");
    double bound = cbox > 0.0 ? cbox : std::numeric_limits<double>::infinity();
    if ((coeffs.array().abs() > bound * (1.0 + 1e-9)).any())
        throw DataError("svm model: coefficient outside box constraint");
}

SvmModel train(const Matrix& features, const std::vector<int>& labels, double cbox, double gamma,
               double tol, uint64_t seed, SmoDiagnostics* diag) {
    (void)seed; // the solver is deterministic; seed kept for interface stability
    check_labels(features, labels);
    if (cbox <= 0.0 || gamma <= 0.0) throw UsageError("svm train: cbox and gamma must be > 0");

    Standardizer std_ = Standardizer::fit(features);
    Matrix x = std_.apply(features);
    Matrix kernel = (-gamma * squared_distances(x, x).array()).exp();

    std::vector<double>* trace = diag ? &diag->dual_objective_trace : nullptr;
    SmoSolution sol = smo_solve(kernel, labels, cbox, tol, trace);
    if (diag) {
        diag->kkt_violation = sol.kkt_violation;
        diag->iterations = sol.iterations;
    }

    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < sol.alpha.size(); ++i)
        if (sol.alpha(i) > 0.0) sv.push_back(i);

    SvmModel model;
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), features.cols());
    model.coeffs.resize(static_cast<Eigen::Index>(sv.size()));
    for (size_t r = 0; r < sv.size(); ++r) {
        model.support_vectors.row(static_cast<Eigen::Index>(r)) = x.row(sv[r]);
        model.coeffs(static_cast<Eigen::Index>(r)) =
            sol.alpha(sv[r]) * labels[static_cast<size_t>(sv[r])];
    }
    model.bias = sol.bias;
    model.gamma = gamma;
    model.cbox = cbox;
    model.feat_mean = std_.mean;
    model.feat_scale = std_.scale;
    return model;
}

double decision_value(const SvmModel& model, const Vector& x) {
    if (x.size() != model.dim()) throw UsageError("svm decision_value: dimension mismatch");
    Vector xs = ((x - model.feat_mean).array() / model.feat_scale.array()).matrix();
    Vector d2 = (model.support_vectors.rowwise() - xs.transpose()).rowwise().squaredNorm();
    return (model.coeffs.array() * (-model.gamma * d2.array()).exp()).sum() + model.bias;
}

std::pair<double, double> grid_search(const Matrix& features, const std::vector<int>& labels,
                                      const GridSpec& grid, uint64_t seed) {
    check_labels(features, labels);
    if (grid.cbox_values.empty() || grid.gamma_values.empty())
        throw UsageError("grid_search: empty grid");
    if (grid.folds < 2) throw UsageError("grid_search: fold count must be >= 2");
    int pos = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
    int neg = static_cast<int>(labels.size()) - pos;
    if (pos < grid.folds || neg < grid.folds)
        throw DataError("grid_search: not enough samples per class for the fold count");

    std::vector<double> cs = grid.cbox_values;
    std::vector<double> gs = grid.gamma_values;
    std::sort(cs.begin(), cs.end());
    std::sort(gs.begin(), gs.end());

    std::vector<int> fold_of = stratified_folds(labels, grid.folds, seed);

    // Per-fold standardized views and distance matrices, shared across the grid.
    struct FoldData {
        Matrix d2_train;
        Matrix d2_val;
        std::vector<int> y_train;
        std::vector<int> y_val;
    };
    std::vector<FoldData> fold_data;
    fold_data.reserve(static_cast<size_t>(grid.folds));
    for (int f = 0; f < grid.folds; ++f) {
        std::vector<Eigen::Index> tr, va;
        for (size_t i = 0; i < labels.size(); ++i)
            (fold_of[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
        FoldData fd;
        Matrix xt(static_cast<Eigen::Index>(tr.size()), features.cols());
        Matrix xv(static_cast<Eigen::Index>(va.size()), features.cols());
        for (size_t i = 0; i < tr.size(); ++i) {
            xt.row(static_cast<Eigen::Index>(i)) = features.row(tr[i]);
            fd.y_train.push_back(labels[static_cast<size_t>(tr[i])]);
        }
        for (size_t i = 0; i < va.size(); ++i) {
            xv.row(static_cast<Eigen::Index>(i)) = features.row(va[i]);
            fd.y_val.push_back(labels[static_cast<size_t>(va[i])]);
        }
        Standardizer std_ = Standardizer::fit(xt);
        Matrix xts = std_.apply(xt);
        Matrix xvs = std_.apply(xv);
        fd.d2_train = squared_distances(xts, xts);
        fd.d2_val = squared_distances(xvs, xts);
        fold_data.push_back(std::move(fd));
    }

    double best_acc = -1.0;
    std::pair<double, double> best{cs.front(), gs.front()};
    for (double c : cs) {
        for (double g : gs) {
            long correct = 0, total = 0;
            for (const auto& fd : fold_data) {
                Matrix kernel = (-g * fd.d2_train.array()).exp();
                SmoSolution sol = smo_solve(kernel, fd.y_train, c, 1e-3, nullptr);
                Vector ay(sol.alpha.size());
                for (Eigen::Index i = 0; i < ay.size(); ++i)
                    ay(i) = sol.alpha(i) * fd.y_train[static_cast<size_t>(i)];
                Vector f_val = ((-g * fd.d2_val.array()).exp().matrix() * ay).array() + sol.bias;
                for (Eigen::Index i = 0; i < f_val.size(); ++i) {
                    int pred = f_val(i) >= 0.0 ? 1 : -1;
                    correct += (pred == fd.y_val[static_cast<size_t>(i)]);
                    ++total;
                }
            }
            double acc = static_cast<double>(correct) / static_cast<double>(total);
            if (acc > best_acc) {
                best_acc = acc;
                best = {c, g};
            }
        }
    }
    return best;
}

void calibrate(SvmModel& model, const std::vector<double>& decision_values,
               const std::vector<int>& labels) {
    if (decision_values.size() != labels.size())
        throw UsageError("calibrate: value/label count mismatch");
    long prior1 = std::count(labels.begin(), labels.end(), 1);
    long prior0 = static_cast<long>(labels.size()) - prior1;
    if (prior1 < 2 || prior0 < 2)
        throw DataError("calibrate: need at least 2 samples per class");

    // Newton optimization of the smoothed-target sigmoid likelihood
    // (Platt 1999, with the Lin-Weng numerically stable formulation).
    const double hi = (static_cast<double>(prior1) + 1.0) / (static_cast<double>(prior1) + 2.0);
    const double lo = 1.0 / (static_cast<double>(prior0) + 2.0);
    const size_t n = labels.size();
    std::vector<double> target(n);
    for (size_t i = 0; i < n; ++i) target[i] = labels[i] == 1 ? hi : lo;

    auto objective = [&](double a, double b) {
        double obj = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double f = a * decision_values[i] + b;
            if (f >= 0.0)
                obj += target[i] * f + std::log1p(std::exp(-f));
            else
                obj += (target[i] - 1.0) * f + std::log1p(std::exp(f));
        }
        return obj;
    };

    double a = 0.0;
    double b = std::log((static_cast<double>(prior0) + 1.0) / (static_cast<double>(prior1) + 1.0));
    double fval = objective(a, b);
    const double min_step = 1e-10;
    const double sigma = 1e-12;

    for (int it = 0; it < 100; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double f = a * decision_values[i] + b;
            double p, q;
            if (f >= 0.0) {
                double e = std::exp(-f);
                p = e / (1.0 + e);
                q = 1.0 / (1.0 + e);
            } else {
                double e = std::exp(f);
                p = 1.0 / (1.0 + e);
                q = e / (1.0 + e);
            }
            double d1 = target[i] - p;
            double d2 = p * q;
            g1 += decision_values[i] * d1;
            g2 += d1;
            h11 += decision_values[i] * decision_values[i] * d2;
            h22 += d2;
            h21 += decision_values[i] * d2;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

        double det = h11 * h22 - h21 * h21;
        double da = -(h22 * g1 - h21 * g2) / det;
        double db = -(-h21 * g1 + h11 * g2) / det;
        double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= min_step) {
            double a_new = a + step * da;
            double b_new = b + step * db;
            double f_new = objective(a_new, b_new);
            if (f_new < fval + 1e-4 * step * gd) {
                a = a_new;
                b = b_new;
                fval = f_new;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;
    }

    model.platt_a = a;
    model.platt_b = b;
    model.calibrated = true;
}

std::pair<double, double> predict_log_probs(const SvmModel& model, const Vector& x) {
    if (!model.calibrated) throw UsageError("predict_log_probs: model is not calibrated");
    double f = decision_value(model, x);
    double t = model.platt_a * f + model.platt_b;
    double p;
    if (t >= 0.0) {
        double e = std::exp(-t);
        p = e / (1.0 + e);
    } else {
        p = 1.0 / (1.0 + std::exp(t));
    }
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    return {std::log(p), std::log1p(-p)};
}

} // namespace roomsense::svm
