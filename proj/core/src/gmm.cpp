#include "roomsense/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "roomsense/errors.hpp"

namespace roomsense::gmm {
namespace {

constexpr double kLog2Pi = 1.8378770664093453; // log(2*pi)

// Per-component terms of the quadratic expansion of the Gaussian log density,
// so that log N(x; mu_k, var_k) = -0.5 * (x^2 . a_k) + x . b_k + c_k.
struct Expansion {
    Matrix a; // N x D: 1/var
    Matrix b; // N x D: mu/var
    Vector c; // N: log w - 0.5*(sum mu^2/var + sum log(2 pi var))
};

Expansion expand(const GaussianMixture& m) {
    Expansion e;
    e.a = m.variances.array().inverse();
    e.b = m.means.array() * e.a.array();
    e.c = (m.weights.array().log() -
           0.5 * ((m.means.array() * e.b.array()).rowwise().sum() +
                  m.variances.array().log().rowwise().sum() +
                  static_cast<double>(m.dim()) * kLog2Pi))
              .matrix();
    return e;
}

// Rows of X against all components: n x N matrix of log (w_k N_k(x)).
Matrix component_log_probs(const GaussianMixture& m, const Matrix& x, const Expansion& e) {
    Matrix lp = -0.5 * ((x.array().square().matrix()) * e.a.transpose());
    lp.noalias() += x * e.b.transpose();
    lp.rowwise() += e.c.transpose();
    return lp;
}

Vector log_sum_exp_rows(const Matrix& lp) {
    Vector mx = lp.rowwise().maxCoeff();
    return mx.array() +
           (lp.colwise() - mx).array().exp().rowwise().sum().log();
}

Matrix seeded_subsample(const Matrix& data, int cap, std::mt19937_64& rng) {
    if (cap <= 0 || data.rows() <= cap) return data;
    std::vector<Eigen::Index> idx(static_cast<size_t>(data.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    Matrix out(cap, data.cols());
    for (int i = 0; i < cap; ++i) out.row(i) = data.row(idx[static_cast<size_t>(i)]);
    return out;
}

// k-means++ seeding: first center uniform, then proportional to squared
// distance from the nearest chosen center.
Matrix kmeanspp_centers(const Matrix& data, int k, std::mt19937_64& rng) {
    const Eigen::Index n = data.rows();
    Matrix centers(k, data.cols());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto first = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(n));
    first = std::min(first, n - 1);
    centers.row(0) = data.row(first);

    Vector d2 = (data.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double target = unit(rng) * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(n));
            pick = std::min(pick, n - 1);
        }
        centers.row(c) = data.row(pick);
        d2 = d2.cwiseMin((data.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

} // namespace

void GaussianMixture::validate() const {
    if (components() < 1) throw DataError("gmm: no components");
    if (means.rows() != components() || variances.rows() != components() ||
        means.cols() != variances.cols())
        throw DataError("gmm: inconsistent component shapes");
    if (std::abs(weights.sum() - 1.0) > 1e-9) throw DataError("gmm: weights not on the simplex");
    if ((weights.array() < 0.0).any()) throw DataError("gmm: negative weight");
    if ((variances.array() <= 0.0).any()) throw DataError("gmm: non-positive variance");
    if (!weights.allFinite() || !means.allFinite() || !variances.allFinite())
        throw DataError("gmm: non-finite parameter");
}

FitResult fit(const Matrix& data, const FitOptions& opts) {
    if (opts.n_components < 1) throw UsageError("gmm fit: n_components must be >= 1");
    if (opts.max_iters < 1) throw UsageError("gmm fit: max_iters must be >= 1");
    if (data.rows() < opts.n_components)
        throw DataError("gmm fit: fewer points than components");
    if (!data.allFinite()) throw DataError("gmm fit: non-finite input");

    std::mt19937_64 rng(opts.seed);
    Matrix x = seeded_subsample(data, opts.subsample_cap, rng);
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const int k = opts.n_components;

    {
        std::set<std::vector<double>> distinct;
        for (Eigen::Index i = 0; i < n && distinct.size() < static_cast<size_t>(k); ++i)
            distinct.insert(std::vector<double>(x.row(i).begin(), x.row(i).end()));
        if (distinct.size() < static_cast<size_t>(k))
            throw DataError("gmm fit: fewer distinct points than components");
    }

    Vector global_mean = x.colwise().mean();
    Vector global_var =
        ((x.rowwise() - global_mean.transpose()).array().square().colwise().sum() /
         static_cast<double>(n))
            .matrix();
    Vector var_floor = (global_var.array() * opts.variance_floor_frac).max(1e-12).matrix();

    GaussianMixture m;
    m.weights = Vector::Constant(k, 1.0 / k);
    m.means = kmeanspp_centers(x, k, rng);
    m.variances = global_var.transpose().replicate(k, 1).cwiseMax(var_floor.transpose().replicate(k, 1));

    FitResult result;
    Matrix x2 = x.array().square();
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        Expansion e = expand(m);
        Matrix lp = component_log_probs(m, x, e); // n x k
        Vector lse = log_sum_exp_rows(lp);
        double ll = lse.sum();
        result.log_likelihood_trace.push_back(ll);

        Matrix resp = (lp.colwise() - lse).array().exp(); // n x k
        Vector nk = resp.colwise().sum();
        nk = nk.cwiseMax(1e-300);

        Matrix mean_new = (resp.transpose() * x).array().colwise() / nk.array();
        Matrix ex2 = (resp.transpose() * x2).array().colwise() / nk.array();
        Matrix var_new = (ex2.array() - mean_new.array().square()).matrix();
        var_new = var_new.cwiseMax(var_floor.transpose().replicate(k, 1));

        Vector w_new = (nk / static_cast<double>(n)).cwiseMax(opts.weight_floor);
        w_new /= w_new.sum();

        m.weights = w_new;
        m.means = mean_new;
        m.variances = var_new;
        if (!m.means.allFinite() || !m.variances.allFinite())
            throw InternalError("gmm fit: non-finite parameters during EM");

        if (iter > 0) {
            double denom = std::max(std::abs(prev_ll), 1e-30);
            if (std::abs(ll - prev_ll) / denom < opts.rel_tol) break;
        }
        prev_ll = ll;
    }

    m.validate();
    result.model = std::move(m);
    return result;
}

double log_pdf(const GaussianMixture& model, const Vector& x) {
    if (x.size() != model.dim()) throw UsageError("gmm log_pdf: dimension mismatch");
    return log_pdf_rows(model, x.transpose())(0);
}

Vector log_pdf_rows(const GaussianMixture& model, const Matrix& x) {
    if (x.cols() != model.dim()) throw UsageError("gmm log_pdf: dimension mismatch");
    Expansion e = expand(model);
    return log_sum_exp_rows(component_log_probs(model, x, e));
}

std::pair<double, double> sequence_score(const ScenePair& pair, const FeatureSequence& features) {
    if (features.size() == 0) throw DataError("sequence_score: empty feature sequence");
    if (features.dim() != pair.in_model.dim() || features.dim() != pair.out_model.dim())
        throw UsageError("sequence_score: feature dimensionality does not match models");
    double in_sum = log_pdf_rows(pair.in_model, features.frames).sum();
    double out_sum = log_pdf_rows(pair.out_model, features.frames).sum();
    return {in_sum, out_sum};
}

} // namespace roomsense::gmm
