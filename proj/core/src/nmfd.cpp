#include "roomsense/nmfd.hpp"

#include <cmath>
#include <random>

#include "roomsense/dsp.hpp"
#include "roomsense/errors.hpp"

namespace roomsense::nmfd {
namespace {

void check_config(const NmfdConfig& cfg) {
    if (cfg.k < 1) throw UsageError("nmfd: K must be >= 1");
    if (cfg.max_iters < 1) throw UsageError("nmfd: max_iters must be >= 1");
    if (cfg.lambda < 0.0) throw UsageError("nmfd: lambda must be >= 0");
    if (!(cfg.p > 0.0 && cfg.p <= 2.0)) throw UsageError("nmfd: p must be in (0, 2]");
}

} // namespace

Matrix reconstruct(const Matrix& source, const Matrix& rir) {
    const Eigen::Index T = source.cols();
    const Eigen::Index K = rir.cols();
    Matrix y = Matrix::Zero(source.rows(), T);
    for (Eigen::Index k = 0; k < K && k < T; ++k)
        y.rightCols(T - k).array() +=
            source.leftCols(T - k).array().colwise() * rir.col(k).array();
    return y;
}

double objective(const Matrix& x, const Matrix& y, const Matrix& source, const NmfdConfig& cfg) {
    if (x.rows() != y.rows() || x.cols() != y.cols())
        throw UsageError("nmfd objective: X and Y shapes differ");
    double kl = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            double xv = x(i, j);
            double yv = y(i, j);
            if (xv > 0.0) kl += xv * std::log(xv / std::max(yv, cfg.eps)) - xv;
            kl += yv;
        }
    }
    double sparsity = 0.0;
    if (cfg.lambda > 0.0) sparsity = cfg.lambda * source.array().pow(cfg.p).sum();
    return kl + sparsity;
}

NmfdResult estimate_rir(const Matrix& x, const NmfdConfig& cfg) {
    check_config(cfg);
    const Eigen::Index F = x.rows();
    const Eigen::Index T = x.cols();
    const Eigen::Index K = cfg.k;
    if (F < 1 || T < 1) throw UsageError("nmfd: empty input spectrogram");
    if (T < K) throw UsageError("nmfd: need at least K frames of input");
    if ((x.array() < 0.0).any() || !x.allFinite())
        throw DataError("nmfd: input must be non-negative and finite");
    if (x.maxCoeff() <= 0.0) throw DataError("nmfd: degenerate input (all zero)");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> init(0.1, 1.0);
    Matrix s(F, T);
    Matrix r(F, K);
    for (Eigen::Index j = 0; j < T; ++j)
        for (Eigen::Index i = 0; i < F; ++i) s(i, j) = init(rng);
    for (Eigen::Index j = 0; j < K; ++j)
        for (Eigen::Index i = 0; i < F; ++i) r(i, j) = init(rng);

    NmfdResult result;
    result.objective_trace.reserve(static_cast<size_t>(cfg.max_iters));

    Matrix y = reconstruct(s, r);
    Matrix num(F, T), den(F, T), ratio(F, T);
    double prev_obj = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        // Source update.
        num.setZero();
        den.setZero();
        for (Eigen::Index k = 0; k < K; ++k) {
            num.leftCols(T - k).array() += x.rightCols(T - k).array().colwise() * r.col(k).array();
            den.leftCols(T - k).array() += y.rightCols(T - k).array().colwise() * r.col(k).array();
        }
        if (cfg.lambda > 0.0)
            den.array() += cfg.lambda * s.array().pow(cfg.p - 1.0);
        s.array() *= num.array() / den.array().max(cfg.eps);

        // RIR update against the refreshed reconstruction.
        y = reconstruct(s, r);
        ratio = x.array() / y.array().max(cfg.eps);
        for (Eigen::Index k = 0; k < K; ++k) {
            Vector upd_num = (ratio.rightCols(T - k).array() * s.leftCols(T - k).array())
                                 .rowwise()
                                 .sum();
            Vector upd_den = s.leftCols(T - k).rowwise().sum();
            r.col(k).array() *= upd_num.array() / upd_den.array().max(cfg.eps);
        }

        y = reconstruct(s, r);
        double obj = objective(x, y, s, cfg);
        if (!std::isfinite(obj) || !s.allFinite() || !r.allFinite())
            throw InternalError("nmfd: non-finite iterate at iteration " + std::to_string(iter));
        result.objective_trace.push_back(obj);
        result.iterations = iter + 1;

        if (std::isfinite(prev_obj)) {
            double denom = std::max(std::abs(prev_obj), 1e-30);
            if (std::abs(prev_obj - obj) / denom < cfg.rel_tol) break;
        }
        prev_obj = obj;
    }

    // Resolve the S*R gain ambiguity: scale so the direct-path column peaks
    // at 1, folding the inverse into the source.
    double scale = r.col(0).maxCoeff();
    if (scale <= 0.0) scale = r.maxCoeff();
    if (scale > 0.0) {
        r /= scale;
        s *= scale;
    }

    result.source = std::move(s);
    result.rir = std::move(r);
    return result;
}

NmfdResult estimate_rir(const Spectrogram& x, const NmfdConfig& cfg) {
    return estimate_rir(x.values, cfg);
}

Vector parametrize_rir(const Matrix& rir, int n_ceps, DctAxis axis, double log_floor) {
    Matrix logged = rir.array().max(log_floor).log().matrix();
    Matrix compressed;
    if (axis == DctAxis::Frequency) {
        if (rir.rows() < n_ceps)
            throw UsageError("parametrize_rir: need at least n_ceps frequency rows");
        // Column spectra become rows so the DCT runs along frequency, then
        // transpose back to (n_ceps x K) to keep the tail-frame ordering.
        compressed = dsp::dct_rows(logged.transpose(), n_ceps).transpose();
    } else {
        if (rir.cols() < n_ceps)
            throw UsageError("parametrize_rir: need at least n_ceps tail frames");
        compressed = dsp::dct_rows(logged, n_ceps);
    }
    Vector out(compressed.size());
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < compressed.rows(); ++i)
        for (Eigen::Index j = 0; j < compressed.cols(); ++j) out(idx++) = compressed(i, j);
    return out;
}

std::string to_string(DctAxis axis) {
    return axis == DctAxis::Frequency ? "frequency" : "time";
}

DctAxis dct_axis_from_string(const std::string& s) {
    if (s == "frequency") return DctAxis::Frequency;
    if (s == "time") return DctAxis::Time;
    throw UsageError("unknown RIR DCT axis: " + s);
}

} // namespace roomsense::nmfd
