#include "roomsense/dsp.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "roomsense/errors.hpp"

namespace roomsense::dsp {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// n_mel triangular filters over [0, nyquist], evaluated at the spectrogram's
// bin frequencies. Each filter is normalized to unit sum so a spectrally flat
// input yields identical energies in every band.
Matrix mel_filterbank(int n_mel, Eigen::Index n_bins, double bin_hz) {
    double nyquist = static_cast<double>(n_bins - 1) * bin_hz;
    double mel_max = hz_to_mel(nyquist);
    std::vector<double> edges(static_cast<size_t>(n_mel) + 2);
    for (int i = 0; i < n_mel + 2; ++i)
        edges[static_cast<size_t>(i)] = mel_to_hz(mel_max * i / (n_mel + 1));

    Matrix fb = Matrix::Zero(n_mel, n_bins);
    for (int m = 0; m < n_mel; ++m) {
        double lo = edges[static_cast<size_t>(m)];
        double mid = edges[static_cast<size_t>(m) + 1];
        double hi = edges[static_cast<size_t>(m) + 2];
        for (Eigen::Index b = 0; b < n_bins; ++b) {
            double f = static_cast<double>(b) * bin_hz;
            double w = 0.0;
            if (f > lo && f < mid)
                w = (f - lo) / (mid - lo);
            else if (f >= mid && f < hi)
                w = (hi - f) / (hi - mid);
            fb(m, b) = w;
        }
        double sum = fb.row(m).sum();
        if (sum > 0.0) fb.row(m) /= sum;
    }
    return fb;
}

// Orthonormal DCT-II matrix (keep x n).
Matrix dct_matrix(Eigen::Index keep, Eigen::Index n) {
    Matrix d(keep, n);
    double s0 = std::sqrt(1.0 / static_cast<double>(n));
    double sk = std::sqrt(2.0 / static_cast<double>(n));
    for (Eigen::Index k = 0; k < keep; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            d(k, i) = (k == 0 ? s0 : sk) *
                      std::cos(std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) *
                               static_cast<double>(k) / (2.0 * static_cast<double>(n)));
    return d;
}

} // namespace

Eigen::Index next_pow2(Eigen::Index n) {
    Eigen::Index p = 1;
    while (p < n) p <<= 1;
    return p;
}

Vector hamming(Eigen::Index n) {
    Vector w(n);
    if (n == 1) {
        w(0) = 1.0;
        return w;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        w(i) = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(n - 1));
    return w;
}

Spectrogram stft(const AudioClip& clip, double window_s, double hop_s) {
    if (clip.sample_rate <= 0) throw UsageError("stft: sample rate must be positive");
    auto win = static_cast<Eigen::Index>(std::llround(window_s * clip.sample_rate));
    auto hop = static_cast<Eigen::Index>(std::llround(hop_s * clip.sample_rate));
    if (win < 2) throw UsageError("stft: window must cover at least 2 samples");
    if (hop < 1 || hop > win) throw UsageError("stft: hop must be in [1 sample, window]");
    auto n = static_cast<Eigen::Index>(clip.samples.size());
    if (n < win) throw DataError("stft: input too short for one analysis window");
    for (double s : clip.samples)
        if (!std::isfinite(s)) throw DataError("stft: non-finite sample in input");

    Eigen::Index n_frames = (n - win) / hop + 1;
    Eigen::Index nfft = next_pow2(win);
    Eigen::Index n_bins = nfft / 2 + 1;

    Vector window = hamming(win);
    Spectrogram out;
    out.values.resize(n_bins, n_frames);
    out.frame_hop_s = static_cast<double>(hop) / clip.sample_rate;
    out.bin_hz = static_cast<double>(clip.sample_rate) / static_cast<double>(nfft);

    Eigen::FFT<double> fft;
    std::vector<double> frame(static_cast<size_t>(nfft), 0.0);
    std::vector<std::complex<double>> spectrum;
    for (Eigen::Index t = 0; t < n_frames; ++t) {
        Eigen::Index start = t * hop;
        for (Eigen::Index i = 0; i < win; ++i)
            frame[static_cast<size_t>(i)] = clip.samples[static_cast<size_t>(start + i)] * window(i);
        std::fill(frame.begin() + win, frame.end(), 0.0);
        fft.fwd(spectrum, frame);
        for (Eigen::Index b = 0; b < n_bins; ++b)
            out.values(b, t) = std::abs(spectrum[static_cast<size_t>(b)]);
    }
    return out;
}

FeatureSequence mfcc(const Spectrogram& spec, int n_mel, int n_ceps, double log_floor) {
    if (n_ceps < 1 || n_mel < n_ceps || n_mel > spec.bins())
        throw UsageError("mfcc: need 1 <= n_ceps <= n_mel <= frequency bins");
    if (spec.bin_hz <= 0.0) throw UsageError("mfcc: spectrogram lacks bin spacing");

    const Eigen::Index T = spec.frames();
    Matrix fb = mel_filterbank(n_mel, spec.bins(), spec.bin_hz);
    Matrix energies = fb * spec.values; // n_mel x T
    Matrix logged = energies.array().max(log_floor).log().matrix();
    Matrix statics = dct_matrix(n_ceps, n_mel) * logged; // n_ceps x T

    // Delta coefficients by +/-2 frame linear regression, edges replicated.
    auto clamp_t = [T](Eigen::Index t) { return std::clamp<Eigen::Index>(t, 0, T - 1); };
    Matrix deltas(n_ceps, T);
    for (Eigen::Index t = 0; t < T; ++t)
        deltas.col(t) = (statics.col(clamp_t(t + 1)) - statics.col(clamp_t(t - 1)) +
                         2.0 * (statics.col(clamp_t(t + 2)) - statics.col(clamp_t(t - 2)))) /
                        10.0;

    FeatureSequence seq;
    seq.frames.resize(T, 2 * n_ceps);
    seq.frames.leftCols(n_ceps) = statics.transpose();
    seq.frames.rightCols(n_ceps) = deltas.transpose();
    return seq;
}

Matrix dct_rows(const Matrix& m, Eigen::Index keep) {
    if (keep < 1 || keep > m.cols()) throw UsageError("dct_rows: keep must be in [1, row length]");
    return m * dct_matrix(keep, m.cols()).transpose();
}

Matrix idct_rows(const Matrix& coeffs) {
    return coeffs * dct_matrix(coeffs.cols(), coeffs.cols());
}

} // namespace roomsense::dsp
