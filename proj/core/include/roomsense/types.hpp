#pragma once

#include <Eigen/Dense>
#include <vector>

namespace roomsense {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Mono audio, samples in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;

    double duration_s() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// F x T non-negative magnitude matrix. Rows are frequency bins, columns are frames.
struct Spectrogram {
    Matrix values;
    double frame_hop_s = 0.0;
    double bin_hz = 0.0;

    Eigen::Index bins() const { return values.rows(); }
    Eigen::Index frames() const { return values.cols(); }
};

// T' x D per-frame feature vectors (rows are frames).
struct FeatureSequence {
    Matrix frames;

    Eigen::Index size() const { return frames.rows(); }
    Eigen::Index dim() const { return frames.cols(); }
};

} // namespace roomsense
