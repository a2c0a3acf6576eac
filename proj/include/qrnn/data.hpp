#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qrnn/linalg.hpp"

namespace qrnn {

enum class BreathingLabel { unlabeled, regular, irregular };

const char* to_string(BreathingLabel label);

/// Timestamped positions of three chest markers, mm per axis, uniformly
/// sampled.
struct MarkerSeries {
    double sample_rate_hz = 10.0;
    std::vector<double> timestamps;                          ///< seconds
    std::vector<std::array<std::array<double, 3>, 3>> positions;  ///< [t][marker][axis]
    BreathingLabel label = BreathingLabel::unlabeled;

    std::size_t size() const { return positions.size(); }
    double duration_s() const { return static_cast<double>(size()) / sample_rate_hz; }
};

/// Width-3 pure-quaternion view of a marker series: one pure quaternion per
/// marker per step, real part exactly zero.
struct QuatSeries {
    std::vector<QuatVector> frames;  ///< [t][marker]

    std::size_t size() const { return frames.size(); }
    std::size_t width() const { return frames.empty() ? 0 : frames.front().size(); }
};

/// CSV schema: optional "# label=regular|irregular" comment line, then a
/// header "time,m1x,m1y,m1z,m2x,m2y,m2z,m3x,m3y,m3z", then one row per
/// sample. Rejects gaps and non-uniform sampling.
MarkerSeries load_csv(const std::string& path);
void save_csv(const std::string& path, const MarkerSeries& series);

/// (x, y, z) mm -> xi + yj + zk per marker.
QuatSeries encode_pure_quaternion(const MarkerSeries& series);
/// Inverse of the embedding (drops timestamps; sample rate supplied).
MarkerSeries decode_positions(const QuatSeries& series, double sample_rate_hz,
                              BreathingLabel label = BreathingLabel::unlabeled);

struct SplitSpec {
    double train_s = 30.0;
    double validation_s = 30.0;
};

struct SplitIndices {
    std::size_t train_end = 0;  ///< [0, train_end) trains
    std::size_t val_end = 0;    ///< [train_end, val_end) validates; rest tests
};

SplitIndices compute_split(std::size_t length, double sample_rate_hz, const SplitSpec& spec);

/// Per-channel affine standardization (channel = marker x axis), statistics
/// from the training window only. A channel whose std falls below 1e-9
/// passes through with unit scale and zero offset.
struct NormStats {
    std::array<std::array<double, 3>, 3> mean{};
    std::array<std::array<double, 3>, 3> scale{};  ///< divisor per channel

    QuatVector apply(const QuatVector& frame) const;
    QuatVector invert(const QuatVector& frame) const;
};

std::pair<QuatSeries, NormStats> normalize(const QuatSeries& series, std::size_t train_len);

struct Window {
    std::vector<QuatVector> inputs;  ///< samples [n-l+1 .. n]
    QuatVector target;               ///< sample at n + H
};

/// Sliding regressor windows advancing by one step; yields
/// length - l - horizon windows.
std::vector<Window> make_windows(const QuatSeries& series, std::size_t regressor_len,
                                 std::size_t horizon);

/// Synthetic breathing-like generator: per axis a sum of harmonics around a
/// base respiratory frequency, slow drift, Gaussian noise, and sparse
/// impulsive outliers. Base signal, noise, and outliers draw from
/// independent seeded streams, so regenerating with a different
/// outlier_rate changes only the corrupted steps.
struct SynthConfig {
    double duration_s = 180.0;
    double sample_rate_hz = 10.0;
    int harmonics = 2;              ///< 1..3 partials per axis
    double drift_mm_per_s = 0.01;
    double noise_mm = 0.3;          ///< Gaussian position noise
    double outlier_rate = 0.0;      ///< per-step Bernoulli probability
    double outlier_scale = 8.0;     ///< impulse amplitude, x channel RMS
    std::uint64_t seed = 0;
    BreathingLabel label = BreathingLabel::regular;  ///< irregular adds bursts
};

MarkerSeries synth_breathing(const SynthConfig& cfg);

}  // namespace qrnn
