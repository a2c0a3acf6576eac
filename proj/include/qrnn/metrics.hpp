#pragma once

#include <cstddef>
#include <vector>

namespace qrnn {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

using Frame = std::vector<Vec3>;         ///< one position per marker
using Trajectory = std::vector<Frame>;   ///< time x markers

/// sqrt of the mean squared Euclidean 3-D error over time x markers, mm.
double rmse(const Trajectory& pred, const Trajectory& truth);

/// rmse divided by the RMS deviation of the truth from its per-channel
/// mean over the evaluated segment; the constant-mean predictor scores 1.
double nrmse(const Trajectory& pred, const Trajectory& truth);

/// Mean Euclidean 3-D error norm over time x markers, mm.
double mae(const Trajectory& pred, const Trajectory& truth);

/// Mean consecutive-step displacement of the prediction, mm. Depends on
/// the prediction only.
double jitter(const Trajectory& pred);

struct MetricValues {
    double rmse = 0.0;
    double nrmse = 0.0;
    double mae = 0.0;
    double jitter = 0.0;
};

MetricValues evaluate_trajectory(const Trajectory& pred, const Trajectory& truth);

struct Ci {
    double mean = 0.0;
    double half_width = 0.0;
};

/// mean +/- t_{0.975, n-1} * sd / sqrt(n) over the values, with sd the
/// 1/n-normalized standard deviation (so {0, 2} gives half-width
/// 12.7062 / sqrt(2)). Needs n >= 2.
Ci ci95(const std::vector<double>& values);

/// Two-sided 95% Student-t critical value t_{0.975, dof}.
double student_t_975(std::size_t dof);

}  // namespace qrnn
