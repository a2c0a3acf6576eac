#pragma once

#include <vector>

#include "qrnn/linalg.hpp"

namespace qrnn {

/// Gaussian kernel bandwidth. sigma must be strictly positive.
struct KernelConfig {
    double sigma;

    explicit KernelConfig(double sigma_);
};

/// Sum of squared moduli over the error vector's entries (equivalently,
/// the squared Euclidean norm of the underlying real components).
double mse_loss(const QuatVector& e);

/// Gaussian kernel for quaternion arguments:
///   (4 / (sqrt(2 pi) sigma)) exp(-|x - y|^2 / (2 sigma^2)).
/// The factor of 4 normalizes for the four components relative to the
/// single-component real kernel.
double quat_gauss_kernel(const Quaternion& x, const Quaternion& y, const KernelConfig& cfg);

/// Real Gaussian kernel (1 / (sqrt(2 pi) sigma)) exp(-(x-y)^2 / (2 sigma^2)).
double real_gauss_kernel(double x, double y, const KernelConfig& cfg);

/// Kernel of a vector-valued error at one time step: |e|^2 is the total
/// over all entries of the vector.
double quat_gauss_kernel_vec(const QuatVector& error, const KernelConfig& cfg);

/// (1/N) sum_n kernel(d(n) - h(n)) over equal-length sequences.
double empirical_correntropy(const std::vector<QuatVector>& d, const std::vector<QuatVector>& h,
                             const KernelConfig& cfg);

/// Training loss -(1/N) sum_n kernel(e(n)); bounded in
/// (-4 / (sqrt(2 pi) sigma), 0).
double mcc_loss(const std::vector<QuatVector>& errors, const KernelConfig& cfg);

/// Per-step attenuation exp(-|e|^2 / (2 sigma^2)) in (0, 1], applied to the
/// error signal in the correntropy delta recursion.
double mcc_error_weight(const QuatVector& e, const KernelConfig& cfg);

}  // namespace qrnn
