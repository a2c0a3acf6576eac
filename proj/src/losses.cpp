#include "qrnn/losses.hpp"

#include <cmath>
#include <numbers>

#include "qrnn/errors.hpp"

namespace qrnn {

namespace {
constexpr double kSqrt2Pi = 2.5066282746310002;
}

KernelConfig::KernelConfig(double sigma_) : sigma(sigma_) {
    if (!(sigma > 0.0)) raise(ErrorKind::config_error, "kernel size sigma must be > 0");
}

double mse_loss(const QuatVector& e) { return norm_squared(e); }

double quat_gauss_kernel(const Quaternion& x, const Quaternion& y, const KernelConfig& cfg) {
    double s = modulus_squared(x - y);
    return 4.0 / (kSqrt2Pi * cfg.sigma) * std::exp(-s / (2.0 * cfg.sigma * cfg.sigma));
}

double real_gauss_kernel(double x, double y, const KernelConfig& cfg) {
    double d = x - y;
    return 1.0 / (kSqrt2Pi * cfg.sigma) * std::exp(-d * d / (2.0 * cfg.sigma * cfg.sigma));
}

double quat_gauss_kernel_vec(const QuatVector& error, const KernelConfig& cfg) {
    double s = norm_squared(error);
    return 4.0 / (kSqrt2Pi * cfg.sigma) * std::exp(-s / (2.0 * cfg.sigma * cfg.sigma));
}

double empirical_correntropy(const std::vector<QuatVector>& d, const std::vector<QuatVector>& h,
                             const KernelConfig& cfg) {
    if (d.size() != h.size())
        raise(ErrorKind::length_mismatch, "empirical_correntropy: sequence lengths differ");
    if (d.empty()) raise(ErrorKind::length_mismatch, "empirical_correntropy: empty sequences");
    double acc = 0.0;
    for (std::size_t n = 0; n < d.size(); ++n) {
        if (d[n].size() != h[n].size())
            raise(ErrorKind::length_mismatch, "empirical_correntropy: vector widths differ");
        QuatVector e(d[n].size());
        for (std::size_t m = 0; m < e.size(); ++m) e[m] = d[n][m] - h[n][m];
        acc += quat_gauss_kernel_vec(e, cfg);
    }
    return acc / static_cast<double>(d.size());
}

double mcc_loss(const std::vector<QuatVector>& errors, const KernelConfig& cfg) {
    if (errors.empty()) raise(ErrorKind::empty_sequence, "mcc_loss: empty error sequence");
    double acc = 0.0;
    for (const auto& e : errors) acc += quat_gauss_kernel_vec(e, cfg);
    return -acc / static_cast<double>(errors.size());
}

double mcc_error_weight(const QuatVector& e, const KernelConfig& cfg) {
    return std::exp(-norm_squared(e) / (2.0 * cfg.sigma * cfg.sigma));
}

}  // namespace qrnn
