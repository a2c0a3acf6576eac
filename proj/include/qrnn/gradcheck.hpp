#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qrnn/baselines.hpp"
#include "qrnn/model.hpp"
#include "qrnn/quat.hpp"

namespace qrnn {

/// One checked real component: the scaled analytic prediction of the
/// numeric partial, side by side.
struct GradCheckEntry {
    std::string name;
    double analytic = 0.0;  ///< -scale * raw update component
    double numeric = 0.0;   ///< central-difference partial of the loss
    double abs_error = 0.0;
    double rel_error = 0.0;
};

/// Result of comparing a model's raw updates against numeric partials.
///
/// The raw window updates are proportional to the negated loss gradient;
/// `scale` is the least-squares factor mapping the update onto -gradient.
/// The recursions seed with the error e rather than the component gradient
/// 2e, so `scale` carries a structural factor of 2 for every loss;
/// `loss_prefactor` divides that out, leaving the loss-specific constant
/// that the update rules absorb into the learning rate (1 for the squared
/// error window loss, 2/(N sqrt(2 pi) sigma^3) for the correntropy loss).
struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_error = 0.0;
    double scale = 0.0;
    double loss_prefactor = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    std::string to_csv() const;
    std::string summary() const;
};

/// Central-difference partials of `loss` with respect to every entry of
/// `params`: (L(+h) - L(-h)) / (2h). Raises NonFinite naming the offending
/// perturbation if the loss stops being finite.
std::vector<double> numeric_partials(const std::function<double(const std::vector<double>&)>& loss,
                                     const std::vector<double>& params, double step);

/// Numeric realization of the left derivative of a real-valued function of
/// one quaternion with respect to q^mu:
///   (1/4) (df/da - df/db i^mu - df/dc j^mu - df/dd k^mu)
/// assembled from central-difference partials.
Quaternion ghr_numeric(const std::function<double(const Quaternion&)>& loss, const Quaternion& q,
                       Involution mu, double step);

struct GradCheckCase {
    std::vector<std::size_t> layers = {2, 3, 1};
    std::size_t window_len = 3;
    Loss loss = Loss::mse;
    double sigma = 1.0;
    SplitActivation hidden_activation = SplitActivation::tanh;
    SplitActivation output_activation = SplitActivation::identity;
    MuSumVariant variant = MuSumVariant::collapsed;
    std::uint64_t seed = 0;
    double step = 1e-6;
    double tolerance = 1e-5;
};

/// Runs the delta/update pipeline of the quaternion network on a seeded
/// random window and compares against numeric partials of the window loss,
/// scale-normalized as described on GradCheckReport.
GradCheckReport check_qrnn_gradients(const GradCheckCase& c);

/// Same check for the real-valued baseline network.
GradCheckReport check_rnn_gradients(const GradCheckCase& c);

/// Window loss evaluated from scratch (forward from zero state), the
/// function the checks differentiate. Exposed for tests.
double qrnn_window_loss(const QrnnParams& params, const std::vector<QuatVector>& inputs,
                        const std::vector<QuatVector>& targets, const TrainConfig& cfg);

/// Parameter flattening used by the checks (component order: per layer,
/// W row-major then U then b; four components per quaternion entry).
std::vector<double> flatten(const QrnnParams& params);
QrnnParams unflatten(const std::vector<double>& flat, const std::vector<std::size_t>& dims);
std::vector<double> flatten(const RealRnnParams& params);
RealRnnParams unflatten_real(const std::vector<double>& flat, const std::vector<std::size_t>& dims);

}  // namespace qrnn
