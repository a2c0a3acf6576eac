#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qrnn/model.hpp"
#include "qrnn/quat.hpp"

namespace qrnn {

/// Dense row-major real matrix (baseline networks only).
class RealMatrix {
public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using RealVector = std::vector<double>;

struct RealRnnConfig {
    double alpha = 0.05;
    double sigma = 1.0;  ///< real kernel size (MCC only)
    double clip_norm = 1.0;
    std::size_t window_len = 10;
    Loss loss = Loss::mse;
    std::vector<std::size_t> layers;  ///< widths A_0 (input) .. A_L
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t layer_count() const { return layers.empty() ? 0 : layers.size() - 1; }
    /// tanh on hidden layers, linear output.
    bool output_layer(std::size_t layer) const { return layer + 1 == layer_count(); }
};

struct RealLayerParams {
    RealMatrix W;
    RealMatrix U;
    RealVector b;
};

struct RealRnnParams {
    std::vector<RealLayerParams> layers;

    static RealRnnParams init(const RealRnnConfig& cfg);
    static RealRnnParams zeros(const std::vector<std::size_t>& dims);
    bool finite() const;
    std::vector<std::size_t> dims() const;
};

struct RealRnnState {
    std::vector<RealVector> initial_hidden;
    std::vector<RealVector> inputs;
    std::vector<std::vector<RealVector>> pre;
    std::vector<std::vector<RealVector>> hidden;

    static RealRnnState initial(const RealRnnParams& params);
    std::size_t steps() const { return inputs.size(); }
    const RealVector& output(std::size_t n) const { return hidden[n].back(); }
    const RealVector& output() const { return hidden.back().back(); }
};

RealRnnState rnn_forward_step(const RealRnnParams& params, const RealRnnState& prev,
                              const RealVector& x, const RealRnnConfig& cfg);
RealRnnState rnn_forward_window(const RealRnnParams& params, const RealRnnState& init,
                                const std::vector<RealVector>& inputs, const RealRnnConfig& cfg);

struct RealDeltaSet {
    std::vector<std::vector<RealVector>> delta;
};

/// Windowed backward recursion. MSE seeds e_c(n); MCC seeds
/// e_c(n) exp(-e_c(n)^2 / (2 sigma^2)) per output channel, matching the
/// per-channel real kernel summed over channels.
RealDeltaSet rnn_compute_deltas(const RealRnnParams& params, const RealRnnState& state,
                                const std::vector<RealVector>& targets, const RealRnnConfig& cfg);

RealRnnParams rnn_compute_updates(const RealRnnParams& params, const RealDeltaSet& deltas,
                                  const RealRnnState& state);
RealRnnParams rnn_apply_updates(const RealRnnParams& params, const RealDeltaSet& deltas,
                                const RealRnnState& state, const RealRnnConfig& cfg);

/// Real windowed-RTRL MCC/MSE loss over one window (gradient-check target).
double rnn_window_loss(const RealRnnParams& params, const std::vector<RealVector>& inputs,
                       const std::vector<RealVector>& targets, const RealRnnConfig& cfg);

/// Real counterpart of the quaternion rolling window: carried entry state,
/// unroll from it over the buffered inputs.
class RealRollingWindow {
public:
    explicit RealRollingWindow(const RealRnnParams& params);

    bool push(const RealRnnParams& params, const RealRnnConfig& cfg, const RealVector& x,
              std::size_t capacity);
    RealRnnState unroll(const RealRnnParams& params, const RealRnnConfig& cfg) const;
    const std::vector<RealVector>& inputs() const { return inputs_; }

private:
    std::vector<RealVector> entry_hidden_;
    std::vector<RealVector> inputs_;
};

class RealRnnTrainer {
public:
    RealRnnTrainer(RealRnnParams params, RealRnnConfig cfg);

    RealVector feed(const RealVector& x, const RealVector& target);
    RealVector predict(const std::vector<RealVector>& inputs) const;

    const RealRnnParams& params() const { return params_; }

private:
    RealRnnParams params_;
    RealRnnConfig cfg_;
    RealRollingWindow window_;
    std::vector<RealVector> window_targets_;
    std::size_t step_ = 0;
};

struct RealTrainResult {
    RealRnnParams params;
    std::vector<RealVector> predictions;
};

RealTrainResult rnn_train_online(RealRnnParams params,
                                 const std::vector<std::pair<RealVector, RealVector>>& stream,
                                 const RealRnnConfig& cfg);

/// Quaternion LMS filter. Prediction y = sum_t conj(w_t) (x) x_t; update
/// w_t <- w_t + eta x_t (x) conj(e) with e = d - y (exact steepest descent
/// on |e|^2 per real component, rate folded into eta). On data with zero
/// imaginary parts this reduces to the real LMS recursion exactly.
class QuatLmsFilter {
public:
    QuatLmsFilter(std::size_t taps, double eta);

    Quaternion predict(const QuatVector& x) const;
    /// Returns the pre-update prediction, then adapts the weights.
    Quaternion step(const QuatVector& x, const Quaternion& d);

    const QuatVector& weights() const { return w_; }
    void set_weights(QuatVector w);
    double eta() const { return eta_; }

private:
    QuatVector w_;
    double eta_;
};

/// Classical LMS: y = w . x, w <- w + eta e x.
class LmsFilter {
public:
    LmsFilter(std::size_t taps, double eta);

    double predict(const RealVector& x) const;
    double step(const RealVector& x, double d);

    const RealVector& weights() const { return w_; }
    double eta() const { return eta_; }

private:
    RealVector w_;
    double eta_;
};

}  // namespace qrnn
