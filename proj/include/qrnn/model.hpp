#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qrnn/activation.hpp"
#include "qrnn/linalg.hpp"

namespace qrnn {

enum class Loss { mse, mcc };

const char* to_string(Loss loss);

/// Handling of the per-involution sums in the hidden-layer update rules.
/// `collapsed` resolves the sums analytically and is the form whose updates
/// match finite differences of the loss; the other two keep alternative
/// literal readings available for comparison.
enum class MuSumVariant {
    collapsed,       ///< sums resolved; updates equal the exact gradient direction
    mu_sum_plain,    ///< literal sum of an invariant summand: hidden-layer terms x4
    mu_sum_rotated,  ///< literal sum of rotated deltas: hidden-layer terms -> 4 Re(delta)
};

const char* to_string(MuSumVariant v);

struct TrainConfig {
    double alpha = 0.05;      ///< learning rate
    double sigma = 1.0;       ///< correntropy kernel size (MCC only)
    double clip_norm = 1.0;   ///< global norm bound on each applied update
    std::size_t window_len = 10;
    Loss loss = Loss::mse;
    /// Layer widths A_0 (input) .. A_L (output); at least one layer.
    std::vector<std::size_t> layers;
    SplitActivation hidden_activation = SplitActivation::tanh;
    SplitActivation output_activation = SplitActivation::identity;
    std::uint64_t seed = 0;
    MuSumVariant variant = MuSumVariant::collapsed;

    void validate() const;
    std::size_t layer_count() const { return layers.empty() ? 0 : layers.size() - 1; }
    SplitActivation activation(std::size_t layer) const {
        return layer + 1 == layer_count() ? output_activation : hidden_activation;
    }
};

/// Per-layer parameters: feedforward W (A_l x A_{l-1}), recurrent U over the
/// layer's own state (A_l x A_l), bias b (A_l).
struct LayerParams {
    QuatMatrix W;
    QuatMatrix U;
    QuatVector b;
};

struct QrnnParams {
    std::vector<LayerParams> layers;

    /// Seeded init: every real component of W and U drawn uniformly from
    /// [-r, r] with r = 1 / sqrt(4 fan_in); biases zero.
    static QrnnParams init(const TrainConfig& cfg);
    static QrnnParams zeros(const std::vector<std::size_t>& dims);

    bool finite() const;
    std::vector<std::size_t> dims() const;
};

/// Forward history over a window: inputs, pre-activations and states per
/// step. States are recomputable from the stored pre-activations.
struct QrnnState {
    std::vector<QuatVector> initial_hidden;        ///< h^(l)(0) per layer
    std::vector<QuatVector> inputs;                ///< v^(0)(n)
    std::vector<std::vector<QuatVector>> pre;      ///< pre[n][l] = f^(l)(n)
    std::vector<std::vector<QuatVector>> hidden;   ///< hidden[n][l] = h^(l)(n)

    /// Empty history with zero initial states shaped for `params`.
    static QrnnState initial(const QrnnParams& params);

    std::size_t steps() const { return inputs.size(); }
    /// Top-layer state at step n (the network output).
    const QuatVector& output(std::size_t n) const { return hidden[n].back(); }
    const QuatVector& output() const { return hidden.back().back(); }
    /// State of `layer` before step n (initial_hidden when n == 0).
    const QuatVector& state_before(std::size_t n, std::size_t layer) const {
        return n == 0 ? initial_hidden[layer] : hidden[n - 1][layer];
    }
};

/// One recurrence step: f^(l)(n) = U^(l) h^(l)(n-1) + W^(l) v^(l-1)(n) + b^(l),
/// h^(l)(n) = Phi(f^(l)(n)), with v^(0)(n) = x. Returns the extended history.
QrnnState forward_step(const QrnnParams& params, const QrnnState& prev, const QuatVector& x,
                       const TrainConfig& cfg);

/// Iterates forward_step over the inputs.
QrnnState forward_window(const QrnnParams& params, const QrnnState& init,
                         const std::vector<QuatVector>& inputs, const TrainConfig& cfg);

/// Error terms per window step and layer; delta[n][l] pairs with f^(l)(n).
struct DeltaSet {
    std::vector<std::vector<QuatVector>> delta;
};

/// Backward recursion for the windowed squared-error loss sum_n |e(n)|^2:
///   delta^(l)(n) = PhiBar(f^(l)(n)) .* [ seed/spatial + temporal ]
/// with the top layer seeded by e(n) = d(n) - h^(L)(n), the spatial term
/// (W^(l+1))^H delta^(l+1)(n), and the temporal term (U^(l))^H delta^(l)(n+1);
/// out-of-range terms are zero. `.*` multiplies matching real components.
DeltaSet compute_deltas_mse(const QrnnParams& params, const QrnnState& state,
                            const std::vector<QuatVector>& targets, const TrainConfig& cfg);

/// Same recursion with each top-layer error seed attenuated by
/// exp(-|e(n)|^2 / (2 sigma^2)), yielding the gradient direction of the
/// windowed correntropy loss -(1/N) sum_n kappa_sigma(e(n)). Converges to
/// the squared-error deltas as sigma grows.
DeltaSet compute_deltas_mcc(const QrnnParams& params, const QrnnState& state,
                            const std::vector<QuatVector>& targets, const TrainConfig& cfg);

/// Raw parameter-shaped update (no learning rate, no clipping):
///   dW^(l) = sum_n dterm^(l)(n) (x) (v^(l-1)(n))^H
///   dU^(l) = sum_n dterm^(l)(n) (x) (h^(l)(n-1))^H
///   db^(l) = sum_n dterm^(l)(n)
/// where dterm applies the configured mu-sum variant to hidden layers.
QrnnParams compute_updates(const QrnnParams& params, const DeltaSet& deltas,
                           const QrnnState& state, const TrainConfig& cfg);

/// params + clip(alpha * compute_updates(...)), clipped to cfg.clip_norm on
/// the global norm of the stacked update.
QrnnParams apply_updates(const QrnnParams& params, const DeltaSet& deltas, const QrnnState& state,
                         const TrainConfig& cfg);

/// Euclidean norm over every real component of the stacked parameter set.
double global_norm(const QrnnParams& params);

/// Rolling input window with a carried entry state. When a sample falls out
/// of the window the entry state advances past it with the current weights,
/// so each unroll starts from the network's streaming state instead of from
/// zero (the truncation only cuts the gradient path, not the state).
class RollingWindow {
public:
    explicit RollingWindow(const QrnnParams& params);

    /// Appends x; if the window already holds `capacity` inputs, first
    /// advances the entry state past the oldest one. Returns whether an
    /// input was evicted.
    bool push(const QrnnParams& params, const TrainConfig& cfg, const QuatVector& x,
              std::size_t capacity);

    /// Forward pass over the buffered inputs from the entry state.
    QrnnState unroll(const QrnnParams& params, const TrainConfig& cfg) const;

    const std::vector<QuatVector>& inputs() const { return inputs_; }

private:
    std::vector<QuatVector> entry_hidden_;
    std::vector<QuatVector> inputs_;
};

/// Online sliding-window trainer. feed() consumes one (input, target) pair,
/// unrolls the window from the carried entry state, returns the pre-update
/// forward output for that window, then updates the weights from the
/// window's deltas.
class QrnnTrainer {
public:
    QrnnTrainer(QrnnParams params, TrainConfig cfg);

    QuatVector feed(const QuatVector& x, const QuatVector& target);

    /// Forward over `inputs` from a zero state with the current weights.
    QuatVector predict(const std::vector<QuatVector>& inputs) const;

    const QrnnParams& params() const { return params_; }
    const TrainConfig& config() const { return cfg_; }
    std::size_t steps_seen() const { return step_; }

private:
    QrnnParams params_;
    TrainConfig cfg_;
    RollingWindow window_;
    std::vector<QuatVector> window_targets_;
    std::size_t step_ = 0;
};

struct TrainResult {
    QrnnParams params;
    std::vector<QuatVector> predictions;  ///< pre-update output per stream step
};

/// Slides a window of length cfg.window_len over the stream; at each pair:
/// forward over the window, emit the prediction, compute deltas per
/// cfg.loss, apply the clipped update. Raises NonFinite (with the step
/// index) if parameters stop being finite.
TrainResult train_online(QrnnParams params,
                         const std::vector<std::pair<QuatVector, QuatVector>>& stream,
                         const TrainConfig& cfg);

/// Direct estimate of the signal `horizon` steps past the end of `history`:
/// forward over the last window_len inputs. The horizon is fixed by how the
/// network was trained (targets shifted by that amount); no iterated rollout.
QuatVector predict_horizon(const QrnnParams& params, const TrainConfig& cfg,
                           const std::vector<QuatVector>& history, std::size_t horizon);

}  // namespace qrnn
