#include "qrnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qrnn/errors.hpp"
#include "qrnn/losses.hpp"

namespace qrnn {

const char* to_string(Loss loss) { return loss == Loss::mse ? "mse" : "mcc"; }

const char* to_string(MuSumVariant v) {
    switch (v) {
        case MuSumVariant::collapsed: return "collapsed";
        case MuSumVariant::mu_sum_plain: return "mu-sum-plain";
        case MuSumVariant::mu_sum_rotated: return "mu-sum-rotated";
    }
    return "collapsed";
}

void TrainConfig::validate() const {
    if (!(alpha > 0.0)) raise(ErrorKind::config_error, "alpha must be > 0");
    if (!(sigma > 0.0)) raise(ErrorKind::config_error, "sigma must be > 0");
    if (!(clip_norm > 0.0)) raise(ErrorKind::config_error, "clip_norm must be > 0");
    if (window_len < 1) raise(ErrorKind::config_error, "window_len must be >= 1");
    if (layers.size() < 2) raise(ErrorKind::config_error, "need input and output layer widths");
    for (auto w : layers)
        if (w == 0) raise(ErrorKind::config_error, "layer widths must be positive");
}

QrnnParams QrnnParams::zeros(const std::vector<std::size_t>& dims) {
    QrnnParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        LayerParams lp;
        lp.W = QuatMatrix(dims[l + 1], dims[l]);
        lp.U = QuatMatrix(dims[l + 1], dims[l + 1]);
        lp.b = QuatVector(dims[l + 1]);
        p.layers.push_back(std::move(lp));
    }
    return p;
}

QrnnParams QrnnParams::init(const TrainConfig& cfg) {
    cfg.validate();
    QrnnParams p = zeros(cfg.layers);
    std::mt19937_64 rng(cfg.seed);
    auto fill = [&rng](QuatMatrix& m, std::size_t fan_in) {
        double r = 1.0 / std::sqrt(4.0 * static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-r, r);
        for (auto& q : m.data()) q = {dist(rng), dist(rng), dist(rng), dist(rng)};
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        fill(p.layers[l].W, cfg.layers[l]);
        fill(p.layers[l].U, cfg.layers[l + 1]);
    }
    return p;
}

bool QrnnParams::finite() const {
    for (const auto& lp : layers)
        if (!lp.W.finite() || !lp.U.finite() || !all_finite(lp.b)) return false;
    return true;
}

std::vector<std::size_t> QrnnParams::dims() const {
    std::vector<std::size_t> d;
    if (layers.empty()) return d;
    d.push_back(layers.front().W.cols());
    for (const auto& lp : layers) d.push_back(lp.W.rows());
    return d;
}

QrnnState QrnnState::initial(const QrnnParams& params) {
    QrnnState s;
    for (const auto& lp : params.layers) s.initial_hidden.emplace_back(lp.W.rows());
    return s;
}

QrnnState forward_step(const QrnnParams& params, const QrnnState& prev, const QuatVector& x,
                       const TrainConfig& cfg) {
    if (params.layers.empty()) raise(ErrorKind::config_error, "empty parameter set");
    if (x.size() != params.layers.front().W.cols()) {
        std::ostringstream msg;
        msg << "input width " << x.size() << " does not match input layer "
            << params.layers.front().W.cols();
        raise(ErrorKind::dimension_mismatch, msg.str());
    }

    QrnnState next = prev;
    std::size_t n = next.steps();
    next.inputs.push_back(x);
    next.pre.emplace_back();
    next.hidden.emplace_back();

    const QuatVector* below = &next.inputs[n];
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const LayerParams& lp = params.layers[l];
        const QuatVector& recur = n == 0 ? next.initial_hidden[l] : next.hidden[n - 1][l];
        QuatVector f = add(add(matvec(lp.U, recur), matvec(lp.W, *below)), lp.b);
        next.hidden[n].push_back(activate(cfg.activation(l), f));
        next.pre[n].push_back(std::move(f));
        below = &next.hidden[n][l];
    }
    return next;
}

QrnnState forward_window(const QrnnParams& params, const QrnnState& init,
                         const std::vector<QuatVector>& inputs, const TrainConfig& cfg) {
    if (inputs.empty()) raise(ErrorKind::empty_sequence, "forward_window: no inputs");
    QrnnState state = init;
    for (const auto& x : inputs) state = forward_step(params, state, x, cfg);
    return state;
}

namespace {

// Shared backward recursion. mcc_weights is empty for the squared-error
// loss, otherwise the per-step seed attenuation.
DeltaSet backward(const QrnnParams& params, const QrnnState& state,
                  const std::vector<QuatVector>& targets, const TrainConfig& cfg,
                  const std::vector<double>& mcc_weights) {
    std::size_t steps = state.steps();
    std::size_t num_layers = params.layers.size();
    if (targets.size() != steps)
        raise(ErrorKind::dimension_mismatch, "targets length does not match window length");
    for (std::size_t n = 0; n < steps; ++n)
        if (targets[n].size() != params.layers.back().W.rows())
            raise(ErrorKind::dimension_mismatch, "target width does not match output layer");

    std::vector<QuatMatrix> W_h(num_layers), U_h(num_layers);
    for (std::size_t l = 0; l < num_layers; ++l) {
        W_h[l] = hermitian(params.layers[l].W);
        U_h[l] = hermitian(params.layers[l].U);
    }

    DeltaSet out;
    out.delta.assign(steps, std::vector<QuatVector>(num_layers));
    for (std::size_t ni = steps; ni-- > 0;) {
        for (std::size_t li = num_layers; li-- > 0;) {
            QuatVector acc;
            if (li + 1 == num_layers) {
                const QuatVector& y = state.output(ni);
                QuatVector e(y.size());
                for (std::size_t m = 0; m < y.size(); ++m) e[m] = targets[ni][m] - y[m];
                if (!mcc_weights.empty()) e = scale(e, mcc_weights[ni]);
                acc = std::move(e);
            } else {
                acc = matvec(W_h[li + 1], out.delta[ni][li + 1]);
            }
            if (ni + 1 < steps) acc = add(acc, matvec(U_h[li], out.delta[ni + 1][li]));
            out.delta[ni][li] =
                componentwise_mul(pseudo_derivative(cfg.activation(li), state.pre[ni][li]), acc);
        }
    }
    return out;
}

}  // namespace

DeltaSet compute_deltas_mse(const QrnnParams& params, const QrnnState& state,
                            const std::vector<QuatVector>& targets, const TrainConfig& cfg) {
    if (cfg.loss != Loss::mse) raise(ErrorKind::config_error, "config loss is not mse");
    return backward(params, state, targets, cfg, {});
}

DeltaSet compute_deltas_mcc(const QrnnParams& params, const QrnnState& state,
                            const std::vector<QuatVector>& targets, const TrainConfig& cfg) {
    if (cfg.loss != Loss::mcc) raise(ErrorKind::config_error, "config loss is not mcc");
    if (targets.size() != state.steps())
        raise(ErrorKind::dimension_mismatch, "targets length does not match window length");
    KernelConfig kernel(cfg.sigma);
    std::vector<double> weights(state.steps());
    for (std::size_t n = 0; n < state.steps(); ++n) {
        const QuatVector& y = state.output(n);
        if (targets[n].size() != y.size())
            raise(ErrorKind::dimension_mismatch, "target width does not match output layer");
        QuatVector e(y.size());
        for (std::size_t m = 0; m < y.size(); ++m) e[m] = targets[n][m] - y[m];
        weights[n] = mcc_error_weight(e, kernel);
    }
    return backward(params, state, targets, cfg, weights);
}

namespace {

Quaternion mu_sum_term(const Quaternion& delta, MuSumVariant variant, bool hidden_layer) {
    if (!hidden_layer) return delta;
    switch (variant) {
        case MuSumVariant::collapsed:
            return delta;
        case MuSumVariant::mu_sum_plain:
            return delta * 4.0;
        case MuSumVariant::mu_sum_rotated: {
            Quaternion acc;
            for (Involution mu : kInvolutions) acc += rotate(delta, mu);
            return acc;  // equals 4 Re(delta)
        }
    }
    return delta;
}

}  // namespace

QrnnParams compute_updates(const QrnnParams& params, const DeltaSet& deltas,
                           const QrnnState& state, const TrainConfig& cfg) {
    std::size_t steps = state.steps();
    std::size_t num_layers = params.layers.size();
    if (deltas.delta.size() != steps)
        raise(ErrorKind::dimension_mismatch, "delta set does not match window length");

    QrnnParams grad = QrnnParams::zeros(params.dims());
    for (std::size_t li = 0; li < num_layers; ++li) {
        bool hidden_layer = li + 1 < num_layers;
        QuatMatrix& dW = grad.layers[li].W;
        QuatMatrix& dU = grad.layers[li].U;
        QuatVector& db = grad.layers[li].b;
        for (std::size_t n = 0; n < steps; ++n) {
            const QuatVector& d = deltas.delta[n][li];
            const QuatVector& below = li == 0 ? state.inputs[n] : state.hidden[n][li - 1];
            const QuatVector& recur = state.state_before(n, li);
            for (std::size_t a = 0; a < d.size(); ++a) {
                Quaternion term = mu_sum_term(d[a], cfg.variant, hidden_layer);
                for (std::size_t bcol = 0; bcol < below.size(); ++bcol)
                    dW(a, bcol) += hamilton_mul(term, conjugate(below[bcol]));
                for (std::size_t bcol = 0; bcol < recur.size(); ++bcol)
                    dU(a, bcol) += hamilton_mul(term, conjugate(recur[bcol]));
                db[a] += term;
            }
        }
    }
    return grad;
}

double global_norm(const QrnnParams& params) {
    // scaled accumulation so the squares cannot overflow for large
    // (but finite) update magnitudes
    double max_abs = 0.0;
    auto scan = [&max_abs](const Quaternion& q) {
        max_abs = std::max({max_abs, std::abs(q.a), std::abs(q.b), std::abs(q.c), std::abs(q.d)});
    };
    for (const auto& lp : params.layers) {
        for (const auto& q : lp.W.data()) scan(q);
        for (const auto& q : lp.U.data()) scan(q);
        for (const auto& q : lp.b) scan(q);
    }
    if (max_abs == 0.0) return 0.0;
    if (!std::isfinite(max_abs)) return max_abs;
    double inv = 1.0 / max_abs;
    double acc = 0.0;
    auto add = [&acc, inv](const Quaternion& q) {
        acc += modulus_squared(q * inv);
    };
    for (const auto& lp : params.layers) {
        for (const auto& q : lp.W.data()) add(q);
        for (const auto& q : lp.U.data()) add(q);
        for (const auto& q : lp.b) add(q);
    }
    return max_abs * std::sqrt(acc);
}

QrnnParams apply_updates(const QrnnParams& params, const DeltaSet& deltas, const QrnnState& state,
                         const TrainConfig& cfg) {
    QrnnParams update = compute_updates(params, deltas, state, cfg);
    for (auto& lp : update.layers) {
        for (auto& q : lp.W.data()) q = q * cfg.alpha;
        for (auto& q : lp.U.data()) q = q * cfg.alpha;
        for (auto& q : lp.b) q = q * cfg.alpha;
    }
    double norm = global_norm(update);
    if (norm > cfg.clip_norm && norm > 0.0) {
        double s = cfg.clip_norm / norm;
        for (auto& lp : update.layers) {
            for (auto& q : lp.W.data()) q = q * s;
            for (auto& q : lp.U.data()) q = q * s;
            for (auto& q : lp.b) q = q * s;
        }
    }
    QrnnParams next = params;
    for (std::size_t li = 0; li < next.layers.size(); ++li) {
        auto& dst = next.layers[li];
        const auto& src = update.layers[li];
        for (std::size_t i = 0; i < dst.W.data().size(); ++i) dst.W.data()[i] += src.W.data()[i];
        for (std::size_t i = 0; i < dst.U.data().size(); ++i) dst.U.data()[i] += src.U.data()[i];
        for (std::size_t i = 0; i < dst.b.size(); ++i) dst.b[i] += src.b[i];
    }
    return next;
}

RollingWindow::RollingWindow(const QrnnParams& params) {
    for (const auto& lp : params.layers) entry_hidden_.emplace_back(lp.W.rows());
}

namespace {

// If a diverging recurrence drives the streaming state past any sane
// magnitude, restart it from zero so the learner can recover online
// instead of feeding ever-growing activations forward.
constexpr double kStateResetNormSq = 1e8;

template <typename Vecs, typename NormFn>
bool state_needs_reset(const Vecs& hidden, NormFn&& norm_sq) {
    double acc = 0.0;
    for (const auto& layer : hidden) acc += norm_sq(layer);
    return !std::isfinite(acc) || acc > kStateResetNormSq;
}

}  // namespace

bool RollingWindow::push(const QrnnParams& params, const TrainConfig& cfg, const QuatVector& x,
                         std::size_t capacity) {
    bool evicted = false;
    if (inputs_.size() >= capacity && !inputs_.empty()) {
        QrnnState entry;
        entry.initial_hidden = entry_hidden_;
        entry = forward_step(params, entry, inputs_.front(), cfg);
        entry_hidden_ = entry.hidden[0];
        if (state_needs_reset(entry_hidden_, [](const QuatVector& v) { return norm_squared(v); }))
            for (auto& layer : entry_hidden_)
                layer.assign(layer.size(), Quaternion::zero());
        inputs_.erase(inputs_.begin());
        evicted = true;
    }
    inputs_.push_back(x);
    return evicted;
}

QrnnState RollingWindow::unroll(const QrnnParams& params, const TrainConfig& cfg) const {
    QrnnState init;
    init.initial_hidden = entry_hidden_;
    return forward_window(params, init, inputs_, cfg);
}

QrnnTrainer::QrnnTrainer(QrnnParams params, TrainConfig cfg)
    : params_(std::move(params)), cfg_(std::move(cfg)), window_(params_) {
    cfg_.validate();
}

QuatVector QrnnTrainer::feed(const QuatVector& x, const QuatVector& target) {
    if (window_.push(params_, cfg_, x, cfg_.window_len))
        window_targets_.erase(window_targets_.begin());
    window_targets_.push_back(target);

    QrnnState state = window_.unroll(params_, cfg_);
    QuatVector prediction = state.output();

    DeltaSet deltas = cfg_.loss == Loss::mcc
                          ? compute_deltas_mcc(params_, state, window_targets_, cfg_)
                          : compute_deltas_mse(params_, state, window_targets_, cfg_);
    params_ = apply_updates(params_, deltas, state, cfg_);
    if (!params_.finite()) {
        std::ostringstream msg;
        msg << "parameters became non-finite at step " << step_;
        raise(ErrorKind::non_finite, msg.str());
    }
    ++step_;
    return prediction;
}

QuatVector QrnnTrainer::predict(const std::vector<QuatVector>& inputs) const {
    std::size_t take = std::min(inputs.size(), cfg_.window_len);
    std::vector<QuatVector> window(inputs.end() - static_cast<std::ptrdiff_t>(take),
                                   inputs.end());
    return forward_window(params_, QrnnState::initial(params_), window, cfg_).output();
}

TrainResult train_online(QrnnParams params,
                         const std::vector<std::pair<QuatVector, QuatVector>>& stream,
                         const TrainConfig& cfg) {
    if (stream.empty()) raise(ErrorKind::empty_sequence, "train_online: empty stream");
    QrnnTrainer trainer(std::move(params), cfg);
    TrainResult result;
    result.predictions.reserve(stream.size());
    for (const auto& [x, d] : stream) result.predictions.push_back(trainer.feed(x, d));
    result.params = trainer.params();
    return result;
}

QuatVector predict_horizon(const QrnnParams& params, const TrainConfig& cfg,
                           const std::vector<QuatVector>& history, std::size_t horizon) {
    (void)horizon;  // fixed at training time; the estimate is direct
    if (history.size() < cfg.window_len)
        raise(ErrorKind::insufficient_history, "history shorter than the regressor length");
    std::vector<QuatVector> window(history.end() - static_cast<std::ptrdiff_t>(cfg.window_len),
                                   history.end());
    return forward_window(params, QrnnState::initial(params), window, cfg).output();
}

}  // namespace qrnn
