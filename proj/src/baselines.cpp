#include "qrnn/baselines.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "qrnn/errors.hpp"

namespace qrnn {

namespace {
constexpr double kSqrt2Pi = 2.5066282746310002;

RealVector real_matvec(const RealMatrix& A, const RealVector& x) {
    if (A.cols() != x.size())
        raise(ErrorKind::dimension_mismatch, "real matvec: shape mismatch");
    RealVector out(A.rows(), 0.0);
    for (std::size_t r = 0; r < A.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < A.cols(); ++c) acc += A(r, c) * x[c];
        out[r] = acc;
    }
    return out;
}

RealVector transpose_matvec(const RealMatrix& A, const RealVector& y) {
    if (A.rows() != y.size())
        raise(ErrorKind::dimension_mismatch, "real transpose matvec: shape mismatch");
    RealVector out(A.cols(), 0.0);
    for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t c = 0; c < A.cols(); ++c) out[c] += A(r, c) * y[r];
    return out;
}

}  // namespace

void RealRnnConfig::validate() const {
    if (!(alpha > 0.0)) raise(ErrorKind::config_error, "alpha must be > 0");
    if (!(sigma > 0.0)) raise(ErrorKind::config_error, "sigma must be > 0");
    if (!(clip_norm > 0.0)) raise(ErrorKind::config_error, "clip_norm must be > 0");
    if (window_len < 1) raise(ErrorKind::config_error, "window_len must be >= 1");
    if (layers.size() < 2) raise(ErrorKind::config_error, "need input and output layer widths");
}

RealRnnParams RealRnnParams::zeros(const std::vector<std::size_t>& dims) {
    RealRnnParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        RealLayerParams lp;
        lp.W = RealMatrix(dims[l + 1], dims[l]);
        lp.U = RealMatrix(dims[l + 1], dims[l + 1]);
        lp.b = RealVector(dims[l + 1], 0.0);
        p.layers.push_back(std::move(lp));
    }
    return p;
}

RealRnnParams RealRnnParams::init(const RealRnnConfig& cfg) {
    cfg.validate();
    RealRnnParams p = zeros(cfg.layers);
    std::mt19937_64 rng(cfg.seed);
    auto fill = [&rng](RealMatrix& m, std::size_t fan_in) {
        double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-r, r);
        for (auto& v : m.data()) v = dist(rng);
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        fill(p.layers[l].W, cfg.layers[l]);
        fill(p.layers[l].U, cfg.layers[l + 1]);
    }
    return p;
}

bool RealRnnParams::finite() const {
    auto ok = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    for (const auto& lp : layers)
        if (!ok(lp.W.data()) || !ok(lp.U.data()) || !ok(lp.b)) return false;
    return true;
}

std::vector<std::size_t> RealRnnParams::dims() const {
    std::vector<std::size_t> d;
    if (layers.empty()) return d;
    d.push_back(layers.front().W.cols());
    for (const auto& lp : layers) d.push_back(lp.W.rows());
    return d;
}

RealRnnState RealRnnState::initial(const RealRnnParams& params) {
    RealRnnState s;
    for (const auto& lp : params.layers) s.initial_hidden.emplace_back(lp.W.rows(), 0.0);
    return s;
}

RealRnnState rnn_forward_step(const RealRnnParams& params, const RealRnnState& prev,
                              const RealVector& x, const RealRnnConfig& cfg) {
    if (x.size() != params.layers.front().W.cols())
        raise(ErrorKind::dimension_mismatch, "input width does not match input layer");

    RealRnnState next = prev;
    std::size_t n = next.steps();
    next.inputs.push_back(x);
    next.pre.emplace_back();
    next.hidden.emplace_back();

    const RealVector* below = &next.inputs[n];
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const RealLayerParams& lp = params.layers[l];
        const RealVector& recur = n == 0 ? next.initial_hidden[l] : next.hidden[n - 1][l];
        RealVector f = real_matvec(lp.U, recur);
        RealVector wx = real_matvec(lp.W, *below);
        for (std::size_t a = 0; a < f.size(); ++a) f[a] += wx[a] + lp.b[a];
        RealVector h(f.size());
        for (std::size_t a = 0; a < f.size(); ++a)
            h[a] = cfg.output_layer(l) ? f[a] : std::tanh(f[a]);
        next.hidden[n].push_back(std::move(h));
        next.pre[n].push_back(std::move(f));
        below = &next.hidden[n][l];
    }
    return next;
}

RealRnnState rnn_forward_window(const RealRnnParams& params, const RealRnnState& init,
                                const std::vector<RealVector>& inputs, const RealRnnConfig& cfg) {
    if (inputs.empty()) raise(ErrorKind::empty_sequence, "rnn_forward_window: no inputs");
    RealRnnState state = init;
    for (const auto& x : inputs) state = rnn_forward_step(params, state, x, cfg);
    return state;
}

RealDeltaSet rnn_compute_deltas(const RealRnnParams& params, const RealRnnState& state,
                                const std::vector<RealVector>& targets, const RealRnnConfig& cfg) {
    std::size_t steps = state.steps();
    std::size_t num_layers = params.layers.size();
    if (targets.size() != steps)
        raise(ErrorKind::dimension_mismatch, "targets length does not match window length");

    RealDeltaSet out;
    out.delta.assign(steps, std::vector<RealVector>(num_layers));
    for (std::size_t ni = steps; ni-- > 0;) {
        for (std::size_t li = num_layers; li-- > 0;) {
            RealVector acc;
            if (li + 1 == num_layers) {
                const RealVector& y = state.output(ni);
                if (targets[ni].size() != y.size())
                    raise(ErrorKind::dimension_mismatch, "target width does not match output");
                acc.resize(y.size());
                for (std::size_t m = 0; m < y.size(); ++m) {
                    double e = targets[ni][m] - y[m];
                    if (cfg.loss == Loss::mcc)
                        e *= std::exp(-e * e / (2.0 * cfg.sigma * cfg.sigma));
                    acc[m] = e;
                }
            } else {
                acc = transpose_matvec(params.layers[li + 1].W, out.delta[ni][li + 1]);
            }
            if (ni + 1 < steps) {
                RealVector temporal = transpose_matvec(params.layers[li].U, out.delta[ni + 1][li]);
                for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += temporal[a];
            }
            RealVector d(acc.size());
            for (std::size_t a = 0; a < acc.size(); ++a) {
                double phi_bar = 1.0;
                if (!cfg.output_layer(li)) {
                    double t = std::tanh(state.pre[ni][li][a]);
                    phi_bar = 1.0 - t * t;
                }
                d[a] = phi_bar * acc[a];
            }
            out.delta[ni][li] = std::move(d);
        }
    }
    return out;
}

RealRnnParams rnn_compute_updates(const RealRnnParams& params, const RealDeltaSet& deltas,
                                  const RealRnnState& state) {
    RealRnnParams grad = RealRnnParams::zeros(params.dims());
    std::size_t steps = state.steps();
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        RealMatrix& dW = grad.layers[li].W;
        RealMatrix& dU = grad.layers[li].U;
        RealVector& db = grad.layers[li].b;
        for (std::size_t n = 0; n < steps; ++n) {
            const RealVector& d = deltas.delta[n][li];
            const RealVector& below = li == 0 ? state.inputs[n] : state.hidden[n][li - 1];
            const RealVector& recur = n == 0 ? state.initial_hidden[li] : state.hidden[n - 1][li];
            for (std::size_t a = 0; a < d.size(); ++a) {
                for (std::size_t c = 0; c < below.size(); ++c) dW(a, c) += d[a] * below[c];
                for (std::size_t c = 0; c < recur.size(); ++c) dU(a, c) += d[a] * recur[c];
                db[a] += d[a];
            }
        }
    }
    return grad;
}

RealRnnParams rnn_apply_updates(const RealRnnParams& params, const RealDeltaSet& deltas,
                                const RealRnnState& state, const RealRnnConfig& cfg) {
    RealRnnParams update = rnn_compute_updates(params, deltas, state);
    double max_abs = 0.0;
    for (auto& lp : update.layers) {
        for (auto& v : lp.W.data()) v *= cfg.alpha;
        for (auto& v : lp.U.data()) v *= cfg.alpha;
        for (auto& v : lp.b) v *= cfg.alpha;
        for (double v : lp.W.data()) max_abs = std::max(max_abs, std::abs(v));
        for (double v : lp.U.data()) max_abs = std::max(max_abs, std::abs(v));
        for (double v : lp.b) max_abs = std::max(max_abs, std::abs(v));
    }
    double norm = 0.0;
    if (max_abs > 0.0 && std::isfinite(max_abs)) {
        double inv = 1.0 / max_abs, acc = 0.0;
        for (const auto& lp : update.layers) {
            for (double v : lp.W.data()) acc += (v * inv) * (v * inv);
            for (double v : lp.U.data()) acc += (v * inv) * (v * inv);
            for (double v : lp.b) acc += (v * inv) * (v * inv);
        }
        norm = max_abs * std::sqrt(acc);
    } else {
        norm = max_abs;  // zero or already non-finite
    }
    double s = norm > cfg.clip_norm && norm > 0.0 ? cfg.clip_norm / norm : 1.0;
    RealRnnParams next = params;
    for (std::size_t li = 0; li < next.layers.size(); ++li) {
        auto& dst = next.layers[li];
        const auto& src = update.layers[li];
        for (std::size_t i = 0; i < dst.W.data().size(); ++i) dst.W.data()[i] += s * src.W.data()[i];
        for (std::size_t i = 0; i < dst.U.data().size(); ++i) dst.U.data()[i] += s * src.U.data()[i];
        for (std::size_t i = 0; i < dst.b.size(); ++i) dst.b[i] += s * src.b[i];
    }
    return next;
}

double rnn_window_loss(const RealRnnParams& params, const std::vector<RealVector>& inputs,
                       const std::vector<RealVector>& targets, const RealRnnConfig& cfg) {
    RealRnnState state = rnn_forward_window(params, RealRnnState::initial(params), inputs, cfg);
    double acc = 0.0;
    for (std::size_t n = 0; n < state.steps(); ++n) {
        const RealVector& y = state.output(n);
        for (std::size_t c = 0; c < y.size(); ++c) {
            double e = targets[n][c] - y[c];
            if (cfg.loss == Loss::mse) {
                acc += e * e;
            } else {
                acc -= std::exp(-e * e / (2.0 * cfg.sigma * cfg.sigma)) / (kSqrt2Pi * cfg.sigma);
            }
        }
    }
    if (cfg.loss == Loss::mcc) acc /= static_cast<double>(state.steps());
    return acc;
}

RealRollingWindow::RealRollingWindow(const RealRnnParams& params) {
    for (const auto& lp : params.layers) entry_hidden_.emplace_back(lp.W.rows(), 0.0);
}

bool RealRollingWindow::push(const RealRnnParams& params, const RealRnnConfig& cfg,
                             const RealVector& x, std::size_t capacity) {
    bool evicted = false;
    if (inputs_.size() >= capacity && !inputs_.empty()) {
        RealRnnState entry;
        entry.initial_hidden = entry_hidden_;
        entry = rnn_forward_step(params, entry, inputs_.front(), cfg);
        entry_hidden_ = entry.hidden[0];
        // restart a diverged streaming state, mirroring the quaternion model
        double acc = 0.0;
        for (const auto& layer : entry_hidden_)
            for (double v : layer) acc += v * v;
        if (!std::isfinite(acc) || acc > 1e8)
            for (auto& layer : entry_hidden_) layer.assign(layer.size(), 0.0);
        inputs_.erase(inputs_.begin());
        evicted = true;
    }
    inputs_.push_back(x);
    return evicted;
}

RealRnnState RealRollingWindow::unroll(const RealRnnParams& params,
                                       const RealRnnConfig& cfg) const {
    RealRnnState init;
    init.initial_hidden = entry_hidden_;
    return rnn_forward_window(params, init, inputs_, cfg);
}

RealRnnTrainer::RealRnnTrainer(RealRnnParams params, RealRnnConfig cfg)
    : params_(std::move(params)), cfg_(std::move(cfg)), window_(params_) {
    cfg_.validate();
}

RealVector RealRnnTrainer::feed(const RealVector& x, const RealVector& target) {
    if (window_.push(params_, cfg_, x, cfg_.window_len))
        window_targets_.erase(window_targets_.begin());
    window_targets_.push_back(target);
    RealRnnState state = window_.unroll(params_, cfg_);
    RealVector prediction = state.output();
    RealDeltaSet deltas = rnn_compute_deltas(params_, state, window_targets_, cfg_);
    params_ = rnn_apply_updates(params_, deltas, state, cfg_);
    if (!params_.finite()) {
        std::ostringstream msg;
        msg << "parameters became non-finite at step " << step_;
        raise(ErrorKind::non_finite, msg.str());
    }
    ++step_;
    return prediction;
}

RealVector RealRnnTrainer::predict(const std::vector<RealVector>& inputs) const {
    std::size_t take = std::min(inputs.size(), cfg_.window_len);
    std::vector<RealVector> window(inputs.end() - static_cast<std::ptrdiff_t>(take), inputs.end());
    return rnn_forward_window(params_, RealRnnState::initial(params_), window, cfg_).output();
}

RealTrainResult rnn_train_online(RealRnnParams params,
                                 const std::vector<std::pair<RealVector, RealVector>>& stream,
                                 const RealRnnConfig& cfg) {
    if (stream.empty()) raise(ErrorKind::empty_sequence, "rnn_train_online: empty stream");
    RealRnnTrainer trainer(std::move(params), cfg);
    RealTrainResult result;
    result.predictions.reserve(stream.size());
    for (const auto& [x, d] : stream) result.predictions.push_back(trainer.feed(x, d));
    result.params = trainer.params();
    return result;
}

QuatLmsFilter::QuatLmsFilter(std::size_t taps, double eta) : w_(taps), eta_(eta) {
    if (!(eta > 0.0)) raise(ErrorKind::config_error, "eta must be > 0");
    if (taps == 0) raise(ErrorKind::config_error, "filter needs at least one tap");
}

void QuatLmsFilter::set_weights(QuatVector w) {
    if (w.size() != w_.size())
        raise(ErrorKind::dimension_mismatch, "qlms: weight vector length mismatch");
    w_ = std::move(w);
}

Quaternion QuatLmsFilter::predict(const QuatVector& x) const {
    if (x.size() != w_.size())
        raise(ErrorKind::dimension_mismatch, "qlms: tap vector length mismatch");
    Quaternion acc;
    for (std::size_t t = 0; t < w_.size(); ++t) acc += hamilton_mul(conjugate(w_[t]), x[t]);
    return acc;
}

Quaternion QuatLmsFilter::step(const QuatVector& x, const Quaternion& d) {
    Quaternion y = predict(x);
    Quaternion e = d - y;
    Quaternion e_conj = conjugate(e);
    for (std::size_t t = 0; t < w_.size(); ++t)
        w_[t] += hamilton_mul(x[t], e_conj) * eta_;
    return y;
}

LmsFilter::LmsFilter(std::size_t taps, double eta) : w_(taps, 0.0), eta_(eta) {
    if (!(eta > 0.0)) raise(ErrorKind::config_error, "eta must be > 0");
    if (taps == 0) raise(ErrorKind::config_error, "filter needs at least one tap");
}

double LmsFilter::predict(const RealVector& x) const {
    if (x.size() != w_.size())
        raise(ErrorKind::dimension_mismatch, "lms: tap vector length mismatch");
    double acc = 0.0;
    for (std::size_t t = 0; t < w_.size(); ++t) acc += w_[t] * x[t];
    return acc;
}

double LmsFilter::step(const RealVector& x, double d) {
    double y = predict(x);
    double e = d - y;
    for (std::size_t t = 0; t < w_.size(); ++t) w_[t] += eta_ * e * x[t];
    return y;
}

}  // namespace qrnn
