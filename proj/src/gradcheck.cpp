#include "qrnn/gradcheck.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "qrnn/errors.hpp"
#include "qrnn/losses.hpp"

namespace qrnn {

namespace {

constexpr double kRelFloor = 1e-12;
// The delta recursions seed with e while the component gradient of |e|^2
// is 2e; every loss therefore fits with this extra factor.
constexpr double kSeedConvention = 2.0;

double rel_error(double a, double n) {
    double denom = std::max({std::abs(a), std::abs(n), kRelFloor});
    return std::abs(a - n) / denom;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::vector<double> numeric_partials(const std::function<double(const std::vector<double>&)>& loss,
                                     const std::vector<double>& params, double step) {
    if (!(step > 0.0)) raise(ErrorKind::config_error, "step must be > 0");
    std::vector<double> grad(params.size(), 0.0);
    std::vector<double> work = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        work[i] = params[i] + step;
        double up = loss(work);
        work[i] = params[i] - step;
        double down = loss(work);
        work[i] = params[i];
        if (!std::isfinite(up) || !std::isfinite(down)) {
            std::ostringstream msg;
            msg << "loss non-finite when perturbing component " << i;
            raise(ErrorKind::non_finite, msg.str());
        }
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

Quaternion ghr_numeric(const std::function<double(const Quaternion&)>& loss, const Quaternion& q,
                       Involution mu, double step) {
    auto partial = [&](int comp) {
        Quaternion up = q, down = q;
        double* pu = comp == 0 ? &up.a : comp == 1 ? &up.b : comp == 2 ? &up.c : &up.d;
        double* pd = comp == 0 ? &down.a : comp == 1 ? &down.b : comp == 2 ? &down.c : &down.d;
        *pu += step;
        *pd -= step;
        double hi = loss(up), lo = loss(down);
        if (!std::isfinite(hi) || !std::isfinite(lo))
            raise(ErrorKind::non_finite, "loss non-finite during ghr_numeric");
        return (hi - lo) / (2.0 * step);
    };
    double pa = partial(0), pb = partial(1), pc = partial(2), pd = partial(3);
    Quaternion out = Quaternion::real(pa);
    out -= rotate(Quaternion::unit_i(), mu) * pb;
    out -= rotate(Quaternion::unit_j(), mu) * pc;
    out -= rotate(Quaternion::unit_k(), mu) * pd;
    return out * 0.25;
}

std::vector<double> flatten(const QrnnParams& params) {
    std::vector<double> flat;
    for (const auto& lp : params.layers) {
        for (const auto& q : lp.W.data()) { flat.push_back(q.a); flat.push_back(q.b); flat.push_back(q.c); flat.push_back(q.d); }
        for (const auto& q : lp.U.data()) { flat.push_back(q.a); flat.push_back(q.b); flat.push_back(q.c); flat.push_back(q.d); }
        for (const auto& q : lp.b) { flat.push_back(q.a); flat.push_back(q.b); flat.push_back(q.c); flat.push_back(q.d); }
    }
    return flat;
}

QrnnParams unflatten(const std::vector<double>& flat, const std::vector<std::size_t>& dims) {
    QrnnParams p = QrnnParams::zeros(dims);
    std::size_t i = 0;
    auto take = [&flat, &i]() { return flat[i++]; };
    for (auto& lp : p.layers) {
        for (auto& q : lp.W.data()) { q.a = take(); q.b = take(); q.c = take(); q.d = take(); }
        for (auto& q : lp.U.data()) { q.a = take(); q.b = take(); q.c = take(); q.d = take(); }
        for (auto& q : lp.b) { q.a = take(); q.b = take(); q.c = take(); q.d = take(); }
    }
    if (i != flat.size()) raise(ErrorKind::dimension_mismatch, "unflatten: length mismatch");
    return p;
}

std::vector<double> flatten(const RealRnnParams& params) {
    std::vector<double> flat;
    for (const auto& lp : params.layers) {
        flat.insert(flat.end(), lp.W.data().begin(), lp.W.data().end());
        flat.insert(flat.end(), lp.U.data().begin(), lp.U.data().end());
        flat.insert(flat.end(), lp.b.begin(), lp.b.end());
    }
    return flat;
}

RealRnnParams unflatten_real(const std::vector<double>& flat, const std::vector<std::size_t>& dims) {
    RealRnnParams p = RealRnnParams::zeros(dims);
    std::size_t i = 0;
    for (auto& lp : p.layers) {
        for (auto& v : lp.W.data()) v = flat[i++];
        for (auto& v : lp.U.data()) v = flat[i++];
        for (auto& v : lp.b) v = flat[i++];
    }
    if (i != flat.size()) raise(ErrorKind::dimension_mismatch, "unflatten_real: length mismatch");
    return p;
}

double qrnn_window_loss(const QrnnParams& params, const std::vector<QuatVector>& inputs,
                        const std::vector<QuatVector>& targets, const TrainConfig& cfg) {
    QrnnState state = forward_window(params, QrnnState::initial(params), inputs, cfg);
    std::vector<QuatVector> errors(state.steps());
    for (std::size_t n = 0; n < state.steps(); ++n) {
        const QuatVector& y = state.output(n);
        QuatVector e(y.size());
        for (std::size_t m = 0; m < y.size(); ++m) e[m] = targets[n][m] - y[m];
        errors[n] = std::move(e);
    }
    if (cfg.loss == Loss::mse) {
        double acc = 0.0;
        for (const auto& e : errors) acc += mse_loss(e);
        return acc;
    }
    return mcc_loss(errors, KernelConfig(cfg.sigma));
}

namespace {

struct ComparisonInput {
    std::vector<std::string> names;
    std::vector<double> update;   // raw analytic update components
    std::vector<double> numeric;  // numeric loss partials
};

GradCheckReport compare(const ComparisonInput& in, double tolerance) {
    GradCheckReport report;
    report.tolerance = tolerance;

    // Least-squares fit of -numeric onto the raw update.
    double dot = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < in.update.size(); ++i) {
        dot += -in.numeric[i] * in.update[i];
        norm2 += in.update[i] * in.update[i];
    }
    report.scale = norm2 > 0.0 ? dot / norm2 : 1.0;
    report.loss_prefactor = report.scale / kSeedConvention;

    report.entries.reserve(in.update.size());
    for (std::size_t i = 0; i < in.update.size(); ++i) {
        GradCheckEntry e;
        e.name = in.names[i];
        e.analytic = -report.scale * in.update[i];
        e.numeric = in.numeric[i];
        e.abs_error = std::abs(e.analytic - e.numeric);
        e.rel_error = rel_error(e.analytic, e.numeric);
        report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
        report.entries.push_back(std::move(e));
    }
    report.pass = report.max_rel_error < tolerance;
    return report;
}

std::vector<std::string> component_names(const std::vector<std::size_t>& dims, bool quaternion) {
    static const char* comp[4] = {".a", ".b", ".c", ".d"};
    std::vector<std::string> names;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        auto emit = [&](const std::string& part, std::size_t rows, std::size_t cols) {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) {
                    std::ostringstream base;
                    base << "layer." << l + 1 << "." << part << "[" << r << "][" << c << "]";
                    if (quaternion)
                        for (int k = 0; k < 4; ++k) names.push_back(base.str() + comp[k]);
                    else
                        names.push_back(base.str());
                }
        };
        emit("W", dims[l + 1], dims[l]);
        emit("U", dims[l + 1], dims[l + 1]);
        emit("b", dims[l + 1], 1);
    }
    return names;
}

}  // namespace

GradCheckReport check_qrnn_gradients(const GradCheckCase& c) {
    TrainConfig cfg;
    cfg.layers = c.layers;
    cfg.window_len = c.window_len;
    cfg.loss = c.loss;
    cfg.sigma = c.sigma;
    cfg.hidden_activation = c.hidden_activation;
    cfg.output_activation = c.output_activation;
    cfg.variant = c.variant;
    cfg.seed = c.seed;
    cfg.validate();

    QrnnParams params = QrnnParams::init(cfg);
    std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<QuatVector> inputs(c.window_len), targets(c.window_len);
    for (std::size_t n = 0; n < c.window_len; ++n) {
        inputs[n].resize(c.layers.front());
        for (auto& q : inputs[n]) q = {dist(rng), dist(rng), dist(rng), dist(rng)};
        targets[n].resize(c.layers.back());
        for (auto& q : targets[n]) q = {dist(rng), dist(rng), dist(rng), dist(rng)};
    }

    QrnnState state = forward_window(params, QrnnState::initial(params), inputs, cfg);
    DeltaSet deltas = cfg.loss == Loss::mcc ? compute_deltas_mcc(params, state, targets, cfg)
                                            : compute_deltas_mse(params, state, targets, cfg);
    QrnnParams raw = compute_updates(params, deltas, state, cfg);

    std::vector<std::size_t> dims = c.layers;
    auto loss_fn = [&](const std::vector<double>& flat) {
        return qrnn_window_loss(unflatten(flat, dims), inputs, targets, cfg);
    };

    ComparisonInput in;
    in.names = component_names(dims, true);
    in.update = flatten(raw);
    in.numeric = numeric_partials(loss_fn, flatten(params), c.step);
    return compare(in, c.tolerance);
}

GradCheckReport check_rnn_gradients(const GradCheckCase& c) {
    RealRnnConfig cfg;
    cfg.layers = c.layers;
    cfg.window_len = c.window_len;
    cfg.loss = c.loss;
    cfg.sigma = c.sigma;
    cfg.seed = c.seed;
    cfg.validate();

    RealRnnParams params = RealRnnParams::init(cfg);
    std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<RealVector> inputs(c.window_len), targets(c.window_len);
    for (std::size_t n = 0; n < c.window_len; ++n) {
        inputs[n].resize(c.layers.front());
        for (auto& v : inputs[n]) v = dist(rng);
        targets[n].resize(c.layers.back());
        for (auto& v : targets[n]) v = dist(rng);
    }

    RealRnnState state = rnn_forward_window(params, RealRnnState::initial(params), inputs, cfg);
    RealDeltaSet deltas = rnn_compute_deltas(params, state, targets, cfg);
    RealRnnParams raw = rnn_compute_updates(params, deltas, state);

    std::vector<std::size_t> dims = c.layers;
    auto loss_fn = [&](const std::vector<double>& flat) {
        return rnn_window_loss(unflatten_real(flat, dims), inputs, targets, cfg);
    };

    ComparisonInput in;
    in.names = component_names(dims, false);
    in.update = flatten(raw);
    in.numeric = numeric_partials(loss_fn, flatten(params), c.step);
    return compare(in, c.tolerance);
}

std::string GradCheckReport::to_csv() const {
    std::ostringstream os;
    os << "component,analytic,numeric,abs_error,rel_error\n";
    for (const auto& e : entries)
        os << e.name << "," << format_double(e.analytic) << "," << format_double(e.numeric) << ","
           << format_double(e.abs_error) << "," << format_double(e.rel_error) << "\n";
    return os.str();
}

std::string GradCheckReport::summary() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << " max_rel_error=" << format_double(max_rel_error)
       << " tolerance=" << format_double(tolerance) << " scale=" << format_double(scale)
       << " loss_prefactor=" << format_double(loss_prefactor) << " components=" << entries.size();
    return os.str();
}

}  // namespace qrnn
