#include "qrnn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qrnn/baselines.hpp"
#include "qrnn/errors.hpp"
#include "qrnn/losses.hpp"

namespace qrnn {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        raise(ErrorKind::parse_error, "cannot parse number '" + s + "'");
    return v;
}

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix(a ^ splitmix(b)); }

std::uint64_t double_bits(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    return bits;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::io_error, "cannot write " + path);
    out << content;
    if (!out) raise(ErrorKind::io_error, "write failed for " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename F>
void parallel_for(std::size_t count, int threads, F&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::size_t pool_size = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (std::size_t k = 0; k < pool_size; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

const char* kMetricNames[4] = {"rmse", "nrmse", "mae", "jitter"};

double metric_by_name(const MetricValues& v, const std::string& name) {
    if (name == "rmse") return v.rmse;
    if (name == "nrmse") return v.nrmse;
    if (name == "mae") return v.mae;
    return v.jitter;
}

}  // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::qrnn_mcc: return "qrnn-mcc";
        case Method::qrnn_mse: return "qrnn-mse";
        case Method::rnn_mcc: return "rnn-mcc";
        case Method::rnn_mse: return "rnn-mse";
        case Method::qlms: return "qlms";
        case Method::lms: return "lms";
    }
    return "qrnn-mcc";
}

Method method_from_string(const std::string& name) {
    if (name == "qrnn-mcc") return Method::qrnn_mcc;
    if (name == "qrnn-mse") return Method::qrnn_mse;
    if (name == "rnn-mcc") return Method::rnn_mcc;
    if (name == "rnn-mse") return Method::rnn_mse;
    if (name == "qlms") return Method::qlms;
    if (name == "lms") return Method::lms;
    raise(ErrorKind::config_error, "unknown method '" + name + "'");
}

bool method_uses_sigma(Method m) { return m == Method::qrnn_mcc || m == Method::rnn_mcc; }

bool method_is_network(Method m) {
    return m == Method::qrnn_mcc || m == Method::qrnn_mse || m == Method::rnn_mcc ||
           m == Method::rnn_mse;
}

bool method_is_stochastic(Method m) { return method_is_network(m); }

void ExperimentConfig::validate() const {
    if (methods.empty()) raise(ErrorKind::config_error, "no methods configured");
    if (cv_runs < 1 || eval_runs < 1) raise(ErrorKind::config_error, "run counts must be >= 1");
    if (!(clip_norm > 0.0)) raise(ErrorKind::config_error, "clip_norm must be > 0");
    if (!(horizon_s >= 0.0)) raise(ErrorKind::config_error, "horizon must be >= 0");
    if (threads < 1) raise(ErrorKind::config_error, "threads must be >= 1");
    if (!(split.train_s > 0.0) || split.validation_s < 0.0)
        raise(ErrorKind::config_error, "split durations invalid");
    if (grid.alpha.empty() || grid.hidden.empty() || grid.hidden_rnn.empty() ||
        grid.regressor.empty() || grid.sigma.empty() || grid.eta.empty())
        raise(ErrorKind::config_error, "grids must be nonempty");
    if (dataset.kind == DatasetSpec::Kind::csv) {
        if (dataset.paths.empty()) raise(ErrorKind::config_error, "csv dataset needs paths");
    } else {
        const auto& s = dataset.synthetic;
        if (s.sequences < 1) raise(ErrorKind::config_error, "need at least one sequence");
        if (!(s.sample_rate_hz > 0.0)) raise(ErrorKind::config_error, "sample rate must be > 0");
        double steps = horizon_s * s.sample_rate_hz;
        if (std::abs(steps - std::llround(steps)) > 1e-9)
            raise(ErrorKind::config_error, "horizon times sample rate must be integral");
    }
    for (double a : grid.alpha)
        if (!(a > 0.0)) raise(ErrorKind::config_error, "grid alpha values must be > 0");
    for (double s : grid.sigma)
        if (!(s > 0.0)) raise(ErrorKind::config_error, "grid sigma values must be > 0");
    for (double e : grid.eta)
        if (!(e > 0.0)) raise(ErrorKind::config_error, "grid eta values must be > 0");
}

namespace {

BreathingLabel label_from_string(const std::string& s) {
    if (s == "regular") return BreathingLabel::regular;
    if (s == "irregular") return BreathingLabel::irregular;
    if (s == "unlabeled") return BreathingLabel::unlabeled;
    raise(ErrorKind::config_error, "unknown breathing label '" + s + "'");
}

MuSumVariant variant_from_string(const std::string& s) {
    if (s == "collapsed") return MuSumVariant::collapsed;
    if (s == "mu-sum-plain") return MuSumVariant::mu_sum_plain;
    if (s == "mu-sum-rotated") return MuSumVariant::mu_sum_rotated;
    raise(ErrorKind::config_error, "unknown mu-sum variant '" + s + "'");
}

template <typename T>
void read_field(const json& doc, const char* key, T& out) {
    if (doc.contains(key)) {
        try {
            out = doc.at(key).get<T>();
        } catch (const json::exception& e) {
            raise(ErrorKind::config_error, std::string("field '") + key + "': " + e.what());
        }
    }
}

Hyper hyper_from_json(const json& doc) {
    Hyper h;
    read_field(doc, "alpha", h.alpha);
    read_field(doc, "hidden", h.hidden);
    read_field(doc, "regressor", h.regressor);
    read_field(doc, "sigma", h.sigma);
    if (!(h.alpha > 0.0) || !(h.sigma > 0.0) || h.regressor < 1)
        raise(ErrorKind::config_error, "invalid hyperparameter point");
    return h;
}

json hyper_to_json(const Hyper& h) {
    return json{{"alpha", h.alpha}, {"hidden", h.hidden}, {"regressor", h.regressor},
                {"sigma", h.sigma}};
}

}  // namespace

ExperimentConfig config_from_json_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        raise(ErrorKind::config_error, std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    if (doc.contains("methods")) {
        cfg.methods.clear();
        for (const auto& m : doc.at("methods")) cfg.methods.push_back(method_from_string(m));
    }
    if (doc.contains("dataset")) {
        const auto& d = doc.at("dataset");
        std::string kind = d.value("kind", std::string("synthetic"));
        if (kind == "csv") {
            cfg.dataset.kind = DatasetSpec::Kind::csv;
            read_field(d, "paths", cfg.dataset.paths);
        } else if (kind == "synthetic") {
            cfg.dataset.kind = DatasetSpec::Kind::synthetic;
            auto& s = cfg.dataset.synthetic;
            read_field(d, "sequences", s.sequences);
            read_field(d, "duration_s", s.duration_s);
            read_field(d, "sample_rate_hz", s.sample_rate_hz);
            read_field(d, "noise_mm", s.noise_mm);
            read_field(d, "outlier_rate", s.outlier_rate);
            read_field(d, "outlier_scale", s.outlier_scale);
            read_field(d, "outliers_train_only", s.outliers_train_only);
            read_field(d, "harmonics", s.harmonics);
            read_field(d, "drift_mm_per_s", s.drift_mm_per_s);
            if (d.contains("labels")) {
                s.labels.clear();
                for (const auto& v : d.at("labels"))
                    s.labels.push_back(label_from_string(v.get<std::string>()));
            }
        } else {
            raise(ErrorKind::config_error, "dataset.kind must be synthetic or csv");
        }
    }
    if (doc.contains("split")) {
        read_field(doc.at("split"), "train_s", cfg.split.train_s);
        read_field(doc.at("split"), "validation_s", cfg.split.validation_s);
    }
    read_field(doc, "horizon_s", cfg.horizon_s);
    read_field(doc, "cv_runs", cfg.cv_runs);
    read_field(doc, "eval_runs", cfg.eval_runs);
    read_field(doc, "clip_norm", cfg.clip_norm);
    read_field(doc, "seed", cfg.seed);
    read_field(doc, "threads", cfg.threads);
    if (doc.contains("variant"))
        cfg.variant = variant_from_string(doc.at("variant").get<std::string>());
    if (doc.contains("grid")) {
        const auto& g = doc.at("grid");
        read_field(g, "alpha", cfg.grid.alpha);
        read_field(g, "hidden", cfg.grid.hidden);
        read_field(g, "hidden_rnn", cfg.grid.hidden_rnn);
        read_field(g, "regressor", cfg.grid.regressor);
        read_field(g, "sigma", cfg.grid.sigma);
        read_field(g, "eta", cfg.grid.eta);
    }
    if (doc.contains("chosen")) {
        for (const auto& [key, value] : doc.at("chosen").items()) {
            method_from_string(key);  // validates the name
            cfg.chosen[key] = hyper_from_json(value);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    return config_from_json_string(read_text(path));
}

std::string config_to_json_string(const ExperimentConfig& cfg) {
    json doc;
    json methods = json::array();
    for (Method m : cfg.methods) methods.push_back(to_string(m));
    doc["methods"] = std::move(methods);
    json dataset;
    if (cfg.dataset.kind == DatasetSpec::Kind::csv) {
        dataset["kind"] = "csv";
        dataset["paths"] = cfg.dataset.paths;
    } else {
        dataset["kind"] = "synthetic";
        const auto& s = cfg.dataset.synthetic;
        dataset["sequences"] = s.sequences;
        dataset["duration_s"] = s.duration_s;
        dataset["sample_rate_hz"] = s.sample_rate_hz;
        dataset["noise_mm"] = s.noise_mm;
        dataset["outlier_rate"] = s.outlier_rate;
        dataset["outlier_scale"] = s.outlier_scale;
        dataset["outliers_train_only"] = s.outliers_train_only;
        dataset["harmonics"] = s.harmonics;
        dataset["drift_mm_per_s"] = s.drift_mm_per_s;
        json labels = json::array();
        for (auto l : s.labels) labels.push_back(to_string(l));
        dataset["labels"] = std::move(labels);
    }
    doc["dataset"] = std::move(dataset);
    doc["split"] = json{{"train_s", cfg.split.train_s}, {"validation_s", cfg.split.validation_s}};
    doc["horizon_s"] = cfg.horizon_s;
    doc["cv_runs"] = cfg.cv_runs;
    doc["eval_runs"] = cfg.eval_runs;
    doc["clip_norm"] = cfg.clip_norm;
    doc["seed"] = cfg.seed;
    doc["threads"] = cfg.threads;
    doc["variant"] = to_string(cfg.variant);
    doc["grid"] = json{{"alpha", cfg.grid.alpha},         {"hidden", cfg.grid.hidden},
                       {"hidden_rnn", cfg.grid.hidden_rnn}, {"regressor", cfg.grid.regressor},
                       {"sigma", cfg.grid.sigma},         {"eta", cfg.grid.eta}};
    json chosen;
    for (const auto& [name, hyper] : cfg.chosen) chosen[name] = hyper_to_json(hyper);
    doc["chosen"] = std::move(chosen);
    return doc.dump(2) + "\n";
}

std::vector<Sequence> load_dataset(const DatasetSpec& spec, const SplitSpec& split,
                                   std::uint64_t seed) {
    std::vector<Sequence> out;
    if (spec.kind == DatasetSpec::Kind::csv) {
        for (const auto& path : spec.paths) {
            Sequence s;
            s.name = fs::path(path).stem().string();
            s.series = load_csv(path);
            s.quat = encode_pure_quaternion(s.series);
            out.push_back(std::move(s));
        }
        return out;
    }
    const SyntheticSpec& sy = spec.synthetic;
    for (std::size_t i = 0; i < sy.sequences; ++i) {
        SynthConfig sc;
        sc.duration_s = sy.duration_s;
        sc.sample_rate_hz = sy.sample_rate_hz;
        sc.harmonics = sy.harmonics;
        sc.drift_mm_per_s = sy.drift_mm_per_s;
        sc.noise_mm = sy.noise_mm;
        sc.outlier_scale = sy.outlier_scale;
        sc.seed = mix(seed, 1000 + i);
        sc.label = sy.labels.empty() ? BreathingLabel::regular
                                     : sy.labels[i % sy.labels.size()];
        Sequence s;
        s.name = "synth_" + std::to_string(i);
        if (sy.outlier_rate > 0.0 && sy.outliers_train_only) {
            sc.outlier_rate = 0.0;
            MarkerSeries clean = synth_breathing(sc);
            sc.outlier_rate = sy.outlier_rate;
            MarkerSeries corrupted = synth_breathing(sc);
            SplitIndices idx = compute_split(clean.size(), clean.sample_rate_hz, split);
            // identical streams outside spike steps, so splicing corrupts
            // only the train+validation span
            for (std::size_t t = idx.val_end; t < corrupted.size(); ++t)
                corrupted.positions[t] = clean.positions[t];
            s.series = std::move(corrupted);
        } else {
            sc.outlier_rate = sy.outlier_rate;
            s.series = synth_breathing(sc);
        }
        s.quat = encode_pure_quaternion(s.series);
        out.push_back(std::move(s));
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, Method method, const Hyper& hyper,
                          std::size_t run_index, std::size_t sequence_index) {
    std::uint64_t h = mix(master, static_cast<std::uint64_t>(method) + 17);
    h = mix(h, double_bits(hyper.alpha));
    h = mix(h, hyper.hidden);
    h = mix(h, hyper.regressor);
    h = mix(h, double_bits(method_uses_sigma(method) ? hyper.sigma : 0.0));
    h = mix(h, run_index);
    h = mix(h, sequence_index + 0xabcd);
    return h;
}

namespace {

Frame frame_from_quat(const QuatVector& frame) {
    Frame out(frame.size());
    for (std::size_t m = 0; m < frame.size(); ++m)
        out[m] = {frame[m].b, frame[m].c, frame[m].d};
    return out;
}

std::vector<double> real_channels(const QuatVector& frame) {
    std::vector<double> out;
    out.reserve(frame.size() * 3);
    for (const auto& q : frame) {
        out.push_back(q.b);
        out.push_back(q.c);
        out.push_back(q.d);
    }
    return out;
}

QuatVector frame_from_channels(const std::vector<double>& v) {
    QuatVector out(v.size() / 3);
    for (std::size_t m = 0; m < out.size(); ++m)
        out[m] = Quaternion::pure(v[3 * m], v[3 * m + 1], v[3 * m + 2]);
    return out;
}

}  // namespace

RunOutput run_sequence(Method method, const Hyper& hyper, const Sequence& seq,
                       const SplitSpec& split, std::size_t horizon_steps, double clip_norm,
                       MuSumVariant variant, std::uint64_t run_seed) {
    const std::size_t T = seq.quat.size();
    const std::size_t H = horizon_steps;
    const std::size_t l = hyper.regressor;
    SplitIndices idx = compute_split(T, seq.series.sample_rate_hz, split);
    auto [norm, stats] = normalize(seq.quat, idx.train_end);

    RunOutput out;
    out.predictions.assign(T, Frame(3));
    out.valid_from = method_is_network(method) ? H : H + l - 1;

    // Forecast sanity guard: a diverged model can emit arbitrarily large
    // positions; anything outside +-50 standardized units falls back to
    // persistence (the newest observed sample) for that step.
    auto store = [&](std::size_t u, const QuatVector& normalized_pred,
                     const QuatVector& newest_observed) {
        bool sane = all_finite(normalized_pred);
        if (sane)
            for (const auto& q : normalized_pred)
                if (modulus_squared(q) > 2500.0) sane = false;
        out.predictions[u] =
            frame_from_quat(stats.invert(sane ? normalized_pred : newest_observed));
    };

    switch (method) {
        case Method::qrnn_mcc:
        case Method::qrnn_mse: {
            TrainConfig tc;
            tc.alpha = hyper.alpha;
            tc.sigma = hyper.sigma;
            tc.clip_norm = clip_norm;
            tc.window_len = l;
            tc.loss = method == Method::qrnn_mcc ? Loss::mcc : Loss::mse;
            tc.layers = {3, hyper.hidden, 3};
            tc.seed = run_seed;
            tc.variant = variant;
            QrnnTrainer trainer(QrnnParams::init(tc), tc);
            RollingWindow lookahead(trainer.params());
            for (std::size_t t = 0; t < T; ++t) {
                if (t >= H) trainer.feed(norm.frames[t - H], norm.frames[t]);
                if (t + H < T) {
                    lookahead.push(trainer.params(), tc, norm.frames[t], l);
                    store(t + H, lookahead.unroll(trainer.params(), tc).output(),
                          norm.frames[t]);
                }
            }
            break;
        }
        case Method::rnn_mcc:
        case Method::rnn_mse: {
            RealRnnConfig rc;
            rc.alpha = hyper.alpha;
            rc.sigma = hyper.sigma;
            rc.clip_norm = clip_norm;
            rc.window_len = l;
            rc.loss = method == Method::rnn_mcc ? Loss::mcc : Loss::mse;
            rc.layers = {9, hyper.hidden, 9};
            rc.seed = run_seed;
            RealRnnTrainer trainer(RealRnnParams::init(rc), rc);
            RealRollingWindow lookahead(trainer.params());
            std::vector<RealVector> channels;
            channels.reserve(T);
            for (std::size_t t = 0; t < T; ++t) {
                channels.push_back(real_channels(norm.frames[t]));
                if (t >= H) trainer.feed(channels[t - H], channels[t]);
                if (t + H < T) {
                    lookahead.push(trainer.params(), rc, channels[t], l);
                    store(t + H,
                          frame_from_channels(lookahead.unroll(trainer.params(), rc).output()),
                          norm.frames[t]);
                }
            }
            break;
        }
        case Method::qlms: {
            std::vector<QuatLmsFilter> filters(3, QuatLmsFilter(l, hyper.alpha));
            auto taps = [&](std::size_t end, int marker) {
                QuatVector x(l);
                for (std::size_t k = 0; k < l; ++k) x[k] = norm.frames[end - k][marker];
                return x;
            };
            for (std::size_t t = 0; t < T; ++t) {
                if (t >= H + l - 1)
                    for (int m = 0; m < 3; ++m)
                        filters[m].step(taps(t - H, m), norm.frames[t][m]);
                if (t + 1 >= l && t + H < T) {
                    QuatVector pred(3);
                    for (int m = 0; m < 3; ++m) pred[m] = filters[m].predict(taps(t, m));
                    store(t + H, pred, norm.frames[t]);
                }
            }
            break;
        }
        case Method::lms: {
            std::vector<LmsFilter> filters(9, LmsFilter(l, hyper.alpha));
            auto taps = [&](std::size_t end, int chan) {
                RealVector x(l);
                for (std::size_t k = 0; k < l; ++k) {
                    const Quaternion& q = norm.frames[end - k][chan / 3];
                    x[k] = chan % 3 == 0 ? q.b : chan % 3 == 1 ? q.c : q.d;
                }
                return x;
            };
            auto chan_value = [&](std::size_t t, int chan) {
                const Quaternion& q = norm.frames[t][chan / 3];
                return chan % 3 == 0 ? q.b : chan % 3 == 1 ? q.c : q.d;
            };
            for (std::size_t t = 0; t < T; ++t) {
                if (t >= H + l - 1)
                    for (int c = 0; c < 9; ++c) filters[c].step(taps(t - H, c), chan_value(t, c));
                if (t + 1 >= l && t + H < T) {
                    std::vector<double> pred(9);
                    for (int c = 0; c < 9; ++c) pred[c] = filters[c].predict(taps(t, c));
                    store(t + H, frame_from_channels(pred), norm.frames[t]);
                }
            }
            break;
        }
    }
    return out;
}

Trajectory truth_trajectory(const Sequence& seq, std::size_t begin, std::size_t end) {
    Trajectory out;
    out.reserve(end - begin);
    for (std::size_t t = begin; t < end; ++t) {
        Frame frame(3);
        for (int m = 0; m < 3; ++m)
            frame[m] = {seq.series.positions[t][m][0], seq.series.positions[t][m][1],
                        seq.series.positions[t][m][2]};
        out.push_back(std::move(frame));
    }
    return out;
}

MetricValues evaluate_segment(const RunOutput& out, const Sequence& seq, std::size_t begin,
                              std::size_t end) {
    begin = std::max(begin, out.valid_from);
    if (begin + 2 > end)
        raise(ErrorKind::series_too_short, "evaluation segment too short");
    Trajectory pred(out.predictions.begin() + static_cast<std::ptrdiff_t>(begin),
                    out.predictions.begin() + static_cast<std::ptrdiff_t>(end));
    Trajectory truth = truth_trajectory(seq, begin, end);
    return evaluate_trajectory(pred, truth);
}

namespace {

std::vector<Hyper> enumerate_grid(Method method, const GridSpec& grid) {
    std::vector<Hyper> pts;
    if (method_is_network(method)) {
        const auto& hiddens =
            (method == Method::rnn_mcc || method == Method::rnn_mse) ? grid.hidden_rnn : grid.hidden;
        std::vector<double> sigmas = method_uses_sigma(method) ? grid.sigma
                                                               : std::vector<double>{1.0};
        for (double a : grid.alpha)
            for (std::size_t h : hiddens)
                for (std::size_t l : grid.regressor)
                    for (double s : sigmas) pts.push_back({a, h, l, s});
    } else {
        for (double e : grid.eta)
            for (std::size_t l : grid.regressor) pts.push_back({e, 0, l, 1.0});
    }
    return pts;
}

bool hyper_less(const Hyper& a, const Hyper& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    if (a.hidden != b.hidden) return a.hidden < b.hidden;
    if (a.regressor != b.regressor) return a.regressor < b.regressor;
    return a.sigma < b.sigma;
}

}  // namespace

GridSearchOutput grid_search(Method method, const ExperimentConfig& cfg,
                             const std::vector<Sequence>& sequences) {
    GridSearchOutput out;
    out.method = method;
    std::vector<Hyper> points = enumerate_grid(method, cfg.grid);
    out.results.resize(points.size());

    std::size_t horizon = 0;
    if (!sequences.empty())
        horizon = static_cast<std::size_t>(
            std::llround(cfg.horizon_s * sequences.front().series.sample_rate_hz));

    std::size_t runs = method_is_stochastic(method) ? cfg.cv_runs : 1;
    parallel_for(points.size(), cfg.threads, [&](std::size_t p) {
        GridResult r;
        r.hyper = points[p];
        try {
            double acc = 0.0;
            std::size_t count = 0;
            for (std::size_t run = 0; run < runs; ++run) {
                for (std::size_t s = 0; s < sequences.size(); ++s) {
                    const Sequence& seq = sequences[s];
                    SplitIndices idx =
                        compute_split(seq.quat.size(), seq.series.sample_rate_hz, cfg.split);
                    RunOutput ro = run_sequence(method, points[p], seq, cfg.split, horizon,
                                                cfg.clip_norm, cfg.variant,
                                                derive_seed(cfg.seed, method, points[p], run, s));
                    Trajectory pred(ro.predictions.begin() + static_cast<std::ptrdiff_t>(
                                                                 std::max(idx.train_end,
                                                                          ro.valid_from)),
                                    ro.predictions.begin() +
                                        static_cast<std::ptrdiff_t>(idx.val_end));
                    Trajectory truth = truth_trajectory(
                        seq, std::max(idx.train_end, ro.valid_from), idx.val_end);
                    double val = rmse(pred, truth);
                    // 1e6 mm is far beyond any sane forecast: count a
                    // finite-but-exploded run as divergence too
                    if (!std::isfinite(val) || val > 1e6)
                        raise(ErrorKind::non_finite, "validation RMSE explosion");
                    acc += val;
                    ++count;
                }
            }
            r.val_rmse = acc / static_cast<double>(count);
        } catch (const Error& e) {
            r.failed = true;
            r.val_rmse = std::numeric_limits<double>::infinity();
            r.note = e.what();
        }
        out.results[p] = std::move(r);
    });

    std::size_t best = points.size();
    for (std::size_t p = 0; p < out.results.size(); ++p) {
        const GridResult& r = out.results[p];
        if (r.failed) continue;
        if (best == points.size() || r.val_rmse < out.results[best].val_rmse ||
            (r.val_rmse == out.results[best].val_rmse &&
             hyper_less(r.hyper, out.results[best].hyper)))
            best = p;
    }
    if (best == points.size())
        raise(ErrorKind::non_finite, std::string("every grid point failed for ") +
                                         to_string(method));
    out.best_index = best;
    return out;
}

MethodEvaluation evaluate_method(Method method, const Hyper& hyper, const ExperimentConfig& cfg,
                                 const std::vector<Sequence>& sequences) {
    MethodEvaluation ev;
    ev.method = method;
    ev.hyper = hyper;
    if (sequences.empty()) raise(ErrorKind::config_error, "no sequences to evaluate");

    std::size_t horizon = static_cast<std::size_t>(
        std::llround(cfg.horizon_s * sequences.front().series.sample_rate_hz));
    std::size_t runs = method_is_stochastic(method) ? cfg.eval_runs : 1;

    bool any_regular = false, any_irregular = false;
    for (const auto& s : sequences) {
        any_regular |= s.series.label == BreathingLabel::regular;
        any_irregular |= s.series.label == BreathingLabel::irregular;
    }

    // per run x sequence metric values
    std::vector<std::vector<MetricValues>> values(runs,
                                                  std::vector<MetricValues>(sequences.size()));
    std::vector<std::vector<RunOutput>> outputs(runs);
    for (auto& v : outputs) v.resize(sequences.size());

    parallel_for(runs * sequences.size(), cfg.threads, [&](std::size_t task) {
        std::size_t run = task / sequences.size();
        std::size_t s = task % sequences.size();
        const Sequence& seq = sequences[s];
        SplitIndices idx = compute_split(seq.quat.size(), seq.series.sample_rate_hz, cfg.split);
        RunOutput ro = run_sequence(method, hyper, seq, cfg.split, horizon, cfg.clip_norm,
                                    cfg.variant, derive_seed(cfg.seed, method, hyper, run, s));
        values[run][s] = evaluate_segment(ro, seq, idx.val_end, seq.quat.size());
        if (run == 0)
            outputs[0][s] = std::move(ro);
    });
    ev.first_run = std::move(outputs[0]);

    auto aggregate = [&](const std::string& cls, auto pred) {
        for (const char* metric : kMetricNames) {
            std::vector<double> per_run;
            per_run.reserve(runs);
            for (std::size_t run = 0; run < runs; ++run) {
                double acc = 0.0;
                std::size_t count = 0;
                for (std::size_t s = 0; s < sequences.size(); ++s) {
                    if (!pred(sequences[s])) continue;
                    acc += metric_by_name(values[run][s], metric);
                    ++count;
                }
                if (count == 0) return;  // class absent
                per_run.push_back(acc / static_cast<double>(count));
            }
            ReportCell cell;
            if (per_run.size() >= 2) {
                Ci ci = ci95(per_run);
                cell = {ci.mean, ci.half_width, true};
            } else {
                cell = {per_run.front(), 0.0, false};
            }
            ev.cells[cls][metric] = cell;
        }
    };
    aggregate("all", [](const Sequence&) { return true; });
    if (any_regular)
        aggregate("regular",
                  [](const Sequence& s) { return s.series.label == BreathingLabel::regular; });
    if (any_irregular)
        aggregate("irregular",
                  [](const Sequence& s) { return s.series.label == BreathingLabel::irregular; });
    return ev;
}

std::string report_to_csv(const std::vector<MethodEvaluation>& evals) {
    std::ostringstream os;
    os << "method,class,metric,mean,ci95_half_width,has_ci\n";
    for (const auto& ev : evals)
        for (const auto& [cls, metrics] : ev.cells)
            for (const auto& [metric, cell] : metrics)
                os << to_string(ev.method) << "," << cls << "," << metric << ","
                   << format_double(cell.mean) << "," << format_double(cell.half_width) << ","
                   << (cell.has_ci ? 1 : 0) << "\n";
    return os.str();
}

std::vector<MethodEvaluation> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "method,class,metric,mean,ci95_half_width,has_ci")
        raise(ErrorKind::parse_error, "bad report header");
    std::map<std::string, MethodEvaluation> by_method;
    std::vector<std::string> order;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        f.push_back(cur);
        if (f.size() != 6) raise(ErrorKind::parse_error, "bad report row: " + line);
        if (!by_method.count(f[0])) {
            by_method[f[0]].method = method_from_string(f[0]);
            order.push_back(f[0]);
        }
        ReportCell cell{parse_double(f[3]), parse_double(f[4]), f[5] == "1"};
        by_method[f[0]].cells[f[1]][f[2]] = cell;
    }
    std::vector<MethodEvaluation> out;
    for (const auto& name : order) out.push_back(by_method[name]);
    return out;
}

std::string report_to_text(const std::vector<MethodEvaluation>& evals) {
    std::vector<std::string> classes = {"all", "regular", "irregular"};
    std::ostringstream os;
    os << std::left << std::setw(8) << "Error" << std::setw(12) << "Method";
    for (const auto& cls : classes) os << std::setw(22) << cls;
    os << "\n" << std::string(8 + 12 + 22 * classes.size(), '-') << "\n";
    for (const char* metric : kMetricNames) {
        bool first = true;
        for (const auto& ev : evals) {
            os << std::left << std::setw(8) << (first ? metric : "") << std::setw(12)
               << to_string(ev.method);
            for (const auto& cls : classes) {
                std::ostringstream cell;
                auto cit = ev.cells.find(cls);
                if (cit != ev.cells.end() && cit->second.count(metric)) {
                    const ReportCell& c = cit->second.at(metric);
                    cell << std::fixed << std::setprecision(4) << c.mean;
                    if (c.has_ci) cell << " +/- " << std::setprecision(4) << c.half_width;
                } else {
                    cell << "-";
                }
                os << std::setw(22) << cell.str();
            }
            os << "\n";
            first = false;
        }
        os << "\n";
    }
    return os.str();
}

BenchmarkRow benchmark_method(Method method, const Hyper& hyper, double clip_norm,
                              MuSumVariant variant, std::size_t steps, std::uint64_t seed) {
    SynthConfig sc;
    sc.duration_s = (static_cast<double>(steps) + hyper.regressor + 40.0) / 10.0;
    sc.sample_rate_hz = 10.0;
    sc.seed = seed;
    Sequence seq;
    seq.series = synth_breathing(sc);
    seq.quat = encode_pure_quaternion(seq.series);
    auto [norm, stats] = normalize(seq.quat, seq.quat.size());

    BenchmarkRow row;
    row.method = method;
    row.hidden = method_is_network(method) ? hyper.hidden : 0;
    row.regressor = hyper.regressor;
    row.steps = steps;

    std::vector<double> times;
    times.reserve(steps);
    auto record = [&](auto&& step_fn, std::size_t t) {
        auto start = std::chrono::steady_clock::now();
        step_fn(t);
        auto stop = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    };

    std::size_t l = hyper.regressor;
    std::size_t warmup = 3;
    switch (method) {
        case Method::qrnn_mcc:
        case Method::qrnn_mse: {
            TrainConfig tc;
            tc.alpha = hyper.alpha;
            tc.sigma = hyper.sigma;
            tc.clip_norm = clip_norm;
            tc.window_len = l;
            tc.loss = method == Method::qrnn_mcc ? Loss::mcc : Loss::mse;
            tc.layers = {3, hyper.hidden, 3};
            tc.seed = seed;
            tc.variant = variant;
            QrnnTrainer trainer(QrnnParams::init(tc), tc);
            auto one = [&](std::size_t t) { trainer.feed(norm.frames[t], norm.frames[t + 1]); };
            for (std::size_t t = 0; t < warmup + steps; ++t)
                t < warmup ? one(t) : record(one, t);
            break;
        }
        case Method::rnn_mcc:
        case Method::rnn_mse: {
            RealRnnConfig rc;
            rc.alpha = hyper.alpha;
            rc.sigma = hyper.sigma;
            rc.clip_norm = clip_norm;
            rc.window_len = l;
            rc.loss = method == Method::rnn_mcc ? Loss::mcc : Loss::mse;
            rc.layers = {9, hyper.hidden, 9};
            rc.seed = seed;
            RealRnnTrainer trainer(RealRnnParams::init(rc), rc);
            auto one = [&](std::size_t t) {
                trainer.feed(real_channels(norm.frames[t]), real_channels(norm.frames[t + 1]));
            };
            for (std::size_t t = 0; t < warmup + steps; ++t)
                t < warmup ? one(t) : record(one, t);
            break;
        }
        case Method::qlms: {
            std::vector<QuatLmsFilter> filters(3, QuatLmsFilter(l, hyper.alpha));
            auto one = [&](std::size_t t) {
                for (int m = 0; m < 3; ++m) {
                    QuatVector x(l);
                    for (std::size_t k = 0; k < l; ++k) x[k] = norm.frames[t + l - 1 - k][m];
                    filters[m].step(x, norm.frames[t + l][m]);
                }
            };
            for (std::size_t t = 0; t < warmup + steps; ++t)
                t < warmup ? one(t) : record(one, t);
            break;
        }
        case Method::lms: {
            std::vector<LmsFilter> filters(9, LmsFilter(l, hyper.alpha));
            auto one = [&](std::size_t t) {
                for (int c = 0; c < 9; ++c) {
                    RealVector x(l);
                    for (std::size_t k = 0; k < l; ++k) {
                        const Quaternion& q = norm.frames[t + l - 1 - k][c / 3];
                        x[k] = c % 3 == 0 ? q.b : c % 3 == 1 ? q.c : q.d;
                    }
                    const Quaternion& q = norm.frames[t + l][c / 3];
                    filters[c].step(x, c % 3 == 0 ? q.b : c % 3 == 1 ? q.c : q.d);
                }
            };
            for (std::size_t t = 0; t < warmup + steps; ++t)
                t < warmup ? one(t) : record(one, t);
            break;
        }
    }

    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : times) sum += v;
    row.mean_ms = sum / static_cast<double>(times.size());
    row.median_ms = sorted[sorted.size() / 2];
    row.p95_ms = sorted[std::min(sorted.size() - 1,
                                 static_cast<std::size_t>(0.95 * static_cast<double>(sorted.size())))];
    return row;
}

namespace {

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& resolved_config, const CommandResult& result) {
    json doc;
    doc["command"] = command;
    doc["config"] = resolved_config;
    json artifacts = json::array();
    for (const auto& [kind, path] : result.artifacts)
        artifacts.push_back({{"kind", kind}, {"path", path}});
    doc["artifacts"] = std::move(artifacts);
    write_text((fs::path(out_dir) / "manifest.json").string(), doc.dump(2) + "\n");
}

json resolved_config_json(const ExperimentConfig& cfg) {
    return json::parse(config_to_json_string(cfg));
}

}  // namespace

CommandResult cmd_gridsearch(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    std::vector<Sequence> sequences = load_dataset(cfg.dataset, cfg.split, cfg.seed);

    CommandResult result;
    json best;
    for (Method method : cfg.methods) {
        GridSearchOutput gs = grid_search(method, cfg, sequences);
        std::ostringstream os;
        os << "method,alpha,hidden,regressor,sigma,val_rmse,status,note\n";
        for (const auto& r : gs.results) {
            os << to_string(method) << "," << format_double(r.hyper.alpha) << ","
               << r.hyper.hidden << "," << r.hyper.regressor << ","
               << format_double(r.hyper.sigma) << ","
               << (r.failed ? "inf" : format_double(r.val_rmse)) << ","
               << (r.failed ? "failed" : "ok") << "," << r.note << "\n";
        }
        std::string name = std::string("grid_") + to_string(method) + ".csv";
        write_text((fs::path(out_dir) / name).string(), os.str());
        result.artifacts.emplace_back("grid", name);
        best[to_string(method)] = hyper_to_json(gs.results[gs.best_index].hyper);
    }
    write_text((fs::path(out_dir) / "best.json").string(), best.dump(2) + "\n");
    result.artifacts.emplace_back("best", "best.json");
    write_manifest(out_dir, "gridsearch", resolved_config_json(cfg), result);
    return result;
}

CommandResult cmd_evaluate(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    std::vector<Sequence> sequences = load_dataset(cfg.dataset, cfg.split, cfg.seed);

    std::vector<MethodEvaluation> evals;
    for (Method method : cfg.methods) {
        auto it = cfg.chosen.find(to_string(method));
        if (it == cfg.chosen.end())
            raise(ErrorKind::config_error,
                  std::string("no chosen hyperparameters for ") + to_string(method) +
                      "; run gridsearch or add a 'chosen' entry");
        evals.push_back(evaluate_method(method, it->second, cfg, sequences));
    }

    CommandResult result;
    write_text((fs::path(out_dir) / "report.csv").string(), report_to_csv(evals));
    result.artifacts.emplace_back("report-csv", "report.csv");
    write_text((fs::path(out_dir) / "report.txt").string(), report_to_text(evals));
    result.artifacts.emplace_back("report-text", "report.txt");

    for (const auto& ev : evals) {
        for (std::size_t s = 0; s < sequences.size(); ++s) {
            const Sequence& seq = sequences[s];
            SplitIndices idx =
                compute_split(seq.quat.size(), seq.series.sample_rate_hz, cfg.split);
            std::ostringstream os;
            os << "t";
            for (int m = 1; m <= 3; ++m)
                for (const char* a : {"x", "y", "z"}) os << ",truth_m" << m << a;
            for (int m = 1; m <= 3; ++m)
                for (const char* a : {"x", "y", "z"}) os << ",pred_m" << m << a;
            os << "\n";
            std::size_t begin = std::max(idx.val_end, ev.first_run[s].valid_from);
            for (std::size_t t = begin; t < seq.quat.size(); ++t) {
                os << format_double(seq.series.timestamps[t]);
                for (int m = 0; m < 3; ++m)
                    for (int a = 0; a < 3; ++a)
                        os << "," << format_double(seq.series.positions[t][m][a]);
                const Frame& f = ev.first_run[s].predictions[t];
                for (int m = 0; m < 3; ++m) {
                    os << "," << format_double(f[m].x) << "," << format_double(f[m].y) << ","
                       << format_double(f[m].z);
                }
                os << "\n";
            }
            std::string name =
                std::string("trace_") + to_string(ev.method) + "_" + seq.name + ".csv";
            write_text((fs::path(out_dir) / name).string(), os.str());
            result.artifacts.emplace_back("trace", name);
        }
    }
    write_manifest(out_dir, "evaluate", resolved_config_json(cfg), result);
    return result;
}

CommandResult cmd_benchmark(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);

    // one training step must fit within the 10 Hz marker sampling interval,
    // with margin for acquisition overhead
    const double budget_ms = 400.0;
    CommandResult result;
    std::ostringstream os;
    os << "method,hidden,regressor,steps,mean_ms,median_ms,p95_ms,within_budget\n";
    std::ostringstream text;
    text << std::left << std::setw(12) << "Method" << std::setw(12) << "median ms"
         << std::setw(12) << "p95 ms" << "budget\n";
    for (Method method : cfg.methods) {
        Hyper h;
        h.alpha = 0.05;
        h.regressor = 90;
        h.hidden = (method == Method::rnn_mcc || method == Method::rnn_mse) ? 90 : 45;
        h.sigma = 1.0;
        BenchmarkRow row = benchmark_method(method, h, cfg.clip_norm, cfg.variant, 100, cfg.seed);
        bool within = row.median_ms < budget_ms;
        os << to_string(method) << "," << row.hidden << "," << row.regressor << "," << row.steps
           << "," << format_double(row.mean_ms) << "," << format_double(row.median_ms) << ","
           << format_double(row.p95_ms) << "," << (within ? 1 : 0) << "\n";
        text << std::left << std::setw(12) << to_string(method) << std::setw(12) << std::fixed
             << std::setprecision(3) << row.median_ms << std::setw(12) << row.p95_ms
             << (within ? "ok" : "EXCEEDED") << "\n";
    }
    write_text((fs::path(out_dir) / "timing.csv").string(), os.str());
    result.artifacts.emplace_back("timing-csv", "timing.csv");
    write_text((fs::path(out_dir) / "timing.txt").string(), text.str());
    result.artifacts.emplace_back("timing-text", "timing.txt");
    write_manifest(out_dir, "benchmark", resolved_config_json(cfg), result);
    return result;
}

CommandResult cmd_synth(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    if (cfg.dataset.kind != DatasetSpec::Kind::synthetic)
        raise(ErrorKind::config_error, "synth needs a synthetic dataset spec");
    fs::create_directories(out_dir);
    std::vector<Sequence> sequences = load_dataset(cfg.dataset, cfg.split, cfg.seed);

    CommandResult result;
    std::ostringstream summary;
    summary << "sequence,label,samples,duration_s,mean_mm,rms_dev_mm\n";
    for (const auto& seq : sequences) {
        std::string name = seq.name + ".csv";
        save_csv((fs::path(out_dir) / name).string(), seq.series);
        result.artifacts.emplace_back("series", name);

        double mean = 0.0;
        std::size_t count = seq.series.size() * 9;
        for (const auto& frame : seq.series.positions)
            for (const auto& marker : frame)
                for (double v : marker) mean += v;
        mean /= static_cast<double>(count);
        double dev = 0.0;
        for (const auto& frame : seq.series.positions)
            for (const auto& marker : frame)
                for (double v : marker) dev += (v - mean) * (v - mean);
        dev = std::sqrt(dev / static_cast<double>(count));
        summary << seq.name << "," << to_string(seq.series.label) << "," << seq.series.size()
                << "," << format_double(seq.series.duration_s()) << "," << format_double(mean)
                << "," << format_double(dev) << "\n";
    }
    write_text((fs::path(out_dir) / "summary.csv").string(), summary.str());
    result.artifacts.emplace_back("summary", "summary.csv");
    write_manifest(out_dir, "synth", resolved_config_json(cfg), result);
    return result;
}

CommandResult cmd_plotdata(const std::vector<std::string>& manifest_paths,
                           const std::string& out_dir, double sigma) {
    fs::create_directories(out_dir);
    CommandResult result;

    // Correntropy and squared-error surfaces over a pure-quaternion error grid.
    KernelConfig kernel(sigma);
    std::ostringstream os;
    os << "x,y,z,mse,correntropy\n";
    const int half = 6;
    double extent = 3.0 * sigma;
    for (int ix = -half; ix <= half; ++ix)
        for (int iy = -half; iy <= half; ++iy)
            for (int iz = -half; iz <= half; ++iz) {
                double x = extent * ix / half, y = extent * iy / half, z = extent * iz / half;
                Quaternion e = Quaternion::pure(x, y, z);
                os << format_double(x) << "," << format_double(y) << "," << format_double(z)
                   << "," << format_double(modulus_squared(e)) << ","
                   << format_double(quat_gauss_kernel(e, Quaternion::zero(), kernel)) << "\n";
            }
    write_text((fs::path(out_dir) / "kernel_surface.csv").string(), os.str());
    result.artifacts.emplace_back("kernel-surface", "kernel_surface.csv");

    for (const auto& manifest_path : manifest_paths) {
        json manifest;
        try {
            manifest = json::parse(read_text(manifest_path));
        } catch (const json::exception& e) {
            raise(ErrorKind::parse_error, manifest_path + ": " + e.what());
        }
        fs::path base = fs::path(manifest_path).parent_path();
        for (const auto& artifact : manifest.at("artifacts")) {
            std::string kind = artifact.at("kind").get<std::string>();
            std::string rel = artifact.at("path").get<std::string>();
            if (kind == "trace") {
                fs::copy_file(base / rel, fs::path(out_dir) / rel,
                              fs::copy_options::overwrite_existing);
                result.artifacts.emplace_back("trace", rel);
            } else if (kind == "grid") {
                // heat table: min validation RMSE per (hidden, alpha)
                std::string text = read_text((base / rel).string());
                std::istringstream in(text);
                std::string line;
                std::getline(in, line);
                std::map<std::pair<std::size_t, double>, double> heat;
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    std::vector<std::string> f;
                    std::string cur;
                    for (char ch : line) {
                        if (ch == ',') {
                            f.push_back(cur);
                            cur.clear();
                        } else {
                            cur.push_back(ch);
                        }
                    }
                    f.push_back(cur);
                    if (f.size() < 7 || f[6] == "failed") continue;
                    auto key = std::make_pair(static_cast<std::size_t>(parse_double(f[2])),
                                              parse_double(f[1]));
                    double v = parse_double(f[5]);
                    auto it = heat.find(key);
                    if (it == heat.end() || v < it->second) heat[key] = v;
                }
                std::ostringstream hos;
                hos << "hidden,alpha,best_val_rmse\n";
                for (const auto& [key, v] : heat)
                    hos << key.first << "," << format_double(key.second) << ","
                        << format_double(v) << "\n";
                std::string name = "heat_" + fs::path(rel).stem().string() + ".csv";
                write_text((fs::path(out_dir) / name).string(), hos.str());
                result.artifacts.emplace_back("heat", name);
            }
        }
    }

    json cfg;
    cfg["manifests"] = manifest_paths;
    cfg["sigma"] = sigma;
    write_manifest(out_dir, "plotdata", cfg, result);
    return result;
}

}  // namespace qrnn
