#include "qrnn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "qrnn/errors.hpp"

namespace qrnn {

namespace {

constexpr double kTimestampTol = 1e-6;

const char* kColumns[10] = {"time", "m1x", "m1y", "m1z", "m2x",
                            "m2y",  "m2z", "m3x", "m3y", "m3z"};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over the (seed, stream) pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

const char* to_string(BreathingLabel label) {
    switch (label) {
        case BreathingLabel::regular: return "regular";
        case BreathingLabel::irregular: return "irregular";
        case BreathingLabel::unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

MarkerSeries load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::io_error, "cannot open " + path);

    MarkerSeries series;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        if (stripped[0] == '#') {
            auto eq = stripped.find("label=");
            if (eq != std::string::npos) {
                std::string value = trim(stripped.substr(eq + 6));
                if (value == "regular") series.label = BreathingLabel::regular;
                else if (value == "irregular") series.label = BreathingLabel::irregular;
                else raise(ErrorKind::parse_error, "row " + std::to_string(row) +
                                                       ": unknown label '" + value + "'");
            }
            continue;
        }
        auto fields = split_line(stripped);
        if (!header_seen) {
            for (int c = 0; c < 10; ++c) {
                if (static_cast<std::size_t>(c) >= fields.size() ||
                    trim(fields[c]) != kColumns[c]) {
                    raise(ErrorKind::missing_columns,
                          std::string("missing or misplaced column '") + kColumns[c] + "'");
                }
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 10)
            raise(ErrorKind::parse_error, "row " + std::to_string(row) + ": expected 10 fields, got " +
                                              std::to_string(fields.size()));
        std::array<double, 10> values{};
        for (int c = 0; c < 10; ++c) {
            std::string f = trim(fields[c]);
            auto res = std::from_chars(f.data(), f.data() + f.size(), values[c]);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
                raise(ErrorKind::parse_error, "row " + std::to_string(row) + ", column " +
                                                  kColumns[c] + ": cannot parse '" + f + "'");
            if (!std::isfinite(values[c]))
                raise(ErrorKind::parse_error, "row " + std::to_string(row) + ", column " +
                                                  kColumns[c] + ": non-finite value");
        }
        series.timestamps.push_back(values[0]);
        std::array<std::array<double, 3>, 3> frame{};
        for (int m = 0; m < 3; ++m)
            for (int a = 0; a < 3; ++a) frame[m][a] = values[1 + 3 * m + a];
        series.positions.push_back(frame);
    }
    if (!header_seen) raise(ErrorKind::missing_columns, "no header row in " + path);
    if (series.size() < 2) raise(ErrorKind::parse_error, "need at least two samples in " + path);

    double dt = series.timestamps[1] - series.timestamps[0];
    if (!(dt > 0.0)) raise(ErrorKind::non_uniform_sampling, "non-increasing timestamps");
    for (std::size_t t = 1; t < series.timestamps.size(); ++t) {
        double step = series.timestamps[t] - series.timestamps[t - 1];
        if (std::abs(step - dt) > kTimestampTol) {
            std::ostringstream msg;
            msg << "gap at row " << t + 1 << ": step " << step << " s, expected " << dt << " s";
            raise(ErrorKind::non_uniform_sampling, msg.str());
        }
    }
    series.sample_rate_hz = 1.0 / dt;
    return series;
}

void save_csv(const std::string& path, const MarkerSeries& series) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::io_error, "cannot write " + path);
    if (series.label != BreathingLabel::unlabeled)
        out << "# label=" << to_string(series.label) << "\n";
    out << "time,m1x,m1y,m1z,m2x,m2y,m2z,m3x,m3y,m3z\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
        out << format_double(series.timestamps[t]);
        for (int m = 0; m < 3; ++m)
            for (int a = 0; a < 3; ++a) out << "," << format_double(series.positions[t][m][a]);
        out << "\n";
    }
    if (!out) raise(ErrorKind::io_error, "write failed for " + path);
}

QuatSeries encode_pure_quaternion(const MarkerSeries& series) {
    QuatSeries out;
    out.frames.reserve(series.size());
    for (const auto& frame : series.positions) {
        QuatVector qs(3);
        for (int m = 0; m < 3; ++m)
            qs[m] = Quaternion::pure(frame[m][0], frame[m][1], frame[m][2]);
        out.frames.push_back(std::move(qs));
    }
    return out;
}

MarkerSeries decode_positions(const QuatSeries& series, double sample_rate_hz,
                              BreathingLabel label) {
    MarkerSeries out;
    out.sample_rate_hz = sample_rate_hz;
    out.label = label;
    for (std::size_t t = 0; t < series.size(); ++t) {
        out.timestamps.push_back(static_cast<double>(t) / sample_rate_hz);
        std::array<std::array<double, 3>, 3> frame{};
        for (int m = 0; m < 3; ++m) {
            const Quaternion& q = series.frames[t][m];
            frame[m] = {q.b, q.c, q.d};
        }
        out.positions.push_back(frame);
    }
    return out;
}

SplitIndices compute_split(std::size_t length, double sample_rate_hz, const SplitSpec& spec) {
    if (!(spec.train_s > 0.0) || spec.validation_s < 0.0)
        raise(ErrorKind::config_error, "split durations must be positive");
    auto train = static_cast<std::size_t>(std::llround(spec.train_s * sample_rate_hz));
    auto val = static_cast<std::size_t>(std::llround(spec.validation_s * sample_rate_hz));
    if (train + val > length)
        raise(ErrorKind::config_error, "train + validation exceed the sequence duration");
    return {train, train + val};
}

QuatVector NormStats::apply(const QuatVector& frame) const {
    QuatVector out(frame.size());
    for (std::size_t m = 0; m < frame.size(); ++m) {
        out[m] = Quaternion::pure((frame[m].b - mean[m][0]) / scale[m][0],
                                  (frame[m].c - mean[m][1]) / scale[m][1],
                                  (frame[m].d - mean[m][2]) / scale[m][2]);
    }
    return out;
}

QuatVector NormStats::invert(const QuatVector& frame) const {
    QuatVector out(frame.size());
    for (std::size_t m = 0; m < frame.size(); ++m) {
        out[m] = Quaternion::pure(frame[m].b * scale[m][0] + mean[m][0],
                                  frame[m].c * scale[m][1] + mean[m][1],
                                  frame[m].d * scale[m][2] + mean[m][2]);
    }
    return out;
}

std::pair<QuatSeries, NormStats> normalize(const QuatSeries& series, std::size_t train_len) {
    if (train_len == 0 || train_len > series.size())
        raise(ErrorKind::config_error, "normalization window empty or longer than the series");
    if (series.width() != 3)
        raise(ErrorKind::dimension_mismatch, "normalize expects width-3 series");

    NormStats stats;
    for (int m = 0; m < 3; ++m) {
        for (int a = 0; a < 3; ++a) {
            double sum = 0.0;
            for (std::size_t t = 0; t < train_len; ++t) {
                const Quaternion& q = series.frames[t][m];
                sum += a == 0 ? q.b : a == 1 ? q.c : q.d;
            }
            double mean = sum / static_cast<double>(train_len);
            double var = 0.0;
            for (std::size_t t = 0; t < train_len; ++t) {
                const Quaternion& q = series.frames[t][m];
                double v = (a == 0 ? q.b : a == 1 ? q.c : q.d) - mean;
                var += v * v;
            }
            double sd = std::sqrt(var / static_cast<double>(train_len));
            if (sd < 1e-9) {
                // degenerate constant channel: pass through untouched
                stats.mean[m][a] = 0.0;
                stats.scale[m][a] = 1.0;
            } else {
                stats.mean[m][a] = mean;
                stats.scale[m][a] = sd;
            }
        }
    }

    QuatSeries out;
    out.frames.reserve(series.size());
    for (const auto& frame : series.frames) out.frames.push_back(stats.apply(frame));
    return {std::move(out), stats};
}

std::vector<Window> make_windows(const QuatSeries& series, std::size_t regressor_len,
                                 std::size_t horizon) {
    if (regressor_len == 0) raise(ErrorKind::config_error, "regressor length must be >= 1");
    std::size_t total = series.size();
    if (total <= regressor_len + horizon)
        raise(ErrorKind::series_too_short, "series length " + std::to_string(total) +
                                               " needs more than " +
                                               std::to_string(regressor_len + horizon) + " samples");
    std::size_t count = total - regressor_len - horizon;
    std::vector<Window> out;
    out.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        Window win;
        win.inputs.assign(series.frames.begin() + static_cast<std::ptrdiff_t>(w),
                          series.frames.begin() + static_cast<std::ptrdiff_t>(w + regressor_len));
        win.target = series.frames[w + regressor_len - 1 + horizon];
        out.push_back(std::move(win));
    }
    return out;
}

MarkerSeries synth_breathing(const SynthConfig& cfg) {
    if (!(cfg.duration_s > 0.0) || !(cfg.sample_rate_hz > 0.0))
        raise(ErrorKind::config_error, "duration and sample rate must be positive");
    if (cfg.harmonics < 1 || cfg.harmonics > 3)
        raise(ErrorKind::config_error, "harmonics must be in 1..3");
    if (cfg.outlier_rate < 0.0 || cfg.outlier_rate > 1.0)
        raise(ErrorKind::config_error, "outlier_rate must be in [0, 1]");
    if (cfg.noise_mm < 0.0) raise(ErrorKind::config_error, "noise_mm must be >= 0");

    auto steps = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.sample_rate_hz));
    if (steps < 2) raise(ErrorKind::config_error, "duration too short");

    std::mt19937_64 base_rng(mix_seed(cfg.seed, 1));
    std::mt19937_64 noise_rng(mix_seed(cfg.seed, 2));
    std::mt19937_64 outlier_rng(mix_seed(cfg.seed, 3));

    // Axis order: superior-inferior, left-right, antero-posterior.
    const double axis_amp[3] = {15.0, 5.0, 25.0};
    const double axis_base[3] = {20.0, 5.0, 30.0};

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double f0 = 0.2 + 0.13 * unit(base_rng);  // base breathing frequency, ~3.0-5.0 s period

    // One respiratory driver: a latent oscillator whose phase advances at a
    // wandering rate and whose depth follows a slow mean-reverting walk.
    // Breath shape couples to depth (deeper breaths run slower and carry a
    // stronger, shifted second partial), so the waveform is not a fixed
    // linear mixture of sinusoids. Markers lag and rescale the driver; axes
    // share its phase with their own amplitudes.
    double marker_gain[3], marker_lag[3];
    for (int m = 0; m < 3; ++m) {
        marker_gain[m] = m == 0 ? 1.0 : 0.75 + 0.5 * unit(base_rng);
        marker_lag[m] = m == 0 ? 0.0 : 0.6 * (unit(base_rng) - 0.5);
    }
    double axis_jitter[3][3];
    for (int m = 0; m < 3; ++m)
        for (int a = 0; a < 3; ++a) axis_jitter[m][a] = 0.85 + 0.3 * unit(base_rng);
    double partial_decay[3] = {1.0, 0.35, 0.12};
    double phase0 = 2.0 * M_PI * unit(base_rng);

    bool irregular = cfg.label == BreathingLabel::irregular;
    // depth walk: mean-reverting, slow; stronger and faster when irregular
    double depth_sigma = irregular ? 0.050 : 0.018;
    double depth_revert = 0.01;
    // instantaneous-rate wander on top of the depth-rate coupling
    double rate_sigma = irregular ? 0.012 : 0.004;

    std::mt19937_64 driver_rng(mix_seed(cfg.seed, 4));
    std::normal_distribution<double> driver_gauss(0.0, 1.0);

    std::size_t steps_total = steps;
    std::vector<double> phase(steps_total), depth(steps_total);
    {
        double th = phase0, d = 1.0, rate_wander = 0.0;
        double dt = 1.0 / cfg.sample_rate_hz;
        for (std::size_t t = 0; t < steps_total; ++t) {
            phase[t] = th;
            depth[t] = d;
            // deeper breathing runs slower
            double f_inst = f0 * (1.15 - 0.15 * d) * (1.0 + rate_wander);
            th += 2.0 * M_PI * f_inst * dt;
            d += depth_revert * (1.0 - d) + depth_sigma * std::sqrt(dt) * driver_gauss(driver_rng);
            d = std::min(1.6, std::max(0.45, d));
            rate_wander = 0.995 * rate_wander + rate_sigma * driver_gauss(driver_rng);
        }
    }

    // Irregular burst episodes (talking/laughing-like): intervals with an
    // added higher-frequency component.
    struct Burst {
        std::size_t begin, end;
        double freq, amp_frac, phase;
    };
    std::vector<Burst> bursts;
    if (cfg.label == BreathingLabel::irregular) {
        std::size_t t = static_cast<std::size_t>(5.0 * cfg.sample_rate_hz);
        while (t + 10 < steps) {
            std::size_t len = static_cast<std::size_t>((2.0 + 6.0 * unit(base_rng)) *
                                                       cfg.sample_rate_hz);
            Burst b;
            b.begin = t;
            b.end = std::min(steps, t + len);
            b.freq = 0.9 + 0.8 * unit(base_rng);
            b.amp_frac = 0.25 + 0.35 * unit(base_rng);
            b.phase = 2.0 * M_PI * unit(base_rng);
            bursts.push_back(b);
            t = b.end + static_cast<std::size_t>((4.0 + 10.0 * unit(base_rng)) *
                                                 cfg.sample_rate_hz);
        }
    }

    // Per-channel clean-signal RMS (approximate, for outlier amplitude).
    double channel_rms[3][3];
    for (int m = 0; m < 3; ++m)
        for (int a = 0; a < 3; ++a) {
            double acc = 0.0;
            for (int h = 0; h < cfg.harmonics; ++h) {
                double amp = marker_gain[m] * axis_amp[a] * axis_jitter[m][a] * partial_decay[h];
                acc += 0.5 * amp * amp;
            }
            channel_rms[m][a] = std::sqrt(acc);
        }

    std::normal_distribution<double> gauss(0.0, 1.0);
    MarkerSeries out;
    out.sample_rate_hz = cfg.sample_rate_hz;
    out.label = cfg.label;
    out.timestamps.reserve(steps);
    out.positions.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        double time = static_cast<double>(t) / cfg.sample_rate_hz;
        std::array<std::array<double, 3>, 3> frame{};
        for (int m = 0; m < 3; ++m) {
            double th = phase[t] + marker_lag[m];
            double d = depth[t];
            // breath waveform: depth scales the partials and shifts the
            // second one, so shape changes with depth
            double wave[3];
            wave[0] = std::sin(th);
            wave[1] = std::sin(2.0 * th + 0.7 + 0.5 * d);
            wave[2] = std::sin(3.0 * th + 1.1);
            for (int a = 0; a < 3; ++a) {
                double v = axis_base[a] + cfg.drift_mm_per_s * time;
                for (int h = 0; h < cfg.harmonics; ++h) {
                    double amp = marker_gain[m] * axis_amp[a] * axis_jitter[m][a] *
                                 partial_decay[h] * (h == 0 ? d : d * d);
                    v += amp * wave[h];
                }
                for (const auto& b : bursts)
                    if (t >= b.begin && t < b.end)
                        v += b.amp_frac * axis_amp[a] *
                             std::sin(2.0 * M_PI * b.freq * time + b.phase);
                frame[m][a] = v;
            }
        }
        for (int m = 0; m < 3; ++m)
            for (int a = 0; a < 3; ++a) frame[m][a] += cfg.noise_mm * gauss(noise_rng);
        bool spike = cfg.outlier_rate > 0.0 && unit(outlier_rng) < cfg.outlier_rate;
        if (spike) {
            for (int m = 0; m < 3; ++m)
                for (int a = 0; a < 3; ++a) {
                    double sign = unit(outlier_rng) < 0.5 ? -1.0 : 1.0;
                    frame[m][a] += sign * cfg.outlier_scale * channel_rms[m][a];
                }
        }
        out.timestamps.push_back(time);
        out.positions.push_back(frame);
    }
    return out;
}

}  // namespace qrnn
