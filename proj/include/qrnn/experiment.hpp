#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrnn/data.hpp"
#include "qrnn/metrics.hpp"
#include "qrnn/model.hpp"

namespace qrnn {

enum class Method { qrnn_mcc, qrnn_mse, rnn_mcc, rnn_mse, qlms, lms };

const char* to_string(Method m);
Method method_from_string(const std::string& name);
bool method_uses_sigma(Method m);
bool method_is_network(Method m);
/// Whether independent runs differ (seeded weight init). The LMS family is
/// zero-initialized and fully determined by the data.
bool method_is_stochastic(Method m);

/// One hyperparameter point. alpha doubles as the LMS-family step size.
struct Hyper {
    double alpha = 0.05;
    std::size_t hidden = 10;
    std::size_t regressor = 10;
    double sigma = 1.0;
};

struct SyntheticSpec {
    std::size_t sequences = 4;
    double duration_s = 180.0;
    double sample_rate_hz = 10.0;
    std::vector<BreathingLabel> labels = {BreathingLabel::regular, BreathingLabel::irregular};
    double noise_mm = 0.3;
    double outlier_rate = 0.0;
    double outlier_scale = 8.0;
    bool outliers_train_only = true;  ///< corrupt only the train+validation span
    int harmonics = 2;
    double drift_mm_per_s = 0.01;
};

struct DatasetSpec {
    enum class Kind { synthetic, csv };
    Kind kind = Kind::synthetic;
    SyntheticSpec synthetic;
    std::vector<std::string> paths;
};

struct GridSpec {
    std::vector<double> alpha = {0.02, 0.05, 0.1, 0.2};
    std::vector<std::size_t> hidden = {10, 20, 30, 40, 45};
    std::vector<std::size_t> hidden_rnn = {20, 40, 60, 80, 90};
    std::vector<std::size_t> regressor = {10, 30, 50, 70, 90};
    std::vector<double> sigma = {0.5, 1.0, 2.0, 5.0};
    std::vector<double> eta = {0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2};
};

struct ExperimentConfig {
    std::vector<Method> methods = {Method::qrnn_mcc};
    DatasetSpec dataset;
    SplitSpec split;
    double horizon_s = 2.0;
    std::size_t cv_runs = 1;
    std::size_t eval_runs = 1;
    double clip_norm = 1.0;
    std::uint64_t seed = 0;
    GridSpec grid;
    std::map<std::string, Hyper> chosen;  ///< per method name, for evaluate
    MuSumVariant variant = MuSumVariant::collapsed;
    int threads = 1;

    void validate() const;
};

ExperimentConfig config_from_json_string(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);
std::string config_to_json_string(const ExperimentConfig& cfg);

struct Sequence {
    std::string name;
    MarkerSeries series;
    QuatSeries quat;
};

std::vector<Sequence> load_dataset(const DatasetSpec& spec, const SplitSpec& split,
                                   std::uint64_t seed);

/// Deterministic seed for (method, hyperparameter point, run, sequence),
/// keyed by the point's values so grid enumeration order is irrelevant.
std::uint64_t derive_seed(std::uint64_t master, Method method, const Hyper& hyper,
                          std::size_t run_index, std::size_t sequence_index);

/// Online forecasting pass over one sequence. At each step t the model is
/// updated with the most recent pair whose target has materialized
/// (input t-H, target t) and then asked for its estimate of the sample at
/// t+H; nothing later than t is ever read for either. Predictions are
/// de-normalized to mm and aligned with the truth index they estimate.
struct RunOutput {
    Trajectory predictions;   ///< predictions[u] estimates truth frame u
    std::size_t valid_from;   ///< first index holding a real prediction
};

RunOutput run_sequence(Method method, const Hyper& hyper, const Sequence& seq,
                       const SplitSpec& split, std::size_t horizon_steps, double clip_norm,
                       MuSumVariant variant, std::uint64_t run_seed);

Trajectory truth_trajectory(const Sequence& seq, std::size_t begin, std::size_t end);
MetricValues evaluate_segment(const RunOutput& out, const Sequence& seq, std::size_t begin,
                              std::size_t end);

struct GridResult {
    Hyper hyper;
    double val_rmse = 0.0;
    bool failed = false;
    std::string note;
};

struct GridSearchOutput {
    Method method;
    std::vector<GridResult> results;
    std::size_t best_index = 0;
};

GridSearchOutput grid_search(Method method, const ExperimentConfig& cfg,
                             const std::vector<Sequence>& sequences);

struct ReportCell {
    double mean = 0.0;
    double half_width = 0.0;
    bool has_ci = false;
};

/// Table-I-shaped evaluation: method x metric x breathing class.
struct MethodEvaluation {
    Method method;
    Hyper hyper;
    /// cells[class][metric]; classes "all", "regular", "irregular" (the
    /// last two only when labels exist); metrics "rmse", "nrmse", "mae",
    /// "jitter".
    std::map<std::string, std::map<std::string, ReportCell>> cells;
    /// First run's predictions per sequence, for trace emission.
    std::vector<RunOutput> first_run;
};

MethodEvaluation evaluate_method(Method method, const Hyper& hyper, const ExperimentConfig& cfg,
                                 const std::vector<Sequence>& sequences);

std::string report_to_csv(const std::vector<MethodEvaluation>& evals);
std::string report_to_text(const std::vector<MethodEvaluation>& evals);
/// Parses report_to_csv output back into the cell structure (exact values).
std::vector<MethodEvaluation> parse_report_csv(const std::string& text);

struct BenchmarkRow {
    Method method;
    std::size_t hidden = 0;
    std::size_t regressor = 0;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
    std::size_t steps = 0;
};

/// Wall-clock cost of one online training step (forward + deltas + update)
/// per method at the given scale.
BenchmarkRow benchmark_method(Method method, const Hyper& hyper, double clip_norm,
                              MuSumVariant variant, std::size_t steps, std::uint64_t seed);

struct CommandResult {
    std::vector<std::pair<std::string, std::string>> artifacts;  ///< (kind, relative path)
};

CommandResult cmd_gridsearch(const ExperimentConfig& cfg, const std::string& out_dir);
CommandResult cmd_evaluate(const ExperimentConfig& cfg, const std::string& out_dir);
CommandResult cmd_benchmark(const ExperimentConfig& cfg, const std::string& out_dir);
CommandResult cmd_synth(const ExperimentConfig& cfg, const std::string& out_dir);
/// Plot-ready series: correntropy/MSE surfaces over a pure-quaternion error
/// grid, plus reshaped traces and grid tables from prior manifests.
CommandResult cmd_plotdata(const std::vector<std::string>& manifest_paths,
                           const std::string& out_dir, double sigma);

}  // namespace qrnn
