#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrnn/errors.hpp"
#include "qrnn/experiment.hpp"

namespace {

// Exit codes: 0 ok, 2 config, 3 i/o or parse, 4 numeric, 5 other library
// error, 1 unexpected.
int exit_code(qrnn::ErrorKind kind) {
    switch (kind) {
        case qrnn::ErrorKind::config_error: return 2;
        case qrnn::ErrorKind::io_error:
        case qrnn::ErrorKind::parse_error:
        case qrnn::ErrorKind::missing_columns:
        case qrnn::ErrorKind::non_uniform_sampling: return 3;
        case qrnn::ErrorKind::non_finite: return 4;
        default: return 5;
    }
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::int64_t seed = -1;
    std::int64_t runs = -1;
    std::string method;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override master seed");
    cmd->add_option("--runs", opts.runs, "override run count (cv or eval per command)");
    cmd->add_option("--method", opts.method, "restrict to a single method");
    cmd->add_option("--threads", opts.threads, "worker threads (default from config)");
}

qrnn::ExperimentConfig resolve(const CommonOpts& opts, bool eval_runs) {
    qrnn::ExperimentConfig cfg = qrnn::config_from_json_file(opts.config_path);
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.runs >= 1) {
        if (eval_runs)
            cfg.eval_runs = static_cast<std::size_t>(opts.runs);
        else
            cfg.cv_runs = static_cast<std::size_t>(opts.runs);
    }
    if (!opts.method.empty()) cfg.methods = {qrnn::method_from_string(opts.method)};
    if (opts.threads >= 1) cfg.threads = opts.threads;
    cfg.validate();
    return cfg;
}

void print_artifacts(const qrnn::CommandResult& result, const std::string& out_dir) {
    for (const auto& [kind, path] : result.artifacts)
        std::printf("%-14s %s/%s\n", kind.c_str(), out_dir.c_str(), path.c_str());
    std::printf("%-14s %s/manifest.json\n", "manifest", out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quaternion recurrent network forecasting harness"};
    app.require_subcommand(1);

    CommonOpts grid_opts, eval_opts, bench_opts, synth_opts;
    auto* grid_cmd = app.add_subcommand("gridsearch", "cross-validated grid search");
    add_common(grid_cmd, grid_opts);
    auto* eval_cmd = app.add_subcommand("evaluate", "seeded evaluation runs on the test split");
    add_common(eval_cmd, eval_opts);
    auto* bench_cmd = app.add_subcommand("benchmark", "per-step timing of each method");
    add_common(bench_cmd, bench_opts);
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic marker series");
    add_common(synth_cmd, synth_opts);

    std::vector<std::string> plot_manifests;
    std::string plot_out = "out";
    double plot_sigma = 1.0;
    auto* plot_cmd = app.add_subcommand("plotdata", "emit plot-ready series");
    plot_cmd->add_option("--manifest", plot_manifests, "manifest.json files from prior commands");
    plot_cmd->add_option("--out", plot_out, "output directory");
    plot_cmd->add_option("--sigma", plot_sigma, "kernel size for the correntropy surface");

    CLI11_PARSE(app, argc, argv);

    try {
        if (grid_cmd->parsed()) {
            auto cfg = resolve(grid_opts, false);
            print_artifacts(qrnn::cmd_gridsearch(cfg, grid_opts.out_dir), grid_opts.out_dir);
        } else if (eval_cmd->parsed()) {
            auto cfg = resolve(eval_opts, true);
            print_artifacts(qrnn::cmd_evaluate(cfg, eval_opts.out_dir), eval_opts.out_dir);
        } else if (bench_cmd->parsed()) {
            auto cfg = resolve(bench_opts, true);
            print_artifacts(qrnn::cmd_benchmark(cfg, bench_opts.out_dir), bench_opts.out_dir);
        } else if (synth_cmd->parsed()) {
            auto cfg = resolve(synth_opts, true);
            print_artifacts(qrnn::cmd_synth(cfg, synth_opts.out_dir), synth_opts.out_dir);
        } else if (plot_cmd->parsed()) {
            print_artifacts(qrnn::cmd_plotdata(plot_manifests, plot_out, plot_sigma), plot_out);
        }
    } catch (const qrnn::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
