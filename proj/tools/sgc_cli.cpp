#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "sgc/error.hpp"
#include "sgc/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory (overrides config output_dir)");
}

sgc::ExperimentConfig resolve(const CommonArgs& args, bool needs_output) {
    sgc::ExperimentConfig config = sgc::load_config(args.config_path);
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    if (needs_output && config.output_dir.empty())
        throw sgc::ConfigError("no output directory: set `output_dir` in the config or pass --out");
    return config;
}

void print_result(const sgc::RunResult& r) {
    std::printf("val %.4f  test %.4f  micro-f1 %.4f  epochs %zu  precompute %.3fs  train %.3fs\n",
                r.val_accuracy, r.test_accuracy, r.micro_f1, r.epochs_run,
                r.precompute_seconds, r.train_seconds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simple graph convolution: propagation, spectra, training, ablations"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* run = app.add_subcommand("run", "single end-to-end experiment");
    add_common(run, args);
    CLI::App* sweep = app.add_subcommand("sweep", "weight-decay grid search");
    add_common(sweep, args);
    CLI::App* ablate_prop =
        app.add_subcommand("ablate-prop", "propagation kind / K ablation table");
    add_common(ablate_prop, args);
    CLI::App* ablate_data =
        app.add_subcommand("ablate-data", "training-set size ablation table");
    add_common(ablate_data, args);
    CLI::App* spectrum = app.add_subcommand("spectrum", "Laplacian spectrum and filter report");
    add_common(spectrum, args);
    CLI::App* bench = app.add_subcommand("bench", "timing medians for precompute and training");
    add_common(bench, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is a config problem
    }

    try {
        if (run->parsed()) {
            print_result(sgc::run_experiment(resolve(args, true)));
        } else if (sweep->parsed()) {
            const sgc::ExperimentConfig config = resolve(args, true);
            const std::vector<double> grid =
                config.sweep ? *config.sweep : sgc::default_weight_decay_grid();
            const sgc::SweepOutcome outcome = sgc::sweep_weight_decay(config, grid);
            std::printf("best weight decay %g\n", outcome.best_weight_decay);
            print_result(outcome.best);
        } else if (ablate_prop->parsed()) {
            const sgc::ExperimentConfig config = resolve(args, true);
            const auto rows = sgc::ablate_propagation(config, config.ablation.kinds,
                                                      config.ablation.k_values);
            for (const auto& row : rows) {
                if (row.error.empty())
                    std::printf("%-18s K=%-2d wd=%-12g val %.4f\n",
                                sgc::to_string(row.kind).c_str(), row.K, row.weight_decay,
                                row.val_accuracy);
                else
                    std::printf("%-18s K=%-2d %s\n", sgc::to_string(row.kind).c_str(), row.K,
                                row.error.c_str());
            }
        } else if (ablate_data->parsed()) {
            const sgc::ExperimentConfig config = resolve(args, true);
            const auto rows = sgc::ablate_data_amount(config, config.ablation.per_class,
                                                      config.ablation.n_repeats);
            for (const auto& row : rows)
                std::printf("per_class %-4zu mean val %.4f (std %.4f, %zu repeats)\n",
                            row.per_class, row.mean_val_accuracy, row.std_val_accuracy,
                            row.n_repeats);
        } else if (spectrum->parsed()) {
            const sgc::ExperimentConfig config = resolve(args, true);
            const sgc::SpectrumArtifacts artifacts = sgc::spectrum_report(config);
            const sgc::SpectrumReport& rep = artifacts.report;
            std::printf("lambda   [%.6f, %.6f]\n", rep.lambda_min, rep.lambda_max);
            std::printf("lambda~  [%.6f, %.6f] (gamma %g)\n", rep.aug_lambda_min,
                        rep.aug_lambda_max, rep.gamma);
            std::printf("theorem1 %s  lemma3 lower %s  upper %s\n",
                        rep.theorem1_holds ? "holds" : "VIOLATED",
                        rep.lemma3_lower_holds ? "holds" : "VIOLATED",
                        rep.lemma3_upper_holds ? "holds" : "VIOLATED");
        } else if (bench->parsed()) {
            const sgc::ExperimentConfig config = resolve(args, true);
            const sgc::BenchReport report =
                sgc::bench(config, config.bench_opts.warmup, config.bench_opts.trials);
            std::printf("precompute %.4fs  train %.4fs  total %.4fs (median of %zu)\n",
                        report.precompute_seconds, report.train_seconds,
                        report.total_seconds, report.trials);
        }
    } catch (const sgc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const sgc::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const sgc::NumericError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
