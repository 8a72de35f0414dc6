#include "sgc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "sgc/error.hpp"

namespace sgc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(context + ": unknown key `" + key + "`");
    }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: bad value for `") + key + "`");
    }
}

std::vector<PropagationKind> parse_kinds(const nlohmann::json& arr, const std::string& ctx) {
    if (!arr.is_array()) throw ConfigError(ctx + " must be an array of kind names");
    std::vector<PropagationKind> kinds;
    for (const auto& v : arr) {
        if (!v.is_string()) throw ConfigError(ctx + " must hold strings");
        try {
            kinds.push_back(propagation_kind_from_string(v.get<std::string>()));
        } catch (const ValueError& e) {
            throw ConfigError(ctx + ": " + e.what());
        }
    }
    return kinds;
}

nlohmann::json kinds_to_json(const std::vector<PropagationKind>& kinds) {
    nlohmann::json arr = nlohmann::json::array();
    for (PropagationKind k : kinds) arr.push_back(to_string(k));
    return arr;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw MissingFileError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw MissingFileError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string error_name(const Error& e) {
    if (dynamic_cast<const MissingFileError*>(&e)) return "MissingFileError";
    if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
    if (dynamic_cast<const SplitError*>(&e)) return "SplitError";
    if (dynamic_cast<const IndexError*>(&e)) return "IndexError";
    if (dynamic_cast<const ValueError*>(&e)) return "ValueError";
    if (dynamic_cast<const SelfLoopError*>(&e)) return "SelfLoopError";
    if (dynamic_cast<const DuplicateEdgeError*>(&e)) return "DuplicateEdgeError";
    if (dynamic_cast<const InsufficientClassError*>(&e)) return "InsufficientClassError";
    if (dynamic_cast<const ShapeError*>(&e)) return "ShapeError";
    if (dynamic_cast<const IsolatedNodeError*>(&e)) return "IsolatedNodeError";
    if (dynamic_cast<const AsymmetricError*>(&e)) return "AsymmetricError";
    if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
    if (dynamic_cast<const SizeError*>(&e)) return "SizeError";
    if (dynamic_cast<const DisconnectedError*>(&e)) return "DisconnectedError";
    if (dynamic_cast<const EmptyMaskError*>(&e)) return "EmptyMaskError";
    if (dynamic_cast<const DivergenceError*>(&e)) return "DivergenceError";
    if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
    if (dynamic_cast<const DataError*>(&e)) return "DataError";
    if (dynamic_cast<const NumericError*>(&e)) return "NumericError";
    return "Error";
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(j,
               {"dataset_dir", "output_dir", "propagation", "normalization", "train", "bias",
                "sweep", "seed", "spectrum", "ablation", "bench"},
               "config");

    ExperimentConfig config;
    if (!j.contains("dataset_dir") || !j.at("dataset_dir").is_string())
        throw ConfigError("config: `dataset_dir` (string) is required");
    config.dataset_dir = j.at("dataset_dir").get<std::string>();
    config.output_dir = get_or<std::string>(j, "output_dir", "");

    if (j.contains("propagation")) {
        const auto& p = j.at("propagation");
        check_keys(p, {"kind", "gamma", "K"}, "config.propagation");
        try {
            if (p.contains("kind"))
                config.propagation.kind =
                    propagation_kind_from_string(p.at("kind").get<std::string>());
            config.propagation.gamma = get_or<double>(p, "gamma", config.propagation.gamma);
            config.propagation.K = get_or<int>(p, "K", config.propagation.K);
            config.propagation.validate();
        } catch (const ValueError& e) {
            throw ConfigError(std::string("config.propagation: ") + e.what());
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config.propagation: malformed");
        }
    }

    if (j.contains("normalization")) {
        try {
            config.normalization =
                normalization_from_string(j.at("normalization").get<std::string>());
        } catch (const ValueError& e) {
            throw ConfigError(std::string("config.normalization: ") + e.what());
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config.normalization: expected a string");
        }
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t,
                   {"optimizer", "learning_rate", "max_epochs", "weight_decay",
                    "convergence_tol"},
                   "config.train");
        try {
            if (t.contains("optimizer"))
                config.train.optimizer =
                    optimizer_from_string(t.at("optimizer").get<std::string>());
            config.train.learning_rate =
                get_or<double>(t, "learning_rate", config.train.learning_rate);
            config.train.max_epochs =
                get_or<std::size_t>(t, "max_epochs", config.train.max_epochs);
            config.train.weight_decay =
                get_or<double>(t, "weight_decay", config.train.weight_decay);
            config.train.convergence_tol =
                get_or<double>(t, "convergence_tol", config.train.convergence_tol);
            config.train.validate();
        } catch (const ValueError& e) {
            throw ConfigError(std::string("config.train: ") + e.what());
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config.train: malformed");
        }
    }

    config.bias = get_or<bool>(j, "bias", false);
    config.seed = get_or<std::uint64_t>(j, "seed", 0);

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        if (!s.is_array()) throw ConfigError("config.sweep: expected an array of numbers");
        std::vector<double> grid;
        for (const auto& v : s) {
            if (!v.is_number()) throw ConfigError("config.sweep: expected numbers");
            const double wd = v.get<double>();
            if (!(wd >= 0.0) || !std::isfinite(wd))
                throw ConfigError("config.sweep: weight decay must be finite and >= 0");
            grid.push_back(wd);
        }
        config.sweep = std::move(grid);
    }

    if (j.contains("spectrum")) {
        const auto& s = j.at("spectrum");
        check_keys(s, {"gamma", "tol", "kinds", "K", "fourier_feature_column", "dense_cap"},
                   "config.spectrum");
        config.spectrum.gamma = get_or<double>(s, "gamma", config.spectrum.gamma);
        config.spectrum.tol = get_or<double>(s, "tol", config.spectrum.tol);
        if (!(config.spectrum.gamma > 0.0) || !(config.spectrum.tol > 0.0))
            throw ConfigError("config.spectrum: gamma and tol must be > 0");
        if (s.contains("kinds"))
            config.spectrum.kinds = parse_kinds(s.at("kinds"), "config.spectrum.kinds");
        if (s.contains("K")) {
            config.spectrum.k_values = get_or<std::vector<int>>(s, "K", {});
            for (int k : config.spectrum.k_values)
                if (k < 0) throw ConfigError("config.spectrum.K: values must be >= 0");
        }
        if (s.contains("fourier_feature_column") && !s.at("fourier_feature_column").is_null())
            config.spectrum.fourier_feature_column =
                get_or<std::size_t>(s, "fourier_feature_column", 0);
        config.spectrum.dense_cap =
            get_or<std::size_t>(s, "dense_cap", config.spectrum.dense_cap);
        if (config.spectrum.dense_cap == 0)
            throw ConfigError("config.spectrum.dense_cap must be >= 1");
    }

    if (j.contains("ablation")) {
        const auto& a = j.at("ablation");
        check_keys(a, {"kinds", "K", "per_class", "n_repeats"}, "config.ablation");
        if (a.contains("kinds"))
            config.ablation.kinds = parse_kinds(a.at("kinds"), "config.ablation.kinds");
        if (a.contains("K")) {
            config.ablation.k_values = get_or<std::vector<int>>(a, "K", {});
            for (int k : config.ablation.k_values)
                if (k < 0) throw ConfigError("config.ablation.K: values must be >= 0");
        }
        if (a.contains("per_class"))
            config.ablation.per_class = get_or<std::vector<std::size_t>>(a, "per_class", {});
        config.ablation.n_repeats =
            get_or<std::size_t>(a, "n_repeats", config.ablation.n_repeats);
        if (config.ablation.n_repeats == 0)
            throw ConfigError("config.ablation.n_repeats must be >= 1");
    }

    if (j.contains("bench")) {
        const auto& b = j.at("bench");
        check_keys(b, {"warmup", "trials"}, "config.bench");
        config.bench_opts.warmup = get_or<std::size_t>(b, "warmup", config.bench_opts.warmup);
        config.bench_opts.trials = get_or<std::size_t>(b, "trials", config.bench_opts.trials);
        if (config.bench_opts.trials == 0)
            throw ConfigError("config.bench.trials must be >= 1");
    }

    return config;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["dataset_dir"] = config.dataset_dir.string();
    j["output_dir"] = config.output_dir.string();
    j["propagation"] = {{"kind", to_string(config.propagation.kind)},
                        {"gamma", config.propagation.gamma},
                        {"K", config.propagation.K}};
    j["normalization"] = to_string(config.normalization);
    j["train"] = {{"optimizer", to_string(config.train.optimizer)},
                  {"learning_rate", config.train.learning_rate},
                  {"max_epochs", config.train.max_epochs},
                  {"weight_decay", config.train.weight_decay},
                  {"convergence_tol", config.train.convergence_tol}};
    j["bias"] = config.bias;
    j["seed"] = config.seed;
    if (config.sweep) j["sweep"] = *config.sweep;
    nlohmann::json spectrum = {{"gamma", config.spectrum.gamma},
                               {"tol", config.spectrum.tol},
                               {"kinds", kinds_to_json(config.spectrum.kinds)},
                               {"K", config.spectrum.k_values},
                               {"dense_cap", config.spectrum.dense_cap}};
    if (config.spectrum.fourier_feature_column)
        spectrum["fourier_feature_column"] = *config.spectrum.fourier_feature_column;
    j["spectrum"] = std::move(spectrum);
    j["ablation"] = {{"kinds", kinds_to_json(config.ablation.kinds)},
                     {"K", config.ablation.k_values},
                     {"per_class", config.ablation.per_class},
                     {"n_repeats", config.ablation.n_repeats}};
    j["bench"] = {{"warmup", config.bench_opts.warmup},
                  {"trials", config.bench_opts.trials}};
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::vector<double> default_weight_decay_grid() {
    std::vector<double> grid(20);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exponent =
            -7.0 + 5.0 * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
        grid[i] = std::pow(10.0, exponent);
    }
    return grid;
}

nlohmann::json RunResult::to_json() const {
    return {{"config", config_snapshot},
            {"val_accuracy", val_accuracy},
            {"test_accuracy", test_accuracy},
            {"micro_f1", micro_f1},
            {"precompute_seconds", precompute_seconds},
            {"train_seconds", train_seconds},
            {"epochs_run", epochs_run}};
}

RunResult RunResult::from_json(const nlohmann::json& j) {
    RunResult r;
    try {
        r.config_snapshot = j.at("config");
        r.val_accuracy = j.at("val_accuracy").get<double>();
        r.test_accuracy = j.at("test_accuracy").get<double>();
        r.micro_f1 = j.at("micro_f1").get<double>();
        r.precompute_seconds = j.at("precompute_seconds").get<double>();
        r.train_seconds = j.at("train_seconds").get<double>();
        r.epochs_run = j.at("epochs_run").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("result json: ") + e.what());
    }
    return r;
}

bool same_metrics(const RunResult& a, const RunResult& b) {
    return a.config_snapshot == b.config_snapshot && a.val_accuracy == b.val_accuracy &&
           a.test_accuracy == b.test_accuracy && a.micro_f1 == b.micro_f1 &&
           a.epochs_run == b.epochs_run;
}

namespace {

// Shared pipeline state: propagated features plus one-hot labels.
struct Prepared {
    DatasetBundle bundle;
    DenseMatrix xbar;
    DenseMatrix y;
    double precompute_seconds = 0.0;
};

DenseMatrix append_bias_column(const DenseMatrix& x) {
    DenseMatrix out(x.n_rows, x.n_cols + 1);
    for (std::size_t i = 0; i < x.n_rows; ++i) {
        const double* src = x.values.data() + i * x.n_cols;
        double* dst = out.values.data() + i * out.n_cols;
        std::copy(src, src + x.n_cols, dst);
        dst[x.n_cols] = 1.0;
    }
    return out;
}

Prepared prepare(const ExperimentConfig& config, std::size_t spmm_threads = 0) {
    Prepared p;
    p.bundle = load_dataset(config.dataset_dir);
    p.bundle.features = normalize_features(p.bundle.features, config.normalization);

    const auto t0 = Clock::now();
    const SparseMatrix s = build_propagation(p.bundle.graph, config.propagation);
    p.xbar = propagate(s, p.bundle.features, config.propagation.K, spmm_threads);
    p.precompute_seconds = seconds_since(t0);

    if (config.bias) p.xbar = append_bias_column(p.xbar);
    p.y = one_hot(p.bundle.labels, p.bundle.n_classes);
    return p;
}

struct CellMetrics {
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    double micro_f1 = 0.0;
    double train_seconds = 0.0;
    std::size_t epochs_run = 0;
    ModelParams params;
};

CellMetrics train_and_eval(const Prepared& p, const TrainOptions& opts,
                           std::span<const std::size_t> train_mask) {
    CellMetrics cm;
    const auto t0 = Clock::now();
    cm.params = train(p.xbar, p.y, train_mask, opts);
    cm.train_seconds = seconds_since(t0);
    cm.epochs_run = cm.params.epochs_run;

    const std::vector<int> preds = predict(cm.params.theta, p.xbar);
    cm.val_accuracy = accuracy(preds, p.bundle.labels, p.bundle.val_mask);
    cm.test_accuracy = accuracy(preds, p.bundle.labels, p.bundle.test_mask);
    cm.micro_f1 = micro_f1(preds, p.bundle.labels, p.bundle.test_mask);
    return cm;
}

RunResult to_run_result(const ExperimentConfig& config, const Prepared& p,
                        const CellMetrics& cm) {
    RunResult r;
    r.config_snapshot = config_to_json(config);
    r.val_accuracy = cm.val_accuracy;
    r.test_accuracy = cm.test_accuracy;
    r.micro_f1 = cm.micro_f1;
    r.precompute_seconds = p.precompute_seconds;
    r.train_seconds = cm.train_seconds;
    r.epochs_run = cm.epochs_run;
    return r;
}

void write_run_artifacts(const ExperimentConfig& config, const RunResult& result,
                         const ModelParams& params) {
    if (config.output_dir.empty()) return;
    std::filesystem::create_directories(config.output_dir);
    write_text_atomic(config.output_dir / "result.json", result.to_json().dump(2) + "\n");
    const auto tmp = config.output_dir / "model.bin.tmp";
    save_model(params, tmp);
    std::filesystem::rename(tmp, config.output_dir / "model.bin");
}

// Index-addressed worker pool; cells must not touch shared mutable state.
template <typename Fn>
void parallel_cells(std::size_t n_cells, Fn&& fn) {
    const std::size_t workers = std::min(thread_cap(), n_cells);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_cells; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_cells) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
    config.propagation.validate();
    config.train.validate();
    const Prepared p = prepare(config);
    const CellMetrics cm = train_and_eval(p, config.train, p.bundle.train_mask);
    const RunResult result = to_run_result(config, p, cm);
    write_run_artifacts(config, result, cm.params);
    return result;
}

SweepOutcome sweep_weight_decay(const ExperimentConfig& config,
                                std::span<const double> grid) {
    if (grid.empty()) throw ConfigError("sweep: empty weight-decay grid");
    for (double wd : grid)
        if (!(wd >= 0.0) || !std::isfinite(wd))
            throw ConfigError("sweep: weight decay must be finite and >= 0");

    const Prepared p = prepare(config);

    std::vector<CellMetrics> cells(grid.size());
    parallel_cells(grid.size(), [&](std::size_t i) {
        TrainOptions opts = config.train;
        opts.weight_decay = grid[i];
        cells[i] = train_and_eval(p, opts, p.bundle.train_mask);
    });

    SweepOutcome outcome;
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ExperimentConfig cell_config = config;
        cell_config.train.weight_decay = grid[i];
        outcome.table.push_back(to_run_result(cell_config, p, cells[i]));
        const bool better = cells[i].val_accuracy > cells[best].val_accuracy ||
                            (cells[i].val_accuracy == cells[best].val_accuracy &&
                             grid[i] < grid[best]);
        if (i > 0 && better) best = i;
    }
    outcome.best = outcome.table[best];
    outcome.best_weight_decay = grid[best];

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        std::string csv = "weight_decay,val_accuracy,test_accuracy,micro_f1,epochs_run\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            csv += format_double(grid[i]) + "," + format_double(cells[i].val_accuracy) + "," +
                   format_double(cells[i].test_accuracy) + "," +
                   format_double(cells[i].micro_f1) + "," +
                   std::to_string(cells[i].epochs_run) + "\n";
        }
        write_text_atomic(config.output_dir / "sweep.csv", csv);
        write_text_atomic(config.output_dir / "result.json",
                          outcome.best.to_json().dump(2) + "\n");
        const auto tmp = config.output_dir / "model.bin.tmp";
        save_model(cells[best].params, tmp);
        std::filesystem::rename(tmp, config.output_dir / "model.bin");
    }
    return outcome;
}

std::vector<AblationRow> ablate_propagation(const ExperimentConfig& config,
                                            std::span<const PropagationKind> kinds,
                                            std::span<const int> k_values) {
    if (kinds.empty() || k_values.empty())
        throw ConfigError("ablate-prop: kinds and K lists must be non-empty");

    DatasetBundle bundle = load_dataset(config.dataset_dir);
    bundle.features = normalize_features(bundle.features, config.normalization);
    const DenseMatrix y = one_hot(bundle.labels, bundle.n_classes);
    const std::vector<double> grid =
        config.sweep ? *config.sweep : default_weight_decay_grid();

    struct Cell {
        PropagationKind kind;
        int K;
    };
    std::vector<Cell> layout;
    for (PropagationKind kind : kinds)
        for (int k : k_values) layout.push_back({kind, k});

    std::vector<AblationRow> rows(layout.size());
    parallel_cells(layout.size(), [&](std::size_t i) {
        AblationRow row;
        row.kind = layout[i].kind;
        row.K = layout[i].K;
        try {
            PropagationSpec spec = config.propagation;
            spec.kind = layout[i].kind;
            spec.K = layout[i].K;
            const SparseMatrix s = build_propagation(bundle.graph, spec);
            Prepared p;
            p.bundle = bundle;  // copy: cells run concurrently
            p.xbar = propagate(s, bundle.features, spec.K, 1);
            if (config.bias) p.xbar = append_bias_column(p.xbar);
            p.y = y;

            double best_acc = -1.0;
            double best_wd = 0.0;
            for (double wd : grid) {
                TrainOptions opts = config.train;
                opts.weight_decay = wd;
                const CellMetrics cm = train_and_eval(p, opts, p.bundle.train_mask);
                if (cm.val_accuracy > best_acc ||
                    (cm.val_accuracy == best_acc && wd < best_wd)) {
                    best_acc = cm.val_accuracy;
                    best_wd = wd;
                }
            }
            row.weight_decay = best_wd;
            row.val_accuracy = best_acc;
        } catch (const Error& e) {
            row.error = error_name(e);
            row.weight_decay = std::numeric_limits<double>::quiet_NaN();
            row.val_accuracy = std::numeric_limits<double>::quiet_NaN();
        }
        rows[i] = std::move(row);
    });

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        std::string csv = "kind,K,weight_decay,val_acc\n";
        for (const AblationRow& row : rows) {
            csv += to_string(row.kind) + "," + std::to_string(row.K) + ",";
            if (row.error.empty())
                csv += format_double(row.weight_decay) + "," +
                       format_double(row.val_accuracy);
            else
                csv += "nan," + row.error;
            csv += "\n";
        }
        write_text_atomic(config.output_dir / "ablation.csv", csv);
    }
    return rows;
}

std::vector<DataAmountRow> ablate_data_amount(const ExperimentConfig& config,
                                              std::span<const std::size_t> per_class_list,
                                              std::size_t n_repeats) {
    if (per_class_list.empty() || n_repeats == 0)
        throw ConfigError("ablate-data: per_class list and n_repeats must be non-empty");

    const Prepared p = prepare(config);
    std::vector<std::size_t> exclude = p.bundle.val_mask;
    exclude.insert(exclude.end(), p.bundle.test_mask.begin(), p.bundle.test_mask.end());

    struct Cell {
        std::size_t per_class;
        std::size_t rep;
    };
    std::vector<Cell> layout;
    for (std::size_t pc : per_class_list)
        for (std::size_t rep = 0; rep < n_repeats; ++rep) layout.push_back({pc, rep});

    std::vector<double> val_acc(layout.size(), 0.0);
    parallel_cells(layout.size(), [&](std::size_t i) {
        const std::vector<std::size_t> split = random_balanced_split(
            p.bundle.labels, p.bundle.n_classes, layout[i].per_class,
            config.seed + layout[i].rep, exclude);
        const CellMetrics cm = train_and_eval(p, config.train, split);
        val_acc[i] = cm.val_accuracy;
    });

    std::vector<DataAmountRow> rows;
    for (std::size_t g = 0; g < per_class_list.size(); ++g) {
        DataAmountRow row;
        row.per_class = per_class_list[g];
        row.n_repeats = n_repeats;
        double mean = 0.0;
        for (std::size_t r = 0; r < n_repeats; ++r) mean += val_acc[g * n_repeats + r];
        mean /= static_cast<double>(n_repeats);
        double var = 0.0;
        for (std::size_t r = 0; r < n_repeats; ++r) {
            const double d = val_acc[g * n_repeats + r] - mean;
            var += d * d;
        }
        row.mean_val_accuracy = mean;
        row.std_val_accuracy = std::sqrt(var / static_cast<double>(n_repeats));
        rows.push_back(row);
    }

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        std::string csv = "per_class,n_repeats,mean_val_acc,std_val_acc\n";
        for (const DataAmountRow& row : rows)
            csv += std::to_string(row.per_class) + "," + std::to_string(row.n_repeats) +
                   "," + format_double(row.mean_val_accuracy) + "," +
                   format_double(row.std_val_accuracy) + "\n";
        write_text_atomic(config.output_dir / "data_ablation.csv", csv);
    }
    return rows;
}

SpectrumArtifacts spectrum_report(const ExperimentConfig& config) {
    const DatasetBundle bundle = load_dataset(config.dataset_dir);
    const SpectrumOptions& so = config.spectrum;
    EigenSolveOptions eigopts;
    eigopts.dense_cap = so.dense_cap;

    SpectrumArtifacts artifacts;
    artifacts.report = spectrum_quantities(bundle.graph, so.gamma, so.tol, eigopts);
    const SpectrumReport& rep = artifacts.report;

    const bool dense_path = bundle.graph.n <= so.dense_cap;
    std::vector<double> plain_lambdas, aug_lambdas;
    if (dense_path) {
        plain_lambdas = dense_eigenvalues(laplacian(bundle.graph, false), so.dense_cap);
        aug_lambdas = dense_eigenvalues(laplacian(bundle.graph, true, so.gamma), so.dense_cap);
    } else {
        // uniform sampling of the spectral interval when the full spectrum
        // is out of reach
        const auto fill = [](double lo, double hi) {
            std::vector<double> xs(401);
            for (std::size_t i = 0; i < xs.size(); ++i)
                xs[i] = lo + (hi - lo) * static_cast<double>(i) /
                                 static_cast<double>(xs.size() - 1);
            return xs;
        };
        plain_lambdas = fill(rep.lambda_min, rep.lambda_max);
        aug_lambdas = fill(rep.aug_lambda_min, rep.aug_lambda_max);
    }

    for (PropagationKind kind : so.kinds) {
        const std::vector<double>& lambdas =
            is_augmented(kind) ? aug_lambdas : plain_lambdas;
        for (int k : so.k_values)
            artifacts.curves.push_back(filter_response(kind, k, lambdas));
    }

    nlohmann::json doc;
    doc["report"] = {{"gamma", rep.gamma},
                     {"tolerance", rep.tolerance},
                     {"lambda_min", rep.lambda_min},
                     {"lambda_max", rep.lambda_max},
                     {"aug_lambda_min", rep.aug_lambda_min},
                     {"aug_lambda_max", rep.aug_lambda_max},
                     {"alpha_min", rep.alpha_min},
                     {"alpha_max", rep.alpha_max},
                     {"beta_min", rep.beta_min},
                     {"beta_max", rep.beta_max},
                     {"theorem1_holds", rep.theorem1_holds},
                     {"lemma3_lower_holds", rep.lemma3_lower_holds},
                     {"lemma3_upper_holds", rep.lemma3_upper_holds}};
    doc["filter_curves"] = nlohmann::json::array();
    for (const FilterCurve& curve : artifacts.curves) {
        nlohmann::json points = nlohmann::json::array();
        for (const auto& [lambda, g_hat] : curve.points)
            points.push_back({lambda, g_hat});
        doc["filter_curves"].push_back({{"kind", to_string(curve.kind)},
                                        {"K", curve.K},
                                        {"points", std::move(points)}});
    }

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        std::string csv = "quantity,value\n";
        csv += "gamma," + format_double(rep.gamma) + "\n";
        csv += "tolerance," + format_double(rep.tolerance) + "\n";
        csv += "lambda_min," + format_double(rep.lambda_min) + "\n";
        csv += "lambda_max," + format_double(rep.lambda_max) + "\n";
        csv += "aug_lambda_min," + format_double(rep.aug_lambda_min) + "\n";
        csv += "aug_lambda_max," + format_double(rep.aug_lambda_max) + "\n";
        csv += "alpha_min," + format_double(rep.alpha_min) + "\n";
        csv += "alpha_max," + format_double(rep.alpha_max) + "\n";
        csv += "beta_min," + format_double(rep.beta_min) + "\n";
        csv += "beta_max," + format_double(rep.beta_max) + "\n";
        csv += std::string("theorem1_holds,") + (rep.theorem1_holds ? "true" : "false") + "\n";
        csv += std::string("lemma3_lower_holds,") +
               (rep.lemma3_lower_holds ? "true" : "false") + "\n";
        csv += std::string("lemma3_upper_holds,") +
               (rep.lemma3_upper_holds ? "true" : "false") + "\n";
        write_text_atomic(config.output_dir / "spectrum.csv", csv);

        // one lambda,g_hat file per requested curve
        for (const FilterCurve& curve : artifacts.curves) {
            std::string curve_csv = "lambda,g_hat\n";
            for (const auto& [lambda, g_hat] : curve.points)
                curve_csv += format_double(lambda) + "," + format_double(g_hat) + "\n";
            write_text_atomic(config.output_dir /
                                  ("filter_curve." + to_string(curve.kind) + ".K" +
                                   std::to_string(curve.K) + ".csv"),
                              curve_csv);
        }
    }

    if (so.fourier_feature_column) {
        if (!dense_path) {
            if (!config.output_dir.empty())
                write_text_atomic(config.output_dir / "spectrum.json", doc.dump(2) + "\n");
            throw SizeError("spectrum: Fourier output needs n <= dense_cap (extremes were "
                            "still computed and written)");
        }
        const std::size_t col = *so.fourier_feature_column;
        if (col >= bundle.features.n_cols)
            throw IndexError("spectrum: fourier_feature_column out of range");
        const DenseMatrix normalized =
            normalize_features(bundle.features, config.normalization);
        const EigenDecomposition eig =
            dense_eigendecomposition(laplacian(bundle.graph, true, so.gamma), so.dense_cap);
        const std::vector<double> x = normalized.column(col);
        const std::vector<double> coeffs = spectral_coefficients(eig.eigenvectors, x);
        artifacts.fourier.reserve(coeffs.size());
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            artifacts.fourier.emplace_back(eig.eigenvalues[i], coeffs[i]);

        nlohmann::json fourier = nlohmann::json::array();
        for (const auto& [lambda, coeff] : artifacts.fourier)
            fourier.push_back({lambda, coeff});
        doc["fourier"] = std::move(fourier);

        if (!config.output_dir.empty()) {
            std::string csv = "lambda,coefficient\n";
            for (const auto& [lambda, coeff] : artifacts.fourier)
                csv += format_double(lambda) + "," + format_double(coeff) + "\n";
            write_text_atomic(config.output_dir / "fourier.csv", csv);
        }
    }

    if (!config.output_dir.empty())
        write_text_atomic(config.output_dir / "spectrum.json", doc.dump(2) + "\n");
    return artifacts;
}

nlohmann::json BenchReport::to_json() const {
    return {{"precompute_seconds", precompute_seconds},
            {"train_seconds", train_seconds},
            {"total_seconds", total_seconds},
            {"warmup", warmup},
            {"trials", trials}};
}

BenchReport bench(const ExperimentConfig& config, std::size_t n_warmup,
                  std::size_t n_trials) {
    if (n_trials == 0) throw ConfigError("bench: trials must be >= 1");

    DatasetBundle bundle = load_dataset(config.dataset_dir);
    bundle.features = normalize_features(bundle.features, config.normalization);
    const DenseMatrix y = one_hot(bundle.labels, bundle.n_classes);

    std::vector<double> pre_times, train_times;
    for (std::size_t trial = 0; trial < n_warmup + n_trials; ++trial) {
        const auto t0 = Clock::now();
        const SparseMatrix s = build_propagation(bundle.graph, config.propagation);
        DenseMatrix xbar = propagate(s, bundle.features, config.propagation.K);
        const double pre = seconds_since(t0);
        if (config.bias) xbar = append_bias_column(xbar);

        Prepared p;
        p.bundle = bundle;
        p.xbar = std::move(xbar);
        p.y = y;
        const auto t1 = Clock::now();
        (void)train(p.xbar, p.y, p.bundle.train_mask, config.train);
        const double tr = seconds_since(t1);

        if (trial >= n_warmup) {
            pre_times.push_back(pre);
            train_times.push_back(tr);
        }
    }

    BenchReport report;
    report.precompute_seconds = median(pre_times);
    report.train_seconds = median(train_times);
    report.total_seconds = report.precompute_seconds + report.train_seconds;
    report.warmup = n_warmup;
    report.trials = n_trials;

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        write_text_atomic(config.output_dir / "bench.json", report.to_json().dump(2) + "\n");
    }
    return report;
}

}  // namespace sgc
