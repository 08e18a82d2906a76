#include "ftdf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "ftdf/error.hpp"
#include "ftdf/ingest.hpp"
#include "ftdf/model_io.hpp"
#include "ftdf/pipeline.hpp"
#include "ftdf/random.hpp"
#include "ftdf/text.hpp"

namespace ftdf::cli {

namespace fs = std::filesystem;

namespace {

/// Every setting of a run, as given by flags or the config file.
struct RunOptions {
    std::uint64_t seed = 42;
    std::string out = "out";
    bool force = false;
    std::size_t threads = 1;
    std::string manifest;

    std::size_t window_len = 1024;
    double overlap = kDefaultOverlap;
    std::string scheme = "fTDF";
    std::string pair_a = "MADF,IAMF";
    std::string pair_b = "RMSF,WLF";
    std::string lags = "1,2,3";
    bool include_raw = true;
    std::size_t ar_order = 15;
    double sscf_threshold = kDefaultSscfThreshold;
    bool literal_rms = false;

    std::string classifier = "ebt";
    std::size_t n_trees = 30;
    std::size_t max_splits = 42000;
    std::size_t min_leaf = 1;
    std::size_t knn_k = 1;
    std::string knn_metric = "euclidean";
    std::string knn_weighting = "uniform";

    std::string protocol = "cv";
    std::size_t folds = 10;
    double test_fraction = 0.3;

    std::string classes = "constant,on_off_cycle,motor_startup,spiky_periodic,ramp,noisy_idle";
    long long traces_per_class = 10;
    double duration = 4096.0;
    double fs = 1.0;
    double noise = 1.0;

    std::string model;
    std::string matrix;
    std::string lengths = "64,128,256,512,1024,2048,3072,4096";
    bool no_timing = false;
};

[[noreturn]] void config_error(const std::string& why) { throw Error(Errc::InvalidConfig, why); }

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto part : text::split(s, ',')) {
        const auto t = text::trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s, const std::string& what) {
    std::vector<std::size_t> out;
    for (const auto& part : split_list(s)) {
        const auto v = text::parse_int(part);
        if (!v || *v < 1) config_error("bad " + what + " entry '" + part + "'");
        out.push_back(static_cast<std::size_t>(*v));
    }
    if (out.empty()) config_error(what + " must not be empty");
    return out;
}

Descriptor descriptor_or_fail(const std::string& name) {
    const auto d = parse_descriptor(name);
    if (!d) config_error("unknown descriptor '" + name + "'");
    return *d;
}

DescriptorPair parse_pair(const std::string& s) {
    const auto parts = split_list(s);
    if (parts.size() != 2) config_error("a descriptor pair needs two names, got '" + s + "'");
    return {descriptor_or_fail(parts[0]), descriptor_or_fail(parts[1])};
}

PipelineConfig pipeline_config(const RunOptions& o) {
    PipelineConfig cfg;
    cfg.window_len = o.window_len;
    cfg.overlap = o.overlap;
    cfg.threads = o.threads;
    FusionConfig fusion;
    fusion.pair_a = parse_pair(o.pair_a);
    fusion.pair_b = parse_pair(o.pair_b);
    fusion.lags = parse_sizes(o.lags, "lags");
    fusion.include_raw = o.include_raw;
    if (o.scheme == "fTDF" || o.scheme == "ftdf")
        cfg.scheme = FeatureScheme::fused(fusion);
    else
        cfg.scheme = FeatureScheme{descriptor_or_fail(o.scheme), fusion};
    cfg.params.ar.order = o.ar_order;
    cfg.params.sscf_threshold = o.sscf_threshold;
    cfg.params.literal_rms = o.literal_rms;

    const auto kind = parse_classifier(o.classifier);
    if (!kind) config_error("unknown classifier '" + o.classifier + "'");
    cfg.classifier.kind = *kind;
    cfg.classifier.ebt.n_trees = o.n_trees;
    cfg.classifier.ebt.tree.max_splits = o.max_splits;
    cfg.classifier.ebt.tree.min_leaf_size = o.min_leaf;
    cfg.classifier.knn_k = o.knn_k;
    const auto metric = parse_metric(o.knn_metric);
    if (!metric) config_error("unknown knn metric '" + o.knn_metric + "'");
    cfg.classifier.knn_metric = *metric;
    const auto weighting = parse_weighting(o.knn_weighting);
    if (!weighting) config_error("unknown knn weighting '" + o.knn_weighting + "'");
    cfg.classifier.knn_weighting = *weighting;

    if (o.protocol == "cv")
        cfg.protocol.kind = Protocol::CrossValidation;
    else if (o.protocol == "holdout")
        cfg.protocol.kind = Protocol::Holdout;
    else
        config_error("unknown protocol '" + o.protocol + "'");
    cfg.protocol.folds = o.folds;
    cfg.protocol.test_fraction = o.test_fraction;
    cfg.validate();
    return cfg;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::vector<PowerTrace> load_manifest_traces(const RunOptions& o) {
    if (o.manifest.empty()) config_error("--manifest is required");
    return load_dataset(read_manifest(o.manifest));
}

// ---------------------------------------------------------------------------

int cmd_synth(const RunOptions& o, std::ostream& out) {
    if (o.traces_per_class < 1) throw Error(Errc::InvalidSpec, "traces per class must be >= 1");
    std::vector<ApplianceKind> kinds;
    for (const auto& name : split_list(o.classes)) {
        const auto k = parse_kind(name);
        if (!k) throw Error(Errc::InvalidSpec, "unknown appliance kind '" + name + "'");
        if (std::find(kinds.begin(), kinds.end(), *k) == kinds.end()) kinds.push_back(*k);
    }
    if (kinds.empty()) throw Error(Errc::InvalidSpec, "no appliance kinds requested");
    if (!(o.fs > 0.0) || !(o.duration > 0.0) || o.duration * o.fs < 1.0)
        throw Error(Errc::InvalidSpec, "duration * fs must be >= 1");
    if (!(o.noise >= 0.0)) throw Error(Errc::InvalidSpec, "noise scale must be >= 0");

    const fs::path root(o.out);
    make_dir(root / "traces");
    DatasetManifest manifest;
    SynthOptions options;
    options.noise_scale = o.noise;
    for (ApplianceKind kind : kinds) {
        const std::string name(kind_name(kind));
        for (long long i = 0; i < o.traces_per_class; ++i) {
            char idx[24];
            std::snprintf(idx, sizeof(idx), "%04lld", i);
            const std::string stem = name + "_" + idx;
            auto trace = synth_appliance(kind, o.duration, o.fs,
                                         derive_seed(o.seed, "synth/" + name, static_cast<std::uint64_t>(i)), options);
            trace.source_id = stem;
            write_trace(root / "traces" / (stem + ".csv"), trace);
            ManifestEntry e;
            e.path = fs::path("traces") / (stem + ".csv");
            e.label = name;
            e.fs = o.fs;
            e.schema = TraceSchema{',', 1, 0, 1.0};
            manifest.entries.push_back(std::move(e));
        }
    }
    write_manifest(root / "manifest.tsv", manifest);
    out << "wrote " << manifest.entries.size() << " traces and " << (root / "manifest.tsv").string() << '\n';
    return kExitOk;
}

int cmd_extract(const RunOptions& o, const PipelineConfig& cfg, std::ostream& out) {
    const auto traces = load_manifest_traces(o);
    std::vector<std::string> offenders;
    std::set<std::string> ids;
    for (const auto& t : traces) {
        if (t.size() < cfg.window_len) offenders.push_back(t.source_id);
        if (!ids.insert(t.source_id).second) config_error("duplicate trace id '" + t.source_id + "'");
    }
    if (!offenders.empty()) {
        std::string list;
        for (const auto& s : offenders) list += (list.empty() ? "" : ", ") + s;
        throw Error(Errc::TraceTooShort, "shorter than window length " + std::to_string(cfg.window_len) + ": " + list);
    }
    const fs::path dir = fs::path(o.out) / "series";
    make_dir(dir);
    std::size_t written = 0, skipped = 0;
    for (const auto& t : traces) {
        const auto plan = plan_windows(t.size(), cfg.window_len, cfg.overlap);
        for (Descriptor d : kAllDescriptors) {
            const fs::path path = dir / (t.source_id + "__" + std::string(descriptor_name(d)) + ".csv");
            if (!o.force && fs::exists(path)) {
                ++skipped;
                continue;
            }
            write_series(path, extract_series(t, plan, d, cfg.params));
            ++written;
        }
    }
    out << "series written: " << written << ", already present: " << skipped << '\n';
    return kExitOk;
}

int cmd_fuse(const RunOptions& o, const PipelineConfig& cfg, std::ostream& out) {
    const auto traces = load_manifest_traces(o);
    const auto descriptors = cfg.scheme.descriptors();
    const auto features = extract_all(traces, cfg.window_len, cfg.overlap, descriptors, cfg.params, cfg.threads,
                                      cfg.scheme.skipped_windows() + 1);
    const auto norm = fit_normalizer(features, descriptors);
    std::vector<std::size_t> all(features.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto matrix = assemble(features, all, cfg.scheme, norm);
    make_dir(o.out);
    write_matrix(fs::path(o.out) / "fused.csv", matrix);
    out << "wrote " << matrix.rows() << " rows x " << matrix.columns.size() << " features\n";
    return kExitOk;
}

std::string report_header(const std::string& title) { return "# " + title + "\n"; }

int cmd_train(const RunOptions& o, const PipelineConfig& cfg, std::ostream& out) {
    const auto traces = load_manifest_traces(o);
    const auto model = train_pipeline_model(traces, cfg, o.seed);
    const auto rows = featurize(traces, *model.pipeline, cfg.threads);
    auto report = evaluate_model(model, rows);
    report.config = cfg.echo();
    report.config.emplace_back("seed", std::to_string(o.seed));
    make_dir(o.out);
    save_model(model, fs::path(o.out) / "model.ftdf");
    write_text(fs::path(o.out) / "train_report.txt",
               report_header("training-set report") + "traces = " + std::to_string(traces.size()) + "\n" +
                   report.to_text());
    out << "model: " << (fs::path(o.out) / "model.ftdf").string() << "  training accuracy "
        << text::format_double(report.accuracy) << '\n';
    return kExitOk;
}

int cmd_eval(const RunOptions& o, const PipelineConfig& cfg, std::ostream& out) {
    EvalReport report;
    std::string title;
    if (!o.model.empty()) {
        const auto model = load_model(o.model);
        FusedFeatureMatrix data;
        if (!o.matrix.empty()) {
            data = read_matrix(o.matrix);
        } else {
            if (!model.pipeline) throw Error(Errc::CorruptModel, "model has no pipeline; pass --matrix");
            data = featurize(load_manifest_traces(o), *model.pipeline, cfg.threads);
        }
        report = evaluate_model(model, data);
        title = "model evaluation";
        report.config.emplace_back("model", fs::path(o.model).filename().string());
    } else {
        const auto traces = load_manifest_traces(o);
        report = evaluate(traces, cfg, o.seed);
        title = cfg.protocol.kind == Protocol::CrossValidation ? "cross-validation" : "hold-out evaluation";
    }
    make_dir(o.out);
    write_text(fs::path(o.out) / "eval_report.txt", report_header(title) + report.to_text());
    write_text(fs::path(o.out) / "eval_report.csv", report.to_table());
    out << title << ": accuracy " << text::format_double(report.accuracy) << "  macro F "
        << text::format_double(report.macro_f) << '\n';
    return kExitOk;
}

int cmd_sweep(const RunOptions& o, const PipelineConfig& cfg, std::ostream& out) {
    const auto lengths = parse_sizes(o.lengths, "lengths");
    const auto traces = load_manifest_traces(o);
    const auto schemes = default_schemes(cfg.scheme.fusion);
    const auto rows = sweep_window_length(traces, lengths, schemes, cfg, o.seed);
    make_dir(o.out);
    write_text(fs::path(o.out) / "sweep.csv", sweep_table(rows, !o.no_timing));
    out << "sweep: " << rows.size() << " rows -> " << (fs::path(o.out) / "sweep.csv").string() << '\n';
    return kExitOk;
}

int exit_code_for(const Error& e) {
    switch (e.family()) {
        case ErrorFamily::Config: return kExitConfig;
        case ErrorFamily::Data: return kExitData;
        case ErrorFamily::Model: return kExitModel;
    }
    return kExitData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time-domain descriptor fusion and bagged-tree appliance recognition"};
    app.name("ftdf");
    app.set_config("--config", "", "Flat key = value configuration file; flags override it");
    app.allow_config_extras(false);
    app.require_subcommand(1);
    app.fallthrough();

    RunOptions o;
    // Each option is reachable as --some-name on the command line and as
    // some_name in the config file.
    const auto opt = [&](const std::string& name, auto& target, const std::string& help) {
        std::string under = name;
        std::replace(under.begin(), under.end(), '-', '_');
        std::string names = "--" + name;
        if (under != name) names += ",--" + under;
        return app.add_option(names, target, help)->capture_default_str();
    };
    const auto flag = [&](const std::string& name, bool& target, const std::string& help) {
        std::string under = name;
        std::replace(under.begin(), under.end(), '-', '_');
        std::string names = "--" + name;
        if (under != name) names += ",--" + under;
        return app.add_flag(names, target, help);
    };

    opt("seed", o.seed, "Master seed");
    opt("out", o.out, "Output directory");
    flag("force", o.force, "Overwrite existing outputs");
    opt("threads", o.threads, "Worker threads (0 = all cores)");
    opt("manifest", o.manifest, "Dataset manifest (tab-separated)");
    opt("window-len", o.window_len, "Window length in samples");
    opt("overlap", o.overlap, "Overlap fraction of the window");
    opt("scheme", o.scheme, "fTDF or a single descriptor name");
    opt("pair-a", o.pair_a, "First fusion pair");
    opt("pair-b", o.pair_b, "Second fusion pair");
    opt("lags", o.lags, "Fusion lags");
    opt("include-raw", o.include_raw, "Keep normalized raw descriptors next to fused columns");
    opt("ar-order", o.ar_order, "AR model order");
    opt("sscf-threshold", o.sscf_threshold, "Slope sign change threshold");
    flag("literal-rms", o.literal_rms, "Use the per-sample RMS variant");
    opt("classifier", o.classifier, "ebt, tree or knn");
    opt("n-trees", o.n_trees, "Ensemble size");
    opt("max-splits", o.max_splits, "Split budget per tree");
    opt("min-leaf", o.min_leaf, "Minimum rows per leaf");
    opt("knn-k", o.knn_k, "Neighbours for knn");
    opt("knn-metric", o.knn_metric, "euclidean or cosine");
    opt("knn-weighting", o.knn_weighting, "uniform or inverse");
    opt("protocol", o.protocol, "cv or holdout");
    opt("folds", o.folds, "Cross-validation folds");
    opt("test-fraction", o.test_fraction, "Hold-out test fraction");
    opt("classes", o.classes, "synth: appliance kinds");
    opt("traces-per-class", o.traces_per_class, "synth: traces per kind");
    opt("duration", o.duration, "synth: seconds per trace");
    opt("fs", o.fs, "synth: sampling rate in Hz");
    opt("noise", o.noise, "synth: noise scale");
    opt("model", o.model, "eval: model file");
    opt("matrix", o.matrix, "eval: fused feature matrix instead of a manifest");
    opt("lengths", o.lengths, "sweep: window lengths");
    flag("no-timing", o.no_timing, "sweep: write 0 in the runtime column");

    auto* synth = app.add_subcommand("synth", "Generate synthetic appliance traces and a manifest");
    auto* extract = app.add_subcommand("extract", "Write per-trace descriptor series");
    auto* fuse = app.add_subcommand("fuse", "Write the fused feature matrix");
    auto* train = app.add_subcommand("train", "Train and save a model");
    auto* eval = app.add_subcommand("eval", "Evaluate a saved model, or run the configured protocol");
    auto* sweep = app.add_subcommand("sweep", "Window-length sweep over all feature schemes");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "ftdf: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth(o, out);
        const auto cfg = pipeline_config(o);
        if (extract->parsed()) return cmd_extract(o, cfg, out);
        if (fuse->parsed()) return cmd_fuse(o, cfg, out);
        if (train->parsed()) return cmd_train(o, cfg, out);
        if (eval->parsed()) return cmd_eval(o, cfg, out);
        if (sweep->parsed()) return cmd_sweep(o, cfg, out);
    } catch (const Error& e) {
        err << "ftdf: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "ftdf: " << e.what() << '\n';
        return kExitData;
    }
    return kExitConfig;
}

}  // namespace ftdf::cli
