#include "maskbench/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "maskbench/mask.hpp"
#include "maskbench/model_io.hpp"
#include "maskbench/rng.hpp"

namespace fs = std::filesystem;

namespace maskbench {

std::uint64_t RunConfig::pipeline_fingerprint(std::uint64_t corpus_hash) const {
    Fnv1a h;
    h.update_u64(corpus_hash);
    h.update_u64(resolved_mask_seed());
    h.update_u64(static_cast<std::uint64_t>(holdout_index));
    h.update_u64(lbp.fingerprint());
    h.update(&mask_top, sizeof mask_top);
    h.update(&mask_bottom, sizeof mask_bottom);
    return h.digest();
}

namespace {

void write_text_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write to " + path.string());
}

std::string hex16(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---- feature cache ----------------------------------------------------
// Binary snapshot of the five split feature matrices, keyed by the pipeline
// fingerprint. Avoids re-masking and re-extracting on repeated runs.

struct SplitFeatures {
    Matrix features;
    std::vector<int> labels;
};

constexpr std::uint32_t kCacheMagic = 0x4d464243;  // "MFBC"

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void save_feature_cache(const fs::path& path, const std::array<SplitFeatures, 5>& s) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return;  // cache is best-effort
    put_u64(out, kCacheMagic);
    for (const SplitFeatures& f : s) {
        put_u64(out, f.features.rows);
        put_u64(out, f.features.cols);
        out.write(reinterpret_cast<const char*>(f.features.data.data()),
                  static_cast<std::streamsize>(f.features.data.size() * 8));
        put_u64(out, f.labels.size());
        for (int label : f.labels) put_u64(out, static_cast<std::uint64_t>(label));
    }
}

bool load_feature_cache(const fs::path& path, std::array<SplitFeatures, 5>& s) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    if (get_u64(in) != kCacheMagic) return false;
    for (SplitFeatures& f : s) {
        f.features.rows = get_u64(in);
        f.features.cols = get_u64(in);
        if (!in || f.features.rows * f.features.cols > (1ull << 32)) return false;
        f.features.data.resize(f.features.rows * f.features.cols);
        in.read(reinterpret_cast<char*>(f.features.data.data()),
                static_cast<std::streamsize>(f.features.data.size() * 8));
        std::size_t n = get_u64(in);
        if (!in || n != f.features.rows) return false;
        f.labels.resize(n);
        for (int& label : f.labels) label = static_cast<int>(get_u64(in));
    }
    return static_cast<bool>(in);
}

std::string stage(const std::string& name, const std::string& detail) {
    return "stage " + name + ": " + detail;
}

}  // namespace

void cmd_fixtures(const std::string& out_root, std::uint64_t seed, int subjects,
                  int per_subject, int width, int height) {
    Corpus corpus = generate_fixture_corpus(seed, subjects, per_subject, width, height);
    save_corpus(out_root, corpus);
}

void cmd_mask(const std::string& data_root, const std::string& out_root,
              std::uint64_t mask_seed, double top_fraction, double bottom_fraction) {
    Corpus corpus = load_corpus(data_root);
    Corpus masked = mask_corpus(corpus, mask_seed, top_fraction, bottom_fraction);
    save_corpus(out_root, masked);
}

ReportBundle cmd_reproduce(const RunConfig& cfg) {
    set_worker_count(cfg.jobs);

    Corpus corpus = [&] {
        try {
            return load_corpus(cfg.data_root);
        } catch (const Error& e) {
            throw IoError(stage("load_corpus", e.what()));
        }
    }();
    const std::uint64_t corpus_hash = corpus.content_hash();
    const int holdout =
        cfg.holdout_index > 0 ? cfg.holdout_index : corpus.images_per_subject;
    const std::uint64_t pipeline_fp = cfg.pipeline_fingerprint(corpus_hash);

    std::array<SplitFeatures, 5> split_features;
    const fs::path cache_path =
        fs::path(cfg.out_root) / "cache" / ("features-" + hex16(pipeline_fp) + ".bin");
    bool cached = cfg.use_cache && load_feature_cache(cache_path, split_features);

    SplitSet splits;
    if (!cached) {
        Corpus masked = [&] {
            try {
                return mask_corpus(corpus, cfg.resolved_mask_seed(), cfg.mask_top,
                                   cfg.mask_bottom);
            } catch (const Error& e) {
                throw Error(stage("mask", e.what()));
            }
        }();
        try {
            splits = build_splits(corpus, masked, holdout);
        } catch (const Error& e) {
            throw Error(stage("build_splits", e.what()));
        }
        try {
            cfg.lbp.validate_for(corpus.records.front().image.width,
                                 corpus.records.front().image.height);
            const std::array<const DatasetSplit*, 5> order = {
                &splits.training_um, &splits.training_hm, &splits.training_m,
                &splits.testing_um, &splits.testing_m};
            for (std::size_t i = 0; i < 5; ++i) {
                split_features[i].features = extract_split_features(*order[i], cfg.lbp);
                split_features[i].labels = split_labels(*order[i]);
            }
        } catch (const Error& e) {
            throw Error(stage("features", e.what()));
        }
        if (cfg.use_cache) save_feature_cache(cache_path, split_features);
        try {
            write_text_file(fs::path(cfg.out_root) / "reports" / "manifest.csv",
                            split_manifest_csv(splits, cfg.data_root));
        } catch (const Error& e) {
            throw Error(stage("manifest", e.what()));
        }
    }

    // The matrix runner works from the extracted features; reuse its
    // internals by handing it pre-built labeled splits.
    ReportBundle bundle;
    std::vector<TrainedModel> trained;
    try {
        fs::create_directories(fs::path(cfg.out_root) / "models");
        const std::uint64_t lbp_fp = cfg.lbp.fingerprint();
        std::array<LabeledDataset, 3> train_data;
        for (int t = 0; t < 3; ++t) {
            train_data[static_cast<std::size_t>(t)].features =
                std::move(split_features[static_cast<std::size_t>(t)].features);
            train_data[static_cast<std::size_t>(t)].labels =
                std::move(split_features[static_cast<std::size_t>(t)].labels);
            train_data[static_cast<std::size_t>(t)].lbp_fingerprint = lbp_fp;
            train_data[static_cast<std::size_t>(t)].validate();
        }
        for (int model = 0; model < kModelCount; ++model) {
            for (int t = 0; t < 3; ++t) {
                TrainSet train_set = static_cast<TrainSet>(t);
                const LabeledDataset& ds = train_data[static_cast<std::size_t>(t)];
                TrainedModel tm = [&]() -> TrainedModel {
                    switch (model) {
                        case 0:
                            return train_svc(ds, cfg.hypers.svc_cost,
                                             cfg.hypers.svc_iters);
                        case 1: return train_lda(ds, cfg.hypers.lda_shrinkage);
                        case 2:
                            return train_knn(ds, cfg.hypers.knn_k,
                                             cfg.hypers.knn_metric);
                        case 3: return train_dt(ds, cfg.hypers.dt_min_leaf);
                        case 4:
                            return train_lr(ds, cfg.hypers.lr_l2, cfg.hypers.lr_tol,
                                            cfg.hypers.lr_max_iters);
                        default: return train_nb(ds, cfg.hypers.nb_var_smoothing);
                    }
                }();
                for (int s = 0; s < 2; ++s) {
                    ExperimentId id{train_set, static_cast<TestSet>(s)};
                    const SplitFeatures& test =
                        split_features[static_cast<std::size_t>(3 + s)];
                    bundle.cells[static_cast<std::size_t>(model)]
                                [static_cast<std::size_t>(id.column())] =
                        evaluate_features(tm, test.features, test.labels);
                }
                save_model_file((fs::path(cfg.out_root) / "models" /
                                 (std::string(kModelNames[model]) + "_" +
                                  to_string(train_set) + ".mfrb"))
                                    .string(),
                                tm);
                trained.push_back(std::move(tm));
            }
        }
    } catch (const Error& e) {
        throw Error(stage("train_evaluate", e.what()));
    }

    bundle.provenance.master_seed = cfg.master_seed;
    bundle.provenance.mask_seed = cfg.resolved_mask_seed();
    bundle.provenance.holdout_index = holdout;
    bundle.provenance.lbp_description = cfg.lbp.describe();
    bundle.provenance.lbp_fingerprint = cfg.lbp.fingerprint();
    bundle.provenance.hyper_description = cfg.hypers.describe();
    bundle.provenance.hyper_fingerprint = cfg.hypers.fingerprint();
    bundle.provenance.corpus_hash = corpus_hash;
    bundle.provenance.subjects = corpus.subject_count;
    bundle.provenance.images_per_subject = corpus.images_per_subject;

    try {
        const fs::path reports = fs::path(cfg.out_root) / "reports";
        if (cfg.format == "csv" || cfg.format == "both")
            for (const auto& [name, text] : render_reports(bundle, ReportFormat::Csv))
                write_text_file(reports / (name + ".csv"), text);
        if (cfg.format == "md" || cfg.format == "both")
            for (const auto& [name, text] :
                 render_reports(bundle, ReportFormat::Markdown))
                write_text_file(reports / (name + ".md"), text);
    } catch (const Error& e) {
        throw Error(stage("render", e.what()));
    }
    return bundle;
}

namespace {

// Shared flag plumbing for commands that run the LBP/classifier stack.
void add_pipeline_flags(CLI::App* cmd, RunConfig& cfg, std::string& grid) {
    cmd->add_option("--seed", cfg.master_seed, "master seed");
    cmd->add_option("--holdout", cfg.holdout_index,
                    "holdout image index per subject (default: last)");
    cmd->add_option("--radius", cfg.lbp.radius, "LBP radius");
    cmd->add_option("--neighbors", cfg.lbp.neighbors, "LBP sample count");
    cmd->add_option("--grid", grid, "LBP grid, e.g. 4x4");
    cmd->add_option("--knn-k", cfg.hypers.knn_k, "KNN neighbor count");
    cmd->add_flag_callback(
        "--knn-chi2",
        [&cfg] { cfg.hypers.knn_metric = KnnMetric::ChiSquare; },
        "use chi-square distance for KNN");
    cmd->add_option("--lr-l2", cfg.hypers.lr_l2, "LR L2 penalty");
    cmd->add_option("--svc-c", cfg.hypers.svc_cost, "SVC cost parameter");
    cmd->add_option("--lda-shrinkage", cfg.hypers.lda_shrinkage, "LDA shrinkage");
    cmd->add_option("--format", cfg.format, "report format: csv, md or both")
        ->check(CLI::IsMember({"csv", "md", "both"}));
    cmd->add_option("--jobs", cfg.jobs, "worker threads (0 = all cores)");
    cmd->add_option("--mask-seed", [&cfg](const std::vector<std::string>& v) {
        cfg.mask_seed = std::strtoull(v[0].c_str(), nullptr, 10);
        return true;
    }, "mask synthesis seed (default: master seed)");
    cmd->add_option("--mask-top", cfg.mask_top, "mask top fraction");
    cmd->add_option("--mask-bottom", cfg.mask_bottom, "mask bottom fraction");
    cmd->add_flag_callback("--no-cache", [&cfg] { cfg.use_cache = false; },
                           "disable the on-disk feature cache");
}

void apply_grid(RunConfig& cfg, const std::string& grid) {
    if (grid.empty()) return;
    std::size_t x = grid.find('x');
    if (x == std::string::npos)
        throw ConfigError("--grid expects <cols>x<rows>, e.g. 4x4");
    cfg.lbp.grid_x = std::atoi(grid.substr(0, x).c_str());
    cfg.lbp.grid_y = std::atoi(grid.substr(x + 1).c_str());
}

std::string data_root_or_env(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    const char* env = std::getenv("MASKBENCH_DATA");
    if (env && *env) return env;
    throw IoError("corpus not found: pass --data or set MASKBENCH_DATA");
}

LabeledDataset corpus_dataset(const Corpus& corpus, const LbpConfig& lbp) {
    DatasetSplit all{"corpus", corpus.records};
    LabeledDataset ds;
    ds.features = extract_split_features(all, lbp);
    ds.labels = split_labels(all);
    ds.lbp_fingerprint = lbp.fingerprint();
    ds.validate();
    return ds;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"masked-face recognition benchmark over LBP features"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string data, grid, model_name = "lr", model_path, masked_root;
    std::uint64_t fixture_seed = 1;
    int subjects = 4, per_subject = 10, width = 92, height = 112;

    auto* fixtures = app.add_subcommand("fixtures", "generate a procedural corpus");
    fixtures->add_option("--out", cfg.out_root, "output directory")->required();
    fixtures->add_option("--seed", fixture_seed, "generator seed");
    fixtures->add_option("--subjects", subjects, "subject count");
    fixtures->add_option("--per-subject", per_subject, "images per subject");
    fixtures->add_option("--width", width, "image width");
    fixtures->add_option("--height", height, "image height");

    auto* mask = app.add_subcommand("mask", "synthesize a masked corpus");
    mask->add_option("--data", data, "unmasked corpus directory");
    mask->add_option("--out", cfg.out_root, "masked corpus directory")->required();
    mask->add_option("--mask-seed", [&cfg](const std::vector<std::string>& v) {
        cfg.mask_seed = std::strtoull(v[0].c_str(), nullptr, 10);
        return true;
    }, "mask synthesis seed");
    mask->add_option("--seed", cfg.master_seed, "master seed");
    mask->add_option("--mask-top", cfg.mask_top, "mask top fraction");
    mask->add_option("--mask-bottom", cfg.mask_bottom, "mask bottom fraction");

    auto* split = app.add_subcommand("split", "write the split manifest");
    split->add_option("--data", data, "unmasked corpus directory");
    split->add_option("--masked", masked_root, "masked corpus directory")->required();
    split->add_option("--out", cfg.out_root, "output directory")->required();
    split->add_option("--holdout", cfg.holdout_index, "holdout image index");

    auto* features = app.add_subcommand("features", "export LBP features as CSV");
    features->add_option("--data", data, "corpus directory");
    features->add_option("--out", cfg.out_root, "output CSV path")->required();
    features->add_option("--radius", cfg.lbp.radius, "LBP radius");
    features->add_option("--neighbors", cfg.lbp.neighbors, "LBP sample count");
    features->add_option("--grid", grid, "LBP grid, e.g. 4x4");
    features->add_option("--jobs", cfg.jobs, "worker threads");

    auto* train = app.add_subcommand("train", "train one model on a corpus");
    train->add_option("--data", data, "corpus directory");
    train->add_option("--model", model_name, "svc|lda|knn|dt|lr|nb");
    train->add_option("--out", model_path, "model file path")->required();
    add_pipeline_flags(train, cfg, grid);

    auto* eval = app.add_subcommand("eval", "evaluate a model file on a corpus");
    eval->add_option("--model-file", model_path, "trained model path")->required();
    eval->add_option("--data", data, "corpus directory");
    eval->add_option("--radius", cfg.lbp.radius, "LBP radius");
    eval->add_option("--neighbors", cfg.lbp.neighbors, "LBP sample count");
    eval->add_option("--grid", grid, "LBP grid, e.g. 4x4");
    eval->add_option("--jobs", cfg.jobs, "worker threads");

    auto* reproduce = app.add_subcommand(
        "reproduce", "run the full six-model, six-experiment matrix");
    reproduce->add_option("--data", data, "unmasked corpus directory");
    reproduce->add_option("--out", cfg.out_root, "output directory");
    add_pipeline_flags(reproduce, cfg, grid);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        apply_grid(cfg, grid);
        set_worker_count(cfg.jobs);
        if (fixtures->parsed()) {
            cmd_fixtures(cfg.out_root, fixture_seed, subjects, per_subject, width,
                         height);
            std::printf("wrote %d x %d fixture corpus to %s\n", subjects, per_subject,
                        cfg.out_root.c_str());
        } else if (mask->parsed()) {
            cmd_mask(data_root_or_env(data), cfg.out_root, cfg.resolved_mask_seed(),
                     cfg.mask_top, cfg.mask_bottom);
            std::printf("wrote masked corpus to %s\n", cfg.out_root.c_str());
        } else if (split->parsed()) {
            Corpus unmasked = load_corpus(data_root_or_env(data));
            Corpus masked = load_corpus(masked_root);
            for (ImageRecord& r : masked.records) r.mask_state = MaskState::Masked;
            int holdout = cfg.holdout_index > 0 ? cfg.holdout_index
                                                : unmasked.images_per_subject;
            SplitSet s = build_splits(unmasked, masked, holdout);
            write_text_file(fs::path(cfg.out_root) / "manifest.csv",
                            split_manifest_csv(s, data));
            std::printf("wrote split manifest to %s/manifest.csv\n",
                        cfg.out_root.c_str());
        } else if (features->parsed()) {
            Corpus corpus = load_corpus(data_root_or_env(data));
            apply_grid(cfg, grid);
            cfg.lbp.validate_for(corpus.records.front().image.width,
                                 corpus.records.front().image.height);
            std::string csv = "subject,index,mask_state";
            for (int j = 0; j < cfg.lbp.dimension(); ++j)
                csv += ",v" + std::to_string(j);
            csv += "\n";
            DatasetSplit all{"corpus", corpus.records};
            Matrix m = extract_split_features(all, cfg.lbp);
            for (std::size_t i = 0; i < m.rows; ++i) {
                const ImageRecord& r = corpus.records[i];
                csv += std::to_string(r.subject) + "," + std::to_string(r.index) +
                       "," + to_string(r.mask_state);
                char buf[32];
                for (std::size_t j = 0; j < m.cols; ++j) {
                    std::snprintf(buf, sizeof buf, ",%.17g", m.at(i, j));
                    csv += buf;
                }
                csv += "\n";
            }
            write_text_file(cfg.out_root, csv);
            std::printf("wrote %zu feature rows to %s\n", m.rows,
                        cfg.out_root.c_str());
        } else if (train->parsed()) {
            Corpus corpus = load_corpus(data_root_or_env(data));
            LabeledDataset ds = corpus_dataset(corpus, cfg.lbp);
            TrainedModel tm;
            if (model_name == "svc")
                tm = train_svc(ds, cfg.hypers.svc_cost, cfg.hypers.svc_iters);
            else if (model_name == "lda")
                tm = train_lda(ds, cfg.hypers.lda_shrinkage);
            else if (model_name == "knn")
                tm = train_knn(ds, cfg.hypers.knn_k, cfg.hypers.knn_metric);
            else if (model_name == "dt")
                tm = train_dt(ds, cfg.hypers.dt_min_leaf);
            else if (model_name == "lr")
                tm = train_lr(ds, cfg.hypers.lr_l2, cfg.hypers.lr_tol,
                              cfg.hypers.lr_max_iters);
            else if (model_name == "nb")
                tm = train_nb(ds, cfg.hypers.nb_var_smoothing);
            else
                throw ConfigError("unknown model '" + model_name + "'");
            save_model_file(model_path, tm);
            std::printf("trained %s on %zu samples, wrote %s\n", model_name.c_str(),
                        ds.features.rows, model_path.c_str());
        } else if (eval->parsed()) {
            Corpus corpus = load_corpus(data_root_or_env(data));
            TrainedModel tm = load_model_file(model_path);
            DatasetSplit all{"corpus", corpus.records};
            Metrics metrics = evaluate(tm, all, cfg.lbp);
            std::printf("model: %s\n", model_kind_name(tm));
            std::printf("accuracy: %.6f\n", metrics.accuracy());
            std::printf("macro_f1: %.6f\n", metrics.macro_f1);
            std::printf("misses: %zu / %zu\n", metrics.misses, metrics.n_test);
        } else if (reproduce->parsed()) {
            cfg.data_root = data_root_or_env(data);
            ReportBundle bundle = cmd_reproduce(cfg);
            std::printf("experiment matrix complete; reports in %s/reports\n",
                        cfg.out_root.c_str());
            for (int m = 0; m < kModelCount; ++m) {
                std::printf("%-4s", kModelNames[m]);
                for (int e = 0; e < kExperimentCount; ++e)
                    std::printf(" %s=%3.0f%%",
                                ExperimentId::from_column(e).label().c_str(),
                                100.0 * bundle.cells[m][e].accuracy());
                std::printf("\n");
            }
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

}  // namespace maskbench
