#include "maskbench/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "maskbench/rng.hpp"

namespace maskbench {

const std::array<const char*, kModelCount> kModelNames = {"SVC", "LDA", "KNN",
                                                          "DT",  "LR",  "NB"};

int ExperimentId::column() const {
    return static_cast<int>(train) * 2 + static_cast<int>(test);
}

std::string ExperimentId::label() const {
    return std::string(to_string(train)) + "/" + to_string(test);
}

ExperimentId ExperimentId::from_column(int column) {
    return {static_cast<TrainSet>(column / 2), static_cast<TestSet>(column % 2)};
}

std::uint64_t ModelHypers::fingerprint() const {
    Fnv1a h;
    auto f = [&](double v) { h.update(&v, sizeof v); };
    f(svc_cost);
    h.update_u64(static_cast<std::uint64_t>(svc_iters));
    f(lda_shrinkage);
    h.update_u64(static_cast<std::uint64_t>(knn_k));
    h.update_u64(static_cast<std::uint64_t>(knn_metric));
    h.update_u64(static_cast<std::uint64_t>(dt_min_leaf));
    f(lr_l2);
    f(lr_tol);
    h.update_u64(static_cast<std::uint64_t>(lr_max_iters));
    f(nb_var_smoothing);
    return h.digest();
}

std::string ModelHypers::describe() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "svc_cost=%g svc_iters=%d lda_shrinkage=%g knn_k=%d knn_metric=%s "
                  "dt_min_leaf=%d lr_l2=%g lr_tol=%g lr_max_iters=%d "
                  "nb_var_smoothing=%g",
                  svc_cost, svc_iters, lda_shrinkage, knn_k,
                  knn_metric == KnnMetric::Euclidean ? "euclidean" : "chi2",
                  dt_min_leaf, lr_l2, lr_tol, lr_max_iters, nb_var_smoothing);
    return buf;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string Provenance::header_lines() const {
    std::string s;
    s += "# master_seed: " + std::to_string(master_seed) + "\n";
    s += "# mask_seed: " + std::to_string(mask_seed) + "\n";
    s += "# holdout_index: " + std::to_string(holdout_index) + "\n";
    s += "# lbp: " + lbp_description + "\n";
    s += "# lbp_fingerprint: " + hex64(lbp_fingerprint) + "\n";
    s += "# hyperparameters: " + hyper_description + "\n";
    s += "# hyper_fingerprint: " + hex64(hyper_fingerprint) + "\n";
    s += "# corpus_hash: " + hex64(corpus_hash) + "\n";
    s += "# subjects: " + std::to_string(subjects) + "\n";
    s += "# images_per_subject: " + std::to_string(images_per_subject) + "\n";
    return s;
}

double ReportBundle::model_average_accuracy(int model) const {
    double sum = 0.0;
    for (int e = 0; e < kExperimentCount; ++e)
        sum += cells[static_cast<std::size_t>(model)][static_cast<std::size_t>(e)]
                   .accuracy();
    return sum / kExperimentCount;
}

double ReportBundle::experiment_average_accuracy(int column) const {
    double sum = 0.0;
    for (int m = 0; m < kModelCount; ++m)
        sum += cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(column)]
                   .accuracy();
    return sum / kModelCount;
}

double ReportBundle::model_average_f1(int model) const {
    double sum = 0.0;
    for (int e = 0; e < kExperimentCount; ++e)
        sum += cells[static_cast<std::size_t>(model)][static_cast<std::size_t>(e)]
                   .macro_f1;
    return sum / kExperimentCount;
}

double ReportBundle::experiment_average_f1(int column) const {
    double sum = 0.0;
    for (int m = 0; m < kModelCount; ++m)
        sum += cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(column)]
                   .macro_f1;
    return sum / kModelCount;
}

double ReportBundle::average_miss_rate(TrainSet train, TestSet test) const {
    ExperimentId id{train, test};
    double sum = 0.0;
    for (int m = 0; m < kModelCount; ++m) sum += cell(m, id).miss_rate();
    return sum / kModelCount;
}

Matrix extract_split_features(const DatasetSplit& split, const LbpConfig& cfg) {
    if (split.records.empty())
        throw ConfigError("split '" + split.name + "' is empty");
    const std::size_t dim = static_cast<std::size_t>(cfg.dimension());
    Matrix out(split.records.size(), dim);
    parallel_chunks(split.records.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            FeatureVector f = extract_features(split.records[i].image, cfg);
            std::copy(f.begin(), f.end(), out.row(i));
        }
    });
    return out;
}

std::vector<int> split_labels(const DatasetSplit& split) {
    std::vector<int> labels(split.records.size());
    for (std::size_t i = 0; i < split.records.size(); ++i)
        labels[i] = split.records[i].subject;
    return labels;
}

Metrics evaluate_features(const TrainedModel& m, const Matrix& features,
                          const std::vector<int>& labels) {
    if (features.rows == 0) throw ConfigError("evaluate: empty test split");
    std::vector<int> predicted = predict_batch(m, features);

    Metrics out;
    out.n_test = features.rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (predicted[i] != labels[i]) out.misses++;

    // Per-class tallies over the union of true and predicted classes.
    std::vector<int> union_classes(labels);
    union_classes.insert(union_classes.end(), predicted.begin(), predicted.end());
    std::sort(union_classes.begin(), union_classes.end());
    union_classes.erase(std::unique(union_classes.begin(), union_classes.end()),
                        union_classes.end());

    double f1_sum = 0.0;
    for (int cls : union_classes) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            bool truth = labels[i] == cls;
            bool pred = predicted[i] == cls;
            tp += truth && pred;
            fp += !truth && pred;
            fn += truth && !pred;
        }
        ClassMetrics cm;
        cm.cls = cls;
        cm.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        cm.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        cm.f1 = (cm.precision + cm.recall) > 0.0
                    ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                    : 0.0;
        f1_sum += cm.f1;
        out.per_class.push_back(cm);
    }
    out.macro_f1 = union_classes.empty() ? 0.0 : f1_sum / union_classes.size();
    return out;
}

Metrics evaluate(const TrainedModel& m, const DatasetSplit& split,
                 const LbpConfig& cfg) {
    Matrix features = extract_split_features(split, cfg);
    return evaluate_features(m, features, split_labels(split));
}

namespace {

LabeledDataset make_dataset(const Matrix& features, const std::vector<int>& labels,
                            std::uint64_t lbp_fingerprint) {
    LabeledDataset ds;
    ds.features = features;
    ds.labels = labels;
    ds.lbp_fingerprint = lbp_fingerprint;
    ds.validate();
    return ds;
}

TrainedModel train_by_index(int model, const LabeledDataset& ds,
                            const ModelHypers& h) {
    switch (model) {
        case 0: return train_svc(ds, h.svc_cost, h.svc_iters);
        case 1: return train_lda(ds, h.lda_shrinkage);
        case 2: return train_knn(ds, h.knn_k, h.knn_metric);
        case 3: return train_dt(ds, h.dt_min_leaf);
        case 4: return train_lr(ds, h.lr_l2, h.lr_tol, h.lr_max_iters);
        default: return train_nb(ds, h.nb_var_smoothing);
    }
}

}  // namespace

ReportBundle run_experiment_matrix(const SplitSet& splits, const LbpConfig& cfg,
                                   const ModelHypers& hypers,
                                   std::vector<TrainedModel>* trained) {
    cfg.validate();
    const std::uint64_t lbp_fp = cfg.fingerprint();

    const std::array<const DatasetSplit*, 3> train_splits = {
        &splits.training_um, &splits.training_hm, &splits.training_m};
    const std::array<const DatasetSplit*, 2> test_splits = {&splits.testing_um,
                                                            &splits.testing_m};

    std::array<LabeledDataset, 3> train_data;
    for (int t = 0; t < 3; ++t)
        train_data[static_cast<std::size_t>(t)] =
            make_dataset(extract_split_features(*train_splits[t], cfg),
                         split_labels(*train_splits[t]), lbp_fp);

    std::array<Matrix, 2> test_features;
    std::array<std::vector<int>, 2> test_labels;
    for (int t = 0; t < 2; ++t) {
        test_features[static_cast<std::size_t>(t)] =
            extract_split_features(*test_splits[t], cfg);
        test_labels[static_cast<std::size_t>(t)] = split_labels(*test_splits[t]);
    }

    ReportBundle bundle;
    if (trained) trained->clear();
    for (int model = 0; model < kModelCount; ++model) {
        for (int t = 0; t < 3; ++t) {
            TrainSet train_set = static_cast<TrainSet>(t);
            TrainedModel tm = [&] {
                try {
                    return train_by_index(model, train_data[static_cast<std::size_t>(t)],
                                          hypers);
                } catch (const Error& e) {
                    throw Error(std::string("training ") + kModelNames[model] + " on " +
                                to_string(train_set) + ": " + e.what());
                }
            }();
            for (int s = 0; s < 2; ++s) {
                ExperimentId id{train_set, static_cast<TestSet>(s)};
                try {
                    bundle.cells[static_cast<std::size_t>(model)]
                                [static_cast<std::size_t>(id.column())] =
                        evaluate_features(tm, test_features[static_cast<std::size_t>(s)],
                                          test_labels[static_cast<std::size_t>(s)]);
                } catch (const Error& e) {
                    throw Error(std::string("evaluating ") + kModelNames[model] +
                                " in " + id.label() + ": " + e.what());
                }
            }
            if (trained) trained->push_back(std::move(tm));
        }
    }
    bundle.provenance.lbp_description = cfg.describe();
    bundle.provenance.lbp_fingerprint = lbp_fp;
    bundle.provenance.hyper_description = hypers.describe();
    bundle.provenance.hyper_fingerprint = hypers.fingerprint();
    return bundle;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Half-up rounding to integer percent, rendered like the published tables.
std::string percent_int(double fraction) {
    double pct = std::floor(fraction * 100.0 + 0.5);
    return std::to_string(static_cast<long long>(pct)) + "%";
}

// One-decimal percent for the overall averages table; drops a trailing .0.
std::string percent_tenths(double fraction) {
    double tenths = std::floor(fraction * 1000.0 + 0.5);
    long long whole = static_cast<long long>(tenths) / 10;
    long long frac = static_cast<long long>(tenths) % 10;
    if (frac == 0) return std::to_string(whole) + "%";
    return std::to_string(whole) + "." + std::to_string(frac) + "%";
}

void csv_row(std::string& out, const std::string& table, const std::string& model,
             const std::string& train, const std::string& test,
             const std::string& metric, const std::string& value) {
    out += table + "," + model + "," + train + "," + test + "," + metric + "," +
           value + "\n";
}

std::string render_rate_table_csv(const ReportBundle& b, const char* table_name,
                                  bool f1) {
    std::string out = b.provenance.header_lines();
    out += "table,model,train_set,test_set,metric,value\n";
    const char* metric = f1 ? "macro_f1" : "accuracy";
    for (int m = 0; m < kModelCount; ++m) {
        for (int e = 0; e < kExperimentCount; ++e) {
            ExperimentId id = ExperimentId::from_column(e);
            double v = f1 ? b.cells[m][e].macro_f1 : b.cells[m][e].accuracy();
            csv_row(out, table_name, kModelNames[m], to_string(id.train),
                    to_string(id.test), metric, format_full(v));
        }
        double avg = f1 ? b.model_average_f1(m) : b.model_average_accuracy(m);
        csv_row(out, table_name, kModelNames[m], "AVERAGES", "", metric,
                format_full(avg));
    }
    for (int e = 0; e < kExperimentCount; ++e) {
        ExperimentId id = ExperimentId::from_column(e);
        double v = f1 ? b.experiment_average_f1(e) : b.experiment_average_accuracy(e);
        csv_row(out, table_name, "AVERAGES", to_string(id.train), to_string(id.test),
                metric, format_full(v));
    }
    double total = 0.0;
    for (int m = 0; m < kModelCount; ++m)
        total += f1 ? b.model_average_f1(m) : b.model_average_accuracy(m);
    csv_row(out, table_name, "AVERAGES", "AVERAGES", "", metric,
            format_full(total / kModelCount));
    return out;
}

std::string render_rate_table_md(const ReportBundle& b, const char* title, bool f1) {
    std::string out = b.provenance.header_lines();
    out += "\n";
    out += std::string("**") + title + "**\n\n";
    out += "| Model | UM/UM | UM/M | HM/UM | HM/M | M/UM | M/M | AVERAGES |\n";
    out += "|---|---|---|---|---|---|---|---|\n";
    for (int m = 0; m < kModelCount; ++m) {
        out += std::string("| ") + kModelNames[m] + " |";
        for (int e = 0; e < kExperimentCount; ++e) {
            double v = f1 ? b.cells[m][e].macro_f1 : b.cells[m][e].accuracy();
            out += " " + percent_int(v) + " |";
        }
        double avg = f1 ? b.model_average_f1(m) : b.model_average_accuracy(m);
        out += " " + percent_int(avg) + " |\n";
    }
    out += "| AVERAGES |";
    for (int e = 0; e < kExperimentCount; ++e) {
        double v = f1 ? b.experiment_average_f1(e) : b.experiment_average_accuracy(e);
        out += " " + percent_int(v) + " |";
    }
    double overall = 0.0;
    for (int m = 0; m < kModelCount; ++m)
        overall += f1 ? b.model_average_f1(m) : b.model_average_accuracy(m);
    out += " " + percent_int(overall / kModelCount) + " |\n";
    return out;
}

std::string render_miss_table_csv(const ReportBundle& b, TrainSet train,
                                  const std::string& table_name) {
    std::string out = b.provenance.header_lines();
    out += "table,model,train_set,test_set,metric,value\n";
    for (int m = 0; m < kModelCount; ++m) {
        for (int s = 0; s < 2; ++s) {
            ExperimentId id{train, static_cast<TestSet>(s)};
            const Metrics& cell = b.cell(m, id);
            csv_row(out, table_name, kModelNames[m], to_string(train),
                    to_string(id.test), "misses", std::to_string(cell.misses));
            csv_row(out, table_name, kModelNames[m], to_string(train),
                    to_string(id.test), "out_of", std::to_string(cell.n_test));
            csv_row(out, table_name, kModelNames[m], to_string(train),
                    to_string(id.test), "miss_rate", format_full(cell.miss_rate()));
        }
    }
    return out;
}

std::string render_miss_table_md(const ReportBundle& b, TrainSet train) {
    std::string out = b.provenance.header_lines();
    out += "\n**Miss rates, training set " + std::string(to_string(train)) + "**\n\n";
    out += "| Model | Group | Misses | Out Of | Percent |\n";
    out += "|---|---|---|---|---|\n";
    for (int m = 0; m < kModelCount; ++m) {
        for (int s = 0; s < 2; ++s) {
            ExperimentId id{train, static_cast<TestSet>(s)};
            const Metrics& cell = b.cell(m, id);
            out += std::string("| ") + kModelNames[m] + " | " +
                   (id.test == TestSet::UM ? "Unmasked" : "Masked") + " | " +
                   std::to_string(cell.misses) + " | " + std::to_string(cell.n_test) +
                   " | " + percent_int(cell.miss_rate()) + " |\n";
        }
    }
    return out;
}

std::string render_overall_csv(const ReportBundle& b) {
    std::string out = b.provenance.header_lines();
    out += "table,model,train_set,test_set,metric,value\n";
    const std::array<TrainSet, 3> trains = {TrainSet::UM, TrainSet::HM, TrainSet::M};
    for (int s = 0; s < 2; ++s) {
        TestSet test = static_cast<TestSet>(s);
        double row_sum = 0.0;
        for (TrainSet train : trains) {
            double v = b.average_miss_rate(train, test);
            row_sum += v;
            csv_row(out, "miss_overall", "AVERAGE", to_string(train), to_string(test),
                    "miss_rate", format_full(v));
        }
        csv_row(out, "miss_overall", "AVERAGE", "AVERAGES", to_string(test),
                "miss_rate", format_full(row_sum / 3.0));
    }
    for (TrainSet train : trains) {
        double v = (b.average_miss_rate(train, TestSet::UM) +
                    b.average_miss_rate(train, TestSet::M)) /
                   2.0;
        csv_row(out, "miss_overall", "AVERAGE", to_string(train), "AVERAGES",
                "miss_rate", format_full(v));
    }
    double grand = 0.0;
    for (TrainSet train : trains)
        grand += (b.average_miss_rate(train, TestSet::UM) +
                  b.average_miss_rate(train, TestSet::M)) /
                 2.0;
    csv_row(out, "miss_overall", "AVERAGE", "AVERAGES", "AVERAGES", "miss_rate",
            format_full(grand / 3.0));
    return out;
}

std::string render_overall_md(const ReportBundle& b) {
    std::string out = b.provenance.header_lines();
    out += "\n**Overall average miss rates**\n\n";
    out += "| | UM | HM | M | Average |\n";
    out += "|---|---|---|---|---|\n";
    const std::array<TrainSet, 3> trains = {TrainSet::UM, TrainSet::HM, TrainSet::M};
    const char* row_names[2] = {"Average Unmasked Miss Rate",
                                "Average Masked Miss Rate"};
    for (int s = 0; s < 2; ++s) {
        TestSet test = static_cast<TestSet>(s);
        out += std::string("| ") + row_names[s] + " |";
        double row_sum = 0.0;
        for (TrainSet train : trains) {
            double v = b.average_miss_rate(train, test);
            row_sum += v;
            out += " " + percent_tenths(v) + " |";
        }
        out += " " + percent_tenths(row_sum / 3.0) + " |\n";
    }
    out += "| Averages |";
    double grand = 0.0;
    for (TrainSet train : trains) {
        double v = (b.average_miss_rate(train, TestSet::UM) +
                    b.average_miss_rate(train, TestSet::M)) /
                   2.0;
        grand += v;
        out += " " + percent_tenths(v) + " |";
    }
    out += " " + percent_tenths(grand / 3.0) + " |\n";
    return out;
}

}  // namespace

std::map<std::string, std::string> render_reports(const ReportBundle& bundle,
                                                  ReportFormat format) {
    std::map<std::string, std::string> out;
    if (format == ReportFormat::Csv) {
        out["accuracy"] = render_rate_table_csv(bundle, "accuracy", false);
        out["f1"] = render_rate_table_csv(bundle, "f1", true);
        out["miss_um"] = render_miss_table_csv(bundle, TrainSet::UM, "miss_um");
        out["miss_hm"] = render_miss_table_csv(bundle, TrainSet::HM, "miss_hm");
        out["miss_m"] = render_miss_table_csv(bundle, TrainSet::M, "miss_m");
        out["miss_overall"] = render_overall_csv(bundle);
    } else {
        out["accuracy"] = render_rate_table_md(bundle, "Accuracy", false);
        out["f1"] = render_rate_table_md(bundle, "Macro F1", true);
        out["miss_um"] = render_miss_table_md(bundle, TrainSet::UM);
        out["miss_hm"] = render_miss_table_md(bundle, TrainSet::HM);
        out["miss_m"] = render_miss_table_md(bundle, TrainSet::M);
        out["miss_overall"] = render_overall_md(bundle);
    }
    return out;
}

std::map<std::string, double> parse_report_csv(const std::string& csv) {
    std::map<std::string, double> out;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < csv.size()) {
        std::size_t eol = csv.find('\n', pos);
        if (eol == std::string::npos) eol = csv.size();
        std::string line = csv.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {  // column header row
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 6) continue;
        std::string key =
            fields[1] + "/" + fields[2] + "/" + fields[3] + "/" + fields[4];
        out[key] = std::strtod(fields[5].c_str(), nullptr);
    }
    return out;
}

}  // namespace maskbench
