#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "har/artifacts.hpp"
#include "har/baseline.hpp"
#include "har/config.hpp"
#include "har/encoder.hpp"
#include "har/eval.hpp"
#include "har/head.hpp"
#include "har/ingest.hpp"
#include "har/log.hpp"
#include "har/mapping_io.hpp"
#include "har/model_io.hpp"
#include "har/pairing.hpp"
#include "har/report.hpp"

namespace har {

// Data loading shared by the CLI subcommands: config -> cut windows plus the
// label-id -> class-name table used for mapping and truth files.
struct LoadedData {
    std::vector<Window> windows;
    std::map<int, std::string> label_names;
};

inline LoadedData load_data(const RunConfig& cfg) {
    LoadedData out;
    const StageSeeds seeds = derive_seeds(cfg.seed);
    ResampleStats rstats;
    if (cfg.data.kind == "synth") {
        SynthSpec spec = default_synth_spec(cfg.data.classes, cfg.data.subjects,
                                            cfg.data.seconds_per_class, cfg.data.noise_sigma, seeds.synth);
        spec.sample_rate_hz = cfg.windowing.sample_rate_hz;
        auto series = synth_corpus(spec);
        out.windows = windows_from_series(series, cfg.windowing, Unit::G, cfg.resample, &rstats);
        for (int c = 0; c < cfg.data.classes; ++c) out.label_names[c] = "class" + std::to_string(c);
    } else if (cfg.data.kind == "csv") {
        const CsvSchema schema = load_csv_schema(cfg.data.schema);
        CsvReadStats stats;
        auto series = read_csv_dataset(cfg.data.path, schema, &stats);
        log::event("csv_read", {{"rows", stats.rows_read}, {"skipped", stats.rows_skipped}});
        out.windows = windows_from_series(series, cfg.windowing, schema.unit, cfg.resample, &rstats);
        for (size_t i = 0; i < cfg.data.class_names.size(); ++i)
            out.label_names[static_cast<int>(i)] = cfg.data.class_names[i];
    } else if (cfg.data.kind == "pamap2") {
        Pamap2Stats stats;
        auto series = read_pamap2(cfg.data.dir, &stats);
        log::event("pamap2_read",
                   {{"files", series.size()}, {"skipped_rows", stats.rows_skipped},
                    {"null_label_rows", stats.null_label_rows}});
        // values already normalized to G by the reader
        out.windows = windows_from_series(series, cfg.windowing, Unit::G, cfg.resample, &rstats);
        out.label_names = pamap2_class_names();
    } else if (cfg.data.kind == "windows") {
        out.windows = load_windows(cfg.data.path, cfg.windowing.window_len());
        for (size_t i = 0; i < cfg.data.class_names.size(); ++i)
            out.label_names[static_cast<int>(i)] = cfg.data.class_names[i];
    } else {
        throw ConfigError("data: unknown kind '" + cfg.data.kind + "'");
    }
    if (rstats.dropped_segments > 0)
        log::event("resample_dropped_segments", {{"dropped", rstats.dropped_segments},
                                                 {"segments", rstats.segments}});
    if (out.label_names.empty()) {
        // fall back to numeric names for whatever labels exist
        for (const auto& w : out.windows)
            if (w.label != kNoLabel && !out.label_names.count(w.label))
                out.label_names[w.label] = "label" + std::to_string(w.label);
    }
    return out;
}

inline std::string label_name(const std::map<int, std::string>& names, int label) {
    auto it = names.find(label);
    return it != names.end() ? it->second : "label" + std::to_string(label);
}

inline LabelMapping resolve_mapping(const RunConfig& cfg, const std::map<int, std::string>& label_names) {
    if (cfg.mapping == "identity") {
        std::vector<std::string> classes;
        for (const auto& [id, name] : label_names) classes.push_back(name);
        if (classes.empty()) throw DataError("mapping: no labeled classes to build identity mapping");
        return LabelMapping::identity(classes);
    }
    return load_mapping(cfg.mapping);
}

struct PipelineResult {
    EvalReport report;
    std::string encoder_path, head_path, preds_path, truth_path, report_path;
};

// pretrain -> train-head -> predict -> eval from one config, writing every
// artifact under cfg.out_dir.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    validate_paths(cfg);
    fs::create_directories(cfg.out_dir);
    const StageSeeds seeds = derive_seeds(cfg.seed);

    // ---- data
    LoadedData data = load_data(cfg);
    if (data.windows.empty()) throw DataError("pipeline: no windows after ingest");
    log::event("ingest_done", {{"windows", data.windows.size()}});

    // ---- pretrain on all windows (labels unused)
    EncoderConfig enc_cfg = cfg.encoder;
    enc_cfg.seed = seeds.encoder;
    enc_cfg.input_len = cfg.windowing.window_len();
    PairingConfig pair_cfg = cfg.pairing;
    pair_cfg.seed = seeds.pairing;
    CorpusIndex corpus = build_corpus_index(data.windows);

    PretrainOptions popts;
    popts.log_csv_path = (fs::path(cfg.out_dir) / "pretrain_log.csv").string();
    popts.materialize_pairs = cfg.materialize_pairs;
    PretrainResult pre = pretrain(corpus, enc_cfg, pair_cfg, cfg.menu, popts,
                                  [](const TrainLogRow& r) {
                                      log::event("pretrain_step", {{"step", r.step}, {"loss", r.loss}});
                                  });

    PipelineResult result;
    result.encoder_path = (fs::path(cfg.out_dir) / "encoder.model").string();
    save_encoder(pre.model, result.encoder_path);
    log::event("pretrain_done", {{"steps", enc_cfg.steps}, {"model", result.encoder_path}});

    // ---- labeled subset mapped to target classes
    const LabelMapping mapping = resolve_mapping(cfg, data.label_names);
    std::vector<Window> labeled;
    std::vector<int> target_ids;
    long dropped_unmapped = 0;
    for (const auto& w : corpus.windows) {
        if (w.label == kNoLabel) continue;
        std::vector<std::string> one = {label_name(data.label_names, w.label)};
        MappedLabels m = apply_mapping(one, mapping);
        if (!m.target_ids[0].has_value()) {
            ++dropped_unmapped;
            continue;
        }
        labeled.push_back(w);
        target_ids.push_back(*m.target_ids[0]);
    }
    if (labeled.empty()) throw DataError("pipeline: no labeled windows after mapping");
    const int K = static_cast<int>(mapping.target_classes.size());

    // ---- subject-wise split
    std::vector<std::string> subjects;
    for (const auto& w : labeled) subjects.push_back(w.subject_id);
    SplitConfig split_cfg = cfg.split;
    split_cfg.seed = seeds.split;
    const SplitResult split = subject_split(subjects, split_cfg);
    log::event("split_done", {{"train", split.train_idx.size()}, {"test", split.test_idx.size()}});

    // ---- head on frozen embeddings of the training split
    std::vector<Window> train_windows, test_windows;
    std::vector<int> train_labels, test_labels;
    for (size_t i : split.train_idx) {
        train_windows.push_back(labeled[i]);
        train_labels.push_back(target_ids[i]);
    }
    for (size_t i : split.test_idx) {
        test_windows.push_back(labeled[i]);
        test_labels.push_back(target_ids[i]);
    }
    auto train_emb = embed(pre.model, train_windows);
    std::vector<LabeledEmbedding> train_data(train_emb.size());
    for (size_t i = 0; i < train_emb.size(); ++i)
        train_data[i] = {std::move(train_emb[i]), train_labels[i], train_windows[i].subject_id,
                         train_windows[i].start_time};

    HeadConfig head_cfg = cfg.head;
    head_cfg.num_classes = K;
    head_cfg.input_dim = enc_cfg.embedding_dim;
    head_cfg.seed = seeds.head;
    HeadTrainResult head = train_head(train_data, head_cfg);
    result.head_path = (fs::path(cfg.out_dir) / "head.model").string();
    save_head(head.model, result.head_path);
    log::event("head_done", {{"model", result.head_path}});

    // ---- predict on the held-out windows, write preds + truth
    auto preds = predict(pre.model, head.model, test_windows);
    result.preds_path = (fs::path(cfg.out_dir) / "preds.csv").string();
    write_preds_csv(result.preds_path, preds, K);
    std::vector<TruthRow> truth_rows(test_windows.size());
    for (size_t i = 0; i < test_windows.size(); ++i)
        truth_rows[i] = {test_windows[i].subject_id, test_windows[i].start_time,
                         mapping.target_classes[test_labels[i]]};
    result.truth_path = (fs::path(cfg.out_dir) / "truth.csv").string();
    write_truth_csv(result.truth_path, truth_rows);

    // ---- evaluate
    std::vector<int> pred_ids(preds.size());
    for (size_t i = 0; i < preds.size(); ++i) pred_ids[i] = preds[i].pred_class;
    result.report = evaluate(test_labels, pred_ids, mapping.target_classes, dropped_unmapped);
    result.report_path = (fs::path(cfg.out_dir) / "report.json").string();
    emit_report(result.report, result.report_path);
    log::event("eval_done", {{"accuracy", result.report.accuracy}, {"kappa", result.report.kappa}});
    return result;
}

} // namespace har
