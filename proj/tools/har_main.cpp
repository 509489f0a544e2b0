#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "har/artifacts.hpp"
#include "har/config.hpp"
#include "har/log.hpp"
#include "har/mapping_io.hpp"
#include "har/model_io.hpp"
#include "har/pipeline.hpp"
#include "har/report.hpp"

namespace {

namespace fs = std::filesystem;

// Exit codes: 0 ok, 2 usage, 3 config, 4 data, 5 numeric.
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitData = 4;
constexpr int kExitNumeric = 5;

struct CommonOpts {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_given = false;
};

har::RunConfig resolve_config(const CommonOpts& opts) {
    har::RunConfig cfg;
    if (!opts.config_path.empty()) {
        if (!fs::exists(opts.config_path))
            throw har::ConfigError("config file '" + opts.config_path + "' does not exist");
        cfg = har::load_run_config(opts.config_path);
    }
    if (opts.seed_given) {
        cfg.seed = opts.seed;
        cfg.seed_set = true;
    }
    if (!cfg.seed_set) throw har::ConfigError("a seed is required (config 'seed' or --seed)");
    return cfg;
}

void write_synth_corpus(const har::RunConfig& cfg, const std::string& out_dir) {
    const har::StageSeeds seeds = har::derive_seeds(cfg.seed);
    har::SynthSpec spec = har::default_synth_spec(cfg.data.classes, cfg.data.subjects,
                                                  cfg.data.seconds_per_class, cfg.data.noise_sigma,
                                                  seeds.synth);
    spec.sample_rate_hz = cfg.windowing.sample_rate_hz;
    const auto series = har::synth_corpus(spec);

    fs::create_directories(out_dir);
    const std::string csv_path = (fs::path(out_dir) / "corpus.csv").string();
    std::ofstream os(csv_path);
    if (!os) throw har::DataError("synth: cannot write '" + csv_path + "'");
    os << "subject,t,x,y,z,label\n";
    for (const auto& s : series)
        for (size_t i = 0; i < s.size(); ++i)
            os << s.subject_id << ',' << har::detail::fmt_double(s.timestamps[i]) << ','
               << har::detail::fmt_float(s.accel[i][0]) << ',' << har::detail::fmt_float(s.accel[i][1])
               << ',' << har::detail::fmt_float(s.accel[i][2]) << ',' << s.labels[i] << "\n";
    os.close();

    nlohmann::json schema = {{"delimiter", ","},
                             {"has_header", true},
                             {"subject_col", "subject"},
                             {"time_col", "t"},
                             {"xyz_cols", {"x", "y", "z"}},
                             {"label_col", "label"},
                             {"unit", "g"}};
    std::ofstream ss((fs::path(out_dir) / "corpus.schema.json").string());
    ss << schema.dump(2) << "\n";

    std::vector<std::string> classes;
    for (int c = 0; c < cfg.data.classes; ++c) classes.push_back("class" + std::to_string(c));
    har::save_mapping(har::LabelMapping::identity(classes),
                      (fs::path(out_dir) / "classes.json").string());
    har::log::info("synth corpus written to " + out_dir + " (" + std::to_string(series.size()) +
                   " series)");
}

har::LoadedData load_from_flags(har::RunConfig cfg, const std::string& data_path,
                                const std::string& schema_path, const std::string& format) {
    if (!data_path.empty()) {
        if (format == "pamap2") {
            cfg.data.kind = "pamap2";
            cfg.data.dir = data_path;
        } else if (data_path.size() > 4 && data_path.substr(data_path.size() - 4) == ".bin") {
            cfg.data.kind = "windows";
            cfg.data.path = data_path;
        } else if (fs::is_directory(data_path)) {
            cfg.data.kind = "csv";
            cfg.data.path = (fs::path(data_path) / "corpus.csv").string();
            cfg.data.schema = schema_path.empty() ? (fs::path(data_path) / "corpus.schema.json").string()
                                                  : schema_path;
            const auto classes_file = fs::path(data_path) / "classes.json";
            if (cfg.data.class_names.empty() && fs::exists(classes_file))
                cfg.data.class_names = har::load_mapping(classes_file.string()).target_classes;
        } else {
            cfg.data.kind = "csv";
            cfg.data.path = data_path;
            if (!schema_path.empty()) cfg.data.schema = schema_path;
            if (cfg.data.schema.empty())
                throw har::ConfigError("csv data needs --schema (or a directory with corpus.schema.json)");
        }
    }
    har::validate_paths(cfg);
    return har::load_data(cfg);
}

std::vector<har::TruthRow> truth_rows_from(const har::LoadedData& data,
                                           const std::vector<har::Window>& windows) {
    std::vector<har::TruthRow> rows;
    for (const auto& w : windows) {
        if (w.label == har::kNoLabel) continue;
        rows.push_back({w.subject_id, w.start_time, har::label_name(data.label_names, w.label)});
    }
    return rows;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-supervised human-activity-recognition pipeline"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string data_path, schema_path, format, out_path, out_dir;
    std::string encoder_path, head_path, mapping_path, preds_path, truth_path;
    long steps = -1;
    int batch_pairs = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "run configuration JSON");
        cmd->add_option("--seed", common.seed, "global seed (overrides config)")
            ->each([&](const std::string&) { common.seed_given = true; });
    };

    int synth_classes = -1, synth_subjects = -1;
    double synth_seconds = -1.0, synth_noise = -1.0;
    auto* synth = app.add_subcommand("synth", "generate the synthetic labeled corpus");
    add_common(synth);
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--classes", synth_classes, "number of classes");
    synth->add_option("--subjects", synth_subjects, "number of subjects");
    synth->add_option("--seconds-per-class", synth_seconds, "seconds of data per class");
    synth->add_option("--noise-sigma", synth_noise, "Gaussian noise sigma in G");

    auto* ingest = app.add_subcommand("ingest", "read a dataset and write the window cache");
    add_common(ingest);
    ingest->add_option("--data", data_path, "csv file, corpus dir, or PAMAP2 dir")->required();
    ingest->add_option("--schema", schema_path, "csv schema JSON");
    ingest->add_option("--format", format, "set to 'pamap2' for PAMAP2 directories");
    ingest->add_option("--out", out_path, "output windows .bin path")->required();

    auto* pretrain = app.add_subcommand("pretrain", "contrastive pre-training of the encoder");
    add_common(pretrain);
    pretrain->add_option("--data", data_path, "input data (csv/dir/.bin)");
    pretrain->add_option("--schema", schema_path, "csv schema JSON");
    pretrain->add_option("--format", format, "set to 'pamap2' for PAMAP2 directories");
    pretrain->add_option("--steps", steps, "training steps (overrides config)");
    pretrain->add_option("--batch-pairs", batch_pairs, "positive pairs per batch (overrides config)");
    bool materialize = false;
    std::string dump_batches;
    pretrain->add_flag("--materialize-pairs", materialize,
                       "draw all coincidence pairs before the training loop");
    pretrain->add_option("--dump-batches", dump_batches, "write per-batch pair provenance NDJSON");
    pretrain->add_option("--out", out_path, "encoder model output path")->required();

    auto* embed_cmd = app.add_subcommand("embed", "embed windows with a frozen encoder");
    add_common(embed_cmd);
    embed_cmd->add_option("--encoder", encoder_path, "encoder model path")->required();
    embed_cmd->add_option("--data", data_path, "input data")->required();
    embed_cmd->add_option("--schema", schema_path, "csv schema JSON");
    embed_cmd->add_option("--format", format, "set to 'pamap2' for PAMAP2 directories");
    embed_cmd->add_option("--out", out_path, "embeddings CSV output")->required();

    auto* train_head = app.add_subcommand("train-head", "train the HAR head on frozen embeddings");
    add_common(train_head);
    train_head->add_option("--encoder", encoder_path, "encoder model path")->required();
    train_head->add_option("--data", data_path, "labeled input data")->required();
    train_head->add_option("--schema", schema_path, "csv schema JSON");
    train_head->add_option("--format", format, "set to 'pamap2' for PAMAP2 directories");
    train_head->add_option("--classes", mapping_path, "label mapping JSON (or 'identity')");
    train_head->add_option("--out", out_path, "head model output path")->required();

    auto* featurize = app.add_subcommand("featurize", "write the 8 benchmark statistics per window");
    add_common(featurize);
    featurize->add_option("--data", data_path, "input data")->required();
    featurize->add_option("--schema", schema_path, "csv schema JSON");
    featurize->add_option("--format", format, "set to 'pamap2' for PAMAP2 directories");
    featurize->add_option("--out", out_path, "features CSV output")->required();

    auto* train_baseline = app.add_subcommand("train-baseline", "train the statistical benchmark");
    add_common(train_baseline);
    train_baseline->add_option("--data", data_path, "labeled input data")->required();
    train_baseline->add_option("--schema", schema_path, "csv schema JSON");
    train_baseline->add_option("--format", format, "set to 'pamap2' for PAMAP2 directories");
    train_baseline->add_option("--classes", mapping_path, "label mapping JSON (or 'identity')");
    train_baseline->add_option("--out", out_path, "baseline model output path")->required();

    auto* predict = app.add_subcommand("predict", "classify windows and smooth logits");
    add_common(predict);
    predict->add_option("--encoder", encoder_path, "encoder model path")->required();
    predict->add_option("--head", head_path, "head model path")->required();
    predict->add_option("--data", data_path, "input data")->required();
    predict->add_option("--schema", schema_path, "csv schema JSON");
    predict->add_option("--format", format, "set to 'pamap2' for PAMAP2 directories");
    predict->add_option("--out", out_path, "predictions CSV output")->required();
    predict->add_option("--truth-out", truth_path, "also write truth CSV for labeled windows");

    auto* eval = app.add_subcommand("eval", "score predictions against truth");
    add_common(eval);
    eval->add_option("--preds", preds_path, "predictions CSV")->required();
    eval->add_option("--truth", truth_path, "truth CSV")->required();
    eval->add_option("--mapping", mapping_path, "label mapping JSON")->required();
    eval->add_option("--out", out_path, "report JSON output path")->required();

    auto* pipeline = app.add_subcommand("pipeline", "pretrain -> train-head -> predict -> eval");
    add_common(pipeline);
    pipeline->add_option("--out-dir", out_dir, "override config out_dir");

    auto* check = app.add_subcommand("check-config", "validate a run configuration");
    add_common(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (synth->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            if (synth_classes > 0) cfg.data.classes = synth_classes;
            if (synth_subjects > 0) cfg.data.subjects = synth_subjects;
            if (synth_seconds > 0) cfg.data.seconds_per_class = synth_seconds;
            if (synth_noise >= 0) cfg.data.noise_sigma = synth_noise;
            write_synth_corpus(cfg, out_dir);
        } else if (ingest->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            har::LoadedData data = load_from_flags(cfg, data_path, schema_path, format);
            har::save_windows(out_path, data.windows);
            har::log::info("wrote " + std::to_string(data.windows.size()) + " windows to " + out_path);
        } else if (pretrain->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            if (steps >= 0) cfg.encoder.steps = steps;
            if (batch_pairs > 0) cfg.pairing.batch_pairs = batch_pairs;
            har::LoadedData data = load_from_flags(cfg, data_path, schema_path, format);
            const har::StageSeeds seeds = har::derive_seeds(cfg.seed);
            har::EncoderConfig enc_cfg = cfg.encoder;
            enc_cfg.seed = seeds.encoder;
            enc_cfg.input_len = cfg.windowing.window_len();
            har::PairingConfig pair_cfg = cfg.pairing;
            pair_cfg.seed = seeds.pairing;
            har::CorpusIndex corpus = har::build_corpus_index(std::move(data.windows));
            har::PretrainOptions opts;
            opts.log_csv_path = out_path + ".log.csv";
            opts.materialize_pairs = cfg.materialize_pairs || materialize;
            opts.batch_dump_path = dump_batches;
            auto result = har::pretrain(corpus, enc_cfg, pair_cfg, cfg.menu, opts,
                                        [](const har::TrainLogRow& r) {
                                            har::log::event("pretrain_step",
                                                            {{"step", r.step}, {"loss", r.loss}});
                                        });
            har::save_encoder(result.model, out_path);
            har::log::info("encoder written to " + out_path);
        } else if (embed_cmd->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            har::LoadedData data = load_from_flags(cfg, data_path, schema_path, format);
            const har::EncoderModel model = har::load_encoder(encoder_path);
            auto vecs = har::embed(model, data.windows);
            har::write_embeddings_csv(out_path, data.windows, vecs);
            har::log::info("wrote " + std::to_string(vecs.size()) + " embeddings to " + out_path);
        } else if (train_head->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            if (!mapping_path.empty()) cfg.mapping = mapping_path;
            har::LoadedData data = load_from_flags(cfg, data_path, schema_path, format);
            const har::EncoderModel model = har::load_encoder(encoder_path);
            const har::LabelMapping mapping = har::resolve_mapping(cfg, data.label_names);
            std::vector<har::Window> labeled;
            std::vector<int> targets;
            long dropped = 0;
            for (const auto& w : data.windows) {
                if (w.label == har::kNoLabel) continue;
                auto m = har::apply_mapping({har::label_name(data.label_names, w.label)}, mapping);
                if (!m.target_ids[0]) {
                    ++dropped;
                    continue;
                }
                labeled.push_back(w);
                targets.push_back(*m.target_ids[0]);
            }
            auto emb = har::embed(model, labeled);
            std::vector<har::LabeledEmbedding> train_data(emb.size());
            for (size_t i = 0; i < emb.size(); ++i)
                train_data[i] = {std::move(emb[i]), targets[i], labeled[i].subject_id,
                                 labeled[i].start_time};
            const har::StageSeeds seeds = har::derive_seeds(cfg.seed);
            har::HeadConfig head_cfg = cfg.head;
            head_cfg.num_classes = static_cast<int>(mapping.target_classes.size());
            head_cfg.input_dim = model.cfg.embedding_dim;
            head_cfg.seed = seeds.head;
            auto result = har::train_head(train_data, head_cfg);
            har::save_head(result.model, out_path);
            har::log::info("head written to " + out_path + " (dropped unmapped: " +
                           std::to_string(dropped) + ")");
        } else if (featurize->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            har::LoadedData data = load_from_flags(cfg, data_path, schema_path, format);
            har::write_features_csv(out_path, data.windows);
            har::log::info("wrote features for " + std::to_string(data.windows.size()) +
                           " windows to " + out_path);
        } else if (train_baseline->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            if (!mapping_path.empty()) cfg.mapping = mapping_path;
            har::LoadedData data = load_from_flags(cfg, data_path, schema_path, format);
            const har::LabelMapping mapping = har::resolve_mapping(cfg, data.label_names);
            std::vector<har::Window> labeled;
            std::vector<int> targets;
            for (const auto& w : data.windows) {
                if (w.label == har::kNoLabel) continue;
                auto m = har::apply_mapping({har::label_name(data.label_names, w.label)}, mapping);
                if (!m.target_ids[0]) continue;
                labeled.push_back(w);
                targets.push_back(*m.target_ids[0]);
            }
            const har::StageSeeds seeds = har::derive_seeds(cfg.seed);
            har::ProbeConfig pcfg;
            pcfg.epochs = cfg.baseline.epochs;
            pcfg.lr = cfg.baseline.lr;
            pcfg.batch = cfg.baseline.batch;
            pcfg.imbalance_cap = cfg.head.imbalance_cap;
            pcfg.seed = seeds.baseline;
            auto model = har::train_baseline(labeled, targets,
                                             static_cast<int>(mapping.target_classes.size()), pcfg);
            har::save_probe(model, out_path);
            har::log::info("baseline written to " + out_path);
        } else if (predict->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            har::LoadedData data = load_from_flags(cfg, data_path, schema_path, format);
            const har::EncoderModel enc = har::load_encoder(encoder_path);
            const har::HeadModel head = har::load_head(head_path);
            auto preds = har::predict(enc, head, data.windows);
            har::write_preds_csv(out_path, preds, head.cfg.num_classes);
            if (!truth_path.empty()) har::write_truth_csv(truth_path, truth_rows_from(data, data.windows));
            har::log::info("wrote " + std::to_string(preds.size()) + " predictions to " + out_path);
        } else if (eval->parsed()) {
            const har::LabelMapping mapping = har::load_mapping(mapping_path);
            const auto preds = har::read_preds_csv(preds_path);
            const auto truth = har::read_truth_csv(truth_path);
            // join on (subject, start_time)
            std::map<std::pair<std::string, double>, int> pred_by_key;
            for (const auto& p : preds) pred_by_key[{p.subject_id, p.start_time}] = p.pred_class;
            std::vector<int> truth_ids, pred_ids;
            long dropped = 0;
            for (const auto& t : truth) {
                auto it = pred_by_key.find({t.subject_id, t.start_time});
                if (it == pred_by_key.end())
                    throw har::DataError("eval: no prediction for subject '" + t.subject_id +
                                         "' at t=" + std::to_string(t.start_time));
                auto m = har::apply_mapping({t.label}, mapping);
                if (!m.target_ids[0]) {
                    ++dropped;
                    continue;
                }
                truth_ids.push_back(*m.target_ids[0]);
                pred_ids.push_back(it->second);
            }
            auto report = har::evaluate(truth_ids, pred_ids, mapping.target_classes, dropped);
            har::emit_report(report, out_path);
            har::log::info(har::report_summary_text(report));
            har::log::info("report written to " + out_path);
        } else if (pipeline->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            auto result = har::run_pipeline(cfg);
            har::log::info(har::report_summary_text(result.report));
            har::log::info("pipeline artifacts under " + cfg.out_dir);
        } else if (check->parsed()) {
            har::RunConfig cfg = resolve_config(common);
            har::validate_paths(cfg);
            validate(cfg.pairing);
            validate(cfg.encoder);
            for (const auto& m : cfg.menu) validate(m);
            har::log::info("config ok");
        }
    } catch (const har::ConfigError& e) {
        har::log::event("error", {{"category", "config"}, {"message", e.what()}});
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const har::DataError& e) {
        har::log::event("error", {{"category", "data"}, {"message", e.what()}});
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const har::NumericError& e) {
        har::log::event("error", {{"category", "numeric"}, {"message", e.what()}});
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        har::log::event("error", {{"category", "internal"}, {"message", e.what()}});
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
