#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "har/augment.hpp"
#include "har/encoder.hpp"
#include "har/errors.hpp"
#include "har/eval.hpp"
#include "har/head.hpp"
#include "har/ingest.hpp"
#include "har/pairing.hpp"

namespace har {

// ============================================================================
// JSON <-> config structs. Unknown keys are rejected to catch typos early.
// ============================================================================

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const auto& a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
}

} // namespace detail

inline AugmentationSpec augmentation_from_json(const nlohmann::json& j) {
    AugmentationSpec s;
    if (j.is_string()) {
        s.kind = parse_aug_kind(j.get<std::string>());
        return s;
    }
    detail::check_keys(j, {"kind", "kernel_min", "kernel_max", "max_shift", "jump_min", "jump_max",
                           "wander_amp_max", "wander_freq_min", "wander_freq_max", "max_tilt_deg",
                           "planar", "sigma_min", "sigma_max", "parts"},
                       "augmentation");
    s.kind = parse_aug_kind(j.at("kind").get<std::string>());
    s.kernel_min = detail::get_or(j, "kernel_min", s.kernel_min);
    s.kernel_max = detail::get_or(j, "kernel_max", s.kernel_max);
    s.max_shift = detail::get_or(j, "max_shift", s.max_shift);
    s.jump_min = detail::get_or(j, "jump_min", s.jump_min);
    s.jump_max = detail::get_or(j, "jump_max", s.jump_max);
    s.wander_amp_max = detail::get_or(j, "wander_amp_max", s.wander_amp_max);
    s.wander_freq_min = detail::get_or(j, "wander_freq_min", s.wander_freq_min);
    s.wander_freq_max = detail::get_or(j, "wander_freq_max", s.wander_freq_max);
    s.max_tilt_deg = detail::get_or(j, "max_tilt_deg", s.max_tilt_deg);
    s.planar = detail::get_or(j, "planar", s.planar);
    s.sigma_min = detail::get_or(j, "sigma_min", s.sigma_min);
    s.sigma_max = detail::get_or(j, "sigma_max", s.sigma_max);
    if (j.contains("parts"))
        for (const auto& p : j.at("parts")) s.parts.push_back(augmentation_from_json(p));
    validate(s);
    return s;
}

inline CsvSchema csv_schema_from_json(const nlohmann::json& j) {
    detail::check_keys(j, {"delimiter", "has_header", "subject_col", "time_col", "xyz_cols",
                           "label_col", "unit"},
                       "csv schema");
    CsvSchema s;
    const std::string d = detail::get_or<std::string>(j, "delimiter", ",");
    if (d.size() != 1) throw ConfigError("csv schema: delimiter must be one character");
    s.delimiter = d[0];
    s.has_header = detail::get_or(j, "has_header", true);
    auto col = [](const nlohmann::json& v) -> ColumnRef {
        if (v.is_number_integer()) return v.get<int>();
        return v.get<std::string>();
    };
    s.subject_col = col(j.at("subject_col"));
    s.time_col = col(j.at("time_col"));
    const auto& xyz = j.at("xyz_cols");
    if (!xyz.is_array() || xyz.size() != 3) throw ConfigError("csv schema: xyz_cols must have 3 entries");
    for (int i = 0; i < 3; ++i) s.xyz_cols[i] = col(xyz[i]);
    if (j.contains("label_col") && !j.at("label_col").is_null()) s.label_col = col(j.at("label_col"));
    s.unit = parse_unit(detail::get_or<std::string>(j, "unit", "g"));
    return s;
}

inline CsvSchema load_csv_schema(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("csv schema: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("csv schema: bad JSON in '" + path + "': " + e.what());
    }
    return csv_schema_from_json(j);
}

// ============================================================================
// Run configuration (one file drives the whole pipeline)
// ============================================================================

struct DataConfig {
    std::string kind = "synth"; // synth | csv | pamap2 | windows
    // synth
    int classes = 4;
    int subjects = 8;
    double seconds_per_class = 200.0;
    double noise_sigma = 0.03;
    // csv
    std::string path;   // csv file or window cache
    std::string schema; // sidecar schema path
    std::vector<std::string> class_names; // label id -> name (csv/windows kinds)
    // pamap2
    std::string dir;
};

struct RunConfig {
    uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = "out";
    DataConfig data;
    WindowingConfig windowing;
    ResampleOptions resample;
    std::vector<AugmentationSpec> menu = default_menu();
    PairingConfig pairing;
    bool materialize_pairs = false;
    EncoderConfig encoder;
    HeadConfig head;
    struct {
        int epochs = 100;
        double lr = 1e-3;
        int batch = 256;
    } baseline;
    SplitConfig split;
    std::string mapping = "identity"; // "identity" or a mapping file path
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    detail::check_keys(j, {"seed", "out_dir", "data", "ingest", "augment", "pairing", "encoder",
                           "head", "baseline", "eval"},
                       "config root");
    RunConfig cfg;
    if (!j.contains("seed")) throw ConfigError("config: 'seed' is mandatory");
    cfg.seed = j.at("seed").get<uint64_t>();
    cfg.seed_set = true;
    cfg.out_dir = detail::get_or<std::string>(j, "out_dir", cfg.out_dir);

    if (j.contains("data")) {
        const auto& d = j.at("data");
        detail::check_keys(d, {"kind", "classes", "subjects", "seconds_per_class", "noise_sigma",
                               "path", "schema", "class_names", "dir"},
                           "data");
        cfg.data.kind = detail::get_or<std::string>(d, "kind", cfg.data.kind);
        cfg.data.classes = detail::get_or(d, "classes", cfg.data.classes);
        cfg.data.subjects = detail::get_or(d, "subjects", cfg.data.subjects);
        cfg.data.seconds_per_class = detail::get_or(d, "seconds_per_class", cfg.data.seconds_per_class);
        cfg.data.noise_sigma = detail::get_or(d, "noise_sigma", cfg.data.noise_sigma);
        cfg.data.path = detail::get_or<std::string>(d, "path", "");
        cfg.data.schema = detail::get_or<std::string>(d, "schema", "");
        cfg.data.class_names = detail::get_or(d, "class_names", cfg.data.class_names);
        cfg.data.dir = detail::get_or<std::string>(d, "dir", "");
    }
    if (j.contains("ingest")) {
        const auto& d = j.at("ingest");
        detail::check_keys(d, {"sample_rate_hz", "window_seconds", "lowpass_12hz", "gap_seconds"},
                           "ingest");
        cfg.windowing.sample_rate_hz = detail::get_or(d, "sample_rate_hz", cfg.windowing.sample_rate_hz);
        cfg.windowing.window_seconds = detail::get_or(d, "window_seconds", cfg.windowing.window_seconds);
        cfg.resample.lowpass_12hz = detail::get_or(d, "lowpass_12hz", cfg.resample.lowpass_12hz);
        cfg.resample.gap_seconds = detail::get_or(d, "gap_seconds", cfg.resample.gap_seconds);
    }
    if (j.contains("augment")) {
        const auto& d = j.at("augment");
        detail::check_keys(d, {"menu"}, "augment");
        if (d.contains("menu")) {
            cfg.menu.clear();
            for (const auto& m : d.at("menu")) cfg.menu.push_back(augmentation_from_json(m));
        }
    }
    if (j.contains("pairing")) {
        const auto& d = j.at("pairing");
        detail::check_keys(d, {"delta_t_max", "batch_pairs", "aug_fraction", "materialize_pairs"},
                           "pairing");
        cfg.pairing.delta_t_max = detail::get_or(d, "delta_t_max", cfg.pairing.delta_t_max);
        cfg.pairing.batch_pairs = detail::get_or(d, "batch_pairs", cfg.pairing.batch_pairs);
        cfg.pairing.aug_fraction = detail::get_or(d, "aug_fraction", cfg.pairing.aug_fraction);
        cfg.materialize_pairs = detail::get_or(d, "materialize_pairs", cfg.materialize_pairs);
    }
    if (j.contains("encoder")) {
        const auto& d = j.at("encoder");
        detail::check_keys(d, {"conv_blocks", "channels", "kernels", "pools", "embedding_dim",
                               "projector_hidden", "steps", "lr", "log_every", "checkpoint_every"},
                           "encoder");
        cfg.encoder.conv_blocks = detail::get_or(d, "conv_blocks", cfg.encoder.conv_blocks);
        cfg.encoder.channels = detail::get_or(d, "channels", cfg.encoder.channels);
        cfg.encoder.kernels = detail::get_or(d, "kernels", cfg.encoder.kernels);
        cfg.encoder.pools = detail::get_or(d, "pools", cfg.encoder.pools);
        cfg.encoder.embedding_dim = detail::get_or(d, "embedding_dim", cfg.encoder.embedding_dim);
        cfg.encoder.projector_hidden = detail::get_or(d, "projector_hidden", cfg.encoder.projector_hidden);
        cfg.encoder.steps = detail::get_or(d, "steps", cfg.encoder.steps);
        cfg.encoder.lr = detail::get_or(d, "lr", cfg.encoder.lr);
        cfg.encoder.log_every = detail::get_or(d, "log_every", cfg.encoder.log_every);
        cfg.encoder.checkpoint_every = detail::get_or(d, "checkpoint_every", cfg.encoder.checkpoint_every);
    }
    if (j.contains("head")) {
        const auto& d = j.at("head");
        detail::check_keys(d, {"layers", "units", "epochs", "lr", "batch", "imbalance_cap",
                               "smoothing_seconds", "segment_gap_seconds", "smooth_kind",
                               "smooth_centered"},
                           "head");
        cfg.head.layers = detail::get_or(d, "layers", cfg.head.layers);
        cfg.head.units = detail::get_or(d, "units", cfg.head.units);
        cfg.head.epochs = detail::get_or(d, "epochs", cfg.head.epochs);
        cfg.head.lr = detail::get_or(d, "lr", cfg.head.lr);
        cfg.head.batch = detail::get_or(d, "batch", cfg.head.batch);
        cfg.head.imbalance_cap = detail::get_or(d, "imbalance_cap", cfg.head.imbalance_cap);
        cfg.head.smoothing_seconds = detail::get_or(d, "smoothing_seconds", cfg.head.smoothing_seconds);
        cfg.head.segment_gap_seconds =
            detail::get_or(d, "segment_gap_seconds", cfg.head.segment_gap_seconds);
        const std::string sk = detail::get_or<std::string>(d, "smooth_kind", "mean");
        if (sk != "mean" && sk != "median") throw ConfigError("config: smooth_kind must be mean|median");
        cfg.head.smooth_kind = sk == "median" ? SmoothKind::Median : SmoothKind::Mean;
        cfg.head.smooth_centered = detail::get_or(d, "smooth_centered", cfg.head.smooth_centered);
    }
    if (j.contains("baseline")) {
        const auto& d = j.at("baseline");
        detail::check_keys(d, {"epochs", "lr", "batch"}, "baseline");
        cfg.baseline.epochs = detail::get_or(d, "epochs", cfg.baseline.epochs);
        cfg.baseline.lr = detail::get_or(d, "lr", cfg.baseline.lr);
        cfg.baseline.batch = detail::get_or(d, "batch", cfg.baseline.batch);
    }
    if (j.contains("eval")) {
        const auto& d = j.at("eval");
        detail::check_keys(d, {"split", "mapping"}, "eval");
        if (d.contains("split")) {
            const auto& s = d.at("split");
            detail::check_keys(s, {"policy", "test_fraction"}, "eval.split");
            const std::string p = detail::get_or<std::string>(s, "policy", "held_out_subjects");
            if (p == "random_windows")
                cfg.split.policy = SplitPolicy::RandomWindows;
            else if (p == "held_out_subjects")
                cfg.split.policy = SplitPolicy::HeldOutSubjects;
            else
                throw ConfigError("config: unknown split policy '" + p + "'");
            cfg.split.test_fraction = detail::get_or(s, "test_fraction", cfg.split.test_fraction);
        }
        cfg.mapping = detail::get_or<std::string>(d, "mapping", cfg.mapping);
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: bad JSON in '" + path + "': " + e.what());
    }
    return run_config_from_json(j);
}

// Paths referenced by the config must exist before a run starts.
inline void validate_paths(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    if (!cfg.seed_set) throw ConfigError("config: seed is mandatory");
    if (cfg.data.kind == "csv") {
        if (cfg.data.path.empty() || !fs::exists(cfg.data.path))
            throw ConfigError("config: data.path '" + cfg.data.path + "' does not exist");
        if (cfg.data.schema.empty() || !fs::exists(cfg.data.schema))
            throw ConfigError("config: data.schema '" + cfg.data.schema + "' does not exist");
    } else if (cfg.data.kind == "pamap2") {
        if (cfg.data.dir.empty() || !fs::is_directory(cfg.data.dir))
            throw ConfigError("config: data.dir '" + cfg.data.dir + "' is not a directory");
    } else if (cfg.data.kind == "windows") {
        if (cfg.data.path.empty() || !fs::exists(cfg.data.path))
            throw ConfigError("config: data.path '" + cfg.data.path + "' does not exist");
    } else if (cfg.data.kind != "synth") {
        throw ConfigError("config: unknown data.kind '" + cfg.data.kind + "'");
    }
    if (cfg.mapping != "identity" && !fs::exists(cfg.mapping))
        throw ConfigError("config: mapping file '" + cfg.mapping + "' does not exist");
}

// Stage seeds are derived from the global seed so each stage draws from an
// independent stream.
struct StageSeeds {
    uint64_t synth, pairing, encoder, head, baseline, split;
};

inline StageSeeds derive_seeds(uint64_t global_seed) {
    Rng root(global_seed);
    StageSeeds s;
    s.synth = root.split(1).next_u64();
    s.pairing = root.split(2).next_u64();
    s.encoder = root.split(3).next_u64();
    s.head = root.split(4).next_u64();
    s.baseline = root.split(5).next_u64();
    s.split = root.split(6).next_u64();
    return s;
}

} // namespace har
