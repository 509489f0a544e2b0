#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "har/baseline.hpp"
#include "har/encoder.hpp"
#include "har/errors.hpp"
#include "har/head.hpp"
#include "har/nn/serialize.hpp"

namespace har {

// Model files pair the HARSSL01 parameter blob at `path` with a JSON sidecar
// at `path + ".json"` describing the architecture needed to rebuild the net.

namespace detail {

inline nlohmann::json load_sidecar(const std::string& path, const char* expect_type) {
    std::ifstream is(path + ".json");
    if (!is) throw DataError("model: missing sidecar '" + path + ".json'");
    nlohmann::json j;
    is >> j;
    if (j.at("type").get<std::string>() != expect_type)
        throw DataError("model: '" + path + "' is a " + j.at("type").get<std::string>() + ", expected " +
                        expect_type);
    return j;
}

inline void save_sidecar(const nlohmann::json& j, const std::string& path) {
    std::ofstream os(path + ".json");
    if (!os) throw DataError("model: cannot write sidecar '" + path + ".json'");
    os << j.dump(2) << "\n";
}

} // namespace detail

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

inline void save_encoder(const EncoderModel& model, const std::string& path) {
    nn::save_params(path, model.params);
    nlohmann::json j;
    j["type"] = "encoder";
    j["conv_blocks"] = model.cfg.conv_blocks;
    j["channels"] = model.cfg.channels;
    j["kernels"] = model.cfg.kernels;
    j["pools"] = model.cfg.pools;
    j["embedding_dim"] = model.cfg.embedding_dim;
    j["projector_hidden"] = model.cfg.projector_hidden;
    j["input_len"] = model.cfg.input_len;
    j["input_channels"] = model.cfg.input_channels;
    j["seed"] = model.cfg.seed;
    detail::save_sidecar(j, path);
}

inline EncoderModel load_encoder(const std::string& path) {
    const nlohmann::json j = detail::load_sidecar(path, "encoder");
    EncoderModel model;
    model.cfg.conv_blocks = j.at("conv_blocks").get<int>();
    model.cfg.channels = j.at("channels").get<std::vector<int>>();
    model.cfg.kernels = j.at("kernels").get<std::vector<int>>();
    model.cfg.pools = j.at("pools").get<std::vector<int>>();
    model.cfg.embedding_dim = j.at("embedding_dim").get<int>();
    model.cfg.projector_hidden = j.at("projector_hidden").get<int>();
    model.cfg.input_len = j.at("input_len").get<int>();
    model.cfg.input_channels = j.at("input_channels").get<int>();
    model.cfg.seed = j.at("seed").get<uint64_t>();
    model.net = build_encoder_net(model.cfg);
    model.params = nn::load_params(path);
    model.frozen = true;
    return model;
}

// ---------------------------------------------------------------------------
// HAR head
// ---------------------------------------------------------------------------

inline void save_head(const HeadModel& model, const std::string& path) {
    nn::save_params(path, model.params);
    nlohmann::json j;
    j["type"] = "head";
    j["layers"] = model.cfg.layers;
    j["units"] = model.cfg.units;
    j["num_classes"] = model.cfg.num_classes;
    j["input_dim"] = model.cfg.input_dim;
    j["imbalance_cap"] = model.cfg.imbalance_cap;
    j["smoothing_seconds"] = model.cfg.smoothing_seconds;
    j["segment_gap_seconds"] = model.cfg.segment_gap_seconds;
    j["smooth_kind"] = model.cfg.smooth_kind == SmoothKind::Mean ? "mean" : "median";
    j["smooth_centered"] = model.cfg.smooth_centered;
    j["seed"] = model.cfg.seed;
    detail::save_sidecar(j, path);
}

inline HeadModel load_head(const std::string& path) {
    const nlohmann::json j = detail::load_sidecar(path, "head");
    HeadModel model;
    model.cfg.layers = j.at("layers").get<int>();
    model.cfg.units = j.at("units").get<int>();
    model.cfg.num_classes = j.at("num_classes").get<int>();
    model.cfg.input_dim = j.at("input_dim").get<int>();
    model.cfg.imbalance_cap = j.at("imbalance_cap").get<double>();
    model.cfg.smoothing_seconds = j.at("smoothing_seconds").get<double>();
    model.cfg.segment_gap_seconds = j.at("segment_gap_seconds").get<double>();
    model.cfg.smooth_kind = j.at("smooth_kind").get<std::string>() == "median" ? SmoothKind::Median
                                                                               : SmoothKind::Mean;
    model.cfg.smooth_centered = j.at("smooth_centered").get<bool>();
    model.cfg.seed = j.at("seed").get<uint64_t>();
    model.net = build_head_net(model.cfg);
    model.params = nn::load_params(path);
    return model;
}

// ---------------------------------------------------------------------------
// Linear probe / baseline (z-score parameters ride along as tensors)
// ---------------------------------------------------------------------------

inline void save_probe(const ProbeModel& model, const std::string& path) {
    nn::ParamStore<float> store;
    for (size_t i = 0; i < model.params.size(); ++i)
        store.add(model.params.names()[i], model.params.tensor(i));
    store.add("probe.zscore.mean",
              nn::tensor_from<float>({static_cast<int>(model.z_mean.size())}, model.z_mean));
    store.add("probe.zscore.std",
              nn::tensor_from<float>({static_cast<int>(model.z_std.size())}, model.z_std));
    nn::save_params(path, store);
    nlohmann::json j;
    j["type"] = "probe";
    j["num_classes"] = model.num_classes;
    j["input_dim"] = static_cast<int>(model.z_mean.size());
    detail::save_sidecar(j, path);
}

inline ProbeModel load_probe(const std::string& path) {
    const nlohmann::json j = detail::load_sidecar(path, "probe");
    ProbeModel model;
    model.num_classes = j.at("num_classes").get<int>();
    const int dim = j.at("input_dim").get<int>();
    nn::ParamStore<float> store = nn::load_params(path);
    model.z_mean = store.at("probe.zscore.mean").data;
    model.z_std = store.at("probe.zscore.std").data;
    model.net.prefix = "probe.";
    model.net.layers.push_back(nn::dense(dim, model.num_classes));
    for (size_t i = 0; i < store.size(); ++i) {
        const std::string& name = store.names()[i];
        if (name.rfind("probe.zscore", 0) == 0) continue;
        model.params.add(name, store.tensor(i));
    }
    return model;
}

} // namespace har
