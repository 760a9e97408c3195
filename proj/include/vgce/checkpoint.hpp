#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "vgce/composer.hpp"
#include "vgce/dataset_io.hpp"
#include "vgce/model.hpp"

namespace vgce {

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {
        {"lambda_ei", c.lambda_ei}, {"lambda_ie", c.lambda_ie},   {"lr", c.lr},
        {"batch_size", c.batch_size}, {"epochs", c.epochs},       {"k", c.k},
        {"h", c.h},                 {"hidden", c.hidden},         {"layers", c.layers},
        {"kl_weight", c.kl_weight}, {"temperature", c.temperature},
        {"seed", c.seed},           {"pair_cap", c.pair_cap},     {"neg_samples", c.neg_samples},
    };
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.lambda_ei = j.at("lambda_ei").get<double>();
    c.lambda_ie = j.at("lambda_ie").get<double>();
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.k = j.at("k").get<int>();
    c.h = j.at("h").get<int>();
    c.hidden = j.at("hidden").get<int>();
    c.layers = j.at("layers").get<int>();
    c.kl_weight = j.at("kl_weight").get<double>();
    c.temperature = j.at("temperature").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    c.pair_cap = j.at("pair_cap").get<int>();
    c.neg_samples = j.at("neg_samples").get<int>();
    return c;
}

// Checkpoint file: magic "VGCM", version u32=1, header length u32, JSON
// header, then each parameter tensor as a "VGCF" matrix block in
// ModelParams::for_each order.
namespace ckptfmt {
constexpr char kMagic[4] = {'V', 'G', 'C', 'M'};
constexpr uint32_t kVersion = 1;
} // namespace ckptfmt

struct Checkpoint {
    ModelParams params;
    TrainConfig config;
};

inline std::string encode_checkpoint(const ModelParams& params, const TrainConfig& cfg) {
    nlohmann::json header;
    header["dims"] = {{"m", params.dims.m},         {"hidden", params.dims.hidden},
                      {"h", params.dims.h},         {"k", params.dims.k},
                      {"d", params.dims.d},         {"layers", params.dims.layers}};
    header["train_config"] = train_config_to_json(cfg);
    header["seed"] = cfg.seed;
    nlohmann::json tensors = nlohmann::json::array();
    params.for_each([&](const std::string& name, const Tensor2D& t) {
        tensors.push_back({{"name", name}, {"rows", t.rows}, {"cols", t.cols}});
    });
    header["tensors"] = tensors;
    const std::string header_str = header.dump();

    std::string out;
    out.append(ckptfmt::kMagic, 4);
    binfmt::put_u32(out, ckptfmt::kVersion);
    binfmt::put_u32(out, static_cast<uint32_t>(header_str.size()));
    out += header_str;
    params.for_each([&](const std::string&, const Tensor2D& t) {
        out += binfmt::encode_matrix(t);
    });
    return out;
}

inline void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                            const TrainConfig& cfg) {
    write_file(path, encode_checkpoint(params, cfg));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    const std::string name = path.filename().string();
    if (data.size() < 12) throw error(name + ": truncated checkpoint");
    if (std::memcmp(data.data(), ckptfmt::kMagic, 4) != 0)
        throw error(name + ": bad magic bytes");
    if (binfmt::get_u32(data.data() + 4) != ckptfmt::kVersion)
        throw error(name + ": unsupported checkpoint version");
    const uint32_t header_len = binfmt::get_u32(data.data() + 8);
    if (data.size() < 12 + static_cast<size_t>(header_len))
        throw error(name + ": truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(data.substr(12, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw error(name + ": bad header JSON: " + e.what());
    }

    Checkpoint ck;
    ck.config = train_config_from_json(header.at("train_config"));
    const auto& dims = header.at("dims");
    ModelDims md;
    md.m = dims.at("m").get<int>();
    md.hidden = dims.at("hidden").get<int>();
    md.h = dims.at("h").get<int>();
    md.k = dims.at("k").get<int>();
    md.d = dims.at("d").get<int>();
    md.layers = dims.at("layers").get<int>();
    ck.params = init_params(md, 0); // shapes only; data overwritten below

    size_t offset = 12 + header_len;
    size_t tensor_idx = 0;
    const auto& tensors = header.at("tensors");
    ck.params.for_each([&](const std::string& pname, Tensor2D& t) {
        if (tensor_idx >= tensors.size())
            throw error(name + ": header lists too few tensors");
        const auto& decl = tensors[tensor_idx++];
        if (decl.at("name").get<std::string>() != pname)
            throw error(name + ": tensor order mismatch, expected " + pname);
        Tensor2D loaded = binfmt::decode_matrix(data, offset, name + ":" + pname);
        if (loaded.rows != decl.at("rows").get<int>() || loaded.cols != decl.at("cols").get<int>())
            throw error(name + ": shape mismatch for " + pname);
        if (!loaded.same_shape(t))
            throw error(name + ": tensor " + pname + " has shape " + shape_str(loaded) +
                        ", dims imply " + shape_str(t));
        t = std::move(loaded);
    });
    if (offset != data.size()) throw error(name + ": trailing bytes");
    return ck;
}

} // namespace vgce
