#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vgce/data_model.hpp"
#include "vgce/rng.hpp"
#include "vgce/tensor.hpp"

namespace vgce {

// Binary matrix container: magic "VGCF", version u32=1, rows u32, cols u32,
// then rows*cols little-endian float32, row-major. All integers little-endian.
namespace binfmt {

constexpr char kMagic[4] = {'V', 'G', 'C', 'F'};
constexpr uint32_t kVersion = 1;

inline void put_u32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline uint32_t get_u32(const char* p) {
    return static_cast<uint32_t>(static_cast<uint8_t>(p[0])) |
           static_cast<uint32_t>(static_cast<uint8_t>(p[1])) << 8 |
           static_cast<uint32_t>(static_cast<uint8_t>(p[2])) << 16 |
           static_cast<uint32_t>(static_cast<uint8_t>(p[3])) << 24;
}

inline std::string encode_matrix(const Tensor2D& t) {
    std::string out;
    out.reserve(16 + t.size() * 4);
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<uint32_t>(t.rows));
    put_u32(out, static_cast<uint32_t>(t.cols));
    for (double v : t.data)
        put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
    return out;
}

// Consumes one matrix block from `data` at `offset` (advanced past the block).
inline Tensor2D decode_matrix(const std::string& data, size_t& offset, const std::string& name) {
    if (data.size() < offset + 16)
        throw error(name + ": truncated header");
    if (std::memcmp(data.data() + offset, kMagic, 4) != 0)
        throw error(name + ": bad magic bytes");
    const uint32_t version = get_u32(data.data() + offset + 4);
    if (version != kVersion)
        throw error(name + ": unsupported format version " + std::to_string(version));
    const uint32_t rows = get_u32(data.data() + offset + 8);
    const uint32_t cols = get_u32(data.data() + offset + 12);
    const size_t payload = static_cast<size_t>(rows) * cols * 4;
    if (data.size() < offset + 16 + payload)
        throw error(name + ": payload shorter than declared " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " shape");
    Tensor2D t(static_cast<int>(rows), static_cast<int>(cols));
    const char* p = data.data() + offset + 16;
    for (size_t i = 0; i < t.size(); ++i)
        t.data[i] = static_cast<double>(std::bit_cast<float>(get_u32(p + i * 4)));
    offset += 16 + payload;
    if (!t.all_finite()) throw error(name + ": non-finite values");
    return t;
}

} // namespace binfmt

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot write " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw error("write failed for " + path.string());
}

inline void write_matrix_file(const std::filesystem::path& path, const Tensor2D& t) {
    write_file(path, binfmt::encode_matrix(t));
}

inline Tensor2D read_matrix_file(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    size_t offset = 0;
    Tensor2D t = binfmt::decode_matrix(data, offset, path.filename().string());
    if (offset != data.size())
        throw error(path.filename().string() + ": trailing bytes after matrix payload");
    return t;
}

// ---- dataset directory: metadata.json + features.bin + node_features.bin ----

namespace detail {

inline nlohmann::json pairs_to_json(const std::vector<CompositionLabel>& pairs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pairs) arr.push_back({p.state_idx, p.object_idx});
    return arr;
}

inline nlohmann::json samples_to_json(const std::vector<Sample>& samples) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : samples)
        arr.push_back({s.image_id, s.label.state_idx, s.label.object_idx});
    return arr;
}

inline std::vector<CompositionLabel> pairs_from_json(const nlohmann::json& arr,
                                                     const std::string& field) {
    if (!arr.is_array()) throw error("metadata.json: '" + field + "' must be an array");
    std::vector<CompositionLabel> out;
    out.reserve(arr.size());
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2)
            throw error("metadata.json: entries of '" + field + "' must be [state, object]");
        out.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    return out;
}

inline std::vector<Sample> samples_from_json(const nlohmann::json& arr,
                                             const std::string& field) {
    if (!arr.is_array()) throw error("metadata.json: '" + field + "' must be an array");
    std::vector<Sample> out;
    out.reserve(arr.size());
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 3)
            throw error("metadata.json: entries of '" + field +
                        "' must be [image_id, state, object]");
        out.push_back({e[0].get<int>(), {e[1].get<int>(), e[2].get<int>()}});
    }
    return out;
}

} // namespace detail

inline std::string encode_metadata(const Dataset& ds) {
    nlohmann::json j;
    j["states"] = ds.vocab.states;
    j["objects"] = ds.vocab.objects;
    j["seen_pairs"] = detail::pairs_to_json(ds.splits.seen_pairs);
    j["unseen_pairs"] = detail::pairs_to_json(ds.splits.unseen_pairs);
    j["train"] = detail::samples_to_json(ds.splits.train_samples);
    j["val"] = detail::samples_to_json(ds.splits.val_samples);
    j["test"] = detail::samples_to_json(ds.splits.test_samples);
    return j.dump(2) + "\n";
}

inline void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    std::filesystem::create_directories(dir);
    write_file(dir / "metadata.json", encode_metadata(ds));
    write_matrix_file(dir / "features.bin", ds.features.features);
    write_matrix_file(dir / "node_features.bin", ds.node_features);
}

// When node_features.bin is absent the loader can synthesize seeded Gaussian
// features with sigma = 1/sqrt(m) instead of failing.
struct NodeFeatureFallback {
    int m = 0;
    uint64_t seed = 0;
};

inline Dataset load_dataset(const std::filesystem::path& dir,
                            World world = World::ClosedWorld,
                            std::optional<NodeFeatureFallback> fallback = std::nullopt) {
    const auto meta_path = dir / "metadata.json";
    if (!std::filesystem::exists(meta_path)) throw error("missing file: " + meta_path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(meta_path));
    } catch (const nlohmann::json::exception& e) {
        throw error("metadata.json: parse error: " + std::string(e.what()));
    }
    for (const char* field : {"states", "objects", "seen_pairs", "unseen_pairs",
                              "train", "val", "test"})
        if (!j.contains(field)) throw error("metadata.json: missing field '" + std::string(field) + "'");

    Dataset ds;
    ds.vocab.states = j["states"].get<std::vector<std::string>>();
    ds.vocab.objects = j["objects"].get<std::vector<std::string>>();
    ds.splits.seen_pairs = detail::pairs_from_json(j["seen_pairs"], "seen_pairs");
    ds.splits.unseen_pairs = detail::pairs_from_json(j["unseen_pairs"], "unseen_pairs");
    ds.splits.train_samples = detail::samples_from_json(j["train"], "train");
    ds.splits.val_samples = detail::samples_from_json(j["val"], "val");
    ds.splits.test_samples = detail::samples_from_json(j["test"], "test");
    ds.splits.world = world;
    ds.splits.normalize();

    const auto feat_path = dir / "features.bin";
    if (!std::filesystem::exists(feat_path)) throw error("missing file: " + feat_path.string());
    ds.features.features = read_matrix_file(feat_path);

    const auto node_path = dir / "node_features.bin";
    if (std::filesystem::exists(node_path)) {
        ds.node_features = read_matrix_file(node_path);
    } else if (fallback && fallback->m > 0) {
        Rng rng(derive_seed(fallback->seed, "node_features"));
        ds.node_features = rng.normal_matrix(ds.vocab.n_nodes(), fallback->m,
                                             1.0 / std::sqrt(static_cast<double>(fallback->m)));
    } else {
        throw error("missing file: " + node_path.string());
    }

    if (ds.node_features.rows != ds.vocab.n_nodes())
        throw error("node_features.bin: has " + std::to_string(ds.node_features.rows) +
                    " rows, expected " + std::to_string(ds.vocab.n_nodes()) + " nodes");
    int max_id = -1;
    for (const auto* split : {&ds.splits.train_samples, &ds.splits.val_samples,
                              &ds.splits.test_samples})
        for (const auto& s : *split) max_id = std::max(max_id, s.image_id);
    if (max_id >= ds.features.num_images())
        throw error("features.bin: has " + std::to_string(ds.features.num_images()) +
                    " rows but metadata references image id " + std::to_string(max_id));
    ds.validate();
    return ds;
}

} // namespace vgce
