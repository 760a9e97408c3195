#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "vgce/tensor.hpp"

namespace vgce {

enum class World { ClosedWorld, OpenWorld };

inline std::string world_name(World w) {
    return w == World::ClosedWorld ? "closed" : "open";
}

// A (state, object) composition. Node numbering is states first, then
// objects: the global node index of object j is |S| + j.
struct CompositionLabel {
    int state_idx = 0;
    int object_idx = 0;

    friend bool operator==(const CompositionLabel&, const CompositionLabel&) = default;
    friend auto operator<=>(const CompositionLabel&, const CompositionLabel&) = default;
};

struct ConceptVocabulary {
    std::vector<std::string> states;
    std::vector<std::string> objects;

    int n_states() const { return static_cast<int>(states.size()); }
    int n_objects() const { return static_cast<int>(objects.size()); }
    int n_nodes() const { return n_states() + n_objects(); }
    int object_node(int object_idx) const { return n_states() + object_idx; }

    void validate() const {
        if (states.empty() || objects.empty())
            throw error("vocabulary: need at least one state and one object");
        auto check_unique = [](const std::vector<std::string>& names, const char* kind) {
            std::set<std::string> seen;
            for (const auto& n : names) {
                if (n.empty()) throw error(std::string("vocabulary: empty ") + kind + " name");
                if (!seen.insert(n).second)
                    throw error(std::string("vocabulary: duplicate ") + kind + " name '" + n + "'");
            }
        };
        check_unique(states, "state");
        check_unique(objects, "object");
    }

    void check_label(const CompositionLabel& y) const {
        if (y.state_idx < 0 || y.state_idx >= n_states() ||
            y.object_idx < 0 || y.object_idx >= n_objects())
            throw error("label (" + std::to_string(y.state_idx) + ", " +
                        std::to_string(y.object_idx) + ") outside vocabulary");
    }
};

struct Sample {
    int image_id = 0;
    CompositionLabel label;
};

// Seen/unseen pair sets and the train/val/test image lists. Pair sets are
// kept sorted; the canonical column order everywhere downstream is
// ascending (state_idx, object_idx).
struct DatasetSplits {
    std::vector<CompositionLabel> seen_pairs;
    std::vector<CompositionLabel> unseen_pairs;
    std::vector<Sample> train_samples;
    std::vector<Sample> val_samples;
    std::vector<Sample> test_samples;
    World world = World::ClosedWorld;

    static bool contains(const std::vector<CompositionLabel>& sorted, const CompositionLabel& y) {
        return std::binary_search(sorted.begin(), sorted.end(), y);
    }

    bool is_seen(const CompositionLabel& y) const { return contains(seen_pairs, y); }
    bool is_unseen(const CompositionLabel& y) const { return contains(unseen_pairs, y); }

    void normalize() {
        auto sort_dedup = [](std::vector<CompositionLabel>& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        sort_dedup(seen_pairs);
        sort_dedup(unseen_pairs);
    }

    void validate(const ConceptVocabulary& vocab) const {
        for (const auto& y : seen_pairs) vocab.check_label(y);
        for (const auto& y : unseen_pairs) vocab.check_label(y);
        for (const auto& y : unseen_pairs)
            if (is_seen(y))
                throw error("split violation: pair (" + std::to_string(y.state_idx) + ", " +
                            std::to_string(y.object_idx) + ") is both seen and unseen");
        for (const auto& s : train_samples) {
            vocab.check_label(s.label);
            if (!is_seen(s.label))
                throw error("split violation: train sample " + std::to_string(s.image_id) +
                            " has a label outside the seen pairs");
        }
        auto check_eval = [&](const std::vector<Sample>& samples, const char* which) {
            for (const auto& s : samples) {
                vocab.check_label(s.label);
                if (!is_seen(s.label) && !is_unseen(s.label))
                    throw error(std::string("split violation: ") + which + " sample " +
                                std::to_string(s.image_id) +
                                " has a label outside seen and unseen pairs");
            }
        };
        check_eval(val_samples, "val");
        check_eval(test_samples, "test");
    }

    // The model output space Y_xi for a given world.
    std::vector<CompositionLabel> output_space(const ConceptVocabulary& vocab, World w) const {
        std::vector<CompositionLabel> pairs;
        if (w == World::OpenWorld) {
            pairs.reserve(static_cast<size_t>(vocab.n_states()) * vocab.n_objects());
            for (int s = 0; s < vocab.n_states(); ++s)
                for (int o = 0; o < vocab.n_objects(); ++o) pairs.push_back({s, o});
        } else {
            pairs.reserve(seen_pairs.size() + unseen_pairs.size());
            pairs.insert(pairs.end(), seen_pairs.begin(), seen_pairs.end());
            pairs.insert(pairs.end(), unseen_pairs.begin(), unseen_pairs.end());
            std::sort(pairs.begin(), pairs.end());
            pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        }
        return pairs;
    }
};

// Bipartite concept graph: nodes are states then objects, one undirected
// edge per seen training pair. Adjacency is stored as per-node neighbor
// lists (the graph is sparse).
struct ConceptGraph {
    int n_states = 0;
    int n_objects = 0;
    std::vector<std::vector<int>> neighbors;      // global node index -> sorted neighbor nodes
    std::vector<CompositionLabel> edges;          // one entry per undirected edge, sorted
    Tensor2D node_features;                       // N x m

    int n_nodes() const { return n_states + n_objects; }
    size_t n_edges() const { return edges.size(); }
    int feature_dim() const { return node_features.cols; }

    bool has_edge(const CompositionLabel& y) const {
        return std::binary_search(edges.begin(), edges.end(), y);
    }

    // Dense 0/1 labels for the |S| x |O| decoder block.
    Tensor2D bipartite_labels() const {
        Tensor2D a(n_states, n_objects);
        for (const auto& e : edges) a.at(e.state_idx, e.object_idx) = 1.0;
        return a;
    }

    // (#non-edges)/(#edges) over the bipartite block; 1 when edgeless.
    double bce_pos_weight() const {
        const double total = static_cast<double>(n_states) * n_objects;
        const double pos = static_cast<double>(edges.size());
        if (pos == 0.0) return 1.0;
        return (total - pos) / pos;
    }
};

inline ConceptGraph build_graph(const ConceptVocabulary& vocab, const DatasetSplits& splits,
                                Tensor2D node_features) {
    vocab.validate();
    if (node_features.rows != vocab.n_nodes())
        throw error("build_graph: node_features has " + std::to_string(node_features.rows) +
                    " rows, expected " + std::to_string(vocab.n_nodes()));
    if (!node_features.all_finite())
        throw error("build_graph: non-finite node features");
    ConceptGraph g;
    g.n_states = vocab.n_states();
    g.n_objects = vocab.n_objects();
    g.node_features = std::move(node_features);
    g.neighbors.assign(vocab.n_nodes(), {});
    g.edges = splits.seen_pairs;
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    for (const auto& e : g.edges) {
        vocab.check_label(e);
        g.neighbors[e.state_idx].push_back(vocab.object_node(e.object_idx));
        g.neighbors[vocab.object_node(e.object_idx)].push_back(e.state_idx);
    }
    for (auto& ns : g.neighbors) std::sort(ns.begin(), ns.end());
    return g;
}

// Image features keyed by row index (image ids are implicit row indices).
struct FeatureStore {
    Tensor2D features; // num_images x d

    int num_images() const { return features.rows; }
    int dim() const { return features.cols; }

    void check_image(int image_id, const std::string& context) const {
        if (image_id < 0 || image_id >= features.rows)
            throw error(context + ": image id " + std::to_string(image_id) +
                        " has no feature row (have " + std::to_string(features.rows) + ")");
    }

    Tensor2D rows_for(const std::vector<int>& image_ids) const {
        Tensor2D out(static_cast<int>(image_ids.size()), features.cols);
        for (size_t i = 0; i < image_ids.size(); ++i) {
            check_image(image_ids[i], "feature lookup");
            for (int j = 0; j < features.cols; ++j)
                out.at(static_cast<int>(i), j) = features.at(image_ids[i], j);
        }
        return out;
    }
};

// Everything a training or evaluation run needs, loaded once and immutable.
struct Dataset {
    ConceptVocabulary vocab;
    DatasetSplits splits;
    FeatureStore features;
    Tensor2D node_features; // N x m

    void validate() const {
        vocab.validate();
        splits.validate(vocab);
        if (node_features.rows != vocab.n_nodes())
            throw error("dataset: node_features row count " + std::to_string(node_features.rows) +
                        " != node count " + std::to_string(vocab.n_nodes()));
        auto check_ids = [&](const std::vector<Sample>& ss, const char* which) {
            for (const auto& s : ss) features.check_image(s.image_id, which);
        };
        check_ids(splits.train_samples, "train split");
        check_ids(splits.val_samples, "val split");
        check_ids(splits.test_samples, "test split");
    }

    ConceptGraph graph() const { return build_graph(vocab, splits, node_features); }
};

} // namespace vgce
