#pragma once

#include <chrono>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "vgce/data_model.hpp"
#include "vgce/model.hpp"
#include "vgce/rng.hpp"
#include "vgce/tape.hpp"
#include "vgce/vgae.hpp"

namespace vgce {

// Node-count arithmetic and a measured encoder epoch for a dataset shape:
// the primitive-only graph has N = |S| + |O| nodes; a CGE-style graph adds
// every output-space pair as a node (N + |Y_xi|).
struct BenchShape {
    std::string name;
    int n_states = 0;
    int n_objects = 0;
    long cw_pairs = 0; // |Y_xi| in the closed world
};

inline std::vector<BenchShape> table1_shapes() {
    return {{"mit-states", 115, 245, 1962},
            {"ut-zappos", 16, 12, 116},
            {"c-gqa", 453, 870, 9378}};
}

struct BenchRow {
    std::string name;
    int n_states = 0;
    int n_objects = 0;
    long n_nodes = 0;     // N = |S| + |O|
    long cw_pairs = 0;
    long ow_pairs = 0;    // |S| * |O|
    long n_cge_cw = 0;    // N + CW pairs
    long n_cge_ow = 0;    // N + OW pairs
    double cost_ratio_ow = 0.0; // predicted per-epoch ratio under O(L N m^2)
    double ms_primitive = -1.0; // measured encoder epoch, N nodes
    double ms_cge_ow = -1.0;    // measured encoder epoch, N_CGE(OW) nodes
};

struct BenchConfig {
    int m = 16;
    int hidden = 16;
    int h = 8;
    int layers = 2;
    double edges_per_node = 3.0;
    uint64_t seed = 0;
    bool measure = true;
};

namespace detail {

// Random sparse bipartite graph with Gaussian node features.
inline ConceptGraph random_bipartite_graph(long n_nodes, double edges_per_node, int m,
                                           uint64_t seed) {
    ConceptGraph g;
    g.n_states = static_cast<int>(n_nodes / 2);
    g.n_objects = static_cast<int>(n_nodes - g.n_states);
    g.neighbors.assign(static_cast<size_t>(n_nodes), {});
    Rng rng(derive_seed(seed, "bench_graph"));
    const long want = std::min<long>(static_cast<long>(edges_per_node * n_nodes),
                                     static_cast<long>(g.n_states) * g.n_objects);
    std::set<std::pair<int, int>> used;
    while (static_cast<long>(used.size()) < want) {
        const int s = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(g.n_states)));
        const int o = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(g.n_objects)));
        if (!used.insert({s, o}).second) continue;
        g.edges.push_back({s, o});
        g.neighbors[s].push_back(g.n_states + o);
        g.neighbors[static_cast<size_t>(g.n_states) + o].push_back(s);
    }
    std::sort(g.edges.begin(), g.edges.end());
    for (auto& ns : g.neighbors) std::sort(ns.begin(), ns.end());
    g.node_features = rng.normal_matrix(static_cast<int>(n_nodes), m);
    return g;
}

// One full-graph encoder pass (forward + KL + backward). The edge decoder is
// excluded: its O(|S| * |O|) dense block would swamp the encoder cost that
// the node-count comparison is about.
inline double time_encoder_epoch_ms(const ConceptGraph& graph, const BenchConfig& cfg) {
    ModelDims dims;
    dims.m = cfg.m;
    dims.hidden = cfg.hidden;
    dims.h = cfg.h;
    dims.d = 1;
    dims.k = 1;
    dims.layers = cfg.layers;
    const ModelParams params = init_params(dims, cfg.seed);

    const auto start = std::chrono::steady_clock::now();
    Tape tape;
    VgaeVars vars;
    register_encoder(tape, params.enc, vars);
    encode_on_tape(tape, graph, vars);
    Var loss = kl_on_tape(tape, vars.mu, vars.logvar);
    tape.backward(loss);
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count();
}

} // namespace detail

inline BenchRow bench_shape(const BenchShape& shape, const BenchConfig& cfg) {
    BenchRow row;
    row.name = shape.name;
    row.n_states = shape.n_states;
    row.n_objects = shape.n_objects;
    row.n_nodes = static_cast<long>(shape.n_states) + shape.n_objects;
    row.cw_pairs = shape.cw_pairs;
    row.ow_pairs = static_cast<long>(shape.n_states) * shape.n_objects;
    row.n_cge_cw = row.n_nodes + row.cw_pairs;
    row.n_cge_ow = row.n_nodes + row.ow_pairs;
    row.cost_ratio_ow = static_cast<double>(row.n_cge_ow) / static_cast<double>(row.n_nodes);
    if (cfg.measure) {
        const ConceptGraph small =
            detail::random_bipartite_graph(row.n_nodes, cfg.edges_per_node, cfg.m, cfg.seed);
        row.ms_primitive = detail::time_encoder_epoch_ms(small, cfg);
        const ConceptGraph big =
            detail::random_bipartite_graph(row.n_cge_ow, cfg.edges_per_node, cfg.m, cfg.seed + 1);
        row.ms_cge_ow = detail::time_encoder_epoch_ms(big, cfg);
    }
    return row;
}

inline std::vector<BenchRow> bench_graph(const std::vector<BenchShape>& shapes,
                                         const BenchConfig& cfg) {
    if (shapes.empty()) throw error("bench_graph: shape list is empty");
    std::vector<BenchRow> rows;
    rows.reserve(shapes.size());
    for (const auto& s : shapes) rows.push_back(bench_shape(s, cfg));
    return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out =
        "name,n_states,n_objects,n_nodes,cw_pairs,ow_pairs,n_cge_cw,n_cge_ow,"
        "cost_ratio_ow,ms_primitive,ms_cge_ow\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%ld,%ld,%ld,%ld,%ld,%.6g,%.6g,%.6g\n",
                      r.name.c_str(), r.n_states, r.n_objects, r.n_nodes, r.cw_pairs,
                      r.ow_pairs, r.n_cge_cw, r.n_cge_ow, r.cost_ratio_ow, r.ms_primitive,
                      r.ms_cge_ow);
        out += buf;
    }
    return out;
}

} // namespace vgce
