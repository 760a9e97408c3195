#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vgce/bench.hpp"
#include "vgce/checkpoint.hpp"
#include "vgce/composer.hpp"
#include "vgce/config.hpp"
#include "vgce/dataset_io.hpp"
#include "vgce/evaluation.hpp"
#include "vgce/synthetic.hpp"

namespace vgce {

constexpr const char* kVersionString = "vgce 0.1.0";

// VGCE_LOG={error|info|debug}
inline int log_level() {
    static const int level = [] {
        const char* env = std::getenv("VGCE_LOG");
        if (!env) return 1;
        const std::string v = env;
        if (v == "error") return 0;
        if (v == "debug") return 2;
        return 1;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[vgce] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "[vgce:debug] %s\n", msg.c_str());
}

namespace detail {

class RunManifest {
public:
    RunManifest(std::string command, const RunConfig& cfg)
        : command_(std::move(command)), config_(run_config_to_json(cfg)),
          seed_(cfg.train.seed), start_(std::chrono::steady_clock::now()) {}

    RunManifest(std::string command, nlohmann::json config_echo, uint64_t seed)
        : command_(std::move(command)), config_(std::move(config_echo)), seed_(seed),
          start_(std::chrono::steady_clock::now()) {}

    void write(const std::filesystem::path& out_dir) const {
        nlohmann::json j;
        j["command"] = command_;
        j["config"] = config_;
        j["seed"] = seed_;
        j["version"] = kVersionString;
        j["wall_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start_)
                           .count();
        write_file(out_dir / ("manifest_" + command_ + ".json"), j.dump(2) + "\n");
    }

private:
    std::string command_;
    nlohmann::json config_;
    uint64_t seed_;
    std::chrono::steady_clock::time_point start_;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["world"] = world_name(r.world);
    j["tau_used"] = r.tau_used;
    j["auc"] = r.auc;
    j["best_hm"] = r.best_hm;
    j["best_seen"] = r.best_seen;
    j["best_unseen"] = r.best_unseen;
    j["state_acc"] = r.state_acc;
    j["object_acc"] = r.object_acc;
    j["hm_bias"] = r.hm_bias.str();
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : r.curve)
        curve.push_back({{"bias", p.bias.str()}, {"seen_acc", p.seen_acc},
                         {"unseen_acc", p.unseen_acc}});
    j["curve"] = curve;
    return j;
}

inline std::string eval_curve_csv(const EvalReport& r) {
    std::string out = "bias,seen_acc,unseen_acc\n";
    for (const auto& p : r.curve)
        out += p.bias.str() + "," + detail::format_double(p.seen_acc) + "," +
               detail::format_double(p.unseen_acc) + "\n";
    return out;
}

// ---- subcommands; each returns the process exit code ----

inline int cmd_gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
    const Dataset ds = generate_synthetic(spec);
    save_dataset(out_dir, ds);
    nlohmann::json echo = {{"n_states", spec.n_states},
                           {"n_objects", spec.n_objects},
                           {"seen_fraction", spec.seen_fraction},
                           {"unseen_fraction", spec.unseen_fraction},
                           {"d", spec.d},
                           {"m", spec.m},
                           {"samples_per_pair", spec.samples_per_pair},
                           {"noise_sigma", spec.noise_sigma},
                           {"seed", spec.seed}};
    detail::RunManifest manifest("gen-synthetic", echo, spec.seed);
    manifest.write(out_dir);
    log_info("wrote synthetic dataset to " + out_dir + " (" +
             std::to_string(ds.features.num_images()) + " images, " +
             std::to_string(ds.splits.seen_pairs.size()) + " seen pairs, " +
             std::to_string(ds.splits.unseen_pairs.size()) + " unseen pairs)");
    return 0;
}

// node_feature_dim > 0 permits datasets without node_features.bin: seeded
// Gaussian features of that width are generated instead (same seed as the
// run, so train and eval see identical features).
inline std::optional<NodeFeatureFallback> feature_fallback(const RunConfig& cfg,
                                                           int node_feature_dim) {
    if (node_feature_dim <= 0) return std::nullopt;
    return NodeFeatureFallback{node_feature_dim, cfg.train.seed};
}

inline int cmd_train(const RunConfig& cfg, int /*threads*/ = 1, int node_feature_dim = 0) {
    if (cfg.dataset_dir.empty()) throw error("train: config needs dataset_dir");
    if (cfg.output_dir.empty()) throw error("train: config needs output_dir");
    detail::RunManifest manifest("train", cfg);
    std::filesystem::create_directories(cfg.output_dir);
    Dataset ds = load_dataset(cfg.dataset_dir, cfg.world, feature_fallback(cfg, node_feature_dim));
    const TrainConfig tc = cfg.train_config();
    log_info("training " + std::to_string(tc.epochs) + " epochs on " +
             std::to_string(ds.splits.train_samples.size()) + " samples (world=" +
             world_name(cfg.world) + ")");
    TrainResult result = train(ds, tc);

    const std::filesystem::path out(cfg.output_dir);
    save_checkpoint(out / "checkpoint.vgcm", result.params, tc);
    std::string log_lines;
    for (const auto& e : result.log) {
        nlohmann::json rec = {{"epoch", e.epoch},         {"loss_total", e.loss_total},
                              {"loss_elbo", e.loss_elbo}, {"loss_kl", e.loss_kl},
                              {"loss_edge", e.loss_edge}, {"loss_ei", e.loss_ei},
                              {"loss_ie", e.loss_ie},     {"wall_ms", e.wall_ms}};
        log_lines += rec.dump() + "\n";
    }
    write_file(out / "train_log.jsonl", log_lines);
    manifest.write(out);
    if (!result.log.empty())
        log_info("final loss_total=" + detail::format_double(result.log.back().loss_total));
    return 0;
}

// Loads the dataset + checkpoint pair shared by eval, feasibility, retrieve.
inline std::pair<Dataset, Checkpoint> load_eval_inputs(const RunConfig& cfg,
                                                       const std::string& checkpoint_path,
                                                       int node_feature_dim = 0) {
    if (cfg.dataset_dir.empty()) throw error("config needs dataset_dir");
    if (checkpoint_path.empty()) throw error("missing --checkpoint");
    Dataset ds = load_dataset(cfg.dataset_dir, cfg.world, feature_fallback(cfg, node_feature_dim));
    Checkpoint ck = load_checkpoint(checkpoint_path);
    if (ck.params.dims.m != ds.node_features.cols)
        throw error("checkpoint/dataset mismatch: node feature dim " +
                    std::to_string(ck.params.dims.m) + " vs " +
                    std::to_string(ds.node_features.cols));
    if (ck.params.dims.d != ds.features.dim())
        throw error("checkpoint/dataset mismatch: image feature dim " +
                    std::to_string(ck.params.dims.d) + " vs " +
                    std::to_string(ds.features.dim()));
    return {std::move(ds), std::move(ck)};
}

struct EvalOutputs {
    EvalReport report;
    double tau_used = -1.0;
};

// Shared eval pipeline: scores on the requested split, feasibility masking in
// the open world (tau from config or calibrated on validation).
inline EvalOutputs run_eval_pipeline(const Dataset& ds, const ModelParams& params,
                                     const RunConfig& cfg, int threads) {
    const ConceptGraph graph = ds.graph();
    const GaussianNodePosteriors post = encode(graph, params);
    ScoreMatrix test_scores =
        compute_scores(ds, params, post.mu, ds.splits.test_samples, cfg.world, threads);
    std::vector<CompositionLabel> test_labels;
    for (const auto& s : ds.splits.test_samples) test_labels.push_back(s.label);

    EvalOutputs out;
    if (cfg.world == World::OpenWorld) {
        const Tensor2D edge_probs = feasibility_scores(post.mu, ds.vocab.n_states());
        double tau = cfg.eval.tau;
        if (cfg.eval.calibrate) {
            const ScoreMatrix val_scores =
                compute_scores(ds, params, post.mu, ds.splits.val_samples, cfg.world, threads);
            std::vector<CompositionLabel> val_labels;
            for (const auto& s : ds.splits.val_samples) val_labels.push_back(s.label);
            tau = calibrate_tau(val_scores, val_labels, edge_probs, cfg.eval.tau_grid,
                                ds.splits.seen_pairs, cfg.eval.n_bias_points);
            log_info("calibrated tau = " + detail::format_double(tau));
        }
        test_scores = apply_feasibility(
            test_scores, make_feasibility_mask(edge_probs, tau, ds.splits.seen_pairs));
        out.tau_used = tau;
    }
    out.report = evaluate_gczsl(test_scores, test_labels, cfg.eval.n_bias_points);
    out.report.world = cfg.world;
    out.report.tau_used = out.tau_used;
    return out;
}

inline int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path, int threads = 1,
                    int node_feature_dim = 0) {
    if (cfg.output_dir.empty()) throw error("eval: config needs output_dir");
    detail::RunManifest manifest("eval", cfg);
    std::filesystem::create_directories(cfg.output_dir);
    auto [ds, ck] = load_eval_inputs(cfg, checkpoint_path, node_feature_dim);
    const EvalOutputs out = run_eval_pipeline(ds, ck.params, cfg, threads);
    const std::filesystem::path dir(cfg.output_dir);
    write_file(dir / "eval_report.json", eval_report_to_json(out.report).dump(2) + "\n");
    write_file(dir / "eval_curve.csv", eval_curve_csv(out.report));
    manifest.write(dir);
    log_info("auc=" + detail::format_double(out.report.auc) +
             " best_hm=" + detail::format_double(out.report.best_hm) +
             " best_seen=" + detail::format_double(out.report.best_seen) +
             " best_unseen=" + detail::format_double(out.report.best_unseen));
    return 0;
}

inline int cmd_feasibility(const RunConfig& cfg, const std::string& checkpoint_path,
                           int threads = 1, int node_feature_dim = 0) {
    if (cfg.output_dir.empty()) throw error("feasibility: config needs output_dir");
    detail::RunManifest manifest("feasibility", cfg);
    std::filesystem::create_directories(cfg.output_dir);
    auto [ds, ck] = load_eval_inputs(cfg, checkpoint_path, node_feature_dim);
    (void)threads;
    const ConceptGraph graph = ds.graph();
    const GaussianNodePosteriors post = encode(graph, ck.params);
    const Tensor2D probs = feasibility_scores(post.mu, ds.vocab.n_states());
    const FeasibilityMask mask =
        make_feasibility_mask(probs, cfg.eval.tau, ds.splits.seen_pairs);

    std::string csv = "state,object,probability,xi\n";
    for (int s = 0; s < ds.vocab.n_states(); ++s)
        for (int o = 0; o < ds.vocab.n_objects(); ++o)
            csv += ds.vocab.states[s] + "," + ds.vocab.objects[o] + "," +
                   detail::format_double(probs.at(s, o)) + "," +
                   (mask.xi.at(s, o) != 0.0 ? "1" : "0") + "\n";
    const std::filesystem::path dir(cfg.output_dir);
    write_file(dir / "feasibility.csv", csv);
    manifest.write(dir);
    log_info("wrote feasibility table at tau=" + detail::format_double(cfg.eval.tau));
    return 0;
}

inline int cmd_retrieve(const RunConfig& cfg, const std::string& checkpoint_path,
                        int threads = 1, int node_feature_dim = 0) {
    if (cfg.output_dir.empty()) throw error("retrieve: config needs output_dir");
    detail::RunManifest manifest("retrieve", cfg);
    std::filesystem::create_directories(cfg.output_dir);
    auto [ds, ck] = load_eval_inputs(cfg, checkpoint_path, node_feature_dim);
    const ConceptGraph graph = ds.graph();
    const GaussianNodePosteriors post = encode(graph, ck.params);
    const EvalOutputs eval_out = run_eval_pipeline(ds, ck.params, cfg, threads);

    const std::vector<Sample>& database = ds.splits.test_samples;
    const std::vector<RetrievalQuery> queries =
        default_retrieval_queries(database, ds.vocab.n_states(), cfg.train.seed);
    const RetrievalReport report =
        evaluate_retrieval(queries, ds, ck.params, post.mu, database, cfg.world,
                           eval_out.report.hm_bias, cfg.eval.k_list, threads);

    std::string csv = "k,recall\n";
    for (const auto& [k, r] : report.recall_at)
        csv += std::to_string(k) + "," + detail::format_double(r) + "\n";
    const std::filesystem::path dir(cfg.output_dir);
    write_file(dir / "retrieval.csv", csv);
    manifest.write(dir);
    log_info("retrieval over " + std::to_string(report.num_queries) + " queries, database of " +
             std::to_string(report.num_database));
    return 0;
}

inline int cmd_bench_graph(const std::vector<BenchShape>& shapes, const BenchConfig& bench_cfg,
                           const std::string& out_dir) {
    if (out_dir.empty()) throw error("bench-graph: needs --out");
    std::filesystem::create_directories(out_dir);
    nlohmann::json echo = {{"m", bench_cfg.m},
                           {"hidden", bench_cfg.hidden},
                           {"h", bench_cfg.h},
                           {"layers", bench_cfg.layers},
                           {"measure", bench_cfg.measure},
                           {"seed", bench_cfg.seed}};
    detail::RunManifest manifest("bench-graph", echo, bench_cfg.seed);
    const std::vector<BenchRow> rows = bench_graph(shapes, bench_cfg);
    write_file(std::filesystem::path(out_dir) / "bench.csv", bench_csv(rows));
    manifest.write(out_dir);
    for (const auto& r : rows)
        log_info(r.name + ": N=" + std::to_string(r.n_nodes) +
                 " N_CGE(OW)=" + std::to_string(r.n_cge_ow));
    return 0;
}

} // namespace vgce
