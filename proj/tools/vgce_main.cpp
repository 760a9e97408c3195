#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vgce/cli.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string checkpoint_path;
    std::string out_dir;
    int threads = 1;
    int node_feature_dim = 0;
    std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_checkpoint) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration")->required();
    if (needs_checkpoint)
        cmd->add_option("--checkpoint", opts.checkpoint_path, "model checkpoint file")
            ->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config output_dir)");
    cmd->add_option("--threads", opts.threads, "worker thread cap")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opts.seed, "seed override");
    cmd->add_option("--node-feature-dim", opts.node_feature_dim,
                    "generate seeded Gaussian node features of this width when "
                    "node_features.bin is absent");
}

vgce::RunConfig resolve_config(const CommonOpts& opts) {
    vgce::RunConfig cfg = vgce::load_run_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    if (opts.seed) cfg.train.seed = *opts.seed;
    return cfg;
}

// "S,O[,CW_pairs[,name]]"
vgce::BenchShape parse_shape(const std::string& text) {
    vgce::BenchShape shape;
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    if (parts.size() < 2) throw vgce::error("shape must be 'states,objects[,cw_pairs[,name]]'");
    shape.n_states = std::stoi(parts[0]);
    shape.n_objects = std::stoi(parts[1]);
    shape.cw_pairs = parts.size() > 2 ? std::stol(parts[2])
                                      : static_cast<long>(shape.n_states) * shape.n_objects;
    shape.name = parts.size() > 3 ? parts[3]
                                  : parts[0] + "x" + parts[1];
    return shape;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"compositional zero-shot learning with variational graph embeddings"};
    app.require_subcommand(1);

    // gen-synthetic
    vgce::SyntheticSpec spec;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic dataset directory");
    gen->add_option("--states", spec.n_states, "number of states");
    gen->add_option("--objects", spec.n_objects, "number of objects");
    gen->add_option("--seen-fraction", spec.seen_fraction, "fraction of pairs marked seen");
    gen->add_option("--unseen-fraction", spec.unseen_fraction, "fraction marked unseen");
    gen->add_option("--d", spec.d, "image feature dimension");
    gen->add_option("--m", spec.m, "node feature dimension");
    gen->add_option("--samples-per-pair", spec.samples_per_pair, "train images per seen pair");
    gen->add_option("--noise", spec.noise_sigma, "feature noise sigma");
    gen->add_option("--seed", spec.seed, "generator seed");
    gen->add_option("--out", gen_out, "output dataset directory")->required();

    CommonOpts train_opts, eval_opts, feas_opts, retr_opts;
    auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
    add_common(train_cmd, train_opts, false);
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint with the GCZSL protocol");
    add_common(eval_cmd, eval_opts, true);
    auto* feas_cmd = app.add_subcommand("feasibility", "export decoded pair feasibilities");
    add_common(feas_cmd, feas_opts, true);
    auto* retr_cmd = app.add_subcommand("retrieve", "multimodal image retrieval R@k");
    add_common(retr_cmd, retr_opts, true);

    // bench-graph
    std::vector<std::string> shape_args;
    std::string bench_out;
    vgce::BenchConfig bench_cfg;
    bool no_measure = false;
    auto* bench_cmd = app.add_subcommand("bench-graph", "node-count and encoder-epoch comparison");
    bench_cmd->add_option("--shape", shape_args,
                          "dataset shape 'states,objects[,cw_pairs[,name]]' (repeatable; "
                          "defaults to the three benchmark shapes)");
    bench_cmd->add_option("--out", bench_out, "output directory")->required();
    bench_cmd->add_option("--m", bench_cfg.m, "node feature dim for the measured epoch");
    bench_cmd->add_option("--hidden", bench_cfg.hidden, "encoder hidden width");
    bench_cmd->add_option("--layers", bench_cfg.layers, "encoder depth");
    bench_cmd->add_option("--seed", bench_cfg.seed, "graph seed");
    bench_cmd->add_flag("--no-measure", no_measure, "skip wall-time measurement");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return vgce::cmd_gen_synthetic(spec, gen_out);
        if (train_cmd->parsed())
            return vgce::cmd_train(resolve_config(train_opts), train_opts.threads,
                                   train_opts.node_feature_dim);
        if (eval_cmd->parsed())
            return vgce::cmd_eval(resolve_config(eval_opts), eval_opts.checkpoint_path,
                                  eval_opts.threads, eval_opts.node_feature_dim);
        if (feas_cmd->parsed())
            return vgce::cmd_feasibility(resolve_config(feas_opts), feas_opts.checkpoint_path,
                                         feas_opts.threads, feas_opts.node_feature_dim);
        if (retr_cmd->parsed())
            return vgce::cmd_retrieve(resolve_config(retr_opts), retr_opts.checkpoint_path,
                                      retr_opts.threads, retr_opts.node_feature_dim);
        if (bench_cmd->parsed()) {
            bench_cfg.measure = !no_measure;
            std::vector<vgce::BenchShape> shapes;
            for (const auto& s : shape_args) shapes.push_back(parse_shape(s));
            if (shapes.empty()) shapes = vgce::table1_shapes();
            return vgce::cmd_bench_graph(shapes, bench_cfg, bench_out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
