#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vgce/adam.hpp"
#include "vgce/data_model.hpp"
#include "vgce/model.hpp"
#include "vgce/rng.hpp"
#include "vgce/tape.hpp"
#include "vgce/vgae.hpp"

namespace vgce {

struct TrainConfig {
    double lambda_ei = 10.0;
    double lambda_ie = 0.01;
    double lr = 5e-5;
    int batch_size = 128;
    int epochs = 100;
    int k = 16;
    int h = 16;
    int hidden = 64;
    int layers = 2;
    double kl_weight = 1.0;
    double temperature = 1.0;
    uint64_t seed = 0;
    // The pair-to-image loss normalizes over the whole output space; above
    // pair_cap the pair table is subsampled to neg_samples uniformly drawn
    // pairs plus the batch's ground-truth pairs.
    int pair_cap = 50000;
    int neg_samples = 8192;

    void validate() const {
        if (lr <= 0.0 || batch_size < 1 || epochs < 0 || k < 1 || h < 1 || hidden < 1 ||
            layers < 1 || temperature <= 0.0 || pair_cap < 1 || neg_samples < 1)
            throw error("train config: invalid value");
    }
};

// pair embedding e = concat(z_state, z_object), one row per requested pair
inline Tensor2D pair_embeddings(const Tensor2D& z, int n_states,
                                const std::vector<CompositionLabel>& pairs) {
    const int n_objects = z.rows - n_states;
    Tensor2D out(static_cast<int>(pairs.size()), 2 * z.cols);
    for (size_t p = 0; p < pairs.size(); ++p) {
        const auto& y = pairs[p];
        if (y.state_idx < 0 || y.state_idx >= n_states || y.object_idx < 0 ||
            y.object_idx >= n_objects)
            throw error("pair_embeddings: index out of range");
        for (int j = 0; j < z.cols; ++j) {
            out.at(static_cast<int>(p), j) = z.at(y.state_idx, j);
            out.at(static_cast<int>(p), z.cols + j) = z.at(n_states + y.object_idx, j);
        }
    }
    return out;
}

inline Var pair_embeddings_on_tape(Tape& tape, Var z, int n_states,
                                   const std::vector<CompositionLabel>& pairs) {
    std::vector<int> state_rows, object_rows;
    state_rows.reserve(pairs.size());
    object_rows.reserve(pairs.size());
    for (const auto& y : pairs) {
        state_rows.push_back(y.state_idx);
        object_rows.push_back(n_states + y.object_idx);
    }
    return tape.concat_cols(tape.gather_rows(z, std::move(state_rows)),
                            tape.gather_rows(z, std::move(object_rows)));
}

// similarity kernel kappa: plain dot product
inline double similarity(const Tensor2D& a, const Tensor2D& b) {
    if (a.size() != b.size()) throw error("similarity: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

struct ProjectionVars {
    Var e_w1, e_b1, e_w2, e_b2;
    Var i_w1, i_b1, i_w2, i_b2;
};

inline void register_projections(Tape& tape, const ProjectionParams& p, ProjectionVars& vars) {
    vars.e_w1 = tape.leaf(p.e_w1, true);
    vars.e_b1 = tape.leaf(p.e_b1, true);
    vars.e_w2 = tape.leaf(p.e_w2, true);
    vars.e_b2 = tape.leaf(p.e_b2, true);
    vars.i_w1 = tape.leaf(p.i_w1, true);
    vars.i_b1 = tape.leaf(p.i_b1, true);
    vars.i_w2 = tape.leaf(p.i_w2, true);
    vars.i_b2 = tape.leaf(p.i_b2, true);
}

inline Var mlp_on_tape(Tape& tape, Var x, Var w1, Var b1, Var w2, Var b2) {
    Var hidden = tape.relu(tape.add_rowvec(tape.matmul(x, w1), b1));
    return tape.add_rowvec(tape.matmul(hidden, w2), b2);
}

// Value-side projection, used by evaluation.
inline Tensor2D project(const Tensor2D& x, const Tensor2D& w1, const Tensor2D& b1,
                        const Tensor2D& w2, const Tensor2D& b2) {
    Tensor2D h = matmul_value(x, w1);
    for (int i = 0; i < h.rows; ++i)
        for (int j = 0; j < h.cols; ++j) {
            h.at(i, j) += b1.at(0, j);
            if (h.at(i, j) < 0.0) h.at(i, j) = 0.0;
        }
    Tensor2D out = matmul_value(h, w2);
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out.at(i, j) += b2.at(0, j);
    return out;
}

inline Tensor2D project_pairs(const Tensor2D& pair_emb, const ProjectionParams& p) {
    return project(pair_emb, p.e_w1, p.e_b1, p.e_w2, p.e_b2);
}

inline Tensor2D project_images(const Tensor2D& images, const ProjectionParams& p) {
    return project(images, p.i_w1, p.i_b1, p.i_w2, p.i_b2);
}

// Pair-to-image direction: for each image, softmax over its similarities to
// every pair in the table; positive class is the ground-truth pair.
inline Var loss_e_to_i_on_tape(Tape& tape, Var projected_pairs, Var projected_images,
                               std::vector<int> targets, double temperature = 1.0) {
    Var logits = tape.matmul_nt(projected_images, projected_pairs);
    if (temperature != 1.0) logits = tape.scale(logits, 1.0 / temperature);
    return tape.softmax_xent_rows(logits, std::move(targets));
}

// Image-to-pair direction: for each sample, softmax of its pair embedding
// over the batch's images; positive class is the sample's own image.
inline Var loss_i_to_e_on_tape(Tape& tape, Var projected_batch_pairs, Var projected_images,
                               double temperature = 1.0) {
    Var logits = tape.matmul_nt(projected_batch_pairs, projected_images);
    if (temperature != 1.0) logits = tape.scale(logits, 1.0 / temperature);
    std::vector<int> diag(static_cast<size_t>(tape.val(logits).rows));
    for (size_t i = 0; i < diag.size(); ++i) diag[i] = static_cast<int>(i);
    return tape.softmax_xent_rows(logits, std::move(diag));
}

// Value-side contrastive losses (oracle-friendly signatures).
inline double loss_e_to_i(const Tensor2D& projected_pairs, const Tensor2D& projected_images,
                          const std::vector<int>& targets, double temperature = 1.0) {
    Tape tape;
    Var pp = tape.leaf(projected_pairs, true);
    Var pi = tape.constant(projected_images);
    return tape.val(loss_e_to_i_on_tape(tape, pp, pi, targets, temperature)).scalar_value();
}

inline double loss_i_to_e(const Tensor2D& projected_batch_pairs, const Tensor2D& projected_images,
                          double temperature = 1.0) {
    Tape tape;
    Var pp = tape.leaf(projected_batch_pairs, true);
    Var pi = tape.constant(projected_images);
    return tape.val(loss_i_to_e_on_tape(tape, pp, pi, temperature)).scalar_value();
}

// One forward pass of the full objective:
//   elbo + lambda_ei * loss_ei + lambda_ie * loss_ie
struct TotalLossVars {
    VgaeVars vgae;
    ProjectionVars proj;
    Var z;
    ElboVars elbo;
    Var loss_ei;
    Var loss_ie;
    Var total;
};

struct BatchInputs {
    Tensor2D images;                         // B x d
    std::vector<int> pair_targets;           // index into pair_table per sample
    std::vector<CompositionLabel> pair_table; // output-space candidates for loss_ei
    Tensor2D noise;                          // N x h reparameterization draw
};

inline TotalLossVars build_total_loss(Tape& tape, const ModelParams& params,
                                      const ConceptGraph& graph, const BatchInputs& batch,
                                      const TrainConfig& cfg, double pos_weight) {
    TotalLossVars out;
    register_encoder(tape, params.enc, out.vgae);
    register_projections(tape, params.proj, out.proj);
    encode_on_tape(tape, graph, out.vgae);
    out.z = reparameterize_on_tape(tape, out.vgae.mu, out.vgae.logvar, batch.noise);
    out.elbo = elbo_on_tape(tape, out.vgae.mu, out.vgae.logvar, out.z, graph, cfg.kl_weight,
                            pos_weight);

    Var pair_emb = pair_embeddings_on_tape(tape, out.z, graph.n_states, batch.pair_table);
    Var projected_pairs = mlp_on_tape(tape, pair_emb, out.proj.e_w1, out.proj.e_b1,
                                      out.proj.e_w2, out.proj.e_b2);
    Var projected_images = mlp_on_tape(tape, tape.constant(batch.images), out.proj.i_w1,
                                       out.proj.i_b1, out.proj.i_w2, out.proj.i_b2);
    out.loss_ei = loss_e_to_i_on_tape(tape, projected_pairs, projected_images,
                                      batch.pair_targets, cfg.temperature);
    Var batch_pairs = tape.gather_rows(projected_pairs, batch.pair_targets);
    out.loss_ie = loss_i_to_e_on_tape(tape, batch_pairs, projected_images, cfg.temperature);

    out.total = tape.add(out.elbo.elbo,
                         tape.add(tape.scale(out.loss_ei, cfg.lambda_ei),
                                  tape.scale(out.loss_ie, cfg.lambda_ie)));
    return out;
}

// ---- pair table construction with the sampling cap ----

struct PairTable {
    std::vector<CompositionLabel> pairs;
    std::map<CompositionLabel, int> index; // pair -> column
};

inline PairTable full_pair_table(const ConceptVocabulary& vocab, const DatasetSplits& splits,
                                 World world) {
    PairTable t;
    t.pairs = splits.output_space(vocab, world);
    for (size_t i = 0; i < t.pairs.size(); ++i)
        t.index[t.pairs[i]] = static_cast<int>(i);
    return t;
}

// Table for one training step: the batch's ground-truth pairs plus uniform
// negatives, or the full output space when it fits under the cap.
inline PairTable sampled_pair_table(const PairTable& full,
                                    const std::vector<CompositionLabel>& batch_labels,
                                    int pair_cap, int neg_samples, Rng& rng) {
    if (static_cast<int>(full.pairs.size()) <= pair_cap) return full;
    PairTable t;
    std::vector<CompositionLabel> uniq = batch_labels;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (const auto& y : uniq) {
        t.index[y] = static_cast<int>(t.pairs.size());
        t.pairs.push_back(y);
    }
    const size_t want = std::min<size_t>(full.pairs.size(),
                                         std::max<size_t>(uniq.size(), neg_samples));
    while (t.pairs.size() < want) {
        const auto& cand = full.pairs[rng.uniform_int(full.pairs.size())];
        if (t.index.count(cand)) continue;
        t.index[cand] = static_cast<int>(t.pairs.size());
        t.pairs.push_back(cand);
    }
    return t;
}

// ---- training loop ----

struct EpochLog {
    int epoch = 0;
    double loss_total = 0.0;
    double loss_elbo = 0.0;
    double loss_kl = 0.0;
    double loss_edge = 0.0;
    double loss_ei = 0.0;
    double loss_ie = 0.0;
    long wall_ms = 0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochLog> log;
};

inline void check_component_finite(double v, const char* name, int epoch, int step) {
    if (!std::isfinite(v))
        throw error(std::string(name) + " is non-finite at epoch " + std::to_string(epoch) +
                    " step " + std::to_string(step));
}

inline TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    ds.validate();
    const ConceptGraph graph = ds.graph();
    const double pos_weight = graph.bce_pos_weight();

    ModelDims dims;
    dims.m = ds.node_features.cols;
    dims.hidden = cfg.hidden;
    dims.h = cfg.h;
    dims.k = cfg.k;
    dims.d = ds.features.dim();
    dims.layers = cfg.layers;

    TrainResult result;
    result.params = init_params(dims, cfg.seed);

    auto param_ptrs = result.params.tensors();
    AdamState adam;
    adam.lr = cfg.lr;
    std::vector<const Tensor2D*> param_view(param_ptrs.begin(), param_ptrs.end());
    adam.reset(param_view);

    const PairTable full_table = full_pair_table(ds.vocab, ds.splits, ds.splits.world);
    const size_t n_train = ds.splits.train_samples.size();
    if (n_train == 0 && cfg.epochs > 0) throw error("train: empty training split");

    Rng neg_rng(derive_seed(cfg.seed, "negsample"));
    long global_step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        std::vector<int> order(n_train);
        for (size_t i = 0; i < n_train; ++i) order[i] = static_cast<int>(i);
        Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", static_cast<uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        EpochLog log;
        log.epoch = epoch;
        int batches = 0;
        for (size_t begin = 0; begin < n_train; begin += cfg.batch_size, ++global_step) {
            const size_t end = std::min(n_train, begin + cfg.batch_size);
            std::vector<int> image_ids;
            std::vector<CompositionLabel> labels;
            for (size_t i = begin; i < end; ++i) {
                const Sample& s = ds.splits.train_samples[order[i]];
                image_ids.push_back(s.image_id);
                labels.push_back(s.label);
            }

            BatchInputs batch;
            batch.images = ds.features.rows_for(image_ids);
            const PairTable table =
                sampled_pair_table(full_table, labels, cfg.pair_cap, cfg.neg_samples, neg_rng);
            batch.pair_table = table.pairs;
            for (const auto& y : labels) {
                auto it = table.index.find(y);
                if (it == table.index.end())
                    throw error("train: batch label missing from pair table");
                batch.pair_targets.push_back(it->second);
            }
            Rng noise_rng(derive_seed(cfg.seed, "noise", static_cast<uint64_t>(global_step)));
            batch.noise = noise_rng.normal_matrix(graph.n_nodes(), cfg.h);

            Tape tape;
            const TotalLossVars vars =
                build_total_loss(tape, result.params, graph, batch, cfg, pos_weight);
            const int step_in_epoch = static_cast<int>(begin / cfg.batch_size);
            check_component_finite(tape.val(vars.elbo.kl).scalar_value(), "loss_kl", epoch,
                                   step_in_epoch);
            check_component_finite(tape.val(vars.elbo.edge_bce).scalar_value(), "loss_edge",
                                   epoch, step_in_epoch);
            check_component_finite(tape.val(vars.loss_ei).scalar_value(), "loss_ei", epoch,
                                   step_in_epoch);
            check_component_finite(tape.val(vars.loss_ie).scalar_value(), "loss_ie", epoch,
                                   step_in_epoch);
            tape.backward(vars.total);

            // leaf order must match ModelParams::for_each
            std::vector<const Tensor2D*> grads;
            std::vector<Var> leaf_vars;
            for (size_t l = 0; l < vars.vgae.w_self.size(); ++l) {
                leaf_vars.push_back(vars.vgae.w_self[l]);
                leaf_vars.push_back(vars.vgae.w_neigh[l]);
            }
            leaf_vars.push_back(vars.vgae.w_mu);
            leaf_vars.push_back(vars.vgae.w_logvar);
            leaf_vars.push_back(vars.proj.e_w1);
            leaf_vars.push_back(vars.proj.e_b1);
            leaf_vars.push_back(vars.proj.e_w2);
            leaf_vars.push_back(vars.proj.e_b2);
            leaf_vars.push_back(vars.proj.i_w1);
            leaf_vars.push_back(vars.proj.i_b1);
            leaf_vars.push_back(vars.proj.i_w2);
            leaf_vars.push_back(vars.proj.i_b2);
            for (Var v : leaf_vars) grads.push_back(&tape.grad(v));
            adam_step(param_ptrs, grads, adam);

            log.loss_total += tape.val(vars.total).scalar_value();
            log.loss_elbo += tape.val(vars.elbo.elbo).scalar_value();
            log.loss_kl += tape.val(vars.elbo.kl).scalar_value();
            log.loss_edge += tape.val(vars.elbo.edge_bce).scalar_value();
            log.loss_ei += tape.val(vars.loss_ei).scalar_value();
            log.loss_ie += tape.val(vars.loss_ie).scalar_value();
            ++batches;
        }
        if (batches > 0) {
            log.loss_total /= batches;
            log.loss_elbo /= batches;
            log.loss_kl /= batches;
            log.loss_edge /= batches;
            log.loss_ei /= batches;
            log.loss_ie /= batches;
        }
        log.wall_ms = static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                            std::chrono::steady_clock::now() - epoch_start)
                                            .count());
        result.log.push_back(log);
    }
    return result;
}

} // namespace vgce
