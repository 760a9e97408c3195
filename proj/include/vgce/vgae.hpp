#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "vgce/data_model.hpp"
#include "vgce/model.hpp"
#include "vgce/rng.hpp"
#include "vgce/tape.hpp"

namespace vgce {

constexpr double kLogVarClamp = 10.0;

// Per-node Gaussian posteriors q(z_i | G) = N(mu_i, diag(exp(logvar_i))).
struct GaussianNodePosteriors {
    Tensor2D mu;     // N x h
    Tensor2D logvar; // N x h, clamped to [-kLogVarClamp, kLogVarClamp]
};

struct LatentNodes {
    Tensor2D z;     // N x h
    Tensor2D noise; // the standard-normal draw used
};

// Tape-side handles for one VGAE forward pass.
struct VgaeVars {
    std::vector<Var> w_self;
    std::vector<Var> w_neigh;
    Var w_mu, w_logvar;
    Var mu, logvar;
};

inline void register_encoder(Tape& tape, const EncoderParams& enc, VgaeVars& vars) {
    for (const auto& w : enc.w_self) vars.w_self.push_back(tape.leaf(w, true));
    for (const auto& w : enc.w_neigh) vars.w_neigh.push_back(tape.leaf(w, true));
    vars.w_mu = tape.leaf(enc.w_mu, true);
    vars.w_logvar = tape.leaf(enc.w_logvar, true);
}

// GraphSAGE encoder: L mean-aggregation layers, row-L2 normalization of the
// final hidden states, then linear mu / logvar heads. Isolated nodes see a
// zero neighbor term. `graph` must outlive the tape.
inline void encode_on_tape(Tape& tape, const ConceptGraph& graph, VgaeVars& vars) {
    if (graph.feature_dim() != tape.val(vars.w_self[0]).rows)
        throw error("encode: node feature dim " + std::to_string(graph.feature_dim()) +
                    " does not match encoder input dim " +
                    std::to_string(tape.val(vars.w_self[0]).rows));
    Var h = tape.constant(graph.node_features);
    for (size_t l = 0; l < vars.w_self.size(); ++l)
        h = tape.sage_layer(h, vars.w_self[l], vars.w_neigh[l], graph.neighbors);
    Var hn = tape.row_l2_normalize(h);
    vars.mu = tape.matmul(hn, vars.w_mu);
    vars.logvar = tape.clamp(tape.matmul(hn, vars.w_logvar), -kLogVarClamp, kLogVarClamp);
}

// Value-only encode for inference paths.
inline GaussianNodePosteriors encode(const ConceptGraph& graph, const ModelParams& params) {
    Tape tape;
    VgaeVars vars;
    register_encoder(tape, params.enc, vars);
    encode_on_tape(tape, graph, vars);
    return {tape.val(vars.mu), tape.val(vars.logvar)};
}

// z = mu + exp(logvar / 2) * eps, elementwise.
inline LatentNodes reparameterize_with_noise(const GaussianNodePosteriors& post,
                                             Tensor2D noise) {
    if (!noise.same_shape(post.mu))
        throw error("reparameterize: noise shape mismatch");
    LatentNodes out;
    out.z = post.mu;
    for (size_t i = 0; i < out.z.size(); ++i)
        out.z.data[i] += std::exp(0.5 * post.logvar.data[i]) * noise.data[i];
    out.noise = std::move(noise);
    if (!out.z.all_finite()) throw error("reparameterize: non-finite latent");
    return out;
}

inline LatentNodes reparameterize(const GaussianNodePosteriors& post, uint64_t rng_seed) {
    Rng rng(rng_seed);
    return reparameterize_with_noise(post, rng.normal_matrix(post.mu.rows, post.mu.cols));
}

// Tape version: gradient flows into mu and logvar, not into the noise.
inline Var reparameterize_on_tape(Tape& tape, Var mu, Var logvar, const Tensor2D& noise) {
    Var eps = tape.constant(noise);
    Var sigma = tape.exp(tape.scale(logvar, 0.5));
    return tape.add(mu, tape.elementwise_mul(sigma, eps));
}

// Bipartite edge decoder: only the state x object logit block.
inline Var decode_edge_logits_on_tape(Tape& tape, Var z, int n_states, int n_nodes) {
    Var zs = tape.slice_rows(z, 0, n_states);
    Var zo = tape.slice_rows(z, n_states, n_nodes);
    return tape.matmul_nt(zs, zo);
}

// edge_probs[s][o] = sigmoid(<z_s, z_{|S|+o}>)
inline Tensor2D decode_edges(const Tensor2D& z, int n_states) {
    if (n_states < 0 || n_states > z.rows) throw error("decode_edges: bad state count");
    const int n_objects = z.rows - n_states;
    Tensor2D probs(n_states, n_objects);
    for (int s = 0; s < n_states; ++s)
        for (int o = 0; o < n_objects; ++o) {
            double dot = 0.0;
            for (int j = 0; j < z.cols; ++j) dot += z.at(s, j) * z.at(n_states + o, j);
            probs.at(s, o) = stable_sigmoid(dot);
        }
    return probs;
}

inline Tensor2D decode_edges(const LatentNodes& z, int n_states) {
    return decode_edges(z.z, n_states);
}

// Closed-form KL against the standard-normal prior:
//   sum over nodes and dims of (mu^2 + sigma^2 - 1 - log sigma^2) / 2
inline Var kl_on_tape(Tape& tape, Var mu, Var logvar) {
    Var mu2 = tape.elementwise_mul(mu, mu);
    Var var = tape.exp(logvar);
    Var inner = tape.add_scalar(tape.sub(tape.add(mu2, var), logvar), -1.0);
    return tape.scale(tape.reduce_sum(inner), 0.5);
}

inline double kl_term(const GaussianNodePosteriors& post) {
    if (!post.mu.same_shape(post.logvar)) throw error("kl_term: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < post.mu.size(); ++i) {
        const double mu = post.mu.data[i];
        const double lv = post.logvar.data[i];
        acc += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
    }
    return acc;
}

// Weighted BCE between the adjacency block and decoded logits, normalized by
// block size. Computed in softplus form; `edge_probs` never materializes.
inline Var edge_reconstruction_on_tape(Tape& tape, Var edge_logits, const ConceptGraph& graph,
                                       double pos_weight) {
    return tape.bce_logits(edge_logits, graph.bipartite_labels(), pos_weight);
}

inline double edge_reconstruction_term(const Tensor2D& edge_probs, const ConceptGraph& graph,
                                       double pos_weight) {
    if (edge_probs.rows != graph.n_states || edge_probs.cols != graph.n_objects)
        throw error("edge_reconstruction_term: block shape mismatch");
    const Tensor2D labels = graph.bipartite_labels();
    double acc = 0.0;
    for (size_t i = 0; i < edge_probs.size(); ++i) {
        const double p = edge_probs.data[i];
        const double a = labels.data[i];
        acc -= pos_weight * a * std::log(p) + (1.0 - a) * std::log1p(-p);
    }
    return acc / static_cast<double>(edge_probs.size());
}

struct ElboVars {
    Var kl;
    Var edge_bce;
    Var elbo;
};

// kl_weight * KL + reconstruction BCE, single reparameterized sample.
inline ElboVars elbo_on_tape(Tape& tape, Var mu, Var logvar, Var z, const ConceptGraph& graph,
                             double kl_weight, double pos_weight) {
    ElboVars out;
    out.kl = kl_on_tape(tape, mu, logvar);
    Var logits = decode_edge_logits_on_tape(tape, z, graph.n_states, graph.n_nodes());
    out.edge_bce = edge_reconstruction_on_tape(tape, logits, graph, pos_weight);
    out.elbo = tape.add(tape.scale(out.kl, kl_weight), out.edge_bce);
    return out;
}

inline double elbo_loss(const GaussianNodePosteriors& post, const Tensor2D& edge_probs,
                        const ConceptGraph& graph, double kl_weight, double pos_weight) {
    return kl_weight * kl_term(post) + edge_reconstruction_term(edge_probs, graph, pos_weight);
}

} // namespace vgce
