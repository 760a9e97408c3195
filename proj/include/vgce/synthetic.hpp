#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vgce/data_model.hpp"
#include "vgce/rng.hpp"

namespace vgce {

// Desk-scale synthetic stand-in for the real benchmark datasets. Every
// concept gets a ground-truth latent vector; image features are a fixed
// random linear map of the concatenated pair latents plus Gaussian noise,
// so compositions are linearly recoverable and unseen pairs generalize.
struct SyntheticSpec {
    int n_states = 8;
    int n_objects = 6;
    double seen_fraction = 0.5;
    double unseen_fraction = 0.25;
    int d = 32;               // image feature dim
    int m = 16;               // node feature dim (= ground-truth latent dim)
    int samples_per_pair = 20;
    double noise_sigma = 0.1;
    uint64_t seed = 7;
};

inline Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_states < 1 || spec.n_objects < 1 || spec.d < 1 || spec.m < 1 ||
        spec.samples_per_pair < 1)
        throw error("generate_synthetic: all counts must be >= 1");
    if (spec.seen_fraction <= 0.0 || spec.seen_fraction > 1.0 ||
        spec.unseen_fraction <= 0.0 || spec.unseen_fraction > 1.0)
        throw error("generate_synthetic: fractions must be in (0, 1]");
    const long total = static_cast<long>(spec.n_states) * spec.n_objects;
    const long n_seen = std::lround(spec.seen_fraction * static_cast<double>(total));
    const long n_unseen = std::lround(spec.unseen_fraction * static_cast<double>(total));
    if (n_seen < 1 || n_unseen < 1 || n_seen + n_unseen > total)
        throw error("generate_synthetic: infeasible fractions (" + std::to_string(n_seen) +
                    " seen + " + std::to_string(n_unseen) + " unseen of " +
                    std::to_string(total) + " pairs)");

    Dataset ds;
    for (int s = 0; s < spec.n_states; ++s) ds.vocab.states.push_back("state_" + std::to_string(s));
    for (int o = 0; o < spec.n_objects; ++o) ds.vocab.objects.push_back("object_" + std::to_string(o));

    // ground-truth concept latents, states then objects
    Rng concept_rng(derive_seed(spec.seed, "concepts"));
    Tensor2D latents = concept_rng.normal_matrix(ds.vocab.n_nodes(), spec.m);

    Rng map_rng(derive_seed(spec.seed, "mixmap"));
    Tensor2D mix = map_rng.normal_matrix(spec.d, 2 * spec.m,
                                         1.0 / std::sqrt(2.0 * static_cast<double>(spec.m)));

    // pair split
    std::vector<CompositionLabel> all_pairs;
    all_pairs.reserve(static_cast<size_t>(total));
    for (int s = 0; s < spec.n_states; ++s)
        for (int o = 0; o < spec.n_objects; ++o) all_pairs.push_back({s, o});
    Rng pair_rng(derive_seed(spec.seed, "pairs"));
    pair_rng.shuffle(all_pairs);
    ds.splits.seen_pairs.assign(all_pairs.begin(), all_pairs.begin() + n_seen);
    ds.splits.unseen_pairs.assign(all_pairs.begin() + n_seen,
                                  all_pairs.begin() + n_seen + n_unseen);
    ds.splits.normalize();

    // images: train block over seen pairs, then val and test blocks over
    // seen + unseen pairs, all in canonical pair order
    const int n_eval = std::max(1, spec.samples_per_pair / 4);
    std::vector<CompositionLabel> eval_pairs = ds.splits.seen_pairs;
    eval_pairs.insert(eval_pairs.end(), ds.splits.unseen_pairs.begin(),
                      ds.splits.unseen_pairs.end());
    std::sort(eval_pairs.begin(), eval_pairs.end());

    Rng image_rng(derive_seed(spec.seed, "images"));
    std::vector<Tensor2D> feature_rows;
    auto emit_image = [&](const CompositionLabel& y) -> int {
        Tensor2D x(1, spec.d);
        for (int i = 0; i < spec.d; ++i) {
            double acc = 0.0;
            for (int k = 0; k < spec.m; ++k) {
                acc += mix.at(i, k) * latents.at(y.state_idx, k);
                acc += mix.at(i, spec.m + k) * latents.at(ds.vocab.object_node(y.object_idx), k);
            }
            x.at(0, i) = acc + spec.noise_sigma * image_rng.normal();
        }
        feature_rows.push_back(std::move(x));
        return static_cast<int>(feature_rows.size()) - 1;
    };

    for (const auto& y : ds.splits.seen_pairs)
        for (int i = 0; i < spec.samples_per_pair; ++i)
            ds.splits.train_samples.push_back({emit_image(y), y});
    for (const auto& y : eval_pairs)
        for (int i = 0; i < n_eval; ++i) ds.splits.val_samples.push_back({emit_image(y), y});
    for (const auto& y : eval_pairs)
        for (int i = 0; i < n_eval; ++i) ds.splits.test_samples.push_back({emit_image(y), y});

    ds.features.features = Tensor2D(static_cast<int>(feature_rows.size()), spec.d);
    for (size_t i = 0; i < feature_rows.size(); ++i)
        for (int j = 0; j < spec.d; ++j)
            ds.features.features.at(static_cast<int>(i), j) = feature_rows[i].at(0, j);

    // node features: noisy copies of the ground-truth latents
    Rng node_rng(derive_seed(spec.seed, "node_features"));
    ds.node_features = latents;
    for (double& v : ds.node_features.data) v += spec.noise_sigma * node_rng.normal();

    ds.validate();
    return ds;
}

} // namespace vgce
