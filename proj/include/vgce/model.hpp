#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vgce/rng.hpp"
#include "vgce/tensor.hpp"

namespace vgce {

struct ModelDims {
    int m = 16;      // node feature dim
    int hidden = 64; // encoder hidden width
    int h = 16;      // latent dim per node
    int k = 16;      // common embedding space dim
    int d = 32;      // image feature dim
    int layers = 2;  // encoder depth

    void validate() const {
        if (m < 1 || hidden < 1 || h < 1 || k < 1 || d < 1 || layers < 1)
            throw error("model dims: all dimensions must be >= 1");
    }
};

// GraphSAGE encoder weights plus the Gaussian posterior heads. Layers are
// bias-free; the layer rule is relu(H W_self + mean_neighbors(H) W_neigh).
struct EncoderParams {
    std::vector<Tensor2D> w_self;
    std::vector<Tensor2D> w_neigh;
    Tensor2D w_mu;
    Tensor2D w_logvar;
};

// phi_e: R^{2h} -> R^k and phi_i: R^d -> R^k, each linear-relu-linear with
// hidden width k.
struct ProjectionParams {
    Tensor2D e_w1, e_b1, e_w2, e_b2;
    Tensor2D i_w1, i_b1, i_w2, i_b2;
};

struct ModelParams {
    ModelDims dims;
    EncoderParams enc;
    ProjectionParams proj;

    // Fixed parameter order; this order is the checkpoint layout contract.
    template <class F>
    void for_each(F&& f) {
        for (size_t l = 0; l < enc.w_self.size(); ++l) {
            f("enc.w_self." + std::to_string(l), enc.w_self[l]);
            f("enc.w_neigh." + std::to_string(l), enc.w_neigh[l]);
        }
        f("enc.w_mu", enc.w_mu);
        f("enc.w_logvar", enc.w_logvar);
        f("proj.e_w1", proj.e_w1);
        f("proj.e_b1", proj.e_b1);
        f("proj.e_w2", proj.e_w2);
        f("proj.e_b2", proj.e_b2);
        f("proj.i_w1", proj.i_w1);
        f("proj.i_b1", proj.i_b1);
        f("proj.i_w2", proj.i_w2);
        f("proj.i_b2", proj.i_b2);
    }

    template <class F>
    void for_each(F&& f) const {
        const_cast<ModelParams*>(this)->for_each(
            [&](const std::string& name, Tensor2D& t) { f(name, static_cast<const Tensor2D&>(t)); });
    }

    std::vector<Tensor2D*> tensors() {
        std::vector<Tensor2D*> out;
        for_each([&](const std::string&, Tensor2D& t) { out.push_back(&t); });
        return out;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for_each([&](const std::string& n, const Tensor2D&) { out.push_back(n); });
        return out;
    }
};

inline ModelParams init_params(const ModelDims& dims, uint64_t seed) {
    dims.validate();
    ModelParams p;
    p.dims = dims;
    p.enc.w_self.resize(dims.layers);
    p.enc.w_neigh.resize(dims.layers);
    for (int l = 0; l < dims.layers; ++l) {
        const int in = l == 0 ? dims.m : dims.hidden;
        p.enc.w_self[l] = Tensor2D(in, dims.hidden);
        p.enc.w_neigh[l] = Tensor2D(in, dims.hidden);
    }
    p.enc.w_mu = Tensor2D(dims.hidden, dims.h);
    p.enc.w_logvar = Tensor2D(dims.hidden, dims.h);
    p.proj.e_w1 = Tensor2D(2 * dims.h, dims.k);
    p.proj.e_b1 = Tensor2D(1, dims.k);
    p.proj.e_w2 = Tensor2D(dims.k, dims.k);
    p.proj.e_b2 = Tensor2D(1, dims.k);
    p.proj.i_w1 = Tensor2D(dims.d, dims.k);
    p.proj.i_b1 = Tensor2D(1, dims.k);
    p.proj.i_w2 = Tensor2D(dims.k, dims.k);
    p.proj.i_b2 = Tensor2D(1, dims.k);

    Rng rng(derive_seed(seed, "init"));
    p.for_each([&](const std::string& name, Tensor2D& t) {
        if (name.find("_b") != std::string::npos) return; // biases start at zero
        rng.fill_normal(t, 1.0 / std::sqrt(static_cast<double>(t.rows)));
    });
    return p;
}

} // namespace vgce
