#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vgce/tensor.hpp"

namespace vgce {

// Reverse-mode autodiff over a tape of dense 2-D tensors. The tape is
// rebuilt for every forward pass; nodes are appended in topological order,
// so backward() is a single reverse sweep. Leaf gradients accumulate across
// backward() calls, interior gradients are recomputed each time.
class Tape {
public:
    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    Var leaf(Tensor2D value, bool needs_grad) {
        return push(std::move(value), needs_grad, "leaf", {});
    }

    Var constant(Tensor2D value) { return leaf(std::move(value), false); }

    const Tensor2D& val(Var v) const { return nodes_[check(v)].value; }

    // Valid after backward(); zero matrix for untouched leaves.
    const Tensor2D& grad(Var v) const {
        const Node& n = nodes_[check(v)];
        if (n.grad.empty()) {
            static const Tensor2D empty;
            if (n.value.size() == 0) return empty;
            throw error("grad: backward() has not populated this node");
        }
        return n.grad;
    }

    size_t size() const { return nodes_.size(); }

    // ---- primitive ops ----

    Var matmul(Var a, Var b) {
        Tensor2D out = matmul_value(val(a), val(b));
        return push(std::move(out), needs(a) || needs(b), "matmul", {a, b},
                    [a, b](Tape& t, const Tensor2D& g) {
                        if (t.needs(a)) t.accumulate(a, matmul_nt_value(g, t.val(b)));
                        if (t.needs(b)) t.accumulate(b, matmul_tn_value(t.val(a), g));
                    });
    }

    // a * b^T
    Var matmul_nt(Var a, Var b) {
        Tensor2D out = matmul_nt_value(val(a), val(b));
        return push(std::move(out), needs(a) || needs(b), "matmul_nt", {a, b},
                    [a, b](Tape& t, const Tensor2D& g) {
                        if (t.needs(a)) t.accumulate(a, matmul_value(g, t.val(b)));
                        if (t.needs(b)) t.accumulate(b, matmul_tn_value(g, t.val(a)));
                    });
    }

    Var transpose(Var a) {
        return push(transpose_value(val(a)), needs(a), "transpose", {a},
                    [a](Tape& t, const Tensor2D& g) {
                        if (t.needs(a)) t.accumulate(a, transpose_value(g));
                    });
    }

    Var add(Var a, Var b) {
        const Tensor2D& av = val(a);
        const Tensor2D& bv = val(b);
        if (!av.same_shape(bv))
            throw error("add: shape mismatch " + shape_str(av) + " vs " + shape_str(bv));
        Tensor2D out = av;
        for (size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
        return push(std::move(out), needs(a) || needs(b), "add", {a, b},
                    [a, b](Tape& t, const Tensor2D& g) {
                        if (t.needs(a)) t.accumulate(a, g);
                        if (t.needs(b)) t.accumulate(b, g);
                    });
    }

    Var sub(Var a, Var b) {
        const Tensor2D& av = val(a);
        const Tensor2D& bv = val(b);
        if (!av.same_shape(bv))
            throw error("sub: shape mismatch " + shape_str(av) + " vs " + shape_str(bv));
        Tensor2D out = av;
        for (size_t i = 0; i < out.size(); ++i) out.data[i] -= bv.data[i];
        return push(std::move(out), needs(a) || needs(b), "sub", {a, b},
                    [a, b](Tape& t, const Tensor2D& g) {
                        if (t.needs(a)) t.accumulate(a, g);
                        if (t.needs(b)) {
                            Tensor2D ng = g;
                            for (double& v : ng.data) v = -v;
                            t.accumulate(b, ng);
                        }
                    });
    }

    // X + broadcast row vector b (1 x cols)
    Var add_rowvec(Var x, Var b) {
        const Tensor2D& xv = val(x);
        const Tensor2D& bv = val(b);
        if (bv.rows != 1 || bv.cols != xv.cols)
            throw error("add_rowvec: bias shape " + shape_str(bv) + " vs " + shape_str(xv));
        Tensor2D out = xv;
        for (int i = 0; i < out.rows; ++i)
            for (int j = 0; j < out.cols; ++j) out.at(i, j) += bv.at(0, j);
        return push(std::move(out), needs(x) || needs(b), "add_rowvec", {x, b},
                    [x, b](Tape& t, const Tensor2D& g) {
                        if (t.needs(x)) t.accumulate(x, g);
                        if (t.needs(b)) {
                            Tensor2D gb(1, g.cols);
                            for (int i = 0; i < g.rows; ++i)
                                for (int j = 0; j < g.cols; ++j) gb.at(0, j) += g.at(i, j);
                            t.accumulate(b, gb);
                        }
                    });
    }

    Var scale(Var a, double c) {
        Tensor2D out = val(a);
        for (double& v : out.data) v *= c;
        return push(std::move(out), needs(a), "scale", {a},
                    [a, c](Tape& t, const Tensor2D& g) {
                        if (!t.needs(a)) return;
                        Tensor2D ga = g;
                        for (double& v : ga.data) v *= c;
                        t.accumulate(a, ga);
                    });
    }

    Var add_scalar(Var a, double c) {
        Tensor2D out = val(a);
        for (double& v : out.data) v += c;
        return push(std::move(out), needs(a), "add_scalar", {a},
                    [a](Tape& t, const Tensor2D& g) {
                        if (t.needs(a)) t.accumulate(a, g);
                    });
    }

    Var elementwise_mul(Var a, Var b) {
        const Tensor2D& av = val(a);
        const Tensor2D& bv = val(b);
        if (!av.same_shape(bv))
            throw error("elementwise_mul: shape mismatch " + shape_str(av) + " vs " + shape_str(bv));
        Tensor2D out = av;
        for (size_t i = 0; i < out.size(); ++i) out.data[i] *= bv.data[i];
        return push(std::move(out), needs(a) || needs(b), "elementwise_mul", {a, b},
                    [a, b](Tape& t, const Tensor2D& g) {
                        if (t.needs(a)) {
                            Tensor2D ga = g;
                            const Tensor2D& bv2 = t.val(b);
                            for (size_t i = 0; i < ga.size(); ++i) ga.data[i] *= bv2.data[i];
                            t.accumulate(a, ga);
                        }
                        if (t.needs(b)) {
                            Tensor2D gb = g;
                            const Tensor2D& av2 = t.val(a);
                            for (size_t i = 0; i < gb.size(); ++i) gb.data[i] *= av2.data[i];
                            t.accumulate(b, gb);
                        }
                    });
    }

    Var relu(Var a) {
        Tensor2D out = val(a);
        for (double& v : out.data) v = v > 0.0 ? v : 0.0;
        return push(std::move(out), needs(a), "relu", {a},
                    [a](Tape& t, const Tensor2D& g, int self) {
                        if (!t.needs(a)) return;
                        Tensor2D ga = g;
                        const Tensor2D& y = t.nodes_[self].value;
                        for (size_t i = 0; i < ga.size(); ++i)
                            if (y.data[i] <= 0.0) ga.data[i] = 0.0;
                        t.accumulate(a, ga);
                    });
    }

    Var sigmoid(Var a) {
        Tensor2D out = val(a);
        for (double& v : out.data) v = stable_sigmoid(v);
        return push(std::move(out), needs(a), "sigmoid", {a},
                    [a](Tape& t, const Tensor2D& g, int self) {
                        if (!t.needs(a)) return;
                        Tensor2D ga = g;
                        const Tensor2D& y = t.nodes_[self].value;
                        for (size_t i = 0; i < ga.size(); ++i)
                            ga.data[i] *= y.data[i] * (1.0 - y.data[i]);
                        t.accumulate(a, ga);
                    });
    }

    Var exp(Var a) {
        Tensor2D out = val(a);
        for (double& v : out.data) v = std::exp(v);
        return push(std::move(out), needs(a), "exp", {a},
                    [a](Tape& t, const Tensor2D& g, int self) {
                        if (!t.needs(a)) return;
                        Tensor2D ga = g;
                        const Tensor2D& y = t.nodes_[self].value;
                        for (size_t i = 0; i < ga.size(); ++i) ga.data[i] *= y.data[i];
                        t.accumulate(a, ga);
                    });
    }

    Var log(Var a) {
        Tensor2D out = val(a);
        for (double& v : out.data) v = std::log(v);
        return push(std::move(out), needs(a), "log", {a},
                    [a](Tape& t, const Tensor2D& g) {
                        if (!t.needs(a)) return;
                        Tensor2D ga = g;
                        const Tensor2D& x = t.val(a);
                        for (size_t i = 0; i < ga.size(); ++i) ga.data[i] /= x.data[i];
                        t.accumulate(a, ga);
                    });
    }

    // Pass-through inside [lo, hi], zero subgradient outside.
    Var clamp(Var a, double lo, double hi) {
        Tensor2D out = val(a);
        for (double& v : out.data) v = std::min(std::max(v, lo), hi);
        return push(std::move(out), needs(a), "clamp", {a},
                    [a, lo, hi](Tape& t, const Tensor2D& g) {
                        if (!t.needs(a)) return;
                        Tensor2D ga = g;
                        const Tensor2D& x = t.val(a);
                        for (size_t i = 0; i < ga.size(); ++i)
                            if (x.data[i] < lo || x.data[i] > hi) ga.data[i] = 0.0;
                        t.accumulate(a, ga);
                    });
    }

    Var concat_cols(Var a, Var b) {
        const Tensor2D& av = val(a);
        const Tensor2D& bv = val(b);
        if (av.rows != bv.rows)
            throw error("concat_cols: row mismatch " + shape_str(av) + " vs " + shape_str(bv));
        Tensor2D out(av.rows, av.cols + bv.cols);
        for (int i = 0; i < av.rows; ++i) {
            for (int j = 0; j < av.cols; ++j) out.at(i, j) = av.at(i, j);
            for (int j = 0; j < bv.cols; ++j) out.at(i, av.cols + j) = bv.at(i, j);
        }
        const int ac = av.cols, bc = bv.cols;
        return push(std::move(out), needs(a) || needs(b), "concat_cols", {a, b},
                    [a, b, ac, bc](Tape& t, const Tensor2D& g) {
                        if (t.needs(a)) {
                            Tensor2D ga(g.rows, ac);
                            for (int i = 0; i < g.rows; ++i)
                                for (int j = 0; j < ac; ++j) ga.at(i, j) = g.at(i, j);
                            t.accumulate(a, ga);
                        }
                        if (t.needs(b)) {
                            Tensor2D gb(g.rows, bc);
                            for (int i = 0; i < g.rows; ++i)
                                for (int j = 0; j < bc; ++j) gb.at(i, j) = g.at(i, ac + j);
                            t.accumulate(b, gb);
                        }
                    });
    }

    // out row i = a row indices[i]; duplicate indices accumulate on backward.
    Var gather_rows(Var a, std::vector<int> indices) {
        const Tensor2D& av = val(a);
        Tensor2D out(static_cast<int>(indices.size()), av.cols);
        for (size_t i = 0; i < indices.size(); ++i) {
            const int r = indices[i];
            if (r < 0 || r >= av.rows) throw error("gather_rows: index out of range");
            for (int j = 0; j < av.cols; ++j) out.at(static_cast<int>(i), j) = av.at(r, j);
        }
        return push(std::move(out), needs(a), "gather_rows", {a},
                    [a, idx = std::move(indices)](Tape& t, const Tensor2D& g) {
                        if (!t.needs(a)) return;
                        Tensor2D ga(t.val(a).rows, g.cols);
                        for (size_t i = 0; i < idx.size(); ++i)
                            for (int j = 0; j < g.cols; ++j)
                                ga.at(idx[i], j) += g.at(static_cast<int>(i), j);
                        t.accumulate(a, ga);
                    });
    }

    Var slice_rows(Var a, int begin, int end) {
        const Tensor2D& av = val(a);
        if (begin < 0 || end > av.rows || begin > end)
            throw error("slice_rows: bad range");
        Tensor2D out(end - begin, av.cols);
        for (int i = begin; i < end; ++i)
            for (int j = 0; j < av.cols; ++j) out.at(i - begin, j) = av.at(i, j);
        return push(std::move(out), needs(a), "slice_rows", {a},
                    [a, begin](Tape& t, const Tensor2D& g) {
                        if (!t.needs(a)) return;
                        Tensor2D ga(t.val(a).rows, g.cols);
                        for (int i = 0; i < g.rows; ++i)
                            for (int j = 0; j < g.cols; ++j) ga.at(begin + i, j) = g.at(i, j);
                        t.accumulate(a, ga);
                    });
    }

    // Row-wise softmax with max subtraction.
    Var softmax_rows(Var a) {
        Tensor2D out = val(a);
        for (int i = 0; i < out.rows; ++i) {
            double* row = &out.data[static_cast<size_t>(i) * out.cols];
            double m = row[0];
            for (int j = 1; j < out.cols; ++j) m = std::max(m, row[j]);
            double s = 0.0;
            for (int j = 0; j < out.cols; ++j) {
                row[j] = std::exp(row[j] - m);
                s += row[j];
            }
            for (int j = 0; j < out.cols; ++j) row[j] /= s;
        }
        return push(std::move(out), needs(a), "softmax_rows", {a},
                    [a](Tape& t, const Tensor2D& g, int self) {
                        if (!t.needs(a)) return;
                        const Tensor2D& y = t.nodes_[self].value;
                        Tensor2D ga(g.rows, g.cols);
                        for (int i = 0; i < g.rows; ++i) {
                            double dot = 0.0;
                            for (int j = 0; j < g.cols; ++j) dot += g.at(i, j) * y.at(i, j);
                            for (int j = 0; j < g.cols; ++j)
                                ga.at(i, j) = y.at(i, j) * (g.at(i, j) - dot);
                        }
                        t.accumulate(a, ga);
                    });
    }

    // y_i = x_i / sqrt(|x_i|^2 + eps); eps keeps the op smooth at the origin.
    Var row_l2_normalize(Var a) {
        constexpr double kEps = 1e-24;
        const Tensor2D& x = val(a);
        Tensor2D out(x.rows, x.cols);
        std::vector<double> norms(x.rows);
        for (int i = 0; i < x.rows; ++i) {
            double s = kEps;
            for (int j = 0; j < x.cols; ++j) s += x.at(i, j) * x.at(i, j);
            norms[i] = std::sqrt(s);
            for (int j = 0; j < x.cols; ++j) out.at(i, j) = x.at(i, j) / norms[i];
        }
        return push(std::move(out), needs(a), "row_l2_normalize", {a},
                    [a, norms = std::move(norms)](Tape& t, const Tensor2D& g) {
                        if (!t.needs(a)) return;
                        const Tensor2D& x2 = t.val(a);
                        Tensor2D ga(g.rows, g.cols);
                        for (int i = 0; i < g.rows; ++i) {
                            const double n = norms[i];
                            double dot = 0.0;
                            for (int j = 0; j < g.cols; ++j) dot += g.at(i, j) * x2.at(i, j);
                            for (int j = 0; j < g.cols; ++j)
                                ga.at(i, j) = g.at(i, j) / n - x2.at(i, j) * dot / (n * n * n);
                        }
                        t.accumulate(a, ga);
                    });
    }

    Var reduce_sum(Var a) {
        double s = 0.0;
        for (double v : val(a).data) s += v;
        return push(Tensor2D::scalar(s), needs(a), "reduce_sum", {a},
                    [a](Tape& t, const Tensor2D& g) {
                        if (!t.needs(a)) return;
                        t.accumulate_fill(a, g.data[0]);
                    });
    }

    Var reduce_mean(Var a) {
        const Tensor2D& av = val(a);
        if (av.size() == 0) throw error("reduce_mean: empty input");
        double s = 0.0;
        for (double v : av.data) s += v;
        const double inv = 1.0 / static_cast<double>(av.size());
        return push(Tensor2D::scalar(s * inv), needs(a), "reduce_mean", {a},
                    [a, inv](Tape& t, const Tensor2D& g) {
                        if (!t.needs(a)) return;
                        t.accumulate_fill(a, g.data[0] * inv);
                    });
    }

    // ---- fused ops used by the model forward pass ----

    // One GraphSAGE mean-aggregation layer:
    //   out = relu(H * w_self + mean_{j in N(i)} H_j * w_neigh)
    // Nodes without neighbours use a zero aggregate. Fused to keep the tape
    // small on large graphs. `neighbors` is captured by reference and must
    // outlive the tape.
    Var sage_layer(Var h, Var w_self, Var w_neigh,
                   const std::vector<std::vector<int>>& neighbors) {
        const Tensor2D& hv = val(h);
        if (static_cast<int>(neighbors.size()) != hv.rows)
            throw error("sage_layer: neighbor list size mismatch");
        Tensor2D agg = neighbor_mean_value(hv, neighbors);
        Tensor2D out = matmul_value(hv, val(w_self));
        Tensor2D na = matmul_value(agg, val(w_neigh));
        for (size_t i = 0; i < out.size(); ++i) {
            out.data[i] += na.data[i];
            if (out.data[i] < 0.0) out.data[i] = 0.0;
        }
        return push(std::move(out), needs(h) || needs(w_self) || needs(w_neigh),
                    "sage_layer", {h, w_self, w_neigh},
                    [h, w_self, w_neigh, agg = std::move(agg), &neighbors](
                        Tape& t, const Tensor2D& g, int self) {
                        const Tensor2D& y = t.nodes_[self].value;
                        Tensor2D gm = g;
                        for (size_t i = 0; i < gm.size(); ++i)
                            if (y.data[i] <= 0.0) gm.data[i] = 0.0;
                        if (t.needs(w_self)) t.accumulate(w_self, matmul_tn_value(t.val(h), gm));
                        if (t.needs(w_neigh)) t.accumulate(w_neigh, matmul_tn_value(agg, gm));
                        if (t.needs(h)) {
                            Tensor2D gh = matmul_nt_value(gm, t.val(w_self));
                            Tensor2D gagg = matmul_nt_value(gm, t.val(w_neigh));
                            for (size_t i = 0; i < neighbors.size(); ++i) {
                                const auto& ns = neighbors[i];
                                if (ns.empty()) continue;
                                const double inv = 1.0 / static_cast<double>(ns.size());
                                for (int j : ns)
                                    for (int c = 0; c < gh.cols; ++c)
                                        gh.at(j, c) += gagg.at(static_cast<int>(i), c) * inv;
                            }
                            t.accumulate(h, gh);
                        }
                    });
    }

    // Mean softmax cross-entropy over rows; targets[i] is the true column.
    Var softmax_xent_rows(Var logits, std::vector<int> targets) {
        const Tensor2D& lv = val(logits);
        if (lv.rows == 0) throw error("softmax_xent_rows: empty batch");
        if (static_cast<int>(targets.size()) != lv.rows)
            throw error("softmax_xent_rows: target count mismatch");
        Tensor2D probs(lv.rows, lv.cols);
        double loss = 0.0;
        for (int i = 0; i < lv.rows; ++i) {
            const int tgt = targets[i];
            if (tgt < 0 || tgt >= lv.cols) throw error("softmax_xent_rows: target out of range");
            double m = lv.at(i, 0);
            for (int j = 1; j < lv.cols; ++j) m = std::max(m, lv.at(i, j));
            double s = 0.0;
            for (int j = 0; j < lv.cols; ++j) {
                probs.at(i, j) = std::exp(lv.at(i, j) - m);
                s += probs.at(i, j);
            }
            for (int j = 0; j < lv.cols; ++j) probs.at(i, j) /= s;
            loss += (m + std::log(s)) - lv.at(i, tgt);
        }
        loss /= static_cast<double>(lv.rows);
        return push(Tensor2D::scalar(loss), needs(logits), "softmax_xent_rows", {logits},
                    [logits, probs = std::move(probs), tg = std::move(targets)](
                        Tape& t, const Tensor2D& g) {
                        if (!t.needs(logits)) return;
                        const double s = g.data[0] / static_cast<double>(probs.rows);
                        Tensor2D gl = probs;
                        for (int i = 0; i < gl.rows; ++i) gl.at(i, tg[i]) -= 1.0;
                        for (double& v : gl.data) v *= s;
                        t.accumulate(logits, gl);
                    });
    }

    // Weighted binary cross-entropy from logits, normalized by entry count:
    //   mean over entries of [pos_weight * a * softplus(-x) + (1-a) * softplus(x)]
    Var bce_logits(Var logits, const Tensor2D& labels, double pos_weight) {
        const Tensor2D& lv = val(logits);
        if (!lv.same_shape(labels))
            throw error("bce_logits: label shape mismatch");
        if (lv.size() == 0) throw error("bce_logits: empty input");
        const double inv = 1.0 / static_cast<double>(lv.size());
        double loss = 0.0;
        for (size_t i = 0; i < lv.size(); ++i) {
            const double x = lv.data[i];
            const double a = labels.data[i];
            loss += pos_weight * a * softplus(-x) + (1.0 - a) * softplus(x);
        }
        return push(Tensor2D::scalar(loss * inv), needs(logits), "bce_logits", {logits},
                    [logits, labels, pos_weight, inv](Tape& t, const Tensor2D& g) {
                        if (!t.needs(logits)) return;
                        const Tensor2D& x = t.val(logits);
                        Tensor2D gl(x.rows, x.cols);
                        for (size_t i = 0; i < x.size(); ++i) {
                            const double a = labels.data[i];
                            gl.data[i] = g.data[0] * inv *
                                         ((1.0 - a) * stable_sigmoid(x.data[i]) -
                                          pos_weight * a * stable_sigmoid(-x.data[i]));
                        }
                        t.accumulate(logits, gl);
                    });
    }

    // ---- backward ----

    void backward(Var loss) {
        const int id = check(loss);
        const Tensor2D& lv = nodes_[id].value;
        if (lv.rows != 1 || lv.cols != 1)
            throw error("backward: loss must be a scalar, got " + shape_str(lv));
        // interior grads are recomputed, leaf grads accumulate
        for (Node& n : nodes_) {
            if (!n.needs_grad) continue;
            if (n.grad.empty())
                n.grad = Tensor2D(n.value.rows, n.value.cols);
            else if (n.back)
                std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
        }
        if (!nodes_[id].needs_grad)
            throw error("backward: loss does not depend on any differentiable leaf");
        nodes_[id].grad.data[0] += 1.0;
        for (int i = id; i >= 0; --i) {
            Node& n = nodes_[i];
            if (n.back && n.needs_grad) n.back(*this, n.grad, i);
        }
    }

private:
    struct Node {
        Tensor2D value;
        Tensor2D grad;
        bool needs_grad = false;
        std::string op;
        std::function<void(Tape&, const Tensor2D&, int)> back;
    };

    bool needs(Var v) const { return nodes_[check(v)].needs_grad; }

    int check(Var v) const {
        if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
            throw error("Tape: invalid variable handle");
        return v.id;
    }

    void accumulate(Var v, const Tensor2D& g) {
        Node& n = nodes_[check(v)];
        if (n.grad.empty()) n.grad = Tensor2D(n.value.rows, n.value.cols);
        if (!n.grad.same_shape(g)) throw error("accumulate: gradient shape mismatch");
        for (size_t i = 0; i < g.size(); ++i) n.grad.data[i] += g.data[i];
    }

    void accumulate_fill(Var v, double g) {
        Node& n = nodes_[check(v)];
        if (n.grad.empty()) n.grad = Tensor2D(n.value.rows, n.value.cols);
        for (double& x : n.grad.data) x += g;
    }

    static Tensor2D neighbor_mean_value(const Tensor2D& h,
                                        const std::vector<std::vector<int>>& neighbors) {
        Tensor2D agg(h.rows, h.cols);
        for (size_t i = 0; i < neighbors.size(); ++i) {
            const auto& ns = neighbors[i];
            if (ns.empty()) continue;
            double* row = &agg.data[i * static_cast<size_t>(h.cols)];
            for (int j : ns) {
                const double* src = &h.data[static_cast<size_t>(j) * h.cols];
                for (int c = 0; c < h.cols; ++c) row[c] += src[c];
            }
            const double inv = 1.0 / static_cast<double>(ns.size());
            for (int c = 0; c < h.cols; ++c) row[c] *= inv;
        }
        return agg;
    }

    template <class BackFn>
    Var push(Tensor2D value, bool needs_grad, const char* op, std::initializer_list<Var> parents,
             BackFn&& back) {
        if (!value.all_finite())
            throw error(std::string("non-finite output from op '") + op + "'");
        for (Var p : parents) check(p);
        Node n;
        n.value = std::move(value);
        n.needs_grad = needs_grad;
        n.op = op;
        if constexpr (std::is_invocable_v<BackFn, Tape&, const Tensor2D&, int>) {
            n.back = std::forward<BackFn>(back);
        } else {
            n.back = [f = std::forward<BackFn>(back)](Tape& t, const Tensor2D& g, int) {
                f(t, g);
            };
        }
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    Var push(Tensor2D value, bool needs_grad, const char* op, std::initializer_list<Var> parents) {
        if (!value.all_finite())
            throw error(std::string("non-finite value in '") + op + "'");
        for (Var p : parents) check(p);
        Node n;
        n.value = std::move(value);
        n.needs_grad = needs_grad;
        n.op = op;
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    std::vector<Node> nodes_;
};

using Var = Tape::Var;

} // namespace vgce
