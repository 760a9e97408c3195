#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "vgce/composer.hpp"
#include "vgce/data_model.hpp"
#include "vgce/model.hpp"
#include "vgce/vgae.hpp"

namespace vgce {

// Bias values are symbolic at the endpoints so that the sweep never mixes
// infinities into score arithmetic: -inf restricts the argmax to seen
// columns, +inf to unseen columns.
struct Bias {
    int kind = 0; // -1: -inf, 0: finite, +1: +inf
    double value = 0.0;

    static Bias neg_inf() { return {-1, 0.0}; }
    static Bias pos_inf() { return {+1, 0.0}; }
    static Bias finite(double v) { return {0, v}; }

    std::string str() const {
        if (kind < 0) return "-inf";
        if (kind > 0) return "inf";
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        return buf;
    }
};

struct ScoreMatrix {
    Tensor2D scores;                           // num_images x |Y_xi|
    std::vector<CompositionLabel> pair_index;  // column order, canonical
    std::vector<char> seen_mask;               // column is a seen pair
    std::vector<char> feasible;                // column survives feasibility masking

    int num_images() const { return scores.rows; }
    int num_pairs() const { return scores.cols; }
};

// Hard feasibility decisions: xi[s][o] = (edge_prob >= tau), seen pairs
// forced feasible regardless of tau.
struct FeasibilityMask {
    Tensor2D xi; // |S| x |O|, entries 0/1
    double tau = 0.2;
};

inline Tensor2D feasibility_scores(const Tensor2D& z, int n_states) {
    return decode_edges(z, n_states);
}

inline FeasibilityMask make_feasibility_mask(const Tensor2D& edge_probs, double tau,
                                             const std::vector<CompositionLabel>& seen_pairs) {
    if (tau < 0.0 || tau > 1.0) throw error("feasibility: tau must be in [0, 1]");
    FeasibilityMask mask;
    mask.tau = tau;
    mask.xi = Tensor2D(edge_probs.rows, edge_probs.cols);
    for (size_t i = 0; i < edge_probs.size(); ++i)
        mask.xi.data[i] = edge_probs.data[i] >= tau ? 1.0 : 0.0;
    for (const auto& y : seen_pairs) mask.xi.at(y.state_idx, y.object_idx) = 1.0;
    return mask;
}

// Columns whose pair is infeasible are excluded from every argmax; seen
// columns are never masked.
inline ScoreMatrix apply_feasibility(ScoreMatrix scores, const FeasibilityMask& mask) {
    for (int c = 0; c < scores.num_pairs(); ++c) {
        if (scores.seen_mask[c]) continue;
        const auto& y = scores.pair_index[c];
        if (mask.xi.at(y.state_idx, y.object_idx) == 0.0) scores.feasible[c] = 0;
    }
    return scores;
}

// Top-1 column for one image at a given bias; ties go to the lowest column.
inline int predict_column(const ScoreMatrix& sm, int row, const Bias& bias) {
    const int cols = sm.num_pairs();
    int best = -1;
    double best_val = 0.0;
    auto consider = [&](int c, double v) {
        if (best < 0 || v > best_val) {
            best = c;
            best_val = v;
        }
    };
    if (bias.kind < 0) {
        for (int c = 0; c < cols; ++c)
            if (sm.seen_mask[c]) consider(c, sm.scores.at(row, c));
        if (best >= 0) return best;
        for (int c = 0; c < cols; ++c)
            if (sm.feasible[c]) consider(c, sm.scores.at(row, c));
        return best;
    }
    if (bias.kind > 0) {
        for (int c = 0; c < cols; ++c)
            if (!sm.seen_mask[c] && sm.feasible[c]) consider(c, sm.scores.at(row, c));
        if (best >= 0) return best;
        for (int c = 0; c < cols; ++c)
            if (sm.seen_mask[c]) consider(c, sm.scores.at(row, c));
        return best;
    }
    for (int c = 0; c < cols; ++c) {
        if (!sm.feasible[c]) continue;
        const double v = sm.seen_mask[c] ? sm.scores.at(row, c) : sm.scores.at(row, c) + bias.value;
        consider(c, v);
    }
    return best;
}

struct CurvePoint {
    Bias bias;
    double seen_acc = 0.0;
    double unseen_acc = 0.0;
};

// Trapezoidal area under the (seen, unseen) accuracy curve. Both accuracies
// are monotone in the bias, so sorting by seen ascending with unseen
// descending on ties reproduces the sweep in descending-bias order and keeps
// tied points on the upper envelope.
inline double auc_from_curve(std::vector<CurvePoint> curve) {
    std::stable_sort(curve.begin(), curve.end(), [](const CurvePoint& a, const CurvePoint& b) {
        if (a.seen_acc != b.seen_acc) return a.seen_acc < b.seen_acc;
        return a.unseen_acc > b.unseen_acc;
    });
    double auc = 0.0;
    for (size_t i = 1; i < curve.size(); ++i)
        auc += (curve[i].seen_acc - curve[i - 1].seen_acc) *
               (curve[i].unseen_acc + curve[i - 1].unseen_acc) * 0.5;
    return auc;
}

inline double harmonic_mean(double s, double u) {
    return s + u > 0.0 ? 2.0 * s * u / (s + u) : 0.0;
}

inline double best_hm_from_curve(const std::vector<CurvePoint>& curve) {
    double best = 0.0;
    for (const auto& p : curve) best = std::max(best, harmonic_mean(p.seen_acc, p.unseen_acc));
    return best;
}

struct EvalReport {
    std::vector<CurvePoint> curve;
    double auc = 0.0;
    double best_hm = 0.0;
    double best_seen = 0.0;
    double best_unseen = 0.0;
    double state_acc = 0.0;
    double object_acc = 0.0;
    Bias hm_bias;
    World world = World::ClosedWorld;
    double tau_used = -1.0; // -1: no feasibility masking applied
};

// Candidate biases follow the TMN sweep: per unseen-labeled image, the gap
// between its best seen and best unseen column score, shifted by a small
// epsilon so the unseen column wins at its own bias, deduplicated and
// subsampled to n_bias_points, plus the two symbolic endpoints.
constexpr double kBiasEpsilon = 1e-4;

inline std::vector<Bias> candidate_biases(const ScoreMatrix& sm,
                                          const std::vector<int>& label_cols,
                                          int n_bias_points) {
    if (n_bias_points < 1) throw error("evaluate: n_bias_points must be >= 1");
    std::vector<double> gaps;
    for (int i = 0; i < sm.num_images(); ++i) {
        if (sm.seen_mask[label_cols[i]]) continue;
        bool have_seen = false, have_unseen = false;
        double best_seen = 0.0, best_unseen = 0.0;
        for (int c = 0; c < sm.num_pairs(); ++c) {
            if (!sm.feasible[c]) continue;
            const double v = sm.scores.at(i, c);
            if (sm.seen_mask[c]) {
                if (!have_seen || v > best_seen) best_seen = v, have_seen = true;
            } else {
                if (!have_unseen || v > best_unseen) best_unseen = v, have_unseen = true;
            }
        }
        if (have_seen && have_unseen) gaps.push_back(best_seen - best_unseen + kBiasEpsilon);
    }
    std::sort(gaps.begin(), gaps.end());
    gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());

    std::vector<Bias> biases;
    biases.push_back(Bias::neg_inf());
    if (static_cast<int>(gaps.size()) <= n_bias_points) {
        for (double g : gaps) biases.push_back(Bias::finite(g));
    } else if (n_bias_points == 1) {
        biases.push_back(Bias::finite(gaps.front()));
    } else {
        size_t prev = static_cast<size_t>(-1);
        for (int i = 0; i < n_bias_points; ++i) {
            const size_t idx = static_cast<size_t>(i) * (gaps.size() - 1) /
                               static_cast<size_t>(n_bias_points - 1);
            if (idx != prev) biases.push_back(Bias::finite(gaps[idx]));
            prev = idx;
        }
    }
    biases.push_back(Bias::pos_inf());
    return biases;
}

inline EvalReport evaluate_gczsl(const ScoreMatrix& sm,
                                 const std::vector<CompositionLabel>& test_labels,
                                 int n_bias_points) {
    if (static_cast<size_t>(sm.num_images()) != test_labels.size())
        throw error("evaluate: label count does not match score rows");
    std::map<CompositionLabel, int> col_of;
    for (size_t c = 0; c < sm.pair_index.size(); ++c)
        col_of[sm.pair_index[c]] = static_cast<int>(c);
    std::vector<int> label_cols(test_labels.size());
    for (size_t i = 0; i < test_labels.size(); ++i) {
        auto it = col_of.find(test_labels[i]);
        if (it == col_of.end())
            throw error("evaluate: test label (" + std::to_string(test_labels[i].state_idx) +
                        ", " + std::to_string(test_labels[i].object_idx) +
                        ") missing from pair table");
        label_cols[i] = it->second;
    }

    int n_seen_imgs = 0, n_unseen_imgs = 0;
    for (int c : label_cols) (sm.seen_mask[c] ? n_seen_imgs : n_unseen_imgs)++;

    EvalReport report;
    const std::vector<Bias> biases = candidate_biases(sm, label_cols, n_bias_points);
    for (const Bias& b : biases) {
        int seen_hits = 0, unseen_hits = 0;
        for (int i = 0; i < sm.num_images(); ++i) {
            const int pred = predict_column(sm, i, b);
            if (pred != label_cols[i]) continue;
            (sm.seen_mask[label_cols[i]] ? seen_hits : unseen_hits)++;
        }
        CurvePoint p;
        p.bias = b;
        p.seen_acc = n_seen_imgs > 0 ? static_cast<double>(seen_hits) / n_seen_imgs : 0.0;
        p.unseen_acc = n_unseen_imgs > 0 ? static_cast<double>(unseen_hits) / n_unseen_imgs : 0.0;
        report.curve.push_back(p);
    }

    report.auc = auc_from_curve(report.curve);
    report.best_seen = report.curve.front().seen_acc;    // bias = -inf
    report.best_unseen = report.curve.back().unseen_acc; // bias = +inf
    report.best_hm = 0.0;
    report.hm_bias = report.curve.front().bias;
    for (const auto& p : report.curve) {
        const double hm = harmonic_mean(p.seen_acc, p.unseen_acc);
        if (hm > report.best_hm) {
            report.best_hm = hm;
            report.hm_bias = p.bias;
        }
    }

    int state_hits = 0, object_hits = 0;
    for (int i = 0; i < sm.num_images(); ++i) {
        const int pred = predict_column(sm, i, report.hm_bias);
        if (pred < 0) continue;
        if (sm.pair_index[pred].state_idx == test_labels[i].state_idx) ++state_hits;
        if (sm.pair_index[pred].object_idx == test_labels[i].object_idx) ++object_hits;
    }
    if (sm.num_images() > 0) {
        report.state_acc = static_cast<double>(state_hits) / sm.num_images();
        report.object_acc = static_cast<double>(object_hits) / sm.num_images();
    }
    return report;
}

// Grid search for the feasibility threshold, maximizing validation best-HM;
// ties break toward the smaller tau.
inline double calibrate_tau(const ScoreMatrix& val_scores,
                            const std::vector<CompositionLabel>& val_labels,
                            const Tensor2D& edge_probs, std::vector<double> grid,
                            const std::vector<CompositionLabel>& seen_pairs,
                            int n_bias_points) {
    if (grid.empty()) throw error("calibrate_tau: empty grid");
    if (val_labels.empty()) throw error("calibrate_tau: empty validation set");
    std::sort(grid.begin(), grid.end());
    double best_tau = grid.front();
    double best_hm = -1.0;
    for (double tau : grid) {
        const ScoreMatrix masked =
            apply_feasibility(val_scores, make_feasibility_mask(edge_probs, tau, seen_pairs));
        const EvalReport r = evaluate_gczsl(masked, val_labels, n_bias_points);
        if (r.best_hm > best_hm) {
            best_hm = r.best_hm;
            best_tau = tau;
        }
    }
    return best_tau;
}

inline std::vector<double> default_tau_grid() {
    return {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
}

// ---- score matrix construction ----

// a * b^T with rows of `a` processed in parallel; output identical for any
// thread count.
inline Tensor2D parallel_matmul_nt(const Tensor2D& a, const Tensor2D& b, int threads) {
    if (threads <= 1 || a.rows < 2 * threads) return matmul_nt_value(a, b);
    Tensor2D c(a.rows, b.rows);
    std::vector<std::thread> pool;
    const int chunk = (a.rows + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(a.rows, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end]() {
            for (int i = begin; i < end; ++i)
                for (int j = 0; j < b.rows; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(j, k);
                    c.at(i, j) = s;
                }
        });
    }
    for (auto& th : pool) th.join();
    return c;
}

// Scores kappa(phi_e(e), phi_i(x)) over a sample list; z is the posterior
// mean (deterministic inference).
inline ScoreMatrix compute_scores(const Dataset& ds, const ModelParams& params,
                                  const Tensor2D& mu, const std::vector<Sample>& samples,
                                  World world, int threads = 1) {
    ScoreMatrix sm;
    sm.pair_index = ds.splits.output_space(ds.vocab, world);
    sm.seen_mask.resize(sm.pair_index.size());
    sm.feasible.assign(sm.pair_index.size(), 1);
    for (size_t c = 0; c < sm.pair_index.size(); ++c)
        sm.seen_mask[c] = ds.splits.is_seen(sm.pair_index[c]) ? 1 : 0;

    const Tensor2D pair_emb = pair_embeddings(mu, ds.vocab.n_states(), sm.pair_index);
    const Tensor2D projected_pairs = project_pairs(pair_emb, params.proj);
    std::vector<int> image_ids;
    image_ids.reserve(samples.size());
    for (const auto& s : samples) image_ids.push_back(s.image_id);
    const Tensor2D projected_images =
        project_images(ds.features.rows_for(image_ids), params.proj);
    sm.scores = parallel_matmul_nt(projected_images, projected_pairs, threads);
    return sm;
}

// ---- image retrieval ----

struct RetrievalQuery {
    int query_row = 0;    // row in the database sample list
    int target_state = 0; // requested state for the modified image
};

struct RetrievalReport {
    std::vector<std::pair<int, double>> recall_at; // (k, R@k), k ascending
    size_t num_queries = 0;
    size_t num_database = 0;
};

// Multimodal retrieval: predict the query image's object at the model's best
// bias, pair it with the requested state, embed via phi_e, and rank the
// database by kappa. The query image is excluded from its own candidates;
// ground truth is any database image labeled (target_state, query's true
// object). Queries without a ground-truth match are skipped.
inline RetrievalReport evaluate_retrieval(const std::vector<RetrievalQuery>& queries,
                                          const Dataset& ds, const ModelParams& params,
                                          const Tensor2D& mu,
                                          const std::vector<Sample>& database,
                                          World world, const Bias& model_bias,
                                          std::vector<int> k_list, int threads = 1) {
    std::sort(k_list.begin(), k_list.end());
    k_list.erase(std::unique(k_list.begin(), k_list.end()), k_list.end());
    if (k_list.empty() || k_list.front() < 1)
        throw error("evaluate_retrieval: k values must be >= 1");
    if (database.size() < 2) throw error("evaluate_retrieval: database too small");
    if (static_cast<size_t>(k_list.back()) > database.size() - 1)
        throw error("evaluate_retrieval: k larger than database");

    const ScoreMatrix sm = compute_scores(ds, params, mu, database, world, threads);
    std::vector<int> db_ids;
    db_ids.reserve(database.size());
    for (const auto& s : database) db_ids.push_back(s.image_id);
    const Tensor2D projected_db = project_images(ds.features.rows_for(db_ids), params.proj);

    RetrievalReport report;
    report.num_database = database.size();
    std::vector<long> hits(k_list.size(), 0);

    for (const auto& q : queries) {
        if (q.query_row < 0 || q.query_row >= static_cast<int>(database.size()))
            throw error("evaluate_retrieval: query row out of range");
        if (q.target_state < 0 || q.target_state >= ds.vocab.n_states())
            throw error("evaluate_retrieval: target state out of range");
        const CompositionLabel truth{q.target_state, database[q.query_row].label.object_idx};
        bool has_truth = false;
        for (size_t i = 0; i < database.size() && !has_truth; ++i)
            if (static_cast<int>(i) != q.query_row && database[i].label == truth) has_truth = true;
        if (!has_truth) continue;

        const int pred_col = predict_column(sm, q.query_row, model_bias);
        const CompositionLabel target{q.target_state, sm.pair_index[pred_col].object_idx};
        const Tensor2D target_emb =
            project_pairs(pair_embeddings(mu, ds.vocab.n_states(), {target}), params.proj);

        // rank database images by similarity, descending, ties by index
        std::vector<std::pair<double, int>> ranked;
        ranked.reserve(database.size() - 1);
        for (size_t i = 0; i < database.size(); ++i) {
            if (static_cast<int>(i) == q.query_row) continue;
            double sim = 0.0;
            for (int j = 0; j < projected_db.cols; ++j)
                sim += target_emb.at(0, j) * projected_db.at(static_cast<int>(i), j);
            ranked.emplace_back(-sim, static_cast<int>(i));
        }
        std::sort(ranked.begin(), ranked.end());
        int truth_rank = -1;
        for (size_t pos = 0; pos < ranked.size(); ++pos) {
            if (database[ranked[pos].second].label == truth) {
                truth_rank = static_cast<int>(pos) + 1;
                break;
            }
        }
        ++report.num_queries;
        for (size_t ki = 0; ki < k_list.size(); ++ki)
            if (truth_rank > 0 && truth_rank <= k_list[ki]) ++hits[ki];
    }

    for (size_t ki = 0; ki < k_list.size(); ++ki)
        report.recall_at.emplace_back(
            k_list[ki], report.num_queries > 0
                            ? static_cast<double>(hits[ki]) / static_cast<double>(report.num_queries)
                            : 0.0);
    return report;
}

// One query per database image: a seeded random requested state, different
// from the image's own state, for which the database holds a ground-truth
// match. Images with no such state are skipped.
inline std::vector<RetrievalQuery> default_retrieval_queries(const std::vector<Sample>& database,
                                                             int n_states, uint64_t seed) {
    // states available per object among database images
    std::map<int, std::set<int>> states_of_object;
    std::map<CompositionLabel, int> label_count;
    for (const auto& s : database) {
        states_of_object[s.label.object_idx].insert(s.label.state_idx);
        ++label_count[s.label];
    }
    Rng rng(derive_seed(seed, "retrieval_queries"));
    std::vector<RetrievalQuery> queries;
    for (size_t i = 0; i < database.size(); ++i) {
        const auto& lab = database[i].label;
        std::vector<int> candidates;
        for (int st : states_of_object[lab.object_idx]) {
            if (st == lab.state_idx) continue;
            if (st < 0 || st >= n_states) continue;
            candidates.push_back(st);
        }
        if (candidates.empty()) continue;
        const int pick = candidates[rng.uniform_int(candidates.size())];
        queries.push_back({static_cast<int>(i), pick});
    }
    return queries;
}

} // namespace vgce
