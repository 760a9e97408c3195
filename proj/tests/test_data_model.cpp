#include <doctest.h>

#include <set>

#include "vgce/data_model.hpp"
#include "vgce/rng.hpp"

using namespace vgce;

namespace {

ConceptVocabulary make_vocab(int n_states, int n_objects) {
    ConceptVocabulary v;
    for (int s = 0; s < n_states; ++s) v.states.push_back("s" + std::to_string(s));
    for (int o = 0; o < n_objects; ++o) v.objects.push_back("o" + std::to_string(o));
    return v;
}

std::vector<CompositionLabel> random_pairs(int n_states, int n_objects, int count,
                                           uint64_t seed) {
    Rng rng(seed);
    std::set<CompositionLabel> chosen;
    while (static_cast<int>(chosen.size()) < count)
        chosen.insert({static_cast<int>(rng.uniform_int(n_states)),
                       static_cast<int>(rng.uniform_int(n_objects))});
    return {chosen.begin(), chosen.end()};
}

} // namespace

TEST_CASE("graph for a MIT-States-shaped split") {
    ConceptVocabulary vocab = make_vocab(115, 245);
    DatasetSplits splits;
    splits.seen_pairs = random_pairs(115, 245, 1262, 3);
    ConceptGraph g = build_graph(vocab, splits, Tensor2D(360, 8));
    CHECK(g.n_nodes() == 360);
    CHECK(g.n_edges() == 1262);
    // bipartiteness: every stored edge joins a state node and an object node
    size_t directed = 0;
    for (int node = 0; node < g.n_nodes(); ++node)
        for (int nb : g.neighbors[node]) {
            const bool node_is_state = node < vocab.n_states();
            const bool nb_is_state = nb < vocab.n_states();
            CHECK(node_is_state != nb_is_state);
            ++directed;
        }
    CHECK(directed == 2 * 1262); // symmetric adjacency
}

TEST_CASE("graph node count for the C-GQA shape") {
    ConceptVocabulary vocab = make_vocab(453, 870);
    CHECK(vocab.n_nodes() == 1323);
    DatasetSplits splits;
    ConceptGraph g = build_graph(vocab, splits, Tensor2D(1323, 4));
    CHECK(g.n_nodes() == 1323);
}

TEST_CASE("empty seen-pair set gives an edgeless graph") {
    ConceptVocabulary vocab = make_vocab(4, 3);
    DatasetSplits splits;
    ConceptGraph g = build_graph(vocab, splits, Tensor2D(7, 2));
    CHECK(g.n_edges() == 0);
    for (const auto& ns : g.neighbors) CHECK(ns.empty());
}

TEST_CASE("duplicate edge requests are idempotent") {
    ConceptVocabulary vocab = make_vocab(2, 2);
    DatasetSplits splits;
    splits.seen_pairs = {{0, 1}, {0, 1}, {1, 0}};
    ConceptGraph g = build_graph(vocab, splits, Tensor2D(4, 2));
    CHECK(g.n_edges() == 2);
}

TEST_CASE("node feature dimension mismatch is rejected") {
    ConceptVocabulary vocab = make_vocab(3, 3);
    DatasetSplits splits;
    CHECK_THROWS_AS(build_graph(vocab, splits, Tensor2D(5, 2)), error);
}

TEST_CASE("vocabulary invariants") {
    ConceptVocabulary empty;
    CHECK_THROWS_AS(empty.validate(), error);
    ConceptVocabulary dup = make_vocab(2, 2);
    dup.states[1] = dup.states[0];
    CHECK_THROWS_AS(dup.validate(), error);
    ConceptVocabulary blank = make_vocab(2, 2);
    blank.objects[0] = "";
    CHECK_THROWS_AS(blank.validate(), error);
}

TEST_CASE("split soundness is enforced") {
    ConceptVocabulary vocab = make_vocab(3, 3);
    DatasetSplits splits;
    splits.seen_pairs = {{0, 0}, {1, 1}};
    splits.unseen_pairs = {{2, 2}};

    SUBCASE("overlapping seen and unseen pairs") {
        splits.unseen_pairs.push_back({0, 0});
        splits.normalize();
        CHECK_THROWS_WITH_AS(splits.validate(vocab),
                             doctest::Contains("both seen and unseen"), error);
    }
    SUBCASE("train sample outside the seen pairs") {
        splits.normalize();
        splits.train_samples = {{0, {2, 2}}};
        CHECK_THROWS_WITH_AS(splits.validate(vocab),
                             doctest::Contains("outside the seen pairs"), error);
    }
    SUBCASE("test sample outside seen and unseen") {
        splits.normalize();
        splits.test_samples = {{0, {2, 0}}};
        CHECK_THROWS_AS(splits.validate(vocab), error);
    }
    SUBCASE("label outside the vocabulary") {
        splits.normalize();
        splits.train_samples = {{0, {5, 0}}};
        CHECK_THROWS_WITH_AS(splits.validate(vocab), doctest::Contains("outside vocabulary"),
                             error);
    }
}

TEST_CASE("open-world output space enumerates the full product") {
    ConceptVocabulary vocab = make_vocab(453, 870);
    DatasetSplits splits;
    splits.seen_pairs = {{0, 0}};
    splits.unseen_pairs = {{1, 1}};
    splits.normalize();
    const auto ow = splits.output_space(vocab, World::OpenWorld);
    CHECK(ow.size() == 394110); // 453 * 870
    const auto cw = splits.output_space(vocab, World::ClosedWorld);
    CHECK(cw.size() == 2);
}

TEST_CASE("bce pos weight counts non-edges per edge") {
    ConceptVocabulary vocab = make_vocab(2, 3);
    DatasetSplits splits;
    splits.seen_pairs = {{0, 0}, {1, 2}};
    ConceptGraph g = build_graph(vocab, splits, Tensor2D(5, 2));
    CHECK(g.bce_pos_weight() == doctest::Approx((6.0 - 2.0) / 2.0));
    DatasetSplits none;
    ConceptGraph g0 = build_graph(vocab, none, Tensor2D(5, 2));
    CHECK(g0.bce_pos_weight() == doctest::Approx(1.0)); // edgeless guard
}
