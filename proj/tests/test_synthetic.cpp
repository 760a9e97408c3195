#include <doctest.h>

#include <filesystem>

#include "vgce/dataset_io.hpp"
#include "vgce/synthetic.hpp"

using namespace vgce;
namespace fs = std::filesystem;

namespace {

SyntheticSpec reference_spec() {
    SyntheticSpec spec;
    spec.n_states = 8;
    spec.n_objects = 6;
    spec.seen_fraction = 0.5;
    spec.unseen_fraction = 0.25;
    spec.d = 32;
    spec.m = 16;
    spec.samples_per_pair = 20;
    spec.noise_sigma = 0.1;
    spec.seed = 7;
    return spec;
}

} // namespace

TEST_CASE("reference spec counts, checked by enumerating the output") {
    Dataset ds = generate_synthetic(reference_spec());
    CHECK(ds.vocab.n_states() * ds.vocab.n_objects() == 48);
    CHECK(ds.splits.seen_pairs.size() == 24);
    CHECK(ds.splits.unseen_pairs.size() == 12);
    CHECK(ds.splits.train_samples.size() == 480); // 24 seen pairs * 20 samples

    // every train label enumerates a seen pair, eval labels cover both sets
    for (const auto& s : ds.splits.train_samples) CHECK(ds.splits.is_seen(s.label));
    size_t unseen_eval = 0;
    for (const auto& s : ds.splits.test_samples)
        if (ds.splits.is_unseen(s.label)) ++unseen_eval;
    CHECK(unseen_eval > 0);

    // image ids are densely packed row indices
    CHECK(ds.features.num_images() ==
          static_cast<int>(ds.splits.train_samples.size() + ds.splits.val_samples.size() +
                           ds.splits.test_samples.size()));
    CHECK(ds.features.dim() == 32);
    CHECK(ds.node_features.rows == 14);
    CHECK(ds.node_features.cols == 16);
}

TEST_CASE("same seed gives byte-identical directories") {
    const fs::path a = fs::temp_directory_path() / "vgce_synth_a";
    const fs::path b = fs::temp_directory_path() / "vgce_synth_b";
    fs::remove_all(a);
    fs::remove_all(b);
    save_dataset(a, generate_synthetic(reference_spec()));
    save_dataset(b, generate_synthetic(reference_spec()));
    for (const char* f : {"metadata.json", "features.bin", "node_features.bin"})
        CHECK(read_file(a / f) == read_file(b / f));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("different seeds give different data") {
    SyntheticSpec spec = reference_spec();
    Dataset d1 = generate_synthetic(spec);
    spec.seed = 8;
    Dataset d2 = generate_synthetic(spec);
    CHECK(d1.features.features.data != d2.features.features.data);
}

TEST_CASE("infeasible fractions are rejected") {
    SyntheticSpec spec = reference_spec();
    spec.seen_fraction = 1.0; // unseen_fraction > 0 no longer fits
    CHECK_THROWS_WITH_AS(generate_synthetic(spec), doctest::Contains("infeasible"), error);

    SyntheticSpec bad = reference_spec();
    bad.unseen_fraction = 0.0;
    CHECK_THROWS_AS(generate_synthetic(bad), error);

    SyntheticSpec tiny = reference_spec();
    tiny.unseen_fraction = 0.001; // rounds to zero unseen pairs
    CHECK_THROWS_AS(generate_synthetic(tiny), error);
}

TEST_CASE("generated dataset passes validation and builds a graph") {
    Dataset ds = generate_synthetic(reference_spec());
    CHECK_NOTHROW(ds.validate());
    ConceptGraph g = ds.graph();
    CHECK(g.n_edges() == ds.splits.seen_pairs.size());
}
