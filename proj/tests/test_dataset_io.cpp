#include <doctest.h>

#include <filesystem>

#include "vgce/dataset_io.hpp"
#include "vgce/synthetic.hpp"

using namespace vgce;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SyntheticSpec tiny_spec() {
    SyntheticSpec spec;
    spec.n_states = 4;
    spec.n_objects = 3;
    spec.seen_fraction = 0.5;
    spec.unseen_fraction = 0.25;
    spec.d = 6;
    spec.m = 4;
    spec.samples_per_pair = 4;
    spec.seed = 11;
    return spec;
}

} // namespace

TEST_CASE("matrix file round trip") {
    TempDir dir("vgce_io_matrix");
    Tensor2D t = Tensor2D::from_rows(2, 3, {1.5, -2.25, 0.0, 8.0, 1e-3, -7.5});
    write_matrix_file(dir.path / "m.bin", t);
    Tensor2D back = read_matrix_file(dir.path / "m.bin");
    REQUIRE(back.same_shape(t));
    for (size_t i = 0; i < t.size(); ++i) CHECK(back.data[i] == doctest::Approx(t.data[i]));
}

TEST_CASE("matrix file rejects corruption") {
    TempDir dir("vgce_io_corrupt");
    Tensor2D t(3, 2);
    write_matrix_file(dir.path / "m.bin", t);

    SUBCASE("bad magic") {
        std::string data = read_file(dir.path / "m.bin");
        data[0] = 'X';
        write_file(dir.path / "m.bin", data);
        CHECK_THROWS_WITH_AS(read_matrix_file(dir.path / "m.bin"),
                             doctest::Contains("bad magic"), error);
    }
    SUBCASE("declared shape larger than payload") {
        std::string data = read_file(dir.path / "m.bin");
        data[8] = 50; // rows := 50
        write_file(dir.path / "m.bin", data);
        CHECK_THROWS_WITH_AS(read_matrix_file(dir.path / "m.bin"),
                             doctest::Contains("payload"), error);
    }
    SUBCASE("trailing bytes") {
        std::string data = read_file(dir.path / "m.bin") + "zz";
        write_file(dir.path / "m.bin", data);
        CHECK_THROWS_WITH_AS(read_matrix_file(dir.path / "m.bin"),
                             doctest::Contains("trailing"), error);
    }
    SUBCASE("unsupported version") {
        std::string data = read_file(dir.path / "m.bin");
        data[4] = 9;
        write_file(dir.path / "m.bin", data);
        CHECK_THROWS_WITH_AS(read_matrix_file(dir.path / "m.bin"),
                             doctest::Contains("version"), error);
    }
}

TEST_CASE("dataset save/load round trip is byte identical") {
    TempDir a("vgce_io_roundtrip_a");
    TempDir b("vgce_io_roundtrip_b");
    Dataset ds = generate_synthetic(tiny_spec());
    save_dataset(a.path, ds);
    Dataset loaded = load_dataset(a.path);
    save_dataset(b.path, loaded);
    for (const char* f : {"metadata.json", "features.bin", "node_features.bin"}) {
        CHECK(read_file(a.path / f) == read_file(b.path / f));
    }
}

TEST_CASE("loader validates cross-file references") {
    TempDir dir("vgce_io_validate");
    Dataset ds = generate_synthetic(tiny_spec());
    save_dataset(dir.path, ds);

    SUBCASE("well-formed directory loads") { CHECK_NOTHROW(load_dataset(dir.path)); }
    SUBCASE("missing metadata") {
        fs::remove(dir.path / "metadata.json");
        CHECK_THROWS_WITH_AS(load_dataset(dir.path), doctest::Contains("missing file"), error);
    }
    SUBCASE("missing features") {
        fs::remove(dir.path / "features.bin");
        CHECK_THROWS_WITH_AS(load_dataset(dir.path), doctest::Contains("missing file"), error);
    }
    SUBCASE("features.bin with too few rows names the file") {
        write_matrix_file(dir.path / "features.bin", Tensor2D(2, 6));
        CHECK_THROWS_WITH_AS(load_dataset(dir.path), doctest::Contains("features.bin"), error);
    }
    SUBCASE("node feature fallback when the file is absent") {
        fs::remove(dir.path / "node_features.bin");
        CHECK_THROWS_AS(load_dataset(dir.path), error);
        Dataset with_fallback = load_dataset(dir.path, World::ClosedWorld,
                                             NodeFeatureFallback{4, 123});
        CHECK(with_fallback.node_features.rows == with_fallback.vocab.n_nodes());
        CHECK(with_fallback.node_features.cols == 4);
    }
    SUBCASE("test label outside seen and unseen pairs") {
        nlohmann::json j = nlohmann::json::parse(read_file(dir.path / "metadata.json"));
        // relabel one test sample with a pair in neither split
        CompositionLabel hypothetical{-1, -1};
        for (int s = 0; s < ds.vocab.n_states() && hypothetical.state_idx < 0; ++s)
            for (int o = 0; o < ds.vocab.n_objects(); ++o) {
                CompositionLabel y{s, o};
                if (!ds.splits.is_seen(y) && !ds.splits.is_unseen(y)) {
                    hypothetical = y;
                    break;
                }
            }
        REQUIRE(hypothetical.state_idx >= 0);
        j["test"][0][1] = hypothetical.state_idx;
        j["test"][0][2] = hypothetical.object_idx;
        write_file(dir.path / "metadata.json", j.dump(2) + "\n");
        CHECK_THROWS_WITH_AS(load_dataset(dir.path), doctest::Contains("split violation"),
                             error);
    }
    SUBCASE("overlapping seen and unseen pairs") {
        nlohmann::json j = nlohmann::json::parse(read_file(dir.path / "metadata.json"));
        j["unseen_pairs"].push_back(j["seen_pairs"][0]);
        write_file(dir.path / "metadata.json", j.dump(2) + "\n");
        CHECK_THROWS_AS(load_dataset(dir.path), error);
    }
}
