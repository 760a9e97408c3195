#include <doctest.h>

#include "vgce/checkpoint.hpp"
#include "vgce/composer.hpp"
#include "vgce/synthetic.hpp"

using namespace vgce;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.n_states = 6;
    spec.n_objects = 5;
    spec.seen_fraction = 0.5;
    spec.unseen_fraction = 0.2;
    spec.d = 8;
    spec.m = 6;
    spec.samples_per_pair = 4;
    spec.seed = 50;
    return spec;
}

TrainConfig small_config(int epochs) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = 16;
    cfg.lr = 1e-3;
    cfg.h = 4;
    cfg.hidden = 8;
    cfg.k = 6;
    cfg.kl_weight = 0.2;
    cfg.seed = 3;
    return cfg;
}

} // namespace

TEST_CASE("zero epochs returns the initial parameters unchanged") {
    Dataset ds = generate_synthetic(small_spec());
    TrainConfig cfg = small_config(0);
    TrainResult result = train(ds, cfg);
    CHECK(result.log.empty());

    ModelDims dims;
    dims.m = 6;
    dims.hidden = cfg.hidden;
    dims.h = cfg.h;
    dims.k = cfg.k;
    dims.d = 8;
    dims.layers = cfg.layers;
    ModelParams fresh = init_params(dims, cfg.seed);
    bool equal = true;
    const auto a = result.params.tensors();
    const auto b = fresh.tensors();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i]->data != b[i]->data) equal = false;
    CHECK(equal);
}

TEST_CASE("same seed trains to bitwise-identical checkpoints") {
    Dataset ds = generate_synthetic(small_spec());
    TrainConfig cfg = small_config(3);
    TrainResult r1 = train(ds, cfg);
    TrainResult r2 = train(ds, cfg);
    CHECK(encode_checkpoint(r1.params, cfg) == encode_checkpoint(r2.params, cfg));
}

TEST_CASE("different seeds train to different checkpoints") {
    Dataset ds = generate_synthetic(small_spec());
    TrainConfig cfg = small_config(2);
    TrainResult r1 = train(ds, cfg);
    cfg.seed = 4;
    TrainResult r2 = train(ds, cfg);
    CHECK(encode_checkpoint(r1.params, cfg) != encode_checkpoint(r2.params, cfg));
}

TEST_CASE("a short run reduces the training loss") {
    Dataset ds = generate_synthetic(small_spec());
    TrainConfig cfg = small_config(25);
    TrainResult result = train(ds, cfg);
    REQUIRE(result.log.size() == 25);
    CHECK(result.log.back().loss_total < result.log.front().loss_total);
    for (const auto& e : result.log) {
        CHECK(std::isfinite(e.loss_total));
        CHECK(e.loss_kl >= 0.0);
        CHECK(e.loss_ei >= 0.0);
        CHECK(e.loss_ie >= 0.0);
    }
}

TEST_CASE("non-finite values during training abort with a diagnostic") {
    Dataset ds = generate_synthetic(small_spec());
    for (double& v : ds.features.features.data) v = std::numeric_limits<double>::infinity();
    TrainConfig cfg = small_config(5);
    CHECK_THROWS_WITH_AS(train(ds, cfg), doctest::Contains("non-finite"), error);
}

TEST_CASE("checkpoint round trip preserves parameters and config") {
    Dataset ds = generate_synthetic(small_spec());
    TrainConfig cfg = small_config(2);
    TrainResult result = train(ds, cfg);

    const auto path = std::filesystem::temp_directory_path() / "vgce_ck_test.vgcm";
    save_checkpoint(path, result.params, cfg);
    Checkpoint back = load_checkpoint(path);
    std::filesystem::remove(path);

    CHECK(back.config.lr == doctest::Approx(cfg.lr));
    CHECK(back.config.seed == cfg.seed);
    CHECK(back.params.dims.h == cfg.h);
    // float32 storage: values match to single precision
    const auto orig = result.params.tensors();
    const auto loaded = back.params.tensors();
    REQUIRE(orig.size() == loaded.size());
    for (size_t i = 0; i < orig.size(); ++i) {
        REQUIRE(orig[i]->same_shape(*loaded[i]));
        for (size_t j = 0; j < orig[i]->size(); ++j)
            CHECK(loaded[i]->data[j] ==
                  doctest::Approx(orig[i]->data[j]).epsilon(1e-6));
    }
}

TEST_CASE("corrupted checkpoints are rejected") {
    Dataset ds = generate_synthetic(small_spec());
    TrainConfig cfg = small_config(0);
    TrainResult result = train(ds, cfg);
    const auto path = std::filesystem::temp_directory_path() / "vgce_ck_bad.vgcm";
    save_checkpoint(path, result.params, cfg);
    std::string data = read_file(path);
    data[0] = 'X';
    write_file(path, data);
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("bad magic"), error);
    std::filesystem::remove(path);
}
