#include <doctest.h>

#include "vgce/config.hpp"

using namespace vgce;

TEST_CASE("defaults carry the published hyperparameters") {
    RunConfig cfg = run_config_from_json(nlohmann::json::object());
    CHECK(cfg.train.lr == doctest::Approx(5e-5));
    CHECK(cfg.train.lambda_ei == doctest::Approx(10.0));
    CHECK(cfg.train.lambda_ie == doctest::Approx(0.01));
    CHECK(cfg.train.batch_size == 128);
    CHECK(cfg.eval.tau == doctest::Approx(0.2));
    CHECK(cfg.world == World::ClosedWorld);
    CHECK(cfg.eval.tau_grid.size() == 10);
    CHECK(cfg.eval.tau_grid.front() == doctest::Approx(0.05));
    CHECK(cfg.eval.tau_grid.back() == doctest::Approx(0.5));
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_WITH_AS(run_config_from_json({{"learning_rate", 0.1}}),
                         doctest::Contains("unknown key"), error);
    CHECK_THROWS_WITH_AS(run_config_from_json({{"train", {{"lr", 0.1}, {"lrr", 0.2}}}}),
                         doctest::Contains("unknown key 'lrr'"), error);
    CHECK_THROWS_WITH_AS(run_config_from_json({{"model", {{"width", 8}}}}),
                         doctest::Contains("unknown key"), error);
    CHECK_THROWS_WITH_AS(run_config_from_json({{"eval", {{"taus", {0.1}}}}}),
                         doctest::Contains("unknown key"), error);
}

TEST_CASE("world parsing") {
    CHECK(run_config_from_json({{"world", "open"}}).world == World::OpenWorld);
    CHECK(run_config_from_json({{"world", "closed"}}).world == World::ClosedWorld);
    CHECK_THROWS_AS(run_config_from_json({{"world", "half-open"}}), error);
}

TEST_CASE("tau bounds are validated") {
    CHECK_THROWS_AS(run_config_from_json({{"eval", {{"tau", 1.2}}}}), error);
}

TEST_CASE("config round-trips through its JSON echo") {
    nlohmann::json j = {
        {"dataset_dir", "/data/x"},
        {"world", "open"},
        {"model", {{"h", 8}, {"k", 12}, {"hidden", 32}, {"L", 3}, {"kl_weight", 0.25}}},
        {"train",
         {{"lr", 1e-3}, {"lambda_ei", 5.0}, {"lambda_ie", 0.5}, {"batch_size", 64},
          {"epochs", 17}, {"seed", 99}, {"pair_cap", 1000}, {"neg_samples", 128},
          {"temperature", 0.5}}},
        {"eval",
         {{"n_bias_points", 25}, {"tau", 0.3}, {"tau_grid", {0.1, 0.2}}, {"calibrate", true},
          {"k_list", {1, 5, 10}}}},
        {"output_dir", "/tmp/out"},
    };
    RunConfig cfg = run_config_from_json(j);
    RunConfig back = run_config_from_json(run_config_to_json(cfg));
    CHECK(cfg == back);
    CHECK(back.model.layers == 3);
    CHECK(back.train.epochs == 17);
    CHECK(back.eval.k_list == std::vector<int>{1, 5, 10});
    CHECK(back.eval.calibrate);

    TrainConfig tc = back.train_config();
    CHECK(tc.hidden == 32);
    CHECK(tc.kl_weight == doctest::Approx(0.25));
    CHECK(tc.temperature == doctest::Approx(0.5));
}
