#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "vgce/composer.hpp"
#include "vgce/data_model.hpp"
#include "vgce/evaluation.hpp"

namespace vgce {

// Run configuration for the CLI. Parsing is strict: unknown keys anywhere in
// the document are rejected, so a typo in a hyperparameter name fails loudly
// instead of silently using a default.
struct RunConfig {
    std::string dataset_dir;
    World world = World::ClosedWorld;

    struct Model {
        int h = 16;
        int k = 16;
        int hidden = 64;
        int layers = 2;
        double kl_weight = 1.0;
    } model;

    struct Train {
        double lr = 5e-5;
        double lambda_ei = 10.0;
        double lambda_ie = 0.01;
        int batch_size = 128;
        int epochs = 100;
        uint64_t seed = 0;
        int pair_cap = 50000;
        int neg_samples = 8192;
        double temperature = 1.0;
    } train;

    struct Eval {
        int n_bias_points = 50;
        double tau = 0.2;
        std::vector<double> tau_grid = default_tau_grid();
        bool calibrate = false;
        std::vector<int> k_list = {1, 10};
    } eval;

    std::string output_dir;

    TrainConfig train_config() const {
        TrainConfig c;
        c.lr = train.lr;
        c.lambda_ei = train.lambda_ei;
        c.lambda_ie = train.lambda_ie;
        c.batch_size = train.batch_size;
        c.epochs = train.epochs;
        c.seed = train.seed;
        c.pair_cap = train.pair_cap;
        c.neg_samples = train.neg_samples;
        c.temperature = train.temperature;
        c.h = model.h;
        c.k = model.k;
        c.hidden = model.hidden;
        c.layers = model.layers;
        c.kl_weight = model.kl_weight;
        return c;
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& where) {
    if (!j.is_object()) throw error("config: '" + where + "' must be an object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw error("config: unknown key '" + key + "' in " + where);
}

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(
        j, {"dataset_dir", "world", "model", "train", "eval", "output_dir"}, "config root");
    RunConfig c;
    detail::read_if(j, "dataset_dir", c.dataset_dir);
    detail::read_if(j, "output_dir", c.output_dir);
    if (j.contains("world")) {
        const std::string w = j.at("world").get<std::string>();
        if (w == "closed")
            c.world = World::ClosedWorld;
        else if (w == "open")
            c.world = World::OpenWorld;
        else
            throw error("config: world must be 'closed' or 'open', got '" + w + "'");
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        detail::reject_unknown_keys(m, {"h", "k", "hidden", "L", "kl_weight"}, "model");
        detail::read_if(m, "h", c.model.h);
        detail::read_if(m, "k", c.model.k);
        detail::read_if(m, "hidden", c.model.hidden);
        detail::read_if(m, "L", c.model.layers);
        detail::read_if(m, "kl_weight", c.model.kl_weight);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        detail::reject_unknown_keys(t,
                                    {"lr", "lambda_ei", "lambda_ie", "batch_size", "epochs",
                                     "seed", "pair_cap", "neg_samples", "temperature"},
                                    "train");
        detail::read_if(t, "lr", c.train.lr);
        detail::read_if(t, "lambda_ei", c.train.lambda_ei);
        detail::read_if(t, "lambda_ie", c.train.lambda_ie);
        detail::read_if(t, "batch_size", c.train.batch_size);
        detail::read_if(t, "epochs", c.train.epochs);
        detail::read_if(t, "seed", c.train.seed);
        detail::read_if(t, "pair_cap", c.train.pair_cap);
        detail::read_if(t, "neg_samples", c.train.neg_samples);
        detail::read_if(t, "temperature", c.train.temperature);
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        detail::reject_unknown_keys(
            e, {"n_bias_points", "tau", "tau_grid", "calibrate", "k_list"}, "eval");
        detail::read_if(e, "n_bias_points", c.eval.n_bias_points);
        detail::read_if(e, "tau", c.eval.tau);
        detail::read_if(e, "tau_grid", c.eval.tau_grid);
        detail::read_if(e, "calibrate", c.eval.calibrate);
        detail::read_if(e, "k_list", c.eval.k_list);
    }
    if (c.eval.tau < 0.0 || c.eval.tau > 1.0)
        throw error("config: eval.tau must be in [0, 1]");
    return c;
}

inline nlohmann::json run_config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["dataset_dir"] = c.dataset_dir;
    j["world"] = world_name(c.world);
    j["model"] = {{"h", c.model.h},
                  {"k", c.model.k},
                  {"hidden", c.model.hidden},
                  {"L", c.model.layers},
                  {"kl_weight", c.model.kl_weight}};
    j["train"] = {{"lr", c.train.lr},
                  {"lambda_ei", c.train.lambda_ei},
                  {"lambda_ie", c.train.lambda_ie},
                  {"batch_size", c.train.batch_size},
                  {"epochs", c.train.epochs},
                  {"seed", c.train.seed},
                  {"pair_cap", c.train.pair_cap},
                  {"neg_samples", c.train.neg_samples},
                  {"temperature", c.train.temperature}};
    j["eval"] = {{"n_bias_points", c.eval.n_bias_points},
                 {"tau", c.eval.tau},
                 {"tau_grid", c.eval.tau_grid},
                 {"calibrate", c.eval.calibrate},
                 {"k_list", c.eval.k_list}};
    j["output_dir"] = c.output_dir;
    return j;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
    return run_config_to_json(a) == run_config_to_json(b);
}

inline RunConfig load_run_config(const std::string& path) {
    nlohmann::json j;
    try {
        std::ifstream in(path);
        if (!in) throw error("cannot open config " + path);
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw error("config parse error in " + path + ": " + e.what());
    }
    return run_config_from_json(j);
}

} // namespace vgce
