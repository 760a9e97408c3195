#include <doctest.h>

#include "vgce/bench.hpp"

using namespace vgce;

TEST_CASE("node counts for the three benchmark shapes") {
    BenchConfig cfg;
    cfg.measure = false;
    const auto rows = bench_graph(table1_shapes(), cfg);
    REQUIRE(rows.size() == 3);

    CHECK(rows[0].name == "mit-states");
    CHECK(rows[0].n_nodes == 360);
    CHECK(rows[0].ow_pairs == 28175);
    CHECK(rows[0].n_cge_ow == 28535);
    CHECK(rows[0].n_cge_cw == 360 + 1962);
    CHECK(rows[0].cost_ratio_ow == doctest::Approx(28535.0 / 360.0)); // ~79.3

    CHECK(rows[1].name == "ut-zappos");
    CHECK(rows[1].n_nodes == 28);
    CHECK(rows[1].ow_pairs == 192);
    CHECK(rows[1].n_cge_ow == 220);

    CHECK(rows[2].name == "c-gqa");
    CHECK(rows[2].n_nodes == 1323);
    CHECK(rows[2].ow_pairs == 394110);
    CHECK(rows[2].n_cge_ow == 395433);
}

TEST_CASE("csv output carries the node-count columns") {
    BenchConfig cfg;
    cfg.measure = false;
    const std::string csv = bench_csv(bench_graph(table1_shapes(), cfg));
    CHECK(csv.find("360") != std::string::npos);
    CHECK(csv.find("28535") != std::string::npos);
    CHECK(csv.find("28,") != std::string::npos);
    CHECK(csv.find("220") != std::string::npos);
    CHECK(csv.find("1323") != std::string::npos);
    CHECK(csv.find("395433") != std::string::npos);
    CHECK(csv.find("n_cge_ow") != std::string::npos);
}

TEST_CASE("empty shape list is rejected") {
    BenchConfig cfg;
    CHECK_THROWS_AS(bench_graph({}, cfg), error);
}

TEST_CASE("a measured epoch on a small shape produces positive timings") {
    BenchShape tiny{"tiny", 6, 5, 10};
    BenchConfig cfg;
    cfg.m = 4;
    cfg.hidden = 4;
    cfg.h = 2;
    const auto rows = bench_graph({tiny}, cfg);
    CHECK(rows[0].ms_primitive >= 0.0);
    CHECK(rows[0].ms_cge_ow >= 0.0);
    CHECK(rows[0].n_cge_ow == 11 + 30);
}

TEST_CASE("random bipartite bench graphs respect the requested size") {
    const ConceptGraph g = detail::random_bipartite_graph(100, 3.0, 4, 5);
    CHECK(g.n_nodes() == 100);
    CHECK(g.n_edges() == 300);
    CHECK(g.node_features.rows == 100);
    for (const auto& e : g.edges) {
        CHECK(e.state_idx < g.n_states);
        CHECK(e.object_idx < g.n_objects);
    }
}
