#include <doctest.h>

#include <random>
#include <sstream>

#include "blocksel/error.hpp"
#include "blocksel/graph.hpp"
#include "oracles.hpp"

using namespace blocksel;

namespace {

EdgeList parse(const std::string& text) {
    std::istringstream in(text);
    return load_edge_list(in);
}

Graph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
    std::bernoulli_distribution coin(p);
    std::vector<Edge> edges;
    for (node_t i = 0; i < n; ++i)
        for (node_t j = i + 1; j < n; ++j)
            if (coin(rng)) edges.push_back({i, j});
    return Graph(n, edges);
}

}  // namespace

TEST_CASE("edge list maps string ids in first-seen order") {
    auto el = parse("a b\nb c\n");
    CHECK(el.graph.num_nodes() == 3);
    CHECK(el.graph.num_edges() == 2);
    CHECK(el.graph.has_edge(0, 1));
    CHECK(el.graph.has_edge(1, 2));
    CHECK_FALSE(el.graph.has_edge(0, 2));
    CHECK(el.ids == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("self-loops are dropped and counted") {
    auto el = parse("0 0\n0 1\n");
    CHECK(el.graph.num_nodes() == 2);
    CHECK(el.graph.num_edges() == 1);
    CHECK(el.self_loops_dropped == 1);
}

TEST_CASE("symmetric duplicates collapse") {
    auto el = parse("1 2\n2 1\n1 2\n");
    CHECK(el.graph.num_nodes() == 2);
    CHECK(el.graph.num_edges() == 1);
    CHECK(el.duplicates_dropped == 2);
}

TEST_CASE("comments and blank lines are skipped") {
    auto el = parse("# header\n\n  \nx y\n# trailing\n");
    CHECK(el.graph.num_edges() == 1);
}

TEST_CASE("malformed lines report their line number") {
    try {
        parse("a b\nc\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse("a b c\n"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("# only a comment\n"), ParseError);
}

TEST_CASE("graph construction rejects self-loops and out-of-range nodes") {
    CHECK_THROWS_AS(Graph(3, {{1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Graph(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("write then load is the identity on canonical graphs") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        Graph g = random_graph(rng, 30, 0.1);
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < g.num_nodes(); ++i) ids.push_back("n" + std::to_string(i));
        std::ostringstream out;
        write_edge_list(out, g, ids);
        if (g.num_edges() == 0) continue;
        auto back = parse(out.str());
        // Re-map back through ids, since isolated nodes are not written.
        for (const Edge& e : back.graph.edges()) {
            const auto u = static_cast<node_t>(std::stoul(back.ids[e.u].substr(1)));
            const auto v = static_cast<node_t>(std::stoul(back.ids[e.v].substr(1)));
            CHECK(g.has_edge(u, v));
        }
        CHECK(back.graph.num_edges() == g.num_edges());
    }
}

TEST_CASE("index-labelled round trip is exact when first-seen order matches indices") {
    Graph g(4, {{0, 1}, {1, 2}, {2, 3}, {1, 3}});
    std::ostringstream out;
    write_edge_list(out, g);
    CHECK(parse(out.str()).graph == g);
}

TEST_CASE("largest component is re-indexed contiguously") {
    Graph g(5, {{0, 1}, {2, 3}, {3, 4}});
    auto sub = largest_connected_component(g);
    CHECK(sub.graph.num_nodes() == 3);
    CHECK(sub.graph.num_edges() == 2);
    CHECK(sub.new_to_old == std::vector<node_t>{2, 3, 4});
    CHECK(sub.old_to_new[0] == -1);
    CHECK(sub.old_to_new[4] == 2);
}

TEST_CASE("connected graph is its own largest component") {
    Graph g(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK(largest_connected_component(g).graph == g);
}

TEST_CASE("component size ties go to the component holding node 0") {
    Graph g(4, {{0, 1}, {2, 3}});
    auto sub = largest_connected_component(g);
    CHECK(sub.new_to_old == std::vector<node_t>{0, 1});
    Graph h(4, {{2, 3}, {0, 1}});
    CHECK(largest_connected_component(h).new_to_old == std::vector<node_t>{0, 1});
}

TEST_CASE("empty graph has an empty largest component") {
    auto sub = largest_connected_component(Graph(0, {}));
    CHECK(sub.graph.num_nodes() == 0);
}

TEST_CASE("largest component matches union-find and is connected") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        Graph g = random_graph(rng, 40, 0.04);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (const Edge& e : g.edges()) pairs.emplace_back(e.u, e.v);
        auto sizes = oracle::component_sizes(g.num_nodes(), pairs);
        auto sub = largest_connected_component(g);
        CHECK(sub.graph.num_nodes() == *std::max_element(sizes.begin(), sizes.end()));
        auto comp = connected_components(sub.graph);
        CHECK(std::all_of(comp.begin(), comp.end(), [](std::size_t c) { return c == 0; }));
    }
}

TEST_CASE("degree, density and average degree") {
    Graph k3(3, {{0, 1}, {0, 2}, {1, 2}});
    CHECK(degrees(k3) == std::vector<std::size_t>{2, 2, 2});
    CHECK(density(k3) == 1.0);
    CHECK(avg_degree(k3) == 2.0);

    CHECK(density(Graph(4, {})) == 0.0);

    Graph path(3, {{0, 1}, {1, 2}});
    CHECK(degrees(path) == std::vector<std::size_t>{1, 2, 1});
    CHECK(density(path) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(density(Graph(1, {})), std::invalid_argument);
}

TEST_CASE("labels follow the id table and skip unknown nodes") {
    std::vector<std::string> ids{"x", "y", "z"};
    std::istringstream in("# truth\nz 2\nx 1\ny 1\nw 3\n");
    CHECK(load_labels(in, ids) == std::vector<int>{1, 1, 2});
    std::istringstream missing("x 1\ny 2\n");
    CHECK_THROWS_AS(load_labels(missing, ids), ParseError);
    std::istringstream zero("x 0\ny 1\nz 1\n");
    CHECK_THROWS_AS(load_labels(zero, ids), ParseError);
}
