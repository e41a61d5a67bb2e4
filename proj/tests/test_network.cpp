#include "nmp/errors.hpp"
#include "nmp/network.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace nmp;
using namespace nmp::testing;

TEST_CASE("load_edge_list reads pairs with the default probability") {
    std::istringstream in("0 1\n1 2");
    const Network net = load_edge_list(in, 0.5);
    CHECK(net.node_count() == 3);
    CHECK(net.edge_count() == 2);
    CHECK(net.prob(0) == 0.5);
    CHECK(net.prob(1) == 0.5);
}

TEST_CASE("load_edge_list honours per-line probabilities and comments") {
    std::istringstream in("# header\n0 1 0.25   # trailing\n\n2 4\n");
    const Network net = load_edge_list(in, 0.1);
    CHECK(net.node_count() == 5);
    CHECK(net.prob(*net.find_edge(1, 0)) == 0.25);
    CHECK(net.prob(*net.find_edge(2, 4)) == 0.1);
    CHECK(net.degree(3) == 0); // gap id becomes an isolated node
}

TEST_CASE("load_edge_list errors") {
    SUBCASE("self-loop is a parse error with line number") {
        std::istringstream in("0 1\n0 0\n");
        try {
            load_edge_list(in, 0.5);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("malformed line") {
        std::istringstream in("0 1 0.2 7\n");
        CHECK_THROWS_AS(load_edge_list(in, 0.5), ParseError);
        std::istringstream in2("a b\n");
        CHECK_THROWS_AS(load_edge_list(in2, 0.5), ParseError);
    }
    SUBCASE("probability out of range") {
        std::istringstream in("0 1 1.5\n");
        CHECK_THROWS_AS(load_edge_list(in, 0.5), DomainError);
    }
    SUBCASE("duplicate edge in either orientation") {
        std::istringstream in("0 1\n1 0\n");
        CHECK_THROWS_AS(load_edge_list(in, 0.5), DuplicateEdgeError);
    }
}

TEST_CASE("karate club fixture") {
    const Network net = karate(0.15);
    CHECK(net.node_count() == 34);
    CHECK(net.edge_count() == 78);
    CHECK(net.degree(0) == 16);
    CHECK(net.degree(33) == 17);
    for (NodeId u = 0; u < net.node_count(); ++u)
        for (const auto& inc : net.neighbors(u)) CHECK(net.find_edge(inc.neighbor, u) == inc.edge);
}

TEST_CASE("coreness") {
    CHECK(coreness(triangle(0.5)) == std::vector<int>{2, 2, 2});
    CHECK(coreness(star_graph(3, 0.5)) == std::vector<int>{1, 1, 1, 1});

    const Network net = karate(0.15);
    const auto core = coreness(net);
    CHECK(*std::max_element(core.begin(), core.end()) == 4);
    // The 4-core of the karate club has 10 members.
    CHECK(std::count(core.begin(), core.end(), 4) == 10);
    for (NodeId v = 0; v < net.node_count(); ++v) CHECK(core[v] <= net.degree(v));
}

TEST_CASE("coreness agrees with a brute-force k-core definition") {
    // Node v is in the k-core iff it survives repeatedly deleting nodes of degree < k.
    StreamRng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Network net = random_loopy_graph(15, 12, rng, 0.5, 0.5);
        const auto core = coreness(net);
        for (int k = 0; k <= 6; ++k) {
            std::vector<char> alive(static_cast<std::size_t>(net.node_count()), 1);
            for (bool changed = true; changed;) {
                changed = false;
                for (NodeId v = 0; v < net.node_count(); ++v) {
                    if (!alive[v]) continue;
                    int d = 0;
                    for (const auto& inc : net.neighbors(v)) d += alive[inc.neighbor];
                    if (d < k) alive[v] = 0, changed = true;
                }
            }
            for (NodeId v = 0; v < net.node_count(); ++v) CHECK((core[v] >= k) == static_cast<bool>(alive[v]));
        }
    }
}

TEST_CASE("diameter") {
    CHECK(diameter(path_graph(4, 0.5)) == 3);
    CHECK(diameter(triangle(0.5)) == 1);
    CHECK(diameter(karate(0.15)) == 5);
    CHECK_THROWS_AS(diameter(make_graph(4, {{0, 1}, {2, 3}}, 0.5)), DomainError);
}

TEST_CASE("diameter equals the maximum eccentricity over per-node BFS") {
    StreamRng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Network net = random_loopy_graph(20, 8, rng, 0.5, 0.5);
        int ecc = 0;
        for (NodeId v = 0; v < net.node_count(); ++v) {
            const auto d = bfs_distances(net, v);
            ecc = std::max(ecc, *std::max_element(d.begin(), d.end()));
        }
        CHECK(diameter(net) == ecc);
    }
}

TEST_CASE("connected_components") {
    const Network path = path_graph(3, 0.5);
    const auto cut = connected_components(path.with_isolated(NodeSet{1}), true);
    REQUIRE(cut.size() == 3);
    CHECK(cut[0] == NodeSet{0});
    CHECK(cut[1] == NodeSet{1});
    CHECK(cut[2] == NodeSet{2});

    const auto whole = connected_components(karate(0.2));
    REQUIRE(whole.size() == 1);
    CHECK(whole[0].size() == 34);

    const Network two = make_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}, 0.5);
    const auto parts = connected_components(two);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].size() == 3);
    CHECK(parts[1].size() == 3);
}

TEST_CASE("NodeSet validation") {
    CHECK_THROWS_AS(NodeSet({1, 1}), UsageError);
    CHECK_THROWS_AS(NodeSet({-1}), UsageError);
    const NodeSet s{3, 1, 2};
    CHECK(s.to_string() == "1 2 3");
    CHECK_THROWS_AS(s.check_bounds(3), UsageError);
}
