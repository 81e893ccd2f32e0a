#include "qkdnet/topology.hpp"

#include "qkdnet/errors.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <set>

using namespace qkdnet;

namespace {

// Independent brute-force properness check: every pair of edges sharing a
// vertex must differ in color.
bool brute_force_proper(const WavelengthPlan& plan) {
    std::vector<std::pair<NodePair, int>> edges;
    for (const auto& [pair, ch] : plan.assignment) edges.emplace_back(pair, ch.color);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            if (edges[i].second != edges[j].second) continue;
            const auto& p = edges[i].first;
            const auto& q = edges[j].first;
            if (p.a == q.a || p.a == q.b || p.b == q.a || p.b == q.b) return false;
        }
    }
    return true;
}

} // namespace

TEST_SUITE_BEGIN("topology");

TEST_CASE("four users need three channels and Alice's links are all distinct") {
    const WavelengthPlan plan = color_complete_graph(4);
    CHECK(plan.color_count() == 3);
    CHECK(plan.assignment.size() == 6);
    const int ab = plan.channel(NodePair(0, 1)).color;
    const int ac = plan.channel(NodePair(0, 2)).color;
    const int ad = plan.channel(NodePair(0, 3)).color;
    CHECK(ab != ac);
    CHECK(ab != ad);
    CHECK(ac != ad);
}

TEST_CASE("two users share a single channel") {
    const WavelengthPlan plan = color_complete_graph(2);
    CHECK(plan.color_count() == 1);
    CHECK(plan.assignment.size() == 1);
}

TEST_CASE("five users need five channels and the coloring is proper") {
    const WavelengthPlan plan = color_complete_graph(5);
    CHECK(plan.color_count() == 5);
    CHECK(plan.assignment.size() == 10);
    CHECK(brute_force_proper(plan));
}

TEST_CASE("fewer than two users is an invalid network") {
    CHECK_THROWS_AS(color_complete_graph(1), InvalidArgumentError);
    CHECK_THROWS_AS(color_complete_graph(0), InvalidArgumentError);
    CHECK_THROWS_AS(color_complete_graph(-3), InvalidArgumentError);
}

TEST_CASE("generated plans validate for n in [2, 64] with the theorem's color count") {
    for (int n = 2; n <= 64; ++n) {
        const WavelengthPlan plan = color_complete_graph(n);
        const auto report = validate_plan(plan);
        CHECK_MESSAGE(report.ok, "n=", n);
        const int expected = (n % 2 == 0) ? n - 1 : n;
        CHECK(plan.color_count() == expected);
        CHECK(static_cast<int>(plan.assignment.size()) == n * (n - 1) / 2);
    }
}

TEST_CASE("coloring is deterministic") {
    const WavelengthPlan a = color_complete_graph(9);
    const WavelengthPlan b = color_complete_graph(9);
    REQUIRE(a.assignment.size() == b.assignment.size());
    for (const auto& [pair, ch] : a.assignment) CHECK(b.assignment.at(pair) == ch);
}

TEST_CASE("validate_plan reports a shared-vertex color clash naming the vertex") {
    WavelengthPlan plan;
    plan.nodes = {{0, "A"}, {1, "B"}, {2, "C"}};
    plan.assignment[NodePair(0, 1)] = ChannelIndex{0, 1530.0};
    plan.assignment[NodePair(0, 2)] = ChannelIndex{0, 1530.0}; // clash at A
    plan.assignment[NodePair(1, 2)] = ChannelIndex{1, 1531.0};
    const auto report = validate_plan(plan);
    CHECK_FALSE(report.ok);
    bool named = false;
    for (const auto& v : report.violations)
        if (v.find("vertex A") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("validate_plan accepts a correct plan") {
    CHECK(validate_plan(test::make_field_plan()).ok);
}

TEST_CASE("router spec from the measured matrix exposes the 1550->1530 suppression") {
    const RouterSpec spec = test::make_field_router();
    const ChannelIndex in{2, 1550.0};
    const ChannelIndex out{1, 1530.0};
    CHECK(spec.isolation_entry_db(in, out) == doctest::Approx(38.66));
    CHECK(spec.isolation_scope == IsolationScope::ThroughRouter);
    CHECK(spec.leak_suppression_db(in, out) == doctest::Approx(38.66)); // applied once
    CHECK(spec.insertion_loss_db({0, 1510.0}) == doctest::Approx(1.76));
}

TEST_CASE("default isolation fills by grid adjacency and applies per WDM") {
    const WavelengthPlan plan = color_complete_graph(4);
    const std::vector<double> insertion = {2.0, 2.0, 2.0};
    const RouterSpec spec = build_router_spec(plan, WavelengthGrid({1510.0, 1530.0, 1550.0}),
                                              30.0, 45.0, insertion);
    CHECK(spec.isolation_scope == IsolationScope::PerWdm);
    CHECK(spec.isolation_entry_db({0, 1510}, {1, 1530}) == doctest::Approx(30.0));
    CHECK(spec.isolation_entry_db({0, 1510}, {2, 1550}) == doctest::Approx(45.0));
    CHECK(spec.isolation_entry_db({1, 1530}, {2, 1550}) == doctest::Approx(30.0));
    // A leak crosses two multiplexers.
    CHECK(spec.leak_suppression_db({0, 1510}, {1, 1530}) == doctest::Approx(60.0));
    CHECK(spec.leak_suppression_db({0, 1510}, {2, 1550}) == doctest::Approx(90.0));
    // Diagonal carries the insertion loss.
    CHECK(spec.isolation_entry_db({1, 1530}, {1, 1530}) == doctest::Approx(2.0));
}

TEST_CASE("a grid with too few wavelengths is rejected") {
    const WavelengthPlan plan = color_complete_graph(4); // 3 colors
    const std::vector<double> insertion = {2.0, 2.0, 2.0};
    CHECK_THROWS_AS(
        build_router_spec(plan, WavelengthGrid({1510.0, 1530.0}), 30.0, 45.0, insertion),
        ConfigError);
}

TEST_CASE("insertion loss outside (0, 5) dB is rejected") {
    const WavelengthPlan plan = color_complete_graph(2);
    const std::vector<double> bad = {5.5};
    CHECK_THROWS_AS(build_router_spec(plan, WavelengthGrid({1530.0}), 30.0, 45.0, bad),
                    ConfigError);
    const std::vector<double> zero = {0.0};
    CHECK_THROWS_AS(build_router_spec(plan, WavelengthGrid({1530.0}), 30.0, 45.0, zero),
                    ConfigError);
}

TEST_CASE("a measured matrix below the adjacent floor is rejected") {
    const auto plan = test::make_field_plan();
    auto matrix = test::field_isolation_matrix();
    matrix[2][1] = 25.0; // below the 30 dB floor
    const std::vector<double> insertion = {1.76, 2.27, 2.45};
    CHECK_THROWS_AS(build_router_spec(plan, WavelengthGrid({1510.0, 1530.0, 1550.0}), 30.0, 45.0,
                                      insertion, &matrix),
                    ConfigError);
}

TEST_CASE("every port lists n-1 channels") {
    for (int n : {2, 4, 6, 8, 16}) {
        const WavelengthPlan plan = color_complete_graph(n);
        const auto grid = WavelengthGrid::standard(static_cast<std::size_t>(plan.color_count()));
        const std::vector<double> insertion(static_cast<std::size_t>(plan.color_count()), 2.0);
        const RouterSpec spec = build_router_spec(plan, grid, 30.0, 45.0, insertion);
        for (const auto& port : spec.ports) CHECK(port.size() == static_cast<std::size_t>(n - 1));
    }
}

TEST_CASE("routing passes exactly two WDMs on the pair's channel") {
    const RouterSpec spec = test::make_field_router();
    const RoutePath path = route(spec, {0, "A"}, {1, "B"});
    CHECK(path.wdm_hops() == 2);
    CHECK(path.elements.size() == 4);
    CHECK(path.elements.front().kind == PathElement::Kind::Fiber);
    CHECK(path.elements.back().kind == PathElement::Kind::Fiber);
    CHECK(path.channel.wavelength_nm == doctest::Approx(1530.0));
}

TEST_CASE("self-routing is an error") {
    const RouterSpec spec = test::make_field_router();
    CHECK_THROWS_AS(route(spec, {0, "A"}, {0, "A"}), RoutingError);
}

TEST_CASE("all 12 ordered pairs of the 4-user router route in two hops") {
    const RouterSpec spec = test::make_field_router();
    for (int s = 0; s < 4; ++s)
        for (int d = 0; d < 4; ++d) {
            if (s == d) continue;
            CHECK(route(spec, spec.plan.node(s), spec.plan.node(d)).wdm_hops() == 2);
        }
}

TEST_CASE("leak suppression for a channel against itself is undefined") {
    const RouterSpec spec = test::make_field_router();
    CHECK_THROWS_AS(spec.leak_suppression_db({1, 1530.0}, {1, 1530.0}), ConfigError);
}

TEST_CASE("wavelength grids must increase strictly") {
    CHECK_THROWS_AS(WavelengthGrid({1530.0, 1520.0}), InvalidArgumentError);
    CHECK_THROWS_AS(WavelengthGrid({1530.0, 1530.0}), InvalidArgumentError);
    CHECK_THROWS_AS(WavelengthGrid({-1.0}), InvalidArgumentError);
}

TEST_SUITE_END();
