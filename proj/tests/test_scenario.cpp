#include "qkdnet/scenario.hpp"

#include "qkdnet/errors.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

using namespace qkdnet;

TEST_SUITE_BEGIN("scenario");

TEST_CASE("the bundled field scenario parses with the measured values") {
    const Scenario s = load_scenario_file(test::scenario_dir() + "/beijing.scn");
    CHECK(s.name == "beijing");
    REQUIRE(s.nodes.size() == 4);
    CHECK(s.nodes[0].label == "A");
    CHECK(s.node_names[0] == "Alice");
    CHECK(s.node_names[1] == "David");
    CHECK(s.node_names[3] == "Bob");

    CHECK(s.fibers.at(0).length_km == doctest::Approx(19.88));
    CHECK(s.fibers.at(1).length_km == doctest::Approx(22.8));
    CHECK(s.fibers.at(2).length_km == doctest::Approx(12.0));
    CHECK(s.fibers.at(3).length_km == doctest::Approx(19.88));

    REQUIRE(s.grid.size() == 3);
    CHECK(s.grid.at(0) == doctest::Approx(1510.0));
    CHECK(s.insertion_db_by_nm.at(1530.0) == doctest::Approx(2.27));
    REQUIRE(s.measured_isolation.has_value());
    CHECK(s.measured_isolation->at({1550.0, 1530.0}) == doctest::Approx(38.66));
    CHECK(s.measured_isolation->at({1510.0, 1550.0}) == doctest::Approx(51.01));
    CHECK(s.channel_nm.size() == 6);
    CHECK(s.channel_nm.at(NodePair(0, 1)) == doctest::Approx(1530.0));

    CHECK(s.eta == doctest::Approx(0.10));
    CHECK(s.mean_photon_number == doctest::Approx(0.1));
    CHECK(s.repetition_rate_hz == doctest::Approx(1e6));

    const auto& ab = s.link_physics.at(NodePair(0, 1));
    CHECK(ab.visibility == doctest::Approx(0.9977));
    CHECK(ab.dark_prob == doctest::Approx(9.7e-6));
    REQUIRE(ab.measured_path_loss_db.has_value());
    CHECK(*ab.measured_path_loss_db == doctest::Approx(16.44));
    CHECK_FALSE(ab.excess_error.has_value()); // calibrate
    REQUIRE(ab.measured_qber.has_value());
    CHECK(*ab.measured_qber == doctest::Approx(0.077));

    CHECK(s.mode == RunMode::Single);
    CHECK(s.pulse_count == 10000000);
    REQUIRE(s.sessions.size() == 4);
    REQUIRE(s.concentration_sessions.size() == 3);
    REQUIRE(s.decoy.has_value());
    CHECK(s.decoy->link_a == "A");
    CHECK(s.decoy->link_b == "C");
    CHECK(s.decoy->signal_mu == doctest::Approx(0.6));
    CHECK(s.decoy->decoy_mu == doctest::Approx(0.2));

    CHECK_NOTHROW(validate_scenario(s));
}

TEST_CASE("scenarios round-trip through their canonical text form") {
    const Scenario s = load_scenario_file(test::scenario_dir() + "/beijing.scn");
    const std::string once = serialize_scenario(s);
    const Scenario reparsed = parse_scenario(once, s.name);
    const std::string twice = serialize_scenario(reparsed);
    CHECK(once == twice);
    CHECK_NOTHROW(validate_scenario(reparsed));
    CHECK(reparsed.pulse_count == s.pulse_count);
    CHECK(reparsed.master_seed == s.master_seed);
    CHECK(reparsed.link_physics.size() == s.link_physics.size());
}

TEST_CASE("unknown keys are rejected with their line number") {
    const std::string text = "[network]\nnode = A\nwat = 3\n";
    try {
        parse_scenario(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("wat") != std::string::npos);
    }
}

TEST_CASE("unknown sections are rejected") {
    CHECK_THROWS_AS(parse_scenario("[nonsense]\n"), ParseError);
}

TEST_CASE("missing units are rejected") {
    CHECK_THROWS_AS(parse_scenario("[network]\nnode = A\nfiber = A 19.88\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("[router]\ngrid = 1510 1530\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("[physics]\nmu = 0.1\n"), ParseError);
}

TEST_CASE("malformed numbers are rejected") {
    CHECK_THROWS_AS(parse_scenario("[network]\nnode = A\nfiber = A abc km\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("[run]\npulses = -3\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("[run]\npulses = 1.5\n"), ParseError);
}

TEST_CASE("sessions must reference known distinct nodes") {
    CHECK_THROWS_AS(parse_scenario("[network]\nnode = A\n[run]\nsession = A B\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("[network]\nnode = A\n[run]\nsession = A A\n"), ParseError);
}

TEST_CASE("validation lists missing insertion losses and calibration targets") {
    Scenario s = load_scenario_file(test::scenario_dir() + "/beijing.scn");
    s.insertion_db_by_nm.erase(1530.0);
    s.link_physics[NodePair(0, 1)].measured_qber.reset(); // calibrate with no target
    try {
        validate_scenario(s);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("insertion") != std::string::npos);
        CHECK(msg.find("measured_qber") != std::string::npos);
    }
}

TEST_CASE("a partial channel table is rejected") {
    Scenario s = load_scenario_file(test::scenario_dir() + "/beijing.scn");
    s.channel_nm.erase(NodePair(1, 2));
    CHECK_THROWS_AS(validate_scenario(s), ConfigError);
}

TEST_CASE("router entries off the grid are rejected") {
    Scenario s = load_scenario_file(test::scenario_dir() + "/beijing.scn");
    s.insertion_db_by_nm[1570.0] = 2.0;
    CHECK_THROWS_AS(validate_scenario(s), ConfigError);

    Scenario s2 = load_scenario_file(test::scenario_dir() + "/beijing.scn");
    (*s2.measured_isolation)[{1570.0, 1530.0}] = 40.0;
    CHECK_THROWS_AS(validate_scenario(s2), ConfigError);
}

TEST_CASE("comments and blank lines are ignored") {
    const std::string text =
        "# header\n\nname = tiny\n[network]\nnode = A # inline comment\nnode = B\n";
    const Scenario s = parse_scenario(text);
    CHECK(s.name == "tiny");
    CHECK(s.nodes.size() == 2);
}

TEST_SUITE_END();
