#pragma once

#include "qkdnet/optics.hpp"
#include "qkdnet/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qkdnet {

enum class RunMode { Single, Concentration };

std::string to_string(RunMode m);

/// Per-link entries of the [physics] section.
struct LinkPhysicsSpec {
    double visibility = 1.0;
    double dark_prob = 0.0;
    std::optional<double> measured_path_loss_db; // end-to-end, includes router insertion
    std::optional<double> excess_error;          // nullopt = "calibrate"
    std::optional<double> measured_qber;         // calibration target
};

/// [decoy] section defaults.
struct DecoyRunConfig {
    std::string link_a;
    std::string link_b;
    double signal_mu = 0.6;
    double decoy_mu = 0.2;
    double f_ec = 1.22;
    double sifting_q = 0.5;
};

struct SessionSpec {
    int src = 0;
    int dst = 0;

    NodePair pair() const { return NodePair(src, dst); }
};

/// In-memory form of a scenario file. See the scenario format reference in
/// the README for the grammar.
struct Scenario {
    std::string name;

    // [network]
    std::vector<NodeId> nodes;
    std::vector<std::string> node_names; // display names, parallel to nodes
    std::map<int, FiberLink> fibers;     // node index -> quantum fiber to the router

    // [router]
    WavelengthGrid grid;
    double adjacent_isolation_db = 30.0;
    double nonadjacent_isolation_db = 45.0;
    std::map<double, double> insertion_db_by_nm;
    std::optional<std::map<std::pair<double, double>, double>> measured_isolation; // (in,out) nm
    std::map<NodePair, double> channel_nm; // explicit plan; empty = auto coloring

    // [physics]
    double eta = 0.10;
    double mean_photon_number = 0.1;
    double repetition_rate_hz = 1e6;
    double gate_rate_hz = 1e6;
    double disclose_fraction = 0.1;
    std::map<NodePair, LinkPhysicsSpec> link_physics;

    // [run]
    RunMode mode = RunMode::Single;
    std::uint64_t pulse_count = 1000000;
    std::uint64_t master_seed = 1;
    std::vector<SessionSpec> sessions;
    std::vector<SessionSpec> concentration_sessions; // empty = same as sessions

    // [decoy]
    std::optional<DecoyRunConfig> decoy;

    int node_index(const std::string& label) const; // -1 when absent
    const NodeId& node(int index) const { return nodes.at(static_cast<std::size_t>(index)); }
    std::string session_id(const SessionSpec& s) const;
    const std::vector<SessionSpec>& active_sessions(RunMode m) const;
};

/// Parses scenario text. Unknown keys, missing units and malformed values
/// raise ParseError with the offending line number.
Scenario parse_scenario(const std::string& text, const std::string& name_hint = "");

Scenario load_scenario_file(const std::string& path);

/// Canonical text form; parse(serialize(s)) == s field for field.
std::string serialize_scenario(const Scenario& s);

void save_scenario_file(const Scenario& s, const std::string& path);

/// Semantic validation. Throws ConfigError listing every violation.
void validate_scenario(const Scenario& s);

} // namespace qkdnet
