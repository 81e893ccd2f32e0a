#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qkdnet {

/// A network endpoint. Indices are unique and contiguous from 0 within a network.
struct NodeId {
    int index = 0;
    std::string label;

    friend bool operator==(const NodeId& a, const NodeId& b) { return a.index == b.index; }
};

/// One wavelength channel: a color in the edge coloring bound to a physical
/// wavelength. Within a grid, color <-> wavelength is a bijection and
/// wavelengths increase with grid position.
struct ChannelIndex {
    int color = 0;
    double wavelength_nm = 0.0;

    friend bool operator==(const ChannelIndex& a, const ChannelIndex& b) {
        return a.color == b.color && a.wavelength_nm == b.wavelength_nm;
    }
    friend bool operator<(const ChannelIndex& a, const ChannelIndex& b) { return a.color < b.color; }
};

/// Ascending list of channel wavelengths. Consecutive positions are adjacent
/// channels (WDM channel-spacing semantics).
class WavelengthGrid {
public:
    WavelengthGrid() = default;
    explicit WavelengthGrid(std::vector<double> wavelengths_nm);

    std::size_t size() const { return wavelengths_nm_.size(); }
    double at(std::size_t pos) const { return wavelengths_nm_.at(pos); }
    const std::vector<double>& wavelengths() const { return wavelengths_nm_; }

    /// Grid position of a wavelength, if present.
    std::optional<std::size_t> position(double wavelength_nm) const;

    /// Default grid: 100 GHz-style spacing, 1530.0 + 0.8*k nm.
    static WavelengthGrid standard(std::size_t channels);

private:
    std::vector<double> wavelengths_nm_;
};

/// Unordered node pair, normalized so that first < second.
struct NodePair {
    int a = 0;
    int b = 0;

    NodePair() = default;
    NodePair(int x, int y) : a(x < y ? x : y), b(x < y ? y : x) {}

    friend bool operator==(const NodePair&, const NodePair&) = default;
    friend bool operator<(const NodePair& l, const NodePair& r) {
        return l.a != r.a ? l.a < r.a : l.b < r.b;
    }
};

/// Assignment of one channel to every unordered node pair: a proper edge
/// coloring of the complete graph on the network's nodes.
struct WavelengthPlan {
    std::vector<NodeId> nodes;
    std::map<NodePair, ChannelIndex> assignment;

    int n_users() const { return static_cast<int>(nodes.size()); }
    int color_count() const;
    const ChannelIndex& channel(const NodePair& pair) const;
    const NodeId& node(int index) const { return nodes.at(static_cast<std::size_t>(index)); }
};

/// Diagnostic output of validate_plan.
struct PlanValidation {
    bool ok = true;
    std::vector<std::string> violations;
};

/// How the isolation matrix entries are to be applied on a leak path.
/// PerWdm: entries characterize a single multiplexer; a leak through the
/// router crosses two of them. ThroughRouter: entries were measured across
/// the whole router (input port to output port) and apply once.
enum class IsolationScope { PerWdm, ThroughRouter };

/// Router description: per-port channel sets, per-channel insertion loss and
/// the channel-pair isolation matrix. Diagonal entries of the matrix equal the
/// channel's through-path insertion loss; off-diagonal entries are leak
/// suppressions in dB (positive = suppression).
struct RouterSpec {
    WavelengthPlan plan;
    WavelengthGrid grid;
    std::vector<std::vector<ChannelIndex>> ports;  // per node, sorted by color
    std::vector<double> insertion_db;              // per color
    std::vector<std::vector<double>> isolation_db; // [in color][out color]
    IsolationScope isolation_scope = IsolationScope::PerWdm;

    double insertion_loss_db(const ChannelIndex& ch) const;
    double isolation_entry_db(const ChannelIndex& in, const ChannelIndex& out) const;

    /// Total suppression of light on channel `in` leaking into the output
    /// port tuned to channel `out`. PerWdm entries count twice (the leak
    /// crosses the source-port and destination-port multiplexers).
    double leak_suppression_db(const ChannelIndex& in, const ChannelIndex& out) const;
};

/// One element of a routed path.
struct PathElement {
    enum class Kind { Fiber, Wdm };
    Kind kind;
    std::string label;
};

struct RoutePath {
    std::vector<PathElement> elements;
    ChannelIndex channel;

    int wdm_hops() const;
};

/// Proper edge coloring of K_n via the circle method (round-robin
/// 1-factorization). Even n: exactly n-1 colors; odd n: a phantom node is
/// added, K_{n+1} is colored and phantom edges dropped, giving n colors.
/// Deterministic for a given n. Throws InvalidArgumentError when n < 2.
WavelengthPlan color_complete_graph(int n_users);

/// Reports every pair of same-colored edges sharing a vertex, missing or
/// duplicated pairs, and color-count mismatch versus the K_n theorem.
PlanValidation validate_plan(const WavelengthPlan& plan);

/// Builds a RouterSpec from a plan. Isolation defaults fill the matrix by
/// grid adjacency (|position difference| == 1 -> adjacent). When a measured
/// matrix is supplied it overrides the defaults and is treated as
/// through-router data. Throws ConfigError when the grid has fewer channels
/// than the plan has colors, or when matrix entries violate the floors.
RouterSpec build_router_spec(const WavelengthPlan& plan,
                             const WavelengthGrid& grid,
                             double adjacent_isolation_db,
                             double nonadjacent_isolation_db,
                             std::span<const double> insertion_loss_db,
                             const std::vector<std::vector<double>>* measured_isolation_db = nullptr);

/// Path from src to dst: [src fiber, src-port WDM, dst-port WDM, dst fiber].
/// Exactly two WDM traversals for any pair. Throws RoutingError on src == dst.
RoutePath route(const RouterSpec& spec, const NodeId& src, const NodeId& dst);

/// Default node labels: "A".."Z" for small networks, "N<i>" beyond.
std::string default_node_label(int index);

} // namespace qkdnet
