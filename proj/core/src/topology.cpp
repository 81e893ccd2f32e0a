#include "qkdnet/topology.hpp"

#include "qkdnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace qkdnet {

WavelengthGrid::WavelengthGrid(std::vector<double> wavelengths_nm)
    : wavelengths_nm_(std::move(wavelengths_nm)) {
    for (std::size_t i = 0; i < wavelengths_nm_.size(); ++i) {
        if (wavelengths_nm_[i] <= 0.0)
            throw InvalidArgumentError("wavelength grid entries must be positive");
        if (i > 0 && wavelengths_nm_[i] <= wavelengths_nm_[i - 1])
            throw InvalidArgumentError("wavelength grid must be strictly increasing");
    }
}

std::optional<std::size_t> WavelengthGrid::position(double wavelength_nm) const {
    for (std::size_t i = 0; i < wavelengths_nm_.size(); ++i)
        if (wavelengths_nm_[i] == wavelength_nm) return i;
    return std::nullopt;
}

WavelengthGrid WavelengthGrid::standard(std::size_t channels) {
    std::vector<double> wl(channels);
    for (std::size_t i = 0; i < channels; ++i) wl[i] = 1530.0 + 0.8 * static_cast<double>(i);
    return WavelengthGrid(wl);
}

int WavelengthPlan::color_count() const {
    std::set<int> colors;
    for (const auto& [pair, ch] : assignment) colors.insert(ch.color);
    return static_cast<int>(colors.size());
}

const ChannelIndex& WavelengthPlan::channel(const NodePair& pair) const {
    auto it = assignment.find(pair);
    if (it == assignment.end())
        throw RoutingError("no channel assigned to the requested node pair");
    return it->second;
}

std::string default_node_label(int index) {
    if (index < 26) return std::string(1, static_cast<char>('A' + index));
    return "N" + std::to_string(index);
}

WavelengthPlan color_complete_graph(int n_users) {
    if (n_users < 2)
        throw InvalidArgumentError("invalid network: need at least 2 users, got " +
                                   std::to_string(n_users));

    // Circle method over an even number of seats. Odd n gets a phantom seat
    // whose edges are dropped afterwards.
    const int seats = (n_users % 2 == 0) ? n_users : n_users + 1;
    const int rounds = seats - 1;
    const int n_colors = (n_users % 2 == 0) ? n_users - 1 : n_users;

    WavelengthGrid grid = WavelengthGrid::standard(static_cast<std::size_t>(n_colors));

    WavelengthPlan plan;
    plan.nodes.reserve(static_cast<std::size_t>(n_users));
    for (int i = 0; i < n_users; ++i) plan.nodes.push_back({i, default_node_label(i)});

    auto add_edge = [&](int u, int v, int color) {
        if (u >= n_users || v >= n_users) return; // phantom edge
        plan.assignment[NodePair(u, v)] =
            ChannelIndex{color, grid.at(static_cast<std::size_t>(color))};
    };

    const int pivot = seats - 1;
    for (int r = 0; r < rounds; ++r) {
        add_edge(pivot, r, r);
        for (int i = 1; i <= seats / 2 - 1; ++i) {
            const int u = (r + i) % rounds;
            const int v = (r - i + rounds) % rounds;
            add_edge(u, v, r);
        }
    }
    return plan;
}

PlanValidation validate_plan(const WavelengthPlan& plan) {
    PlanValidation result;
    const int n = plan.n_users();

    auto label = [&](int idx) {
        return idx < n ? plan.nodes[static_cast<std::size_t>(idx)].label : std::to_string(idx);
    };

    // Coverage: every unordered pair exactly once.
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            if (!plan.assignment.count(NodePair(u, v)))
                result.violations.push_back("missing channel for pair (" + label(u) + "," +
                                            label(v) + ")");
        }
    }
    for (const auto& [pair, ch] : plan.assignment) {
        if (pair.a < 0 || pair.b >= n || pair.a == pair.b)
            result.violations.push_back("assignment contains a pair outside the node set");
    }

    // Properness: no two edges sharing a vertex have the same color.
    std::vector<std::pair<NodePair, int>> edges;
    edges.reserve(plan.assignment.size());
    for (const auto& [pair, ch] : plan.assignment) edges.emplace_back(pair, ch.color);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            if (edges[i].second != edges[j].second) continue;
            const auto& p = edges[i].first;
            const auto& q = edges[j].first;
            int shared = -1;
            if (p.a == q.a || p.a == q.b) shared = p.a;
            else if (p.b == q.a || p.b == q.b) shared = p.b;
            if (shared >= 0) {
                result.violations.push_back("edges (" + label(p.a) + "," + label(p.b) + ") and (" +
                                            label(q.a) + "," + label(q.b) + ") share color " +
                                            std::to_string(edges[i].second) + " at vertex " +
                                            label(shared));
            }
        }
    }

    // Color count versus the K_n theorem.
    const int expected = (n % 2 == 0) ? n - 1 : n;
    const int actual = plan.color_count();
    if (actual != expected && !plan.assignment.empty()) {
        result.violations.push_back("color count " + std::to_string(actual) +
                                    " does not match the K_n bound " + std::to_string(expected));
    }

    result.ok = result.violations.empty();
    return result;
}

double RouterSpec::insertion_loss_db(const ChannelIndex& ch) const {
    const auto c = static_cast<std::size_t>(ch.color);
    if (c >= insertion_db.size())
        throw ConfigError("no insertion loss recorded for channel color " + std::to_string(ch.color));
    return insertion_db[c];
}

double RouterSpec::isolation_entry_db(const ChannelIndex& in, const ChannelIndex& out) const {
    const auto i = static_cast<std::size_t>(in.color);
    const auto o = static_cast<std::size_t>(out.color);
    if (i >= isolation_db.size() || o >= isolation_db[i].size())
        throw ConfigError("missing isolation entry for channel pair (" + std::to_string(in.color) +
                          "," + std::to_string(out.color) + ")");
    return isolation_db[i][o];
}

double RouterSpec::leak_suppression_db(const ChannelIndex& in, const ChannelIndex& out) const {
    if (in.color == out.color)
        throw ConfigError("leak suppression is undefined for a channel against itself");
    const double entry = isolation_entry_db(in, out);
    return isolation_scope == IsolationScope::PerWdm ? 2.0 * entry : entry;
}

RouterSpec build_router_spec(const WavelengthPlan& plan,
                             const WavelengthGrid& grid,
                             double adjacent_isolation_db,
                             double nonadjacent_isolation_db,
                             std::span<const double> insertion_loss_db,
                             const std::vector<std::vector<double>>* measured_isolation_db) {
    const auto validation = validate_plan(plan);
    if (!validation.ok) {
        std::string msg = "cannot build router spec from an invalid plan:";
        for (const auto& v : validation.violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }
    const int n_colors = plan.color_count();
    if (grid.size() < static_cast<std::size_t>(n_colors))
        throw ConfigError("insufficient channels: plan needs " + std::to_string(n_colors) +
                          " wavelengths, grid provides " + std::to_string(grid.size()));
    for (const auto& [pair, ch] : plan.assignment)
        if (ch.color < 0 || static_cast<std::size_t>(ch.color) >= grid.size())
            throw ConfigError("plan color " + std::to_string(ch.color) +
                              " has no grid position");
    if (adjacent_isolation_db <= 0.0 || nonadjacent_isolation_db <= 0.0)
        throw InvalidArgumentError("isolation values must be positive");
    // Tables are indexed by grid position (== color), one entry per grid
    // channel even when the plan uses fewer.
    if (insertion_loss_db.size() < grid.size())
        throw ConfigError("need one insertion loss per grid channel (" +
                          std::to_string(grid.size()) + "), got " +
                          std::to_string(insertion_loss_db.size()));
    for (double v : insertion_loss_db)
        if (!(v > 0.0 && v < 5.0))
            throw ConfigError("insertion loss " + std::to_string(v) + " dB outside (0, 5)");

    RouterSpec spec;
    spec.plan = plan;
    spec.grid = grid;
    spec.insertion_db.assign(insertion_loss_db.begin(),
                             insertion_loss_db.begin() + static_cast<std::ptrdiff_t>(grid.size()));

    // Rebind plan channels to the provided grid (color k -> grid position k).
    for (auto& [pair, ch] : spec.plan.assignment)
        ch.wavelength_nm = grid.at(static_cast<std::size_t>(ch.color));

    const std::size_t nc = grid.size();
    spec.isolation_db.assign(nc, std::vector<double>(nc, 0.0));
    if (measured_isolation_db) {
        const auto& m = *measured_isolation_db;
        if (m.size() != nc)
            throw ConfigError("measured isolation matrix must be " + std::to_string(nc) + "x" +
                              std::to_string(nc));
        for (std::size_t i = 0; i < nc; ++i) {
            if (m[i].size() != nc)
                throw ConfigError("measured isolation matrix row " + std::to_string(i) +
                                  " has wrong length");
            for (std::size_t j = 0; j < nc; ++j) {
                if (i != j && m[i][j] < adjacent_isolation_db)
                    throw ConfigError("measured isolation " + std::to_string(m[i][j]) +
                                      " dB below the adjacent-channel floor");
                spec.isolation_db[i][j] = m[i][j];
            }
        }
        spec.isolation_scope = IsolationScope::ThroughRouter;
    } else {
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t j = 0; j < nc; ++j)
                if (i != j)
                    spec.isolation_db[i][j] =
                        (i + 1 == j || j + 1 == i) ? adjacent_isolation_db : nonadjacent_isolation_db;
        spec.isolation_scope = IsolationScope::PerWdm;
    }
    // Diagonal = through-path insertion loss.
    for (std::size_t i = 0; i < nc; ++i) spec.isolation_db[i][i] = spec.insertion_db[i];

    // Port channel sets: every node lists the channels of its incident pairs.
    spec.ports.assign(plan.nodes.size(), {});
    for (const auto& [pair, ch] : spec.plan.assignment) {
        spec.ports[static_cast<std::size_t>(pair.a)].push_back(ch);
        spec.ports[static_cast<std::size_t>(pair.b)].push_back(ch);
    }
    for (auto& port : spec.ports) std::sort(port.begin(), port.end());

    for (const auto& port : spec.ports)
        if (port.size() != plan.nodes.size() - 1)
            throw ConfigError("internal: port channel set size != n_users - 1");

    return spec;
}

int RoutePath::wdm_hops() const {
    return static_cast<int>(
        std::count_if(elements.begin(), elements.end(),
                      [](const PathElement& e) { return e.kind == PathElement::Kind::Wdm; }));
}

RoutePath route(const RouterSpec& spec, const NodeId& src, const NodeId& dst) {
    if (src.index == dst.index)
        throw RoutingError("cannot route a node to itself (" + src.label + ")");
    const auto& ch = spec.plan.channel(NodePair(src.index, dst.index));

    const auto& port_src = spec.ports.at(static_cast<std::size_t>(src.index));
    const auto& port_dst = spec.ports.at(static_cast<std::size_t>(dst.index));
    auto has = [&](const std::vector<ChannelIndex>& port) {
        return std::any_of(port.begin(), port.end(),
                           [&](const ChannelIndex& c) { return c.color == ch.color; });
    };
    if (!has(port_src) || !has(port_dst))
        throw RoutingError("channel color " + std::to_string(ch.color) +
                           " not present at both ports");

    const std::string src_label = spec.plan.node(src.index).label;
    const std::string dst_label = spec.plan.node(dst.index).label;
    RoutePath path;
    path.channel = ch;
    path.elements = {
        {PathElement::Kind::Fiber, "fiber " + src_label + "->router"},
        {PathElement::Kind::Wdm, "WDM port " + src_label},
        {PathElement::Kind::Wdm, "WDM port " + dst_label},
        {PathElement::Kind::Fiber, "fiber router->" + dst_label},
    };
    return path;
}

} // namespace qkdnet
