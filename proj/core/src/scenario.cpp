#include "qkdnet/scenario.hpp"

#include "qkdnet/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qkdnet {

std::string to_string(RunMode m) {
    return m == RunMode::Single ? "single" : "concentration";
}

int Scenario::node_index(const std::string& label) const {
    for (const auto& n : nodes)
        if (n.label == label) return n.index;
    return -1;
}

std::string Scenario::session_id(const SessionSpec& s) const {
    return node(s.src).label + "-" + node(s.dst).label;
}

const std::vector<SessionSpec>& Scenario::active_sessions(RunMode m) const {
    if (m == RunMode::Concentration && !concentration_sessions.empty())
        return concentration_sessions;
    return sessions;
}

namespace {

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, int line) {
    double v = 0.0;
    const char* begin = tok.data();
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError("expected a number, got '" + tok + "'", line);
    return v;
}

std::uint64_t parse_count(const std::string& tok, int line) {
    const double v = parse_double(tok, line);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1.8e19)
        throw ParseError("expected a positive integer count, got '" + tok + "'", line);
    return static_cast<std::uint64_t>(v);
}

std::uint64_t parse_seed(const std::string& tok, int line) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError("expected an unsigned integer seed, got '" + tok + "'", line);
    return v;
}

void expect_tokens(const std::vector<std::string>& toks, std::size_t n, const std::string& key,
                   int line) {
    if (toks.size() != n)
        throw ParseError("key '" + key + "' expects " + std::to_string(n) + " value token(s), got " +
                         std::to_string(toks.size()), line);
}

void expect_unit(const std::vector<std::string>& toks, const std::string& unit,
                 const std::string& key, int line) {
    if (toks.empty() || toks.back() != unit)
        throw ParseError("key '" + key + "' requires the unit '" + unit + "'", line);
}

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct ParserState {
    Scenario scn;
    std::vector<double> grid_nm;
    std::map<std::pair<double, double>, double> isolation_entries;
    bool has_isolation = false;
    std::vector<std::tuple<std::string, std::string, double, int>> channel_lines; // a b nm line
    std::vector<std::tuple<std::string, std::string, int>> session_lines;
    std::vector<std::tuple<std::string, std::string, int>> concentration_lines;
    std::vector<std::tuple<int, std::string, std::vector<std::string>>> physics_pair_lines;
    std::vector<std::tuple<std::string, double, int>> fiber_lines;
    std::vector<std::tuple<std::string, double, int>> fiber_loss_lines;
};

NodePair pair_of(const Scenario& scn, const std::string& a, const std::string& b, int line) {
    const int ia = scn.node_index(a);
    const int ib = scn.node_index(b);
    if (ia < 0) throw ParseError("unknown node '" + a + "'", line);
    if (ib < 0) throw ParseError("unknown node '" + b + "'", line);
    if (ia == ib) throw ParseError("a link needs two distinct nodes", line);
    return NodePair(ia, ib);
}

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& name_hint) {
    ParserState st;
    st.scn.name = name_hint;

    std::string section;
    std::istringstream stream(text);
    std::string raw;
    int line_no = 0;

    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("malformed section header '" + line + "'", line_no);
            section = line.substr(1, line.size() - 2);
            if (section != "network" && section != "router" && section != "physics" &&
                section != "run" && section != "decoy")
                throw ParseError("unknown section [" + section + "]", line_no);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", line_no);
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        auto toks = tokenize(line.substr(eq + 1));
        if (toks.empty()) throw ParseError("key '" + key + "' has no value", line_no);

        auto unknown = [&]() -> ParseError {
            return ParseError("unknown key '" + key + "' in section [" + section + "]", line_no);
        };

        if (section.empty()) {
            if (key == "name") {
                expect_tokens(toks, 1, key, line_no);
                st.scn.name = toks[0];
            } else {
                throw ParseError("key '" + key + "' appears before any section", line_no);
            }
        } else if (section == "network") {
            if (key == "node") {
                if (toks.size() != 1 && toks.size() != 2)
                    throw ParseError("node expects 'label [display-name]'", line_no);
                if (st.scn.node_index(toks[0]) >= 0)
                    throw ParseError("duplicate node label '" + toks[0] + "'", line_no);
                st.scn.nodes.push_back({static_cast<int>(st.scn.nodes.size()), toks[0]});
                st.scn.node_names.push_back(toks.size() == 2 ? toks[1] : toks[0]);
            } else if (key == "fiber") {
                expect_tokens(toks, 3, key, line_no);
                expect_unit(toks, "km", key, line_no);
                st.fiber_lines.emplace_back(toks[0], parse_double(toks[1], line_no), line_no);
            } else if (key == "fiber_loss") {
                expect_tokens(toks, 3, key, line_no);
                expect_unit(toks, "dB", key, line_no);
                st.fiber_loss_lines.emplace_back(toks[0], parse_double(toks[1], line_no), line_no);
            } else {
                throw unknown();
            }
        } else if (section == "router") {
            if (key == "grid") {
                expect_unit(toks, "nm", key, line_no);
                for (std::size_t i = 0; i + 1 < toks.size(); ++i)
                    st.grid_nm.push_back(parse_double(toks[i], line_no));
                if (st.grid_nm.empty()) throw ParseError("grid needs at least one wavelength", line_no);
            } else if (key == "adjacent_isolation") {
                expect_tokens(toks, 2, key, line_no);
                expect_unit(toks, "dB", key, line_no);
                st.scn.adjacent_isolation_db = parse_double(toks[0], line_no);
            } else if (key == "nonadjacent_isolation") {
                expect_tokens(toks, 2, key, line_no);
                expect_unit(toks, "dB", key, line_no);
                st.scn.nonadjacent_isolation_db = parse_double(toks[0], line_no);
            } else if (key == "insertion") {
                expect_tokens(toks, 3, key, line_no);
                expect_unit(toks, "dB", key, line_no);
                st.scn.insertion_db_by_nm[parse_double(toks[0], line_no)] =
                    parse_double(toks[1], line_no);
            } else if (key == "isolation") {
                expect_tokens(toks, 4, key, line_no);
                expect_unit(toks, "dB", key, line_no);
                const double in_nm = parse_double(toks[0], line_no);
                const double out_nm = parse_double(toks[1], line_no);
                st.isolation_entries[{in_nm, out_nm}] = parse_double(toks[2], line_no);
                st.has_isolation = true;
            } else if (key == "channel") {
                expect_tokens(toks, 4, key, line_no);
                expect_unit(toks, "nm", key, line_no);
                st.channel_lines.emplace_back(toks[0], toks[1], parse_double(toks[2], line_no),
                                              line_no);
            } else {
                throw unknown();
            }
        } else if (section == "physics") {
            if (key == "eta") {
                expect_tokens(toks, 1, key, line_no);
                st.scn.eta = parse_double(toks[0], line_no);
            } else if (key == "mu") {
                expect_tokens(toks, 2, key, line_no);
                expect_unit(toks, "photons", key, line_no);
                st.scn.mean_photon_number = parse_double(toks[0], line_no);
            } else if (key == "repetition") {
                expect_tokens(toks, 2, key, line_no);
                expect_unit(toks, "Hz", key, line_no);
                st.scn.repetition_rate_hz = parse_double(toks[0], line_no);
            } else if (key == "gate_rate") {
                expect_tokens(toks, 2, key, line_no);
                expect_unit(toks, "Hz", key, line_no);
                st.scn.gate_rate_hz = parse_double(toks[0], line_no);
            } else if (key == "disclose_fraction") {
                expect_tokens(toks, 1, key, line_no);
                st.scn.disclose_fraction = parse_double(toks[0], line_no);
            } else if (key == "visibility" || key == "dark" || key == "path_loss" ||
                       key == "excess_error" || key == "measured_qber") {
                if (key == "path_loss") {
                    expect_tokens(toks, 4, key, line_no);
                    expect_unit(toks, "dB", key, line_no);
                } else {
                    expect_tokens(toks, 3, key, line_no);
                }
                st.physics_pair_lines.emplace_back(
                    line_no, key, std::vector<std::string>(toks.begin(), toks.end()));
            } else {
                throw unknown();
            }
        } else if (section == "run") {
            if (key == "mode") {
                expect_tokens(toks, 1, key, line_no);
                if (toks[0] == "single") st.scn.mode = RunMode::Single;
                else if (toks[0] == "concentration") st.scn.mode = RunMode::Concentration;
                else throw ParseError("mode must be 'single' or 'concentration'", line_no);
            } else if (key == "pulses") {
                expect_tokens(toks, 1, key, line_no);
                st.scn.pulse_count = parse_count(toks[0], line_no);
            } else if (key == "seed") {
                expect_tokens(toks, 1, key, line_no);
                st.scn.master_seed = parse_seed(toks[0], line_no);
            } else if (key == "session") {
                expect_tokens(toks, 2, key, line_no);
                st.session_lines.emplace_back(toks[0], toks[1], line_no);
            } else if (key == "concentration_session") {
                expect_tokens(toks, 2, key, line_no);
                st.concentration_lines.emplace_back(toks[0], toks[1], line_no);
            } else {
                throw unknown();
            }
        } else if (section == "decoy") {
            if (!st.scn.decoy) st.scn.decoy = DecoyRunConfig{};
            if (key == "link") {
                expect_tokens(toks, 2, key, line_no);
                st.scn.decoy->link_a = toks[0];
                st.scn.decoy->link_b = toks[1];
            } else if (key == "signal_mu" || key == "decoy_mu") {
                expect_tokens(toks, 2, key, line_no);
                expect_unit(toks, "photons", key, line_no);
                (key == "signal_mu" ? st.scn.decoy->signal_mu : st.scn.decoy->decoy_mu) =
                    parse_double(toks[0], line_no);
            } else if (key == "f_ec") {
                expect_tokens(toks, 1, key, line_no);
                st.scn.decoy->f_ec = parse_double(toks[0], line_no);
            } else if (key == "sifting_q") {
                expect_tokens(toks, 1, key, line_no);
                st.scn.decoy->sifting_q = parse_double(toks[0], line_no);
            } else {
                throw unknown();
            }
        }
    }

    Scenario& scn = st.scn;

    // Second pass: entries that reference node labels.
    for (const auto& [label, km, ln] : st.fiber_lines) {
        const int idx = scn.node_index(label);
        if (idx < 0) throw ParseError("fiber references unknown node '" + label + "'", ln);
        scn.fibers[idx].length_km = km;
    }
    for (const auto& [label, db, ln] : st.fiber_loss_lines) {
        const int idx = scn.node_index(label);
        if (idx < 0) throw ParseError("fiber_loss references unknown node '" + label + "'", ln);
        scn.fibers[idx].measured_loss_db = db;
    }
    if (!st.grid_nm.empty()) {
        try {
            scn.grid = WavelengthGrid(st.grid_nm);
        } catch (const InvalidArgumentError& e) {
            throw ParseError(e.what(), 0);
        }
    }
    if (st.has_isolation) scn.measured_isolation = std::move(st.isolation_entries);
    for (const auto& [a, b, nm, ln] : st.channel_lines)
        scn.channel_nm[pair_of(scn, a, b, ln)] = nm;
    for (const auto& [ln, key, toks] : st.physics_pair_lines) {
        const NodePair pair = pair_of(scn, toks[0], toks[1], ln);
        auto& phys = scn.link_physics[pair];
        if (key == "visibility") phys.visibility = parse_double(toks[2], ln);
        else if (key == "dark") phys.dark_prob = parse_double(toks[2], ln);
        else if (key == "path_loss") phys.measured_path_loss_db = parse_double(toks[2], ln);
        else if (key == "measured_qber") phys.measured_qber = parse_double(toks[2], ln);
        else if (key == "excess_error") {
            if (toks[2] == "calibrate") phys.excess_error = std::nullopt;
            else phys.excess_error = parse_double(toks[2], ln);
        }
    }
    for (const auto& [a, b, ln] : st.session_lines) {
        const int ia = scn.node_index(a);
        const int ib = scn.node_index(b);
        if (ia < 0 || ib < 0 || ia == ib)
            throw ParseError("session needs two distinct known nodes", ln);
        scn.sessions.push_back({ia, ib});
    }
    for (const auto& [a, b, ln] : st.concentration_lines) {
        const int ia = scn.node_index(a);
        const int ib = scn.node_index(b);
        if (ia < 0 || ib < 0 || ia == ib)
            throw ParseError("concentration_session needs two distinct known nodes", ln);
        scn.concentration_sessions.push_back({ia, ib});
    }
    return scn;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string name = path;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos)
        name = name.substr(slash + 1);
    if (const auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
    return parse_scenario(buf.str(), name);
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream out;
    out << "name = " << s.name << "\n\n[network]\n";
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        out << "node = " << s.nodes[i].label;
        if (i < s.node_names.size() && s.node_names[i] != s.nodes[i].label)
            out << " " << s.node_names[i];
        out << "\n";
    }
    for (const auto& [idx, fiber] : s.fibers) {
        out << "fiber = " << s.node(idx).label << " " << fmt_double(fiber.length_km) << " km\n";
        if (fiber.measured_loss_db)
            out << "fiber_loss = " << s.node(idx).label << " " << fmt_double(*fiber.measured_loss_db)
                << " dB\n";
    }

    out << "\n[router]\n";
    if (s.grid.size() > 0) {
        out << "grid =";
        for (double wl : s.grid.wavelengths()) out << " " << fmt_double(wl);
        out << " nm\n";
    }
    out << "adjacent_isolation = " << fmt_double(s.adjacent_isolation_db) << " dB\n";
    out << "nonadjacent_isolation = " << fmt_double(s.nonadjacent_isolation_db) << " dB\n";
    for (const auto& [nm, db] : s.insertion_db_by_nm)
        out << "insertion = " << fmt_double(nm) << " " << fmt_double(db) << " dB\n";
    if (s.measured_isolation)
        for (const auto& [pair, db] : *s.measured_isolation)
            out << "isolation = " << fmt_double(pair.first) << " " << fmt_double(pair.second) << " "
                << fmt_double(db) << " dB\n";
    for (const auto& [pair, nm] : s.channel_nm)
        out << "channel = " << s.node(pair.a).label << " " << s.node(pair.b).label << " "
            << fmt_double(nm) << " nm\n";

    out << "\n[physics]\n";
    out << "eta = " << fmt_double(s.eta) << "\n";
    out << "mu = " << fmt_double(s.mean_photon_number) << " photons\n";
    out << "repetition = " << fmt_double(s.repetition_rate_hz) << " Hz\n";
    out << "gate_rate = " << fmt_double(s.gate_rate_hz) << " Hz\n";
    out << "disclose_fraction = " << fmt_double(s.disclose_fraction) << "\n";
    for (const auto& [pair, phys] : s.link_physics) {
        const std::string a = s.node(pair.a).label;
        const std::string b = s.node(pair.b).label;
        out << "visibility = " << a << " " << b << " " << fmt_double(phys.visibility) << "\n";
        out << "dark = " << a << " " << b << " " << fmt_double(phys.dark_prob) << "\n";
        if (phys.measured_path_loss_db)
            out << "path_loss = " << a << " " << b << " " << fmt_double(*phys.measured_path_loss_db)
                << " dB\n";
        if (phys.excess_error)
            out << "excess_error = " << a << " " << b << " " << fmt_double(*phys.excess_error) << "\n";
        else
            out << "excess_error = " << a << " " << b << " calibrate\n";
        if (phys.measured_qber)
            out << "measured_qber = " << a << " " << b << " " << fmt_double(*phys.measured_qber)
                << "\n";
    }

    out << "\n[run]\n";
    out << "mode = " << to_string(s.mode) << "\n";
    out << "pulses = " << s.pulse_count << "\n";
    out << "seed = " << s.master_seed << "\n";
    for (const auto& sess : s.sessions)
        out << "session = " << s.node(sess.src).label << " " << s.node(sess.dst).label << "\n";
    for (const auto& sess : s.concentration_sessions)
        out << "concentration_session = " << s.node(sess.src).label << " "
            << s.node(sess.dst).label << "\n";

    if (s.decoy) {
        out << "\n[decoy]\n";
        out << "link = " << s.decoy->link_a << " " << s.decoy->link_b << "\n";
        out << "signal_mu = " << fmt_double(s.decoy->signal_mu) << " photons\n";
        out << "decoy_mu = " << fmt_double(s.decoy->decoy_mu) << " photons\n";
        out << "f_ec = " << fmt_double(s.decoy->f_ec) << "\n";
        out << "sifting_q = " << fmt_double(s.decoy->sifting_q) << "\n";
    }
    return out.str();
}

void save_scenario_file(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write scenario file '" + path + "'");
    out << serialize_scenario(s);
}

void validate_scenario(const Scenario& s) {
    std::vector<std::string> problems;
    auto complain = [&](const std::string& msg) { problems.push_back(msg); };

    if (s.nodes.size() < 1) complain("scenario defines no nodes");
    if (s.grid.size() == 0 && !s.sessions.empty()) complain("scenario defines no wavelength grid");
    if (!(s.eta > 0.0 && s.eta <= 1.0)) complain("eta must be in (0, 1]");
    if (!(s.mean_photon_number > 0.0 && s.mean_photon_number <= 1.0))
        complain("mu must be in (0, 1] photons/pulse for signal states");
    if (!(s.repetition_rate_hz > 0.0)) complain("repetition rate must be positive");
    if (!(s.disclose_fraction > 0.0 && s.disclose_fraction <= 1.0))
        complain("disclose_fraction must be in (0, 1]");
    if (s.pulse_count == 0) complain("pulse count must be positive");

    for (const auto& n : s.nodes)
        if (!s.fibers.count(n.index) && !s.sessions.empty())
            complain("node " + n.label + " has no fiber to the router");
    for (const auto& [idx, fiber] : s.fibers) {
        if (!(fiber.length_km > 0.0)) complain("fiber length for " + s.node(idx).label +
                                               " must be positive");
        if (fiber.measured_loss_db && !(*fiber.measured_loss_db > 0.0))
            complain("measured fiber loss for " + s.node(idx).label + " must be positive");
    }

    if (!s.channel_nm.empty()) {
        const std::size_t all_pairs = s.nodes.size() * (s.nodes.size() - 1) / 2;
        if (s.channel_nm.size() != all_pairs)
            complain("channel assignment must cover all " + std::to_string(all_pairs) +
                     " node pairs or be omitted entirely");
        for (const auto& [pair, nm] : s.channel_nm)
            if (!s.grid.position(nm))
                complain("channel wavelength " + std::to_string(nm) + " nm is not on the grid");
    }
    for (double wl : s.grid.wavelengths())
        if (!s.insertion_db_by_nm.count(wl))
            complain("no insertion loss for grid wavelength " + std::to_string(wl) + " nm");
    for (const auto& [nm, db] : s.insertion_db_by_nm)
        if (!s.grid.position(nm))
            complain("insertion loss given for " + std::to_string(nm) +
                     " nm, which is not on the grid");
    if (s.measured_isolation) {
        for (double in : s.grid.wavelengths())
            for (double out : s.grid.wavelengths())
                if (!s.measured_isolation->count({in, out}))
                    complain("measured isolation matrix is missing entry " + std::to_string(in) +
                             " -> " + std::to_string(out));
        for (const auto& [pair, db] : *s.measured_isolation)
            if (!s.grid.position(pair.first) || !s.grid.position(pair.second))
                complain("isolation entry " + std::to_string(pair.first) + " -> " +
                         std::to_string(pair.second) + " nm is not on the grid");
    }

    auto check_sessions = [&](const std::vector<SessionSpec>& list, const std::string& what) {
        for (const auto& sess : list) {
            if (sess.src < 0 || sess.dst < 0 ||
                sess.src >= static_cast<int>(s.nodes.size()) ||
                sess.dst >= static_cast<int>(s.nodes.size()) || sess.src == sess.dst) {
                complain(what + " references invalid nodes");
                continue;
            }
            const auto pair = sess.pair();
            if (!s.link_physics.count(pair))
                complain("no [physics] entries for " + what + " " + s.session_id(sess));
            else {
                const auto& phys = s.link_physics.at(pair);
                if (!(phys.visibility > 0.0 && phys.visibility <= 1.0))
                    complain("visibility for " + s.session_id(sess) + " must be in (0, 1]");
                if (!(phys.dark_prob >= 0.0 && phys.dark_prob < 0.01))
                    complain("dark probability for " + s.session_id(sess) +
                             " must be in [0, 0.01)");
                if (!phys.excess_error && !phys.measured_qber)
                    complain("excess_error for " + s.session_id(sess) +
                             " is 'calibrate' but no measured_qber is given");
            }
        }
    };
    check_sessions(s.sessions, "session");
    check_sessions(s.concentration_sessions, "concentration_session");

    if (s.decoy) {
        if (s.node_index(s.decoy->link_a) < 0 || s.node_index(s.decoy->link_b) < 0)
            complain("[decoy] link references unknown nodes");
        if (!(s.decoy->decoy_mu > 0.0 && s.decoy->decoy_mu < s.decoy->signal_mu))
            complain("[decoy] intensities must satisfy 0 < decoy_mu < signal_mu");
        if (!(s.decoy->f_ec >= 1.0)) complain("[decoy] f_ec must be >= 1");
        if (!(s.decoy->sifting_q > 0.0 && s.decoy->sifting_q <= 1.0))
            complain("[decoy] sifting_q must be in (0, 1]");
    }

    if (!problems.empty()) {
        std::string msg = "invalid scenario '" + s.name + "':";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
}

} // namespace qkdnet
