// qkdnet command line front end: wavelength planning, Monte-Carlo simulation,
// QBER calibration and decoy-state key-rate analysis over scenario files.

#include "qkdnet/errors.hpp"
#include "qkdnet/report.hpp"
#include "qkdnet/scenario.hpp"
#include "qkdnet/simulator.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace qkdnet;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInternal = 2;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write output file '" + path + "'");
    out << content;
}

NodePair parse_link_arg(const Scenario& scn, const std::string& arg) {
    const auto dash = arg.find('-');
    if (dash == std::string::npos)
        throw InvalidArgumentError("link must be written as SRC-DST, e.g. A-C");
    const std::string a = arg.substr(0, dash);
    const std::string b = arg.substr(dash + 1);
    const int ia = scn.node_index(a);
    const int ib = scn.node_index(b);
    if (ia < 0 || ib < 0)
        throw InvalidArgumentError("unknown node in link '" + arg + "'");
    if (ia == ib) throw InvalidArgumentError("link endpoints must differ");
    return NodePair(ia, ib);
}

int cmd_plan(int users, std::vector<double> grid_nm, double adjacent_db, double nonadjacent_db,
             std::vector<double> insertion_db) {
    const WavelengthPlan plan = color_complete_graph(users);
    const int colors = plan.color_count();

    WavelengthGrid grid = grid_nm.empty() ? WavelengthGrid::standard(static_cast<std::size_t>(colors))
                                          : WavelengthGrid(grid_nm);
    if (insertion_db.empty()) insertion_db.assign(grid.size(), 2.0);
    const RouterSpec spec =
        build_router_spec(plan, grid, adjacent_db, nonadjacent_db, insertion_db);

    std::printf("wavelength plan for %d users: %d channels\n", users, colors);
    for (const auto& [pair, ch] : spec.plan.assignment)
        std::printf("  %s-%s  -> channel %d (%.2f nm)\n", plan.node(pair.a).label.c_str(),
                    plan.node(pair.b).label.c_str(), ch.color, ch.wavelength_nm);
    std::printf("router ports (each %zu-channel multiplexers):\n", spec.ports.front().size());
    for (std::size_t i = 0; i < spec.ports.size(); ++i) {
        std::printf("  port %s:", plan.node(static_cast<int>(i)).label.c_str());
        for (const auto& ch : spec.ports[i]) std::printf(" %.2f", ch.wavelength_nm);
        std::printf(" nm\n");
    }
    std::printf("isolation defaults: adjacent %.2f dB, non-adjacent %.2f dB (per multiplexer; a "
                "leak crosses two)\n",
                adjacent_db, nonadjacent_db);

    const auto worst = worst_case_crosstalk(spec, 50.0, 0.2);
    std::printf("crosstalk bound: %.3e (%s)\n", worst.ratio, worst.assumption.c_str());
    return kExitOk;
}

const char* cause_name(ClickCause c) {
    switch (c) {
        case ClickCause::Signal: return "signal";
        case ClickCause::Dark: return "dark";
        case ClickCause::Crosstalk: return "crosstalk";
        case ClickCause::None: break;
    }
    return "none";
}

// Line-oriented debug log of every clicked pulse. Sessions are re-run with
// transcript retention; their RNG streams depend only on (seed, session id),
// so the replay is identical to the reported run.
void write_transcript(const Scenario& scn, RunMode mode, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write transcript file '" + path + "'");
    out << "# transcript scenario=" << scn.name << " mode=" << to_string(mode)
        << " pulses=" << scn.pulse_count << " seed=" << scn.master_seed << "\n";
    out << "# fields: session pulse_index sender_phase_deg receiver_phase_deg cause flip\n";
    for (const auto& prep : resolve_sessions(scn, mode)) {
        SessionConfig cfg = prep.config;
        cfg.keep_transcript = true;
        RngStream rng = derive_stream(scn.master_seed, cfg.session_id);
        const SessionState state = run_session(cfg, rng);
        for (const auto& r : state.transcript) {
            out << cfg.session_id << " " << r.index << " "
                << 90 * static_cast<int>(r.sender_phase) << " "
                << 90 * static_cast<int>(r.receiver_phase) << " " << cause_name(r.cause) << " "
                << (r.excess_flip ? 1 : 0) << "\n";
        }
    }
}

int cmd_simulate(const std::string& scenario_path, const std::string& mode_arg,
                 std::optional<double> pulses, std::optional<std::uint64_t> seed,
                 const std::string& out_path, const std::string& transcript_path) {
    Scenario scn = load_scenario_file(scenario_path);
    if (!mode_arg.empty()) {
        if (mode_arg == "single") scn.mode = RunMode::Single;
        else if (mode_arg == "concentration") scn.mode = RunMode::Concentration;
        else throw InvalidArgumentError("--mode must be 'single' or 'concentration'");
    }
    if (pulses) {
        if (*pulses < 1.0) throw InvalidArgumentError("--pulses must be at least 1");
        scn.pulse_count = static_cast<std::uint64_t>(*pulses);
    }
    if (seed) scn.master_seed = *seed;

    NetworkReport report = run_scenario(scn, scn.mode);
    if (scn.mode == RunMode::Concentration) {
        const NetworkReport baseline = run_scenario(scn, RunMode::Single);
        report.mode_deltas = compare_modes(baseline, report);
    }

    std::cout << human_table(report);
    if (!out_path.empty()) write_file(out_path, to_jsonl(report));
    if (!transcript_path.empty()) write_transcript(scn, scn.mode, transcript_path);
    return kExitOk; // aborted sessions are results, not failures
}

int cmd_calibrate(const std::string& scenario_path, const std::vector<std::string>& qber_args,
                  const std::string& out_path) {
    Scenario scn = load_scenario_file(scenario_path);
    for (const auto& arg : qber_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos)
            throw InvalidArgumentError("--qber expects LINK=VALUE, e.g. A-B=0.077");
        const NodePair pair = parse_link_arg(scn, arg.substr(0, eq));
        const double value = std::stod(arg.substr(eq + 1));
        scn.link_physics[pair].measured_qber = value;
        scn.link_physics[pair].excess_error = std::nullopt; // re-calibrate
    }
    validate_scenario(scn);
    const RouterSpec router = resolve_router(scn);

    bool any = false;
    std::vector<std::string> failures;
    for (auto& [pair, phys] : scn.link_physics) {
        if (phys.excess_error || !phys.measured_qber) continue;
        try {
            const double e = resolve_excess_error(scn, router, pair);
            phys.excess_error = e;
            std::printf("calibrated %s-%s: excess_error = %.6g (target QBER %.4g)\n",
                        scn.node(pair.a).label.c_str(), scn.node(pair.b).label.c_str(), e,
                        *phys.measured_qber);
            any = true;
        } catch (const CalibrationError& e) {
            failures.push_back(scn.node(pair.a).label + "-" + scn.node(pair.b).label + ": " +
                               e.what());
        }
    }
    if (!failures.empty()) {
        for (const auto& f : failures) std::cerr << "calibration infeasible for " << f << "\n";
        return kExitUsage;
    }
    if (!any) {
        std::cerr << "nothing to calibrate: no link has excess_error = calibrate with a "
                     "measured_qber\n";
        return kExitUsage;
    }
    if (!out_path.empty()) {
        save_scenario_file(scn, out_path);
        std::printf("wrote calibrated scenario to %s\n", out_path.c_str());
    } else {
        std::cout << serialize_scenario(scn);
    }
    return kExitOk;
}

int cmd_decoy(const std::string& scenario_path, const std::string& link_arg,
              std::optional<double> signal_mu, std::optional<double> decoy_mu,
              std::optional<double> f_ec, std::optional<double> sifting_q,
              const std::string& out_path) {
    const Scenario scn = load_scenario_file(scenario_path);

    DecoyRunConfig cfg = scn.decoy.value_or(DecoyRunConfig{});
    if (!link_arg.empty()) {
        const NodePair pair = parse_link_arg(scn, link_arg);
        cfg.link_a = scn.node(pair.a).label;
        cfg.link_b = scn.node(pair.b).label;
    }
    if (cfg.link_a.empty())
        throw InvalidArgumentError("no decoy link: pass --link or add a [decoy] section");
    if (signal_mu) cfg.signal_mu = *signal_mu;
    if (decoy_mu) cfg.decoy_mu = *decoy_mu;
    if (f_ec) cfg.f_ec = *f_ec;
    if (sifting_q) cfg.sifting_q = *sifting_q;

    const NodePair link = parse_link_arg(scn, cfg.link_a + "-" + cfg.link_b);
    IntensityPair intensities{cfg.signal_mu, cfg.decoy_mu};
    intensities.validate(); // input error -> exit 1

    const KeyRateReport report =
        run_decoy_analysis(scn, link, intensities, cfg.sifting_q, cfg.f_ec);
    std::printf("link %s-%s\n", cfg.link_a.c_str(), cfg.link_b.c_str());
    std::cout << human_table(report);
    if (!out_path.empty()) write_file(out_path, to_jsonl(report));
    return kExitOk; // a no-key outcome is a result, not a failure
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"star-topology wavelength-routed QKD network simulator"};
    app.require_subcommand(1);

    // plan
    auto* plan = app.add_subcommand("plan", "plan wavelength assignments for an N-user router");
    int users = 0;
    std::vector<double> grid_nm;
    std::vector<double> insertion_db;
    double adjacent_db = 30.0, nonadjacent_db = 45.0;
    plan->add_option("--users", users, "number of users (>= 2)")->required();
    plan->add_option("--grid", grid_nm, "wavelength grid in nm, comma separated")->delimiter(',');
    plan->add_option("--adjacent", adjacent_db, "adjacent-channel isolation per WDM, dB");
    plan->add_option("--nonadjacent", nonadjacent_db, "non-adjacent isolation per WDM, dB");
    plan->add_option("--insertion", insertion_db, "per-channel insertion loss, dB")->delimiter(',');

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run the sessions of a scenario file");
    std::string scenario_path, mode_arg, out_path, transcript_path;
    double pulses_arg = -1.0;
    std::uint64_t seed_arg = 0;
    bool seed_set = false, pulses_set = false;
    simulate->add_option("scenario", scenario_path, "scenario file")->required();
    simulate->add_option("--mode", mode_arg, "single | concentration");
    simulate->add_option("--pulses", pulses_arg, "pulse count override (e.g. 1e7)")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { pulses_set = true; });
    simulate->add_option("--seed", seed_arg, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    simulate->add_option("--out", out_path, "write machine-readable JSONL records here");
    simulate->add_option("--transcript", transcript_path,
                         "write a per-click pulse transcript here (debugging)");

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "fit per-link excess error to measured QBER");
    std::string cal_scenario, cal_out;
    std::vector<std::string> qber_args;
    calibrate->add_option("scenario", cal_scenario, "scenario file")->required();
    calibrate->add_option("--qber", qber_args, "measured QBER overrides, LINK=VALUE");
    calibrate->add_option("--out", cal_out, "write the calibrated scenario here");

    // decoy
    auto* decoy = app.add_subcommand("decoy", "two-intensity decoy-state key rate for one link");
    std::string decoy_scenario, link_arg, decoy_out;
    double sig_mu = -1.0, dec_mu = -1.0, fec = -1.0, qfac = -1.0;
    decoy->add_option("scenario", decoy_scenario, "scenario file")->required();
    decoy->add_option("--link", link_arg, "link as SRC-DST (default: scenario [decoy] section)");
    decoy->add_option("--signal-mu", sig_mu, "signal intensity, photons/pulse");
    decoy->add_option("--decoy-mu", dec_mu, "decoy intensity, photons/pulse");
    decoy->add_option("--f-ec", fec, "error correction inefficiency (>= 1)");
    decoy->add_option("--q", qfac, "sifting factor in (0, 1]");
    decoy->add_option("--out", decoy_out, "write the machine-readable record here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (plan->parsed())
            return cmd_plan(users, grid_nm, adjacent_db, nonadjacent_db, insertion_db);
        if (simulate->parsed())
            return cmd_simulate(scenario_path, mode_arg,
                                pulses_set ? std::optional<double>(pulses_arg) : std::nullopt,
                                seed_set ? std::optional<std::uint64_t>(seed_arg) : std::nullopt,
                                out_path, transcript_path);
        if (calibrate->parsed()) return cmd_calibrate(cal_scenario, qber_args, cal_out);
        if (decoy->parsed())
            return cmd_decoy(decoy_scenario, link_arg,
                             sig_mu > 0 ? std::optional<double>(sig_mu) : std::nullopt,
                             dec_mu > 0 ? std::optional<double>(dec_mu) : std::nullopt,
                             fec > 0 ? std::optional<double>(fec) : std::nullopt,
                             qfac > 0 ? std::optional<double>(qfac) : std::nullopt, decoy_out);
    } catch (const ParseError& e) {
        std::cerr << "error: line " << e.line() << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const CalibrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const RoutingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
