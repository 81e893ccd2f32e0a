#pragma once

#include "qkdnet/decoy.hpp"
#include "qkdnet/optics.hpp"
#include "qkdnet/protocol.hpp"
#include "qkdnet/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qkdnet {

struct SessionReport {
    std::string session_id;
    std::string src;
    std::string dst;
    int channel_color = 0;
    double wavelength_nm = 0.0;
    SessionCounts counts;
    double qber_measured = 0.0; // mismatches over the whole sifted key
    QberSample qber_sample;     // protocol-visible disclosed estimate
    QberEstimate qber_analytic; // analytic decomposition (qber_model)
    SessionExpectation expectation; // exact Monte-Carlo closed form
    double crosstalk_ratio = 0.0;
    double xtalk_click_prob = 0.0;
    double excess_error = 0.0; // resolved (possibly calibrated)
    LinkBudget budget;
    double sifted_key_rate_bps = 0.0;
    std::string status;
};

struct ModeDelta {
    std::string session_id;
    double qber_single = 0.0;
    double qber_concentration = 0.0;
    double delta_qber = 0.0; // concentration - single
    double delta_sigma = 0.0; // binomial standard error of the delta
    double rate_single_bps = 0.0;
    double rate_concentration_bps = 0.0;
    double delta_rate_bps = 0.0;
    bool anomalous = false; // |delta_qber| > 5 sigma
};

struct NetworkReport {
    std::string scenario_name;
    std::string mode;
    std::uint64_t pulse_count = 0;
    std::uint64_t master_seed = 0;
    double repetition_rate_hz = 0.0;
    std::string rate_basis; // stated assumption behind sifted_key_rate_bps
    std::vector<SessionReport> sessions;
    std::vector<ModeDelta> mode_deltas;
};

/// Plan from the scenario: the explicit channel table when present (must
/// cover all pairs and be a proper coloring), otherwise color_complete_graph.
WavelengthPlan resolve_plan(const Scenario& s);

RouterSpec resolve_router(const Scenario& s);

/// Budget for one session link. A measured end-to-end path loss pins the
/// total: the excess term becomes the residual over computed fiber loss plus
/// router insertion. Throws ConfigError when the measured loss is below the
/// computed floor.
LinkBudget resolve_budget(const Scenario& s, const RouterSpec& router, const NodePair& pair);

/// Resolved excess error for a link: the explicit value, or the one
/// calibrated so the session's expected sifted QBER reproduces measured_qber.
double resolve_excess_error(const Scenario& s, const RouterSpec& router, const NodePair& pair);

LinkPhysics resolve_link_physics(const Scenario& s, const RouterSpec& router,
                                 const NodePair& pair, double xtalk_click_prob);

/// One session resolved against the scenario: the protocol configuration plus
/// the optical bookkeeping feeding its report.
struct PreparedSession {
    SessionConfig config;
    LinkBudget budget;
    double crosstalk_ratio = 0.0;
    LinkPhysicsSpec physics_spec;
};

/// Resolves the active sessions of a mode in ascending (src, dst) order,
/// including crosstalk coupling in concentration mode. The scenario must be
/// valid.
std::vector<PreparedSession> resolve_sessions(const Scenario& s, RunMode mode);

/// Runs every active session of the scenario in the given mode. Single mode
/// runs with zero crosstalk; concentration mode derives each session's
/// crosstalk click probability from the other simultaneously active sessions.
/// Sessions execute in parallel on independent RNG streams derived from
/// (master_seed, session id); reports are merged in ascending session order,
/// so the result is bit-identical regardless of scheduling.
NetworkReport run_scenario(const Scenario& s, RunMode mode);
NetworkReport run_scenario(const Scenario& s);

/// Per-link mode deltas with binomial standard errors. Throws ConfigError
/// when the two reports do not come from the same scenario and seed.
std::vector<ModeDelta> compare_modes(const NetworkReport& single_mode,
                                     const NetworkReport& concentration_mode);

/// Decoy analysis of one link: observables from the calibrated channel model,
/// single-photon bounds, secure key rate.
KeyRateReport run_decoy_analysis(const Scenario& s, const NodePair& link,
                                 const IntensityPair& intensities, double sifting_q, double f_ec);

} // namespace qkdnet
