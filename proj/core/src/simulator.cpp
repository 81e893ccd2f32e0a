#include "qkdnet/simulator.hpp"

#include "qkdnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>

namespace qkdnet {

WavelengthPlan resolve_plan(const Scenario& s) {
    if (s.channel_nm.empty()) {
        WavelengthPlan plan = color_complete_graph(static_cast<int>(s.nodes.size()));
        for (std::size_t i = 0; i < s.nodes.size(); ++i) plan.nodes[i].label = s.nodes[i].label;
        return plan;
    }
    WavelengthPlan plan;
    plan.nodes = s.nodes;
    for (const auto& [pair, nm] : s.channel_nm) {
        const auto pos = s.grid.position(nm);
        if (!pos)
            throw ConfigError("channel wavelength " + std::to_string(nm) + " nm is not on the grid");
        plan.assignment[pair] = ChannelIndex{static_cast<int>(*pos), nm};
    }
    return plan;
}

RouterSpec resolve_router(const Scenario& s) {
    validate_scenario(s);
    const WavelengthPlan plan = resolve_plan(s);

    std::vector<double> insertion;
    insertion.reserve(s.grid.size());
    for (double nm : s.grid.wavelengths()) insertion.push_back(s.insertion_db_by_nm.at(nm));

    std::vector<std::vector<double>> measured;
    const std::vector<std::vector<double>>* measured_ptr = nullptr;
    if (s.measured_isolation) {
        const auto n = s.grid.size();
        measured.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                measured[i][j] = s.measured_isolation->at({s.grid.at(i), s.grid.at(j)});
        measured_ptr = &measured;
    }
    return build_router_spec(plan, s.grid, s.adjacent_isolation_db, s.nonadjacent_isolation_db,
                             insertion, measured_ptr);
}

LinkBudget resolve_budget(const Scenario& s, const RouterSpec& router, const NodePair& pair) {
    const auto& src_leg = s.fibers.at(pair.a);
    const auto& dst_leg = s.fibers.at(pair.b);
    const ChannelIndex channel = router.plan.channel(pair);
    const double insertion = router.insertion_loss_db(channel);

    double excess_db = 0.0;
    const auto phys_it = s.link_physics.find(pair);
    if (phys_it != s.link_physics.end() && phys_it->second.measured_path_loss_db) {
        const double measured = *phys_it->second.measured_path_loss_db;
        const double computed = src_leg.loss_db() + dst_leg.loss_db() + insertion;
        if (measured < computed - 1e-9)
            throw ConfigError("measured path loss " + std::to_string(measured) + " dB for " +
                              s.node(pair.a).label + "-" + s.node(pair.b).label +
                              " is below computed fiber + insertion (" + std::to_string(computed) +
                              " dB)");
        excess_db = std::max(0.0, measured - computed);
    }
    return link_budget(src_leg, dst_leg, router, s.node(pair.a), s.node(pair.b), channel,
                       excess_db);
}

double resolve_excess_error(const Scenario& s, const RouterSpec& router, const NodePair& pair) {
    const auto& phys = s.link_physics.at(pair);
    if (phys.excess_error) return *phys.excess_error;
    if (!phys.measured_qber)
        throw ConfigError("link " + s.node(pair.a).label + "-" + s.node(pair.b).label +
                          " requests calibration but has no measured_qber");
    LinkPhysics lp = resolve_link_physics(s, router, pair, 0.0);
    lp.excess_error = 0.0;
    return calibrate_session_excess(*phys.measured_qber, lp);
}

LinkPhysics resolve_link_physics(const Scenario& s, const RouterSpec& router,
                                 const NodePair& pair, double xtalk_click_prob) {
    const auto& phys = s.link_physics.at(pair);
    const LinkBudget budget = resolve_budget(s, router, pair);
    LinkPhysics lp;
    lp.mean_photon_number = s.mean_photon_number;
    lp.transmittance = budget.transmittance;
    lp.detector_efficiency = s.eta;
    lp.visibility = phys.visibility;
    lp.dark_prob = phys.dark_prob;
    lp.xtalk_click_prob = xtalk_click_prob;
    lp.excess_error = phys.excess_error ? *phys.excess_error : 0.0;
    return lp;
}

namespace {

std::string rate_basis_label(double repetition_rate_hz) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "sifted_key_rate_bps = sifted / pulses * %.6g Hz pulse rate; detector duty "
                  "cycle and dead time are not modeled",
                  repetition_rate_hz);
    return buf;
}

} // namespace

NetworkReport run_scenario(const Scenario& s) {
    return run_scenario(s, s.mode);
}

std::vector<PreparedSession> resolve_sessions(const Scenario& s, RunMode mode) {
    auto session_list = s.active_sessions(mode);
    std::sort(session_list.begin(), session_list.end(),
              [](const SessionSpec& a, const SessionSpec& b) {
                  return a.src != b.src ? a.src < b.src : a.dst < b.dst;
              });
    if (session_list.empty()) return {};

    const RouterSpec router = resolve_router(s);

    // Crosstalk ratios are a static precomputation over the set of
    // simultaneously active sessions.
    std::vector<double> ratios(session_list.size(), 0.0);
    if (mode == RunMode::Concentration && session_list.size() > 1) {
        std::vector<SessionFlux> fluxes;
        fluxes.reserve(session_list.size());
        for (const auto& sess : session_list) {
            fluxes.push_back({router.plan.channel(sess.pair()), s.mean_photon_number,
                              s.fibers.at(sess.src).loss_db()});
        }
        for (std::size_t v = 0; v < session_list.size(); ++v) {
            std::vector<SessionFlux> aggressors;
            for (std::size_t a = 0; a < session_list.size(); ++a)
                if (a != v) aggressors.push_back(fluxes[a]);
            ratios[v] = crosstalk_ratio(router, fluxes[v], aggressors);
        }
    }

    std::vector<PreparedSession> prepared;
    prepared.reserve(session_list.size());
    for (std::size_t i = 0; i < session_list.size(); ++i) {
        const auto& sess = session_list[i];
        const NodePair pair = sess.pair();
        const LinkBudget budget = resolve_budget(s, router, pair);
        const double excess_error = resolve_excess_error(s, router, pair);

        LinkPhysics lp = resolve_link_physics(s, router, pair, 0.0);
        lp.excess_error = excess_error;
        // Leaked aggressor light behaves as Poissonian background scaled by
        // the flux ratio.
        lp.xtalk_click_prob =
            1.0 - std::exp(-ratios[i] * s.mean_photon_number * budget.transmittance * s.eta);

        SessionConfig cfg;
        cfg.session_id = s.session_id(sess);
        cfg.src_label = s.node(sess.src).label;
        cfg.dst_label = s.node(sess.dst).label;
        cfg.channel = router.plan.channel(pair);
        cfg.physics = lp;
        cfg.pulse_count = s.pulse_count;
        cfg.disclose_fraction = s.disclose_fraction;
        prepared.push_back({std::move(cfg), budget, ratios[i], s.link_physics.at(pair)});
    }
    return prepared;
}

NetworkReport run_scenario(const Scenario& s, RunMode mode) {
    validate_scenario(s);

    NetworkReport report;
    report.scenario_name = s.name;
    report.mode = to_string(mode);
    report.pulse_count = s.pulse_count;
    report.master_seed = s.master_seed;
    report.repetition_rate_hz = s.repetition_rate_hz;
    report.rate_basis = rate_basis_label(s.repetition_rate_hz);

    const std::vector<PreparedSession> prepared = resolve_sessions(s, mode);
    if (prepared.empty()) return report;

    // Sessions own their state and RNG stream; execution order cannot change
    // the result, so parallel dispatch is safe.
    std::vector<std::future<SessionState>> futures;
    futures.reserve(prepared.size());
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        futures.push_back(std::async(std::launch::async, [&s, &prepared, i]() {
            const auto& p = prepared[i];
            RngStream rng = derive_stream(s.master_seed, p.config.session_id);
            return run_session(p.config, rng);
        }));
    }

    for (std::size_t i = 0; i < prepared.size(); ++i) {
        SessionState state = futures[i].get();
        const auto& p = prepared[i];

        SessionReport sr;
        sr.session_id = state.session_id;
        sr.src = state.src_label;
        sr.dst = state.dst_label;
        sr.channel_color = state.channel.color;
        sr.wavelength_nm = state.channel.wavelength_nm;
        sr.counts = state.counts;
        sr.qber_measured = state.qber_full_key;
        sr.qber_sample = state.qber_sample;
        sr.budget = p.budget;
        sr.crosstalk_ratio = p.crosstalk_ratio;
        sr.xtalk_click_prob = p.config.physics.xtalk_click_prob;
        sr.excess_error = p.config.physics.excess_error;
        sr.expectation = expected_session_stats(p.config.physics);

        DetectorModel det;
        det.efficiency = s.eta;
        det.dark_count_prob_per_gate = p.physics_spec.dark_prob;
        det.gate_rate_hz = s.gate_rate_hz;
        SourceModel src_model;
        src_model.mean_photon_number = s.mean_photon_number;
        src_model.repetition_rate_hz = s.repetition_rate_hz;
        sr.qber_analytic = qber_model(p.budget, p.physics_spec.visibility, det, src_model,
                                      sr.crosstalk_ratio, sr.excess_error);

        sr.sifted_key_rate_bps = static_cast<double>(state.counts.sifted) /
                                 static_cast<double>(state.counts.pulses) * s.repetition_rate_hz;
        sr.status = to_string(state.status);
        report.sessions.push_back(std::move(sr));
    }
    return report;
}

std::vector<ModeDelta> compare_modes(const NetworkReport& single_mode,
                                     const NetworkReport& concentration_mode) {
    if (single_mode.scenario_name != concentration_mode.scenario_name ||
        single_mode.pulse_count != concentration_mode.pulse_count ||
        single_mode.master_seed != concentration_mode.master_seed)
        throw ConfigError("mode comparison requires reports from the same scenario, pulse count "
                          "and seed");

    std::vector<ModeDelta> deltas;
    for (const auto& conc : concentration_mode.sessions) {
        const auto single_it =
            std::find_if(single_mode.sessions.begin(), single_mode.sessions.end(),
                         [&](const SessionReport& r) { return r.session_id == conc.session_id; });
        if (single_it == single_mode.sessions.end()) continue;

        ModeDelta d;
        d.session_id = conc.session_id;
        d.qber_single = single_it->qber_measured;
        d.qber_concentration = conc.qber_measured;
        d.delta_qber = d.qber_concentration - d.qber_single;
        const auto var = [](const SessionReport& r) {
            if (r.counts.sifted == 0) return 0.0;
            const double q = r.qber_measured;
            return q * (1.0 - q) / static_cast<double>(r.counts.sifted);
        };
        d.delta_sigma = std::sqrt(var(*single_it) + var(conc));
        d.rate_single_bps = single_it->sifted_key_rate_bps;
        d.rate_concentration_bps = conc.sifted_key_rate_bps;
        d.delta_rate_bps = d.rate_concentration_bps - d.rate_single_bps;
        d.anomalous = d.delta_sigma > 0.0 && std::abs(d.delta_qber) > 5.0 * d.delta_sigma;
        deltas.push_back(std::move(d));
    }
    return deltas;
}

KeyRateReport run_decoy_analysis(const Scenario& s, const NodePair& link,
                                 const IntensityPair& intensities, double sifting_q, double f_ec) {
    intensities.validate();
    const RouterSpec router = resolve_router(s);
    if (!s.link_physics.count(link))
        throw ConfigError("no [physics] entries for decoy link " + s.node(link.a).label + "-" +
                          s.node(link.b).label);
    const auto& phys = s.link_physics.at(link);
    const LinkBudget budget = resolve_budget(s, router, link);
    const double excess = resolve_excess_error(s, router, link);

    DecoyChannel channel;
    channel.transmittance = budget.transmittance;
    channel.detector_efficiency = s.eta;
    channel.dark_prob = phys.dark_prob;
    channel.visibility_error = visibility_error(phys.visibility);
    channel.excess_error = excess;

    const DecoyObservables obs = observables_from_channel(channel, intensities);
    const DecoyBounds bounds = bound_y1_e1(obs, intensities);
    return secure_key_rate(bounds, obs, intensities, sifting_q, f_ec, s.repetition_rate_hz);
}

} // namespace qkdnet
