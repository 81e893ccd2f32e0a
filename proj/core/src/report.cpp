#include "qkdnet/report.hpp"

#include "qkdnet/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace qkdnet {

namespace {

using json = nlohmann::ordered_json;

json session_to_json(const SessionReport& s) {
    return json{
        {"type", "session"},
        {"session_id", s.session_id},
        {"src", s.src},
        {"dst", s.dst},
        {"channel_color", s.channel_color},
        {"wavelength_nm", s.wavelength_nm},
        {"pulses", s.counts.pulses},
        {"clicks", s.counts.clicks},
        {"sifted", s.counts.sifted},
        {"disclosed", s.counts.disclosed},
        {"errors", s.counts.errors},
        {"qber_measured", s.qber_measured},
        {"qber_sample",
         {{"disclosed", s.qber_sample.disclosed_count},
          {"errors", s.qber_sample.error_count},
          {"estimate", s.qber_sample.estimate}}},
        {"qber_analytic",
         {{"total", s.qber_analytic.total},
          {"dark", s.qber_analytic.dark},
          {"visibility", s.qber_analytic.visibility},
          {"crosstalk", s.qber_analytic.crosstalk},
          {"excess", s.qber_analytic.excess}}},
        {"expected",
         {{"click_prob", s.expectation.click_prob},
          {"sifted_prob", s.expectation.sifted_prob},
          {"qber", s.expectation.qber}}},
        {"crosstalk_ratio", s.crosstalk_ratio},
        {"xtalk_click_prob", s.xtalk_click_prob},
        {"excess_error", s.excess_error},
        {"budget",
         {{"fiber_db", s.budget.fiber_loss_db},
          {"router_db", s.budget.router_insertion_db},
          {"excess_db", s.budget.excess_loss_db},
          {"total_db", s.budget.total_db},
          {"transmittance", s.budget.transmittance}}},
        {"sifted_key_rate_bps", s.sifted_key_rate_bps},
        {"status", s.status},
    };
}

SessionReport session_from_json(const json& j) {
    SessionReport s;
    s.session_id = j.at("session_id");
    s.src = j.at("src");
    s.dst = j.at("dst");
    s.channel_color = j.at("channel_color");
    s.wavelength_nm = j.at("wavelength_nm");
    s.counts.pulses = j.at("pulses");
    s.counts.clicks = j.at("clicks");
    s.counts.sifted = j.at("sifted");
    s.counts.disclosed = j.at("disclosed");
    s.counts.errors = j.at("errors");
    s.qber_measured = j.at("qber_measured");
    s.qber_sample.disclosed_count = j.at("qber_sample").at("disclosed");
    s.qber_sample.error_count = j.at("qber_sample").at("errors");
    s.qber_sample.estimate = j.at("qber_sample").at("estimate");
    s.qber_analytic.total = j.at("qber_analytic").at("total");
    s.qber_analytic.dark = j.at("qber_analytic").at("dark");
    s.qber_analytic.visibility = j.at("qber_analytic").at("visibility");
    s.qber_analytic.crosstalk = j.at("qber_analytic").at("crosstalk");
    s.qber_analytic.excess = j.at("qber_analytic").at("excess");
    s.expectation.click_prob = j.at("expected").at("click_prob");
    s.expectation.sifted_prob = j.at("expected").at("sifted_prob");
    s.expectation.qber = j.at("expected").at("qber");
    s.crosstalk_ratio = j.at("crosstalk_ratio");
    s.xtalk_click_prob = j.at("xtalk_click_prob");
    s.excess_error = j.at("excess_error");
    s.budget.fiber_loss_db = j.at("budget").at("fiber_db");
    s.budget.router_insertion_db = j.at("budget").at("router_db");
    s.budget.excess_loss_db = j.at("budget").at("excess_db");
    s.budget.total_db = j.at("budget").at("total_db");
    s.budget.transmittance = j.at("budget").at("transmittance");
    s.sifted_key_rate_bps = j.at("sifted_key_rate_bps");
    s.status = j.at("status");
    return s;
}

json delta_to_json(const ModeDelta& d) {
    return json{
        {"session_id", d.session_id},
        {"qber_single", d.qber_single},
        {"qber_concentration", d.qber_concentration},
        {"delta_qber", d.delta_qber},
        {"delta_sigma", d.delta_sigma},
        {"rate_single_bps", d.rate_single_bps},
        {"rate_concentration_bps", d.rate_concentration_bps},
        {"delta_rate_bps", d.delta_rate_bps},
        {"anomalous", d.anomalous},
    };
}

ModeDelta delta_from_json(const json& j) {
    ModeDelta d;
    d.session_id = j.at("session_id");
    d.qber_single = j.at("qber_single");
    d.qber_concentration = j.at("qber_concentration");
    d.delta_qber = j.at("delta_qber");
    d.delta_sigma = j.at("delta_sigma");
    d.rate_single_bps = j.at("rate_single_bps");
    d.rate_concentration_bps = j.at("rate_concentration_bps");
    d.delta_rate_bps = j.at("delta_rate_bps");
    d.anomalous = j.at("anomalous");
    return d;
}

} // namespace

std::string to_jsonl(const NetworkReport& report) {
    std::ostringstream out;
    for (const auto& s : report.sessions) out << session_to_json(s).dump() << "\n";
    json net{
        {"type", "network"},
        {"scenario", report.scenario_name},
        {"mode", report.mode},
        {"pulses", report.pulse_count},
        {"seed", report.master_seed},
        {"repetition_hz", report.repetition_rate_hz},
        {"rate_basis", report.rate_basis},
    };
    json deltas = json::array();
    for (const auto& d : report.mode_deltas) deltas.push_back(delta_to_json(d));
    net["deltas"] = std::move(deltas);
    out << net.dump() << "\n";
    return out.str();
}

NetworkReport network_report_from_jsonl(const std::string& text) {
    NetworkReport report;
    std::istringstream in(text);
    std::string line;
    bool saw_network = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, true);
        const std::string type = j.at("type");
        if (type == "session") {
            report.sessions.push_back(session_from_json(j));
        } else if (type == "network") {
            saw_network = true;
            report.scenario_name = j.at("scenario");
            report.mode = j.at("mode");
            report.pulse_count = j.at("pulses");
            report.master_seed = j.at("seed");
            report.repetition_rate_hz = j.at("repetition_hz");
            report.rate_basis = j.at("rate_basis");
            for (const auto& d : j.at("deltas")) report.mode_deltas.push_back(delta_from_json(d));
        } else {
            throw ConfigError("unknown record type '" + type + "' in report stream");
        }
    }
    if (!saw_network) throw ConfigError("report stream has no network summary record");
    return report;
}

std::string to_jsonl(const KeyRateReport& r) {
    json j{
        {"type", "decoy"},
        {"rate_per_pulse", r.rate_per_pulse},
        {"rate_bps", r.rate_bps},
        {"secure", r.secure},
        {"signal_mu", r.intensities.signal_mu},
        {"decoy_mu", r.intensities.decoy_mu},
        {"gain_signal", r.observables.gain_signal},
        {"gain_decoy", r.observables.gain_decoy},
        {"qber_signal", r.observables.qber_signal},
        {"qber_decoy", r.observables.qber_decoy},
        {"vacuum_yield", r.observables.vacuum_yield},
        {"gain_order_warning", r.observables.gain_order_warning},
        {"y1_lower", r.bounds.y1_lower},
        {"e1_upper", r.bounds.e1_upper},
        {"q1_lower", r.bounds.q1_lower},
        {"clamped_y1", r.bounds.clamped_y1},
        {"clamped_e1", r.bounds.clamped_e1},
        {"degenerate", r.bounds.degenerate},
        {"degenerate_reason", r.bounds.degenerate_reason},
        {"sifting_q", r.sifting_factor},
        {"f_ec", r.error_correction_inefficiency},
        {"repetition_hz", r.repetition_rate_hz},
    };
    return j.dump() + "\n";
}

KeyRateReport key_rate_report_from_jsonl(const std::string& text) {
    json j = json::parse(text);
    if (j.at("type") != "decoy") throw ConfigError("not a decoy record");
    KeyRateReport r;
    r.rate_per_pulse = j.at("rate_per_pulse");
    r.rate_bps = j.at("rate_bps");
    r.secure = j.at("secure");
    r.intensities.signal_mu = j.at("signal_mu");
    r.intensities.decoy_mu = j.at("decoy_mu");
    r.observables.gain_signal = j.at("gain_signal");
    r.observables.gain_decoy = j.at("gain_decoy");
    r.observables.qber_signal = j.at("qber_signal");
    r.observables.qber_decoy = j.at("qber_decoy");
    r.observables.vacuum_yield = j.at("vacuum_yield");
    r.observables.gain_order_warning = j.at("gain_order_warning");
    r.bounds.y1_lower = j.at("y1_lower");
    r.bounds.e1_upper = j.at("e1_upper");
    r.bounds.q1_lower = j.at("q1_lower");
    r.bounds.clamped_y1 = j.at("clamped_y1");
    r.bounds.clamped_e1 = j.at("clamped_e1");
    r.bounds.degenerate = j.at("degenerate");
    r.bounds.degenerate_reason = j.at("degenerate_reason");
    r.sifting_factor = j.at("sifting_q");
    r.error_correction_inefficiency = j.at("f_ec");
    r.repetition_rate_hz = j.at("repetition_hz");
    return r;
}

std::string human_table(const NetworkReport& report) {
    std::ostringstream out;
    char buf[256];
    out << "scenario " << report.scenario_name << "  mode=" << report.mode
        << "  pulses=" << report.pulse_count << "  seed=" << report.master_seed << "\n";
    out << "note: " << report.rate_basis << "\n\n";
    std::snprintf(buf, sizeof(buf), "%-8s %-6s %-9s %10s %9s %9s %9s %10s %10s  %s\n", "link",
                  "nm", "loss(dB)", "clicks", "sifted", "QBER", "QBERexp", "rate(bps)", "xtalk",
                  "status");
    out << buf;
    for (const auto& s : report.sessions) {
        std::snprintf(buf, sizeof(buf),
                      "%-8s %-6.0f %-9.2f %10llu %9llu %8.3f%% %8.3f%% %10.1f %10.3g  %s\n",
                      s.session_id.c_str(), s.wavelength_nm, s.budget.total_db,
                      static_cast<unsigned long long>(s.counts.clicks),
                      static_cast<unsigned long long>(s.counts.sifted), 100.0 * s.qber_measured,
                      100.0 * s.expectation.qber, s.sifted_key_rate_bps, s.crosstalk_ratio,
                      s.status.c_str());
        out << buf;
    }
    if (!report.mode_deltas.empty()) {
        out << "\nmode comparison (concentration - single):\n";
        std::snprintf(buf, sizeof(buf), "%-8s %12s %12s %12s %12s %s\n", "link", "QBER1", "QBER2",
                      "dQBER(pp)", "sigma(pp)", "flag");
        out << buf;
        for (const auto& d : report.mode_deltas) {
            std::snprintf(buf, sizeof(buf), "%-8s %11.3f%% %11.3f%% %12.4f %12.4f %s\n",
                          d.session_id.c_str(), 100.0 * d.qber_single,
                          100.0 * d.qber_concentration, 100.0 * d.delta_qber,
                          100.0 * d.delta_sigma, d.anomalous ? "ANOMALY(>5sigma)" : "ok");
            out << buf;
        }
    }
    return out.str();
}

std::string human_table(const KeyRateReport& r) {
    std::ostringstream out;
    char buf[256];
    out << "two-intensity decoy analysis\n";
    std::snprintf(buf, sizeof(buf), "  signal mu=%.4g  decoy mu=%.4g  q=%.3g  f_ec=%.3g\n",
                  r.intensities.signal_mu, r.intensities.decoy_mu, r.sifting_factor,
                  r.error_correction_inefficiency);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "  gains: signal %.4e  decoy %.4e   QBER: signal %.4f  decoy %.4f\n",
                  r.observables.gain_signal, r.observables.gain_decoy, r.observables.qber_signal,
                  r.observables.qber_decoy);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  vacuum yield Y0 = %.4e (used in both bounds)\n",
                  r.observables.vacuum_yield);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  Y1 >= %.6e   e1 <= %.6f   Q1 >= %.6e%s%s\n",
                  r.bounds.y1_lower, r.bounds.e1_upper, r.bounds.q1_lower,
                  r.bounds.clamped_y1 ? "  [Y1 clamped]" : "",
                  r.bounds.clamped_e1 ? "  [e1 clamped]" : "");
    out << buf;
    if (r.bounds.degenerate) {
        out << "  NO SECURE KEY: " << r.bounds.degenerate_reason << "\n";
    }
    std::snprintf(buf, sizeof(buf), "  secure key rate: %.6e per pulse  (%.4g bit/s at %.4g Hz)\n",
                  r.rate_per_pulse, r.rate_bps, r.repetition_rate_hz);
    out << buf;
    out << (r.secure ? "  result: positive secure key rate\n"
                     : "  result: no secure key under these bounds\n");
    return out.str();
}

} // namespace qkdnet
