#include "qkdnet/optics.hpp"

#include "qkdnet/errors.hpp"

#include <cmath>
#include <cstdio>

namespace qkdnet {

double FiberLink::loss_db() const {
    if (measured_loss_db) return *measured_loss_db;
    return length_km * attenuation_db_per_km;
}

void DetectorModel::validate() const {
    if (!(efficiency > 0.0 && efficiency <= 1.0))
        throw InvalidArgumentError("detector efficiency must be in (0, 1]");
    if (!(dark_count_prob_per_gate >= 0.0 && dark_count_prob_per_gate < 0.01))
        throw InvalidArgumentError("dark count probability per gate must be in [0, 0.01)");
    if (!(gate_rate_hz > 0.0))
        throw InvalidArgumentError("gate rate must be positive");
}

void SourceModel::validate() const {
    if (!(mean_photon_number > 0.0))
        throw InvalidArgumentError("mean photon number must be positive");
    if (!(repetition_rate_hz > 0.0))
        throw InvalidArgumentError("repetition rate must be positive");
}

double transmittance(double loss_db) {
    if (loss_db < 0.0)
        throw InvalidArgumentError("loss must be non-negative, got " + std::to_string(loss_db));
    return std::pow(10.0, -loss_db / 10.0);
}

LinkBudget link_budget(const FiberLink& src_leg,
                       const FiberLink& dst_leg,
                       const RouterSpec& spec,
                       const NodeId& src,
                       const NodeId& dst,
                       const ChannelIndex& channel,
                       double excess_db) {
    if (excess_db < 0.0) throw InvalidArgumentError("excess loss must be non-negative");
    auto port_has = [&](int node) {
        const auto& port = spec.ports.at(static_cast<std::size_t>(node));
        for (const auto& c : port)
            if (c.color == channel.color) return true;
        return false;
    };
    if (!port_has(src.index) || !port_has(dst.index))
        throw RoutingError("channel color " + std::to_string(channel.color) +
                           " not present at both ports of " + src.label + "-" + dst.label);

    LinkBudget b;
    b.fiber_loss_db = src_leg.loss_db() + dst_leg.loss_db();
    b.router_insertion_db = spec.insertion_loss_db(channel);
    b.excess_loss_db = excess_db;
    b.total_db = b.fiber_loss_db + b.router_insertion_db + b.excess_loss_db;
    b.transmittance = transmittance(b.total_db);
    return b;
}

double gain(double mu, double t, double eta, double p_dark) {
    if (mu < 0.0 || t < 0.0 || t > 1.0 || eta <= 0.0 || eta > 1.0 || p_dark < 0.0 || p_dark >= 1.0)
        throw InvalidArgumentError("gain: parameter out of range");
    return 1.0 - (1.0 - p_dark) * std::exp(-mu * t * eta);
}

double visibility_error(double visibility) {
    if (!(visibility > 0.0 && visibility <= 1.0))
        throw InvalidArgumentError("visibility must be in (0, 1], got " +
                                   std::to_string(visibility));
    return (1.0 - visibility) / 2.0;
}

double crosstalk_ratio(const RouterSpec& spec,
                       const SessionFlux& victim,
                       std::span<const SessionFlux> aggressors) {
    const double victim_path_db =
        victim.src_fiber_loss_db + spec.insertion_loss_db(victim.channel);
    const double victim_flux = victim.mean_photon_number * transmittance(victim_path_db);

    double leaked = 0.0;
    for (const auto& agg : aggressors) {
        if (agg.channel.color == victim.channel.color)
            throw ConfigError("crosstalk model requires distinct channels; aggressor and victim "
                              "both use color " + std::to_string(agg.channel.color));
        const double leak_db =
            agg.src_fiber_loss_db + spec.leak_suppression_db(agg.channel, victim.channel);
        leaked += agg.mean_photon_number * transmittance(leak_db);
    }
    return leaked / victim_flux;
}

CrosstalkWorstCase worst_case_crosstalk(const RouterSpec& spec,
                                        double diameter_km,
                                        double attenuation_db_per_km) {
    if (diameter_km <= 0.0 || attenuation_db_per_km <= 0.0)
        throw InvalidArgumentError("diameter and attenuation must be positive");
    const double disadvantage_db = diameter_km * attenuation_db_per_km;
    const int n_colors = static_cast<int>(spec.insertion_db.size());

    CrosstalkWorstCase worst;
    for (int v = 0; v < n_colors; ++v) {
        const ChannelIndex vic{v, spec.grid.at(static_cast<std::size_t>(v))};
        double ratio = 0.0;
        for (int a = 0; a < n_colors; ++a) {
            if (a == v) continue;
            const ChannelIndex agg{a, spec.grid.at(static_cast<std::size_t>(a))};
            // Victim insertion loss is part of the disadvantage budget here:
            // the stated geometry bounds the total fiber-loss gap, so the
            // ratio reduces to 10^((disadvantage - suppression)/10) per
            // aggressor.
            ratio += std::pow(10.0, (disadvantage_db - spec.leak_suppression_db(agg, vic)) / 10.0);
        }
        if (ratio > worst.ratio) {
            worst.ratio = ratio;
            worst.victim_color = v;
        }
    }

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "worst case over a %.0f km diameter: aggressors on every other channel launch at "
                  "the router, victim signal carries %.1f dB more fiber loss than any leaked light",
                  diameter_km, disadvantage_db);
    worst.assumption = buf;
    return worst;
}

namespace {

QberEstimate qber_from_parts(double S, double D, double e_vis, double xtalk, double excess_error) {
    QberEstimate q;
    const double denom = S + D;
    if (denom <= 0.0) return q;
    q.dark = 0.5 * D / denom;
    q.visibility = e_vis * S / denom;
    q.crosstalk = 0.5 * xtalk * S / denom;
    q.excess = excess_error * S / denom;
    q.total = q.dark + q.visibility + q.crosstalk + q.excess;
    return q;
}

} // namespace

QberEstimate qber_model(const LinkBudget& budget,
                        double visibility,
                        const DetectorModel& det,
                        const SourceModel& src,
                        double xtalk,
                        double excess_error) {
    det.validate();
    src.validate();
    if (xtalk < 0.0) throw InvalidArgumentError("crosstalk fraction must be non-negative");
    if (excess_error < 0.0) throw InvalidArgumentError("excess error must be non-negative");
    const double e_vis = visibility_error(visibility);
    const double S =
        1.0 - std::exp(-src.mean_photon_number * budget.transmittance * det.efficiency);
    return qber_from_parts(S, det.dark_count_prob_per_gate, e_vis, xtalk, excess_error);
}

double calibrate_excess_error(double measured_qber,
                              const LinkBudget& budget,
                              double visibility,
                              const DetectorModel& det,
                              const SourceModel& src,
                              double xtalk) {
    if (!(measured_qber >= 0.0 && measured_qber <= 0.5))
        throw InvalidArgumentError("measured QBER must be in [0, 0.5]");
    auto model = [&](double e) {
        return qber_model(budget, visibility, det, src, xtalk, e).total;
    };
    const double floor = model(0.0);
    if (measured_qber < floor - 1e-12)
        throw CalibrationError("measured QBER " + std::to_string(measured_qber) +
                               " is below the model floor " + std::to_string(floor));

    double lo = 0.0, hi = 0.5;
    if (model(hi) < measured_qber)
        throw CalibrationError("measured QBER " + std::to_string(measured_qber) +
                               " is above the model ceiling at excess_error = 0.5");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (model(mid) < measured_qber) lo = mid; else hi = mid;
        if (hi - lo < 1e-15) break;
    }
    const double e = 0.5 * (lo + hi);
    if (std::abs(model(e) - measured_qber) > 1e-6)
        throw CalibrationError("calibration did not converge to within 1e-6");
    return e;
}

} // namespace qkdnet
