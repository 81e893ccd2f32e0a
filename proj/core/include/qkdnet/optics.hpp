#pragma once

#include "qkdnet/topology.hpp"

#include <optional>
#include <span>
#include <string>

namespace qkdnet {

/// One fiber leg (node to router or router to node). A measured loss, when
/// present, is used verbatim instead of length * attenuation.
struct FiberLink {
    double length_km = 0.0;
    double attenuation_db_per_km = 0.2;
    std::optional<double> measured_loss_db;

    double loss_db() const;
};

struct DetectorModel {
    double efficiency = 0.10;            // in (0, 1]
    double dark_count_prob_per_gate = 0; // in [0, 0.01)
    double gate_rate_hz = 1e6;

    void validate() const;
};

struct SourceModel {
    double mean_photon_number = 0.1; // photons per pulse
    double repetition_rate_hz = 1e6;

    void validate() const;
};

/// End-to-end transmittance decomposition for one session.
struct LinkBudget {
    double fiber_loss_db = 0.0;
    double router_insertion_db = 0.0;
    double excess_loss_db = 0.0;
    double total_db = 0.0;
    double transmittance = 1.0;
};

/// Analytic QBER decomposition. Components are fractions of the total click
/// rate and sum to `total`.
struct QberEstimate {
    double total = 0.0;
    double dark = 0.0;
    double visibility = 0.0;
    double crosstalk = 0.0;
    double excess = 0.0;
};

/// Optical description of one session as seen by the crosstalk model:
/// its channel, launch intensity and the transmitter-side fiber loss.
struct SessionFlux {
    ChannelIndex channel;
    double mean_photon_number = 0.1;
    double src_fiber_loss_db = 0.0;
};

struct CrosstalkWorstCase {
    double ratio = 0.0;
    int victim_color = 0;
    std::string assumption;
};

/// 10^(-loss_db/10). Throws InvalidArgumentError for negative loss.
double transmittance(double loss_db);

/// Assembles a LinkBudget from the two fiber legs, the router through-loss of
/// the session channel and an excess term. Throws RoutingError when the
/// channel is absent at either port.
LinkBudget link_budget(const FiberLink& src_leg,
                       const FiberLink& dst_leg,
                       const RouterSpec& spec,
                       const NodeId& src,
                       const NodeId& dst,
                       const ChannelIndex& channel,
                       double excess_db);

/// Single-detector gain: Q = 1 - (1 - p_dark) * exp(-mu * t * eta).
double gain(double mu, double t, double eta, double p_dark);

/// Intrinsic interferometric error floor e_vis = (1 - V) / 2 for V in (0, 1].
double visibility_error(double visibility);

/// Leaked aggressor flux at the victim's detector divided by the victim
/// signal flux. The comparison point is the victim's destination-port WDM
/// output; the shared destination fiber (and any loss downstream of it)
/// divides out. Victim path = its source fiber + channel insertion loss;
/// each aggressor path = its source fiber + leak suppression into the
/// victim's channel.
double crosstalk_ratio(const RouterSpec& spec,
                       const SessionFlux& victim,
                       std::span<const SessionFlux> aggressors);

/// Bounding-geometry crosstalk check for a network of the given diameter:
/// every other grid channel is an active aggressor whose launch point sits at
/// the router while the victim transmitter crosses the full diameter, so the
/// victim signal carries `attenuation * diameter` dB more fiber loss than any
/// leaked light. Scans all victim channels and returns the worst ratio.
CrosstalkWorstCase worst_case_crosstalk(const RouterSpec& spec,
                                        double diameter_km,
                                        double attenuation_db_per_km);

/// Analytic QBER decomposition. With S = 1 - exp(-mu*t*eta) and D = p_dark:
/// total = [0.5*D + e_vis*S + 0.5*xtalk*S + excess_error*S] / (S + D).
QberEstimate qber_model(const LinkBudget& budget,
                        double visibility,
                        const DetectorModel& det,
                        const SourceModel& src,
                        double xtalk,
                        double excess_error);

/// Finds the excess_error in [0, 0.5] that makes qber_model reproduce
/// measured_qber to within 1e-6 (bisection; the model is monotone in the
/// excess term). Throws CalibrationError when measured_qber is below the
/// zero-excess floor.
double calibrate_excess_error(double measured_qber,
                              const LinkBudget& budget,
                              double visibility,
                              const DetectorModel& det,
                              const SourceModel& src,
                              double xtalk);

} // namespace qkdnet
