#include "qkdnet/decoy.hpp"

#include "qkdnet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qkdnet {

void IntensityPair::validate() const {
    if (!(decoy_mu > 0.0))
        throw InvalidArgumentError("decoy intensity must be positive");
    if (!(decoy_mu < signal_mu))
        throw InvalidArgumentError("decoy intensity must be below the signal intensity (got decoy " +
                                   std::to_string(decoy_mu) + ", signal " +
                                   std::to_string(signal_mu) + ")");
}

double poisson_pn(double mu, unsigned n) {
    if (!(mu > 0.0)) throw InvalidArgumentError("poisson_pn: mu must be positive");
    double p = std::exp(-mu);
    for (unsigned k = 1; k <= n; ++k) p *= mu / static_cast<double>(k);
    return p;
}

std::pair<double, double> expected_observables(const DecoyChannel& channel, double mu) {
    if (mu < 0.0) throw InvalidArgumentError("intensity must be non-negative");
    const double te = channel.transmittance * channel.detector_efficiency;
    const double detect = 1.0 - std::exp(-mu * te);
    const double gain = 1.0 - (1.0 - channel.dark_prob) * std::exp(-mu * te);
    if (gain <= 0.0) return {0.0, 0.0};
    const double qber = (0.5 * channel.dark_prob +
                         (channel.visibility_error + channel.excess_error) * detect) /
                        gain;
    return {gain, qber};
}

DecoyObservables observables_from_channel(const DecoyChannel& channel,
                                          const IntensityPair& intensities) {
    intensities.validate();
    DecoyObservables obs;
    std::tie(obs.gain_signal, obs.qber_signal) = expected_observables(channel, intensities.signal_mu);
    std::tie(obs.gain_decoy, obs.qber_decoy) = expected_observables(channel, intensities.decoy_mu);
    obs.vacuum_yield = channel.dark_prob;
    obs.gain_order_warning = obs.gain_decoy >= obs.gain_signal;
    return obs;
}

double true_yield_n(const DecoyChannel& channel, unsigned n) {
    const double te = channel.transmittance * channel.detector_efficiency;
    return 1.0 - (1.0 - channel.dark_prob) * std::pow(1.0 - te, static_cast<double>(n));
}

double true_error_n(const DecoyChannel& channel, unsigned n) {
    const double te = channel.transmittance * channel.detector_efficiency;
    const double yn = true_yield_n(channel, n);
    if (yn <= 0.0) return 0.0;
    const double detect_n = 1.0 - std::pow(1.0 - te, static_cast<double>(n));
    return (0.5 * channel.dark_prob +
            (channel.visibility_error + channel.excess_error) * detect_n) /
           yn;
}

DecoyBounds bound_y1_e1(const DecoyObservables& obs, const IntensityPair& intensities) {
    intensities.validate();
    const double s = intensities.signal_mu;
    const double d = intensities.decoy_mu;
    const double y0 = obs.vacuum_yield;

    DecoyBounds b;
    const double y1_raw = (s / (d * s - d * d)) *
                          (obs.gain_decoy * std::exp(d) -
                           obs.gain_signal * std::exp(s) * (d * d) / (s * s) -
                           (s * s - d * d) / (s * s) * y0);
    b.y1_lower = std::clamp(y1_raw, 0.0, 1.0);
    b.clamped_y1 = b.y1_lower != y1_raw;

    if (b.y1_lower <= 0.0) {
        b.degenerate = true;
        b.degenerate_reason = "single-photon yield bound is non-positive";
        b.e1_upper = 0.5;
        return b;
    }

    const double e1_raw =
        (obs.qber_decoy * obs.gain_decoy * std::exp(d) - 0.5 * y0) / (b.y1_lower * d);
    b.e1_upper = std::clamp(e1_raw, 0.0, 0.5);
    b.clamped_e1 = b.e1_upper != e1_raw;

    b.q1_lower = b.y1_lower * s * std::exp(-s);

    if (b.e1_upper >= 0.5) {
        b.degenerate = true;
        b.degenerate_reason = "single-photon error bound reaches 0.5";
    }
    return b;
}

double h2(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw InvalidArgumentError("h2 argument must be in [0, 1], got " + std::to_string(x));
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

KeyRateReport secure_key_rate(const DecoyBounds& bounds,
                              const DecoyObservables& obs,
                              const IntensityPair& intensities,
                              double sifting_factor,
                              double error_correction_inefficiency,
                              double repetition_rate_hz) {
    if (!(sifting_factor > 0.0 && sifting_factor <= 1.0))
        throw InvalidArgumentError("sifting factor must be in (0, 1]");
    if (!(error_correction_inefficiency >= 1.0))
        throw InvalidArgumentError("error correction inefficiency must be >= 1");
    if (!(repetition_rate_hz > 0.0))
        throw InvalidArgumentError("repetition rate must be positive");

    KeyRateReport report;
    report.intensities = intensities;
    report.observables = obs;
    report.bounds = bounds;
    report.sifting_factor = sifting_factor;
    report.error_correction_inefficiency = error_correction_inefficiency;
    report.repetition_rate_hz = repetition_rate_hz;

    const double ec_cost =
        obs.gain_signal * error_correction_inefficiency * h2(obs.qber_signal);
    const double pa_credit = bounds.q1_lower * (1.0 - h2(bounds.e1_upper));
    report.rate_per_pulse = sifting_factor * (pa_credit - ec_cost);
    report.rate_bps = report.rate_per_pulse * repetition_rate_hz;
    report.secure = !bounds.degenerate && report.rate_per_pulse > 0.0;
    return report;
}

} // namespace qkdnet
