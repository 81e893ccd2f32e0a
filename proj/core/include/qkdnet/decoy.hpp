#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qkdnet {

/// Signal/decoy intensity pair. The decoy intensity must be the weaker one.
struct IntensityPair {
    double signal_mu = 0.6;
    double decoy_mu = 0.2;

    void validate() const;
};

/// Measured (or model-generated) gains and error rates at the two intensities.
/// vacuum_yield is the detector click probability with the source off (the
/// dark rate); it is characterized separately in practice and tightens the
/// single-photon bounds. Leave it 0 when unknown.
struct DecoyObservables {
    double gain_signal = 0.0;
    double gain_decoy = 0.0;
    double qber_signal = 0.0;
    double qber_decoy = 0.0;
    double vacuum_yield = 0.0;
    bool gain_order_warning = false; // gain_decoy >= gain_signal (finite-sample)
};

/// Bounds on the single-photon contribution.
struct DecoyBounds {
    double y1_lower = 0.0; // lower bound on the single-photon yield
    double e1_upper = 0.0; // upper bound on the single-photon error rate
    double q1_lower = 0.0; // y1_lower * signal_mu * exp(-signal_mu)
    bool clamped_y1 = false;
    bool clamped_e1 = false;
    bool degenerate = false; // no secure key claimable from these bounds
    std::string degenerate_reason;
};

struct KeyRateReport {
    double rate_per_pulse = 0.0; // may be <= 0: no secure key
    double rate_bps = 0.0;
    // Inputs echo.
    IntensityPair intensities;
    DecoyObservables observables;
    DecoyBounds bounds;
    double sifting_factor = 0.5;
    double error_correction_inefficiency = 1.22;
    double repetition_rate_hz = 1e6;
    bool secure = false; // rate_per_pulse > 0 and bounds not degenerate
};

/// Poissonian photon-number distribution: exp(-mu) mu^n / n!.
double poisson_pn(double mu, unsigned n);

/// Channel parameters feeding the decoy observables bridge.
struct DecoyChannel {
    double transmittance = 1.0;
    double detector_efficiency = 0.10;
    double dark_prob = 0.0;
    double visibility_error = 0.0; // (1 - V) / 2
    double excess_error = 0.0;
};

/// Gain and QBER a pulse of the given intensity produces on the channel:
/// gain = 1 - (1 - p_dark) exp(-mu t eta),
/// qber = [0.5 p_dark + (e_vis + excess)(1 - exp(-mu t eta))] / gain.
std::pair<double, double> expected_observables(const DecoyChannel& channel, double mu);

/// Convenience: full observable set for an intensity pair, including the
/// channel's vacuum yield.
DecoyObservables observables_from_channel(const DecoyChannel& channel,
                                          const IntensityPair& intensities);

/// Two-intensity bounds on the single-photon yield and error rate. With
/// s = signal_mu, d = decoy_mu:
///   y1 >= (s / (d s - d^2)) [Qd e^d - Qs e^s d^2/s^2 - (s^2 - d^2)/s^2 * Y0]
///   e1 <= (Ed Qd e^d - 0.5 Y0) / (y1 * d)
/// where Y0 = observables.vacuum_yield. Bounds are clamped to probability
/// ranges; clamping is flagged, and y1 <= 0 or e1 >= 0.5 marks the result
/// degenerate (no secure key claimable).
DecoyBounds bound_y1_e1(const DecoyObservables& obs, const IntensityPair& intensities);

/// Binary entropy, h2(0) = h2(1) = 0 by continuity.
double h2(double x);

/// rate_per_pulse = q (-gain_signal f_ec h2(qber_signal) + q1_lower (1 - h2(e1_upper))).
KeyRateReport secure_key_rate(const DecoyBounds& bounds,
                              const DecoyObservables& obs,
                              const IntensityPair& intensities,
                              double sifting_factor,
                              double error_correction_inefficiency,
                              double repetition_rate_hz);

/// Per-photon-number yields and error rates of the channel family behind
/// expected_observables; the independent oracle for bound sandwich checks.
///   Y_n = 1 - (1 - p_dark)(1 - t eta)^n
///   e_n Y_n = 0.5 p_dark + (e_vis + excess)(1 - (1 - t eta)^n)
double true_yield_n(const DecoyChannel& channel, unsigned n);
double true_error_n(const DecoyChannel& channel, unsigned n);

} // namespace qkdnet
