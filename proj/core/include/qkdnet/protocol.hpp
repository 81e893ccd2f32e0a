#pragma once

#include "qkdnet/rng.hpp"
#include "qkdnet/topology.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qkdnet {

/// The four encoding phases: 0, pi/2, pi, 3pi/2.
enum class PhaseSymbol : std::uint8_t { Deg0 = 0, Deg90 = 1, Deg180 = 2, Deg270 = 3 };

enum class Basis : std::uint8_t { Z = 0, X = 1 }; // Z = {0, pi}, X = {pi/2, 3pi/2}

struct BasisBit {
    Basis basis = Basis::Z;
    std::uint8_t bit = 0;

    friend bool operator==(const BasisBit&, const BasisBit&) = default;
};

double radians(PhaseSymbol p);
Basis basis_of(PhaseSymbol p);
std::uint8_t bit_of(PhaseSymbol p);

/// (0,Z)->0, (0,X)->pi/2, (1,Z)->pi, (1,X)->3pi/2.
PhaseSymbol encode(std::uint8_t bit, Basis basis);
/// Exact inverse of encode.
BasisBit decode(PhaseSymbol phase);

/// Pulse-level physics of one link as seen by the protocol.
struct LinkPhysics {
    double mean_photon_number = 0.1;
    double transmittance = 1.0;
    double detector_efficiency = 0.10;
    double visibility = 1.0;
    double dark_prob = 0.0;        // per gate
    double xtalk_click_prob = 0.0; // per gate, from concurrent sessions
    double excess_error = 0.0;     // per-click bit-flip probability on signal clicks

    void validate() const;
};

enum class ClickCause : std::uint8_t { None = 0, Signal = 1, Dark = 2, Crosstalk = 3 };

struct PulseOutcome {
    bool clicked = false;
    ClickCause cause = ClickCause::None;
    bool excess_flip = false;
};

/// Per-pulse record. Only clicked pulses are materialized by run_session;
/// indices stay strictly increasing but are sparse.
struct PulseRecord {
    std::uint64_t index = 0;
    PhaseSymbol sender_phase = PhaseSymbol::Deg0;
    PhaseSymbol receiver_phase = PhaseSymbol::Deg0;
    bool clicked = false;
    ClickCause cause = ClickCause::None;
    bool excess_flip = false;
};

/// Precomputed click probabilities and attribution thresholds for the 16
/// phase combinations of one link. simulate_pulse consumes exactly three
/// draws (click, cause, flip) regardless of the outcome, so runs that differ
/// only in noise parameters stay draw-aligned pulse by pulse.
class PulseModel {
public:
    explicit PulseModel(const LinkPhysics& physics);

    double click_probability(PhaseSymbol sender, PhaseSymbol receiver) const;
    PulseOutcome simulate(PhaseSymbol sender, PhaseSymbol receiver, RngStream& rng) const;

    const LinkPhysics& physics() const { return physics_; }

private:
    LinkPhysics physics_;
    double p_click_[4][4];
    double thr_signal_[4][4]; // P(cause = signal | clicked)
    double thr_dark_[4][4];   // P(cause = signal or dark | clicked)
};

/// Click probability for one phase pair:
/// 1 - (1 - p_dark) * (1 - xtalk) * exp(-mu*t*eta * (1 + V cos(dphi)) / 2).
double click_probability(PhaseSymbol sender, PhaseSymbol receiver, const LinkPhysics& physics);

/// Samples one pulse. See PulseModel for the draw-alignment contract.
PulseOutcome simulate_pulse(PhaseSymbol sender, PhaseSymbol receiver, const LinkPhysics& physics,
                            RngStream& rng);

/// QBER estimate from publicly disclosed positions.
struct QberSample {
    std::uint64_t disclosed_count = 0;
    std::uint64_t error_count = 0;
    double estimate = 0.0;
};

enum class SessionStatus : std::uint8_t { Running, Completed, Aborted };

std::string to_string(SessionStatus s);

struct SessionCounts {
    std::uint64_t pulses = 0;
    std::uint64_t clicks = 0;
    std::uint64_t sifted = 0;
    std::uint64_t disclosed = 0;
    std::uint64_t errors = 0; // mismatches over the whole sifted key
};

struct SessionState {
    std::string session_id;
    std::string src_label;
    std::string dst_label;
    ChannelIndex channel;
    SessionCounts counts;
    std::vector<std::uint8_t> sender_key;   // post-disclosure key bits
    std::vector<std::uint8_t> receiver_key; // same length as sender_key
    QberSample qber_sample;
    SessionStatus status = SessionStatus::Running;
    double qber_full_key = 0.0; // counts.errors / counts.sifted
    std::vector<PulseRecord> transcript; // clicked pulses, when kept
};

struct SessionConfig {
    std::string session_id;
    std::string src_label;
    std::string dst_label;
    ChannelIndex channel;
    LinkPhysics physics;
    std::uint64_t pulse_count = 0;
    double disclose_fraction = 0.1;
    bool keep_transcript = false;
};

/// Keeps exactly the pulses where the receiver clicked and both bases match.
/// The receiver's bit for a kept pulse is the bit of its own phase (single
/// monitored interferometer port), with the excess-flip diagnostic applied.
/// Throws ProtocolError when the two record streams are misaligned.
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>
sift(std::span<const PulseRecord> sender_records, std::span<const PulseRecord> receiver_records);

struct DisclosureResult {
    QberSample sample;
    std::vector<std::uint64_t> positions; // ascending, consumed from the key
};

/// Publicly compares a uniformly sampled disclose_fraction of positions.
/// Throws ProtocolError on an empty sifted key.
DisclosureResult estimate_qber(std::span<const std::uint8_t> sender_bits,
                               std::span<const std::uint8_t> receiver_bits,
                               double disclose_fraction,
                               RngStream& rng);

inline constexpr double kQberAbortThreshold = 0.115;

/// Abort iff qber > 0.115 (strict).
bool abort_check(double qber);

/// Runs one full session: per-pulse random phase choices, clicks, sifting,
/// QBER disclosure and the abort decision. Deterministic for a given
/// (config, rng stream). Every pulse consumes exactly four draws.
SessionState run_session(const SessionConfig& config, RngStream& rng);

/// Exact per-pulse expectations of the Monte-Carlo process, obtained by
/// enumerating the 16 equally likely phase combinations.
struct SessionExpectation {
    double click_prob = 0.0;  // per pulse, any basis
    double sifted_prob = 0.0; // per pulse: clicked and bases matched
    double qber = 0.0;        // expected sifted-key error fraction
};

SessionExpectation expected_session_stats(const LinkPhysics& physics);

/// Finds the excess_error that makes the session's expected sifted QBER equal
/// measured_qber to within 1e-6. Throws CalibrationError below the floor.
double calibrate_session_excess(double measured_qber, LinkPhysics physics);

} // namespace qkdnet
