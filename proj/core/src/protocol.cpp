#include "qkdnet/protocol.hpp"

#include "qkdnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qkdnet {

double radians(PhaseSymbol p) {
    return std::numbers::pi / 2.0 * static_cast<double>(p);
}

Basis basis_of(PhaseSymbol p) {
    return (static_cast<std::uint8_t>(p) % 2 == 0) ? Basis::Z : Basis::X;
}

std::uint8_t bit_of(PhaseSymbol p) {
    return static_cast<std::uint8_t>(p) < 2 ? 0 : 1;
}

PhaseSymbol encode(std::uint8_t bit, Basis basis) {
    // (0,Z)->0, (0,X)->pi/2, (1,Z)->pi, (1,X)->3pi/2
    return static_cast<PhaseSymbol>((bit ? 2 : 0) + (basis == Basis::X ? 1 : 0));
}

BasisBit decode(PhaseSymbol phase) {
    return BasisBit{basis_of(phase), bit_of(phase)};
}

void LinkPhysics::validate() const {
    if (!(mean_photon_number > 0.0))
        throw InvalidArgumentError("mean photon number must be positive");
    if (!(transmittance > 0.0 && transmittance <= 1.0))
        throw InvalidArgumentError("transmittance must be in (0, 1]");
    if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0))
        throw InvalidArgumentError("detector efficiency must be in (0, 1]");
    if (!(visibility > 0.0 && visibility <= 1.0))
        throw InvalidArgumentError("visibility must be in (0, 1]");
    if (!(dark_prob >= 0.0 && dark_prob < 1.0))
        throw InvalidArgumentError("dark probability must be in [0, 1)");
    if (!(xtalk_click_prob >= 0.0 && xtalk_click_prob < 1.0))
        throw InvalidArgumentError("crosstalk click probability must be in [0, 1)");
    if (!(excess_error >= 0.0 && excess_error <= 1.0))
        throw InvalidArgumentError("excess error must be in [0, 1]");
}

namespace {

// cos(dphi) for phase index difference (sender - receiver) mod 4.
constexpr double kCosTable[4] = {1.0, 0.0, -1.0, 0.0};

double signal_click_prob(PhaseSymbol s, PhaseSymbol r, const LinkPhysics& ph) {
    const int d = (static_cast<int>(s) - static_cast<int>(r) + 4) % 4;
    const double mte =
        ph.mean_photon_number * ph.transmittance * ph.detector_efficiency;
    return 1.0 - std::exp(-mte * (1.0 + ph.visibility * kCosTable[d]) / 2.0);
}

} // namespace

PulseModel::PulseModel(const LinkPhysics& physics) : physics_(physics) {
    physics_.validate();
    for (int s = 0; s < 4; ++s) {
        for (int r = 0; r < 4; ++r) {
            const double psig = signal_click_prob(static_cast<PhaseSymbol>(s),
                                                  static_cast<PhaseSymbol>(r), physics_);
            const double p = 1.0 - (1.0 - psig) * (1.0 - physics_.dark_prob) *
                                       (1.0 - physics_.xtalk_click_prob);
            p_click_[s][r] = p;
            if (p > 0.0) {
                thr_signal_[s][r] = psig / p;
                thr_dark_[s][r] = (psig + (1.0 - psig) * physics_.dark_prob) / p;
            } else {
                thr_signal_[s][r] = 0.0;
                thr_dark_[s][r] = 0.0;
            }
        }
    }
}

double PulseModel::click_probability(PhaseSymbol sender, PhaseSymbol receiver) const {
    return p_click_[static_cast<int>(sender)][static_cast<int>(receiver)];
}

PulseOutcome PulseModel::simulate(PhaseSymbol sender, PhaseSymbol receiver, RngStream& rng) const {
    const int s = static_cast<int>(sender);
    const int r = static_cast<int>(receiver);
    // Fixed draw layout: click, cause, flip. All three are always consumed.
    const double u_click = rng.next_double();
    const double u_cause = rng.next_double();
    const double u_flip = rng.next_double();

    PulseOutcome out;
    out.clicked = u_click < p_click_[s][r];
    if (!out.clicked) return out;

    if (u_cause < thr_signal_[s][r]) out.cause = ClickCause::Signal;
    else if (u_cause < thr_dark_[s][r]) out.cause = ClickCause::Dark;
    else out.cause = ClickCause::Crosstalk;

    out.excess_flip = out.cause == ClickCause::Signal && u_flip < physics_.excess_error;
    return out;
}

double click_probability(PhaseSymbol sender, PhaseSymbol receiver, const LinkPhysics& physics) {
    return PulseModel(physics).click_probability(sender, receiver);
}

PulseOutcome simulate_pulse(PhaseSymbol sender, PhaseSymbol receiver, const LinkPhysics& physics,
                            RngStream& rng) {
    return PulseModel(physics).simulate(sender, receiver, rng);
}

std::string to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::Running: return "running";
        case SessionStatus::Completed: return "completed";
        case SessionStatus::Aborted: return "aborted";
    }
    return "unknown";
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>
sift(std::span<const PulseRecord> sender_records, std::span<const PulseRecord> receiver_records) {
    if (sender_records.size() != receiver_records.size())
        throw ProtocolError("protocol desync: record streams have different lengths");

    std::vector<std::uint8_t> sender_bits;
    std::vector<std::uint8_t> receiver_bits;
    for (std::size_t i = 0; i < sender_records.size(); ++i) {
        const auto& snd = sender_records[i];
        const auto& rcv = receiver_records[i];
        if (snd.index != rcv.index)
            throw ProtocolError("protocol desync: pulse indices disagree at position " +
                                std::to_string(i));
        if (!rcv.clicked) continue;
        if (basis_of(snd.sender_phase) != basis_of(rcv.receiver_phase)) continue;
        sender_bits.push_back(bit_of(snd.sender_phase));
        receiver_bits.push_back(
            static_cast<std::uint8_t>(bit_of(rcv.receiver_phase) ^ (rcv.excess_flip ? 1 : 0)));
    }
    return {std::move(sender_bits), std::move(receiver_bits)};
}

DisclosureResult estimate_qber(std::span<const std::uint8_t> sender_bits,
                               std::span<const std::uint8_t> receiver_bits,
                               double disclose_fraction,
                               RngStream& rng) {
    if (sender_bits.size() != receiver_bits.size())
        throw ProtocolError("sifted keys must have equal length");
    if (sender_bits.empty())
        throw ProtocolError("insufficient data: empty sifted key");
    if (!(disclose_fraction > 0.0 && disclose_fraction <= 1.0))
        throw InvalidArgumentError("disclose fraction must be in (0, 1]");

    const std::uint64_t n = sender_bits.size();
    std::uint64_t k = static_cast<std::uint64_t>(
        std::llround(disclose_fraction * static_cast<double>(n)));
    k = std::clamp<std::uint64_t>(k, 1, n);

    // Partial Fisher-Yates: the first k entries are a uniform sample.
    std::vector<std::uint64_t> idx(n);
    for (std::uint64_t i = 0; i < n; ++i) idx[i] = i;
    for (std::uint64_t i = 0; i < k; ++i) {
        const std::uint64_t j = i + rng.next_below(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());

    DisclosureResult result;
    result.positions = std::move(idx);
    result.sample.disclosed_count = k;
    for (const auto pos : result.positions)
        if (sender_bits[pos] != receiver_bits[pos]) ++result.sample.error_count;
    result.sample.estimate =
        static_cast<double>(result.sample.error_count) / static_cast<double>(k);
    return result;
}

bool abort_check(double qber) {
    return qber > kQberAbortThreshold;
}

SessionState run_session(const SessionConfig& config, RngStream& rng) {
    if (config.pulse_count == 0)
        throw InvalidArgumentError("pulse count must be positive");
    if (!(config.disclose_fraction > 0.0 && config.disclose_fraction <= 1.0))
        throw InvalidArgumentError("disclose fraction must be in (0, 1]");

    const PulseModel model(config.physics);

    SessionState state;
    state.session_id = config.session_id;
    state.src_label = config.src_label;
    state.dst_label = config.dst_label;
    state.channel = config.channel;
    state.counts.pulses = config.pulse_count;

    std::vector<PulseRecord> clicked;
    for (std::uint64_t i = 0; i < config.pulse_count; ++i) {
        // Draw layout per pulse: one u64 for the four random bits (sender
        // bit, sender basis, receiver basis, receiver bit-in-basis), then the
        // three PulseModel draws.
        const std::uint64_t r = rng.next_u64();
        const auto sender_bit = static_cast<std::uint8_t>(r & 1);
        const auto sender_basis = static_cast<Basis>((r >> 1) & 1);
        const auto receiver_basis = static_cast<Basis>((r >> 2) & 1);
        const auto receiver_bit = static_cast<std::uint8_t>((r >> 3) & 1);
        const PhaseSymbol sp = encode(sender_bit, sender_basis);
        const PhaseSymbol rp = encode(receiver_bit, receiver_basis);

        const PulseOutcome out = model.simulate(sp, rp, rng);
        if (out.clicked)
            clicked.push_back({i, sp, rp, true, out.cause, out.excess_flip});
    }
    state.counts.clicks = clicked.size();

    auto [sender_bits, receiver_bits] = sift(clicked, clicked);
    state.counts.sifted = sender_bits.size();
    for (std::size_t i = 0; i < sender_bits.size(); ++i)
        if (sender_bits[i] != receiver_bits[i]) ++state.counts.errors;
    state.qber_full_key =
        state.counts.sifted
            ? static_cast<double>(state.counts.errors) / static_cast<double>(state.counts.sifted)
            : 0.0;

    if (!sender_bits.empty()) {
        auto disclosure = estimate_qber(sender_bits, receiver_bits, config.disclose_fraction, rng);
        state.qber_sample = disclosure.sample;
        state.counts.disclosed = disclosure.sample.disclosed_count;
        // Disclosed positions are consumed: drop them from the key.
        std::size_t next = 0, out_pos = 0;
        for (std::size_t i = 0; i < sender_bits.size(); ++i) {
            if (next < disclosure.positions.size() && disclosure.positions[next] == i) {
                ++next;
                continue;
            }
            sender_bits[out_pos] = sender_bits[i];
            receiver_bits[out_pos] = receiver_bits[i];
            ++out_pos;
        }
        sender_bits.resize(out_pos);
        receiver_bits.resize(out_pos);
    }
    state.sender_key = std::move(sender_bits);
    state.receiver_key = std::move(receiver_bits);

    state.status = abort_check(state.qber_sample.estimate) ? SessionStatus::Aborted
                                                           : SessionStatus::Completed;
    if (config.keep_transcript) state.transcript = std::move(clicked);
    return state;
}

SessionExpectation expected_session_stats(const LinkPhysics& physics) {
    const PulseModel model(physics);
    SessionExpectation ex;
    double err_prob = 0.0;
    for (int s = 0; s < 4; ++s) {
        for (int r = 0; r < 4; ++r) {
            const auto sp = static_cast<PhaseSymbol>(s);
            const auto rp = static_cast<PhaseSymbol>(r);
            const double p = model.click_probability(sp, rp);
            ex.click_prob += p / 16.0;
            if (basis_of(sp) != basis_of(rp)) continue;
            ex.sifted_prob += p / 16.0;
            if (p <= 0.0) continue;

            const double psig = signal_click_prob(sp, rp, physics);
            const double t_sig = psig / p;
            double p_err;
            if (s == r) {
                // Constructive pulse: receiver's own-phase bit is correct;
                // only an excess flip on a signal click makes an error.
                // Dark/crosstalk clicks carry the same (correct) bit.
                p_err = t_sig * physics.excess_error;
            } else {
                // Destructive pulse in a matched basis: the receiver's bit is
                // the complement of what was sent, so every click is an error
                // unless an excess flip undoes it.
                p_err = t_sig * (1.0 - physics.excess_error) + (1.0 - t_sig);
            }
            err_prob += p / 16.0 * p_err;
        }
    }
    ex.qber = ex.sifted_prob > 0.0 ? err_prob / ex.sifted_prob : 0.0;
    return ex;
}

double calibrate_session_excess(double measured_qber, LinkPhysics physics) {
    if (!(measured_qber >= 0.0 && measured_qber <= 0.5))
        throw InvalidArgumentError("measured QBER must be in [0, 0.5]");
    auto model = [&](double e) {
        physics.excess_error = e;
        return expected_session_stats(physics).qber;
    };
    const double floor = model(0.0);
    if (measured_qber < floor - 1e-12)
        throw CalibrationError("measured QBER " + std::to_string(measured_qber) +
                               " is below the session model floor " + std::to_string(floor));
    double lo = 0.0, hi = 1.0;
    if (model(hi) < measured_qber)
        throw CalibrationError("measured QBER " + std::to_string(measured_qber) +
                               " is unreachable for this link");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (model(mid) < measured_qber) lo = mid; else hi = mid;
        if (hi - lo < 1e-15) break;
    }
    const double e = 0.5 * (lo + hi);
    if (std::abs(model(e) - measured_qber) > 1e-6)
        throw CalibrationError("session calibration did not converge to within 1e-6");
    return e;
}

} // namespace qkdnet
