#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkdsim/link.hpp"

namespace qkdsim::bb84 {

enum class Basis { Time, Phase };

/// One transmitted pulse: Alice's choice and Bob's detection outcome.
struct PulseRecord {
    enum class Result { None, Single, Double };

    long long index = 0;
    int alice_bit = 0;
    Basis alice_basis = Basis::Time;
    Result result = Result::None;
    int slot = -1;  // valid for Result::Single
    int port = -1;
};

/// Output of sifting: matched key bits and the per-basis error rates.
/// QBER values are absent when no bits were kept in that basis.
struct SiftedKey {
    std::vector<std::uint8_t> bits_alice;
    std::vector<std::uint8_t> bits_bob;
    std::optional<double> qber_time;
    std::optional<double> qber_phase;
    double sift_ratio = 0.0;
    long long kept_time = 0;
    long long kept_phase = 0;
};

/// Switch setting encoding (bit, basis): Time 0 -> Bar, Time 1 -> Cross,
/// Phase 0 -> Split(0), Phase 1 -> Split(pi).
devices::SwitchSetting prepare(int bit, Basis basis);

/// Decodes a detection: extreme slots carry the time basis (slot 0 -> 0,
/// slot 2 -> 1); the central slot carries the phase basis with bit = port.
std::pair<Basis, int> interpret(int slot, int port);

/// Runs n_pulses through the chain with uniformly random (bit, basis) per
/// pulse, sampling every gated detector. Per-pulse streams are derived from
/// (rng draw, pulse index), so batching does not change the records.
std::vector<PulseRecord> run_session(const link::LinkConfig& config, long long n_pulses,
                                     SplitMix64& rng);

/// Standard sifting: keep single clicks whose measured basis matches the
/// preparation basis; discard the rest (double clicks are never resolved).
SiftedKey sift(const std::vector<PulseRecord>& records);

/// Interferometric error-rate estimate (1 - V) / 2.
double qber_phase_prediction(double visibility);

/// Key bits packed MSB-first into bytes and hex encoded.
std::string bits_to_hex(const std::vector<std::uint8_t>& bits);

/// CSV with header index,alice_bit,alice_basis,slot,port,kept.
/// slot/port are -1 for no detection and -2 for a double click.
void write_records_csv(std::ostream& os, const std::vector<PulseRecord>& records);

}  // namespace qkdsim::bb84
