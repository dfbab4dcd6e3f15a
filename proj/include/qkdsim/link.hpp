#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qkdsim/devices.hpp"

namespace qkdsim::link {

using devices::DetectorSpec;
using devices::FibreSpec;
using devices::MziSpec;
using devices::SourceSpec;
using devices::SwitchSetting;
using optics::JonesMatrix;

/// The full one-way chain: source -> switch + Alice's delay stage -> fibre
/// -> Bob's MZI -> two gated detectors.
struct LinkConfig {
    SourceSpec source;
    SwitchSetting switch_default;
    MziSpec alice_mzi;
    MziSpec bob_mzi;
    FibreSpec fibre;
    DetectorSpec detector0;
    DetectorSpec detector1;
    long long pulses_per_point = 5'000'000;
    int scramble_samples = 1024;
    double slot_pitch_s = 8e-9;
    int threads = 1;
    std::uint64_t seed = 1;

    const DetectorSpec& detector(int port) const { return port == 0 ? detector0 : detector1; }

    /// Semantic checks (ranges, the delay balance condition, gate widths).
    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Single-photon detection probabilities per (time slot, output port) after
/// the full chain. Slots are the three logical arrival bins.
struct SlotProbabilities {
    std::array<std::array<double, 2>, 3> p{};

    double at(int slot, int port) const { return p[slot][port]; }
    double slot_total(int slot) const { return p[slot][0] + p[slot][1]; }
    double total() const;
};

/// One point of a temperature fringe scan.
struct ScanRow {
    double t1_k = 0.0;
    double phase_rad = 0.0;
    long long counts_p0 = 0;
    long long counts_p1 = 0;
    double expected_p0 = 0.0;  // noise-free central-slot mode probability
    double expected_p1 = 0.0;
};

struct ScanRange {
    double start_k = 0.0;
    double stop_k = 0.0;
    int steps = 2;
};

/// Deterministic single-photon propagation through the chain. When
/// `pol_rotation` is non-null it is applied as a fixed polarisation rotation
/// in the fibre; otherwise the fibre only attenuates.
SlotProbabilities chain_probabilities(const LinkConfig& config, const SwitchSetting& setting,
                                      const JonesMatrix* pol_rotation = nullptr);

/// Mean of chain_probabilities over n_samples Haar fibre rotations.
SlotProbabilities scrambled_probabilities(const LinkConfig& config, const SwitchSetting& setting,
                                          int n_samples, SplitMix64& rng);

/// Worst-case central-slot visibility over all input polarisations for a
/// receiver whose arms apply u_short / u_long: |Tr(u_short^dag u_long)| / 2.
double min_visibility_over_polarisation(const JonesMatrix& u_short, const JonesMatrix& u_long);

/// Gated counts over `duration_s` of pulses: one Binomial(N, p_click) draw
/// per gated (slot, port), N = rep_rate * duration.
std::array<std::array<long long, 2>, 3> sample_counts(const SlotProbabilities& probs,
                                                      const LinkConfig& config,
                                                      double duration_s, SplitMix64& rng);

/// Temperature fringe scan: for each T1 in the range, compute the
/// central-slot probabilities (per-pulse scrambled when requested) and
/// sample counts for both ports. Each point uses an RNG stream derived from
/// (config.seed, point index), so results are independent of
/// config.threads.
std::vector<ScanRow> fringe_scan(const LinkConfig& config, const ScanRange& range,
                                 const SwitchSetting& setting, bool scramble_per_pulse);

/// Fringe contrast (max - min) / (max + min). Throws std::domain_error for
/// an empty or all-zero series.
double visibility(const std::vector<double>& series);
double visibility(const std::vector<long long>& counts);

/// CSV with header t1_K,phase_rad,counts_p0,counts_p1,expected_p0,expected_p1.
void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);

}  // namespace qkdsim::link
