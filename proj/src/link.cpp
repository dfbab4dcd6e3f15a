#include "qkdsim/link.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace qkdsim::link {

using devices::click_probability;
using devices::leak_port;
using devices::temperature_to_phase;
using optics::ModeState;

namespace {

// Chain port labels. The transmit port reuses the short-arm label (the "a"
// input of Alice's output coupler); the long-arm label becomes the unused
// output and is dropped.
constexpr int kAliceShort = 0;
constexpr int kAliceLong = 1;
constexpr int kBobOut0 = 2;
constexpr int kBobOut1 = 3;

// Fixed quarter-wave bias on Alice's long arm. With symmetric couplers the
// two central-slot paths pick up an odd relative factor of i; this bias sets
// the operating point so that a Split(0) pulse exits entirely on port 0 when
// both interferometers sit at their reference temperature.
constexpr double kQuarterWaveBias = std::numbers::pi / 2.0;

constexpr std::uint64_t kScanStreamTag = 0x5ca1ab1eULL;

void rethrow_with_prefix(const char* prefix, const std::exception& e) {
    throw std::invalid_argument(std::string(prefix) + e.what());
}

}  // namespace

void LinkConfig::validate() const {
    if (!(source.mean_photons >= 0.0)) {
        throw std::invalid_argument("source.mu must be >= 0");
    }
    if (!(source.rep_rate_hz > 0.0)) {
        throw std::invalid_argument("source.rep_rate_hz must be > 0");
    }
    if (std::abs(source.polarisation.norm_sq() - 1.0) > 1e-9) {
        throw std::invalid_argument("source.polarisation must be unit norm");
    }
    if (!(switch_default.pm_phase_rad >= 0.0 &&
          switch_default.pm_phase_rad < 2.0 * std::numbers::pi)) {
        throw std::invalid_argument("switch.pm_phase_rad must lie in [0, 2pi)");
    }
    try {
        alice_mzi.validate();
    } catch (const std::exception& e) {
        rethrow_with_prefix("alice_", e);
    }
    try {
        bob_mzi.validate();
    } catch (const std::exception& e) {
        rethrow_with_prefix("bob_", e);
    }
    if (alice_mzi.delay_slots != bob_mzi.delay_slots) {
        throw std::invalid_argument("alice_mzi.delay_slots must equal bob_mzi.delay_slots");
    }
    if (!(fibre.length_km >= 0.0)) {
        throw std::invalid_argument("fibre.length_km must be >= 0");
    }
    if (!(fibre.atten_db_per_km >= 0.0)) {
        throw std::invalid_argument("fibre.atten_db_per_km must be >= 0");
    }
    if (!(slot_pitch_s > 0.0)) {
        throw std::invalid_argument("slot_pitch_s must be > 0");
    }
    const char* names[2] = {"det0", "det1"};
    for (int i = 0; i < 2; ++i) {
        const DetectorSpec& d = detector(i);
        const std::string name = names[i];
        if (!(d.efficiency >= 0.0 && d.efficiency <= 1.0)) {
            throw std::invalid_argument(name + ".efficiency must lie in [0, 1]");
        }
        if (!(d.dark_prob_per_gate >= 0.0 && d.dark_prob_per_gate < 1.0)) {
            throw std::invalid_argument(name + ".dark_prob_per_gate must lie in [0, 1)");
        }
        if (!(d.gate_width_s > 0.0 && d.gate_width_s <= slot_pitch_s)) {
            throw std::invalid_argument(name + ".gate_width_s must lie in (0, slot_pitch_s]");
        }
        for (int s : d.gated_slots) {
            if (s < 0 || s > 2) {
                throw std::invalid_argument(name + ".gated_slots entries must lie in {0, 1, 2}");
            }
        }
    }
    if (pulses_per_point < 1) throw std::invalid_argument("pulses_per_point must be >= 1");
    if (scramble_samples < 1) throw std::invalid_argument("scramble_samples must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

double SlotProbabilities::total() const {
    double t = 0.0;
    for (const auto& row : p) t += row[0] + row[1];
    return t;
}

SlotProbabilities chain_probabilities(const LinkConfig& config, const SwitchSetting& setting,
                                      const JonesMatrix* pol_rotation) {
    config.validate();
    using namespace optics;
    const MziSpec& alice = config.alice_mzi;

    ModeState st = new_basis_state(0, kAliceShort, config.source.polarisation,
                                   config.slot_pitch_s);
    st = devices::mzsw_prepare(setting, st, kAliceShort, kAliceLong);
    st = apply_delay(st, kAliceLong, alice.delay_slots);
    st = apply_phase(st, kAliceLong,
                     temperature_to_phase(alice.thermal, alice.temperature_k) + kQuarterWaveBias);
    st = apply_loss(st, kAliceLong, alice.t_long);
    st = apply_jones(st, kAliceLong, alice.u_long);
    st = apply_loss(st, kAliceShort, alice.t_short);
    st = apply_jones(st, kAliceShort, alice.u_short);
    st = apply_coupler(st, kAliceShort, kAliceLong, alice.r_out);
    st = drop_port(st, kAliceLong);  // light leaving Alice's unused output
    st = devices::fibre_transfer(config.fibre, st, pol_rotation);
    st = devices::mzi_transfer(config.bob_mzi, st, kAliceShort, kBobOut0, kBobOut1);

    const int d = config.bob_mzi.delay_slots;
    SlotProbabilities out;
    for (const auto& [m, amp] : st.amplitudes()) {
        int port;
        if (m.port == kBobOut0 || m.port == leak_port(kBobOut0)) {
            port = 0;
        } else if (m.port == kBobOut1 || m.port == leak_port(kBobOut1)) {
            port = 1;
        } else {
            continue;
        }
        if (m.slot % d != 0) continue;
        const int slot = m.slot / d;
        if (slot > 2) continue;
        out.p[slot][port] += amp.norm_sq();
    }
    return out;
}

SlotProbabilities scrambled_probabilities(const LinkConfig& config, const SwitchSetting& setting,
                                          int n_samples, SplitMix64& rng) {
    if (n_samples < 1) throw std::invalid_argument("scrambled_probabilities: n_samples must be >= 1");
    SlotProbabilities acc;
    for (int k = 0; k < n_samples; ++k) {
        const JonesMatrix rot = optics::haar_random_unitary(rng);
        const SlotProbabilities pk = chain_probabilities(config, setting, &rot);
        for (int s = 0; s < 3; ++s) {
            acc.p[s][0] += pk.p[s][0];
            acc.p[s][1] += pk.p[s][1];
        }
    }
    for (int s = 0; s < 3; ++s) {
        acc.p[s][0] /= n_samples;
        acc.p[s][1] /= n_samples;
    }
    return acc;
}

double min_visibility_over_polarisation(const JonesMatrix& u_short, const JonesMatrix& u_long) {
    if (!u_short.is_unitary() || !u_long.is_unitary()) {
        throw std::invalid_argument("min_visibility_over_polarisation: matrices must be unitary");
    }
    return 0.5 * std::abs((u_short.adjoint() * u_long).trace());
}

std::array<std::array<long long, 2>, 3> sample_counts(const SlotProbabilities& probs,
                                                      const LinkConfig& config,
                                                      double duration_s, SplitMix64& rng) {
    if (!(duration_s > 0.0)) throw std::invalid_argument("sample_counts: duration must be > 0");
    const long long n_pulses = std::llround(config.source.rep_rate_hz * duration_s);
    std::array<std::array<long long, 2>, 3> counts{};
    for (int port = 0; port < 2; ++port) {
        const DetectorSpec& det = config.detector(port);
        for (int slot : det.gated_slots) {
            const double p = click_probability(probs.at(slot, port), config.source, det);
            counts[slot][port] = rng.binomial(n_pulses, p);
        }
    }
    return counts;
}

namespace {

ScanRow scan_point(const LinkConfig& config, const ScanRange& range,
                   const SwitchSetting& setting, bool scramble_per_pulse, int index) {
    LinkConfig point_config = config;
    const double t1 =
        range.steps == 1
            ? range.start_k
            : range.start_k + (range.stop_k - range.start_k) * index / (range.steps - 1);
    point_config.alice_mzi.temperature_k = t1;

    SplitMix64 rng(derive_seed(config.seed, kScanStreamTag, static_cast<std::uint64_t>(index)));
    const long long n_pulses = config.pulses_per_point;

    // Per-pulse polarisation scrambling is realised as rotation strata: draw
    // a manageable set of Haar rotations, compute exact click probabilities
    // per stratum, then binomial-sample each stratum's share of the pulses.
    std::vector<std::array<double, 2>> central;
    if (scramble_per_pulse && config.fibre.scramble) {
        const int n_strata = static_cast<int>(
            std::min<long long>(config.scramble_samples, n_pulses));
        central.reserve(n_strata);
        for (int k = 0; k < n_strata; ++k) {
            const JonesMatrix rot = optics::haar_random_unitary(rng);
            const SlotProbabilities pk = chain_probabilities(point_config, setting, &rot);
            central.push_back({pk.at(1, 0), pk.at(1, 1)});
        }
    } else if (config.fibre.scramble) {
        const JonesMatrix rot = optics::haar_random_unitary(rng);
        const SlotProbabilities pk = chain_probabilities(point_config, setting, &rot);
        central.push_back({pk.at(1, 0), pk.at(1, 1)});
    } else {
        const SlotProbabilities pk = chain_probabilities(point_config, setting, nullptr);
        central.push_back({pk.at(1, 0), pk.at(1, 1)});
    }

    ScanRow row;
    row.t1_k = t1;
    row.phase_rad = temperature_to_phase(config.alice_mzi.thermal, t1);

    const auto n_strata = static_cast<long long>(central.size());
    double mean0 = 0.0;
    double mean1 = 0.0;
    for (const auto& c : central) {
        mean0 += c[0];
        mean1 += c[1];
    }
    row.expected_p0 = mean0 / static_cast<double>(n_strata);
    row.expected_p1 = mean1 / static_cast<double>(n_strata);

    for (int port = 0; port < 2; ++port) {
        const DetectorSpec& det = point_config.detector(port);
        long long total = 0;
        for (long long k = 0; k < n_strata; ++k) {
            const long long share =
                n_pulses / n_strata + (k < n_pulses % n_strata ? 1 : 0);
            const double p = click_probability(central[k][port], config.source, det);
            total += rng.binomial(share, p);
        }
        (port == 0 ? row.counts_p0 : row.counts_p1) = total;
    }
    return row;
}

}  // namespace

std::vector<ScanRow> fringe_scan(const LinkConfig& config, const ScanRange& range,
                                 const SwitchSetting& setting, bool scramble_per_pulse) {
    config.validate();
    if (range.steps < 2) throw std::invalid_argument("scan.steps must be >= 2");

    std::vector<ScanRow> rows(range.steps);
    const int n_threads = std::max(1, std::min(config.threads, range.steps));
    if (n_threads == 1) {
        for (int i = 0; i < range.steps; ++i) {
            rows[i] = scan_point(config, range, setting, scramble_per_pulse, i);
        }
        return rows;
    }

    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < range.steps; i += n_threads) {
                rows[i] = scan_point(config, range, setting, scramble_per_pulse, i);
            }
        });
    }
    for (auto& th : pool) th.join();
    return rows;
}

double visibility(const std::vector<double>& series) {
    if (series.empty()) throw std::domain_error("visibility: empty series");
    double lo = series.front();
    double hi = series.front();
    for (double x : series) {
        if (x < 0.0) throw std::invalid_argument("visibility: negative entry");
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (hi <= 0.0) throw std::domain_error("visibility: all-zero series");
    return (hi - lo) / (hi + lo);
}

double visibility(const std::vector<long long>& counts) {
    std::vector<double> series(counts.begin(), counts.end());
    return visibility(series);
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
    os << "t1_K,phase_rad,counts_p0,counts_p1,expected_p0,expected_p1\n";
    char buf[256];
    for (const ScanRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%lld,%lld,%.12g,%.12g\n", r.t1_k,
                      r.phase_rad, r.counts_p0, r.counts_p1, r.expected_p0, r.expected_p1);
        os << buf;
    }
}

}  // namespace qkdsim::link
