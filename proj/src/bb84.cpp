#include "qkdsim/bb84.hpp"

#include <array>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace qkdsim::bb84 {

using devices::SwitchMode;
using devices::SwitchSetting;

devices::SwitchSetting prepare(int bit, Basis basis) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("prepare: bit must be 0 or 1");
    if (basis == Basis::Time) {
        return {bit == 0 ? SwitchMode::Bar : SwitchMode::Cross, 0.0};
    }
    return {SwitchMode::Split, bit == 0 ? 0.0 : std::numbers::pi};
}

std::pair<Basis, int> interpret(int slot, int port) {
    switch (slot) {
        case 0:
            return {Basis::Time, 0};
        case 2:
            return {Basis::Time, 1};
        case 1:
            return {Basis::Phase, port};
        default:
            throw std::invalid_argument("interpret: slot must lie in {0, 1, 2}");
    }
}

namespace {

constexpr std::uint64_t kPulseStreamTag = 0xbb84bb84ULL;

struct GateTable {
    // click probability per (slot, port), already folding mu, eta and dark
    std::array<std::array<double, 2>, 3> click{};
    std::array<std::array<bool, 2>, 3> gated{};
};

GateTable make_gate_table(const link::LinkConfig& config, const link::SlotProbabilities& probs) {
    GateTable t;
    for (int port = 0; port < 2; ++port) {
        const devices::DetectorSpec& det = config.detector(port);
        for (int slot : det.gated_slots) {
            t.gated[slot][port] = true;
            t.click[slot][port] = devices::click_probability(probs.at(slot, port),
                                                             config.source, det);
        }
    }
    return t;
}

}  // namespace

std::vector<PulseRecord> run_session(const link::LinkConfig& config, long long n_pulses,
                                     SplitMix64& rng) {
    if (n_pulses < 1) throw std::invalid_argument("run_session: n_pulses must be >= 1");
    config.validate();

    const bool scramble = config.fibre.scramble;
    const int n_strata =
        scramble ? static_cast<int>(std::min<long long>(config.scramble_samples, n_pulses)) : 1;

    // Exact click probabilities per (rotation stratum, switch setting).
    std::vector<std::array<GateTable, 4>> tables(static_cast<std::size_t>(n_strata));
    for (int k = 0; k < n_strata; ++k) {
        optics::JonesMatrix rot;
        const optics::JonesMatrix* rot_ptr = nullptr;
        if (scramble) {
            rot = optics::haar_random_unitary(rng);
            rot_ptr = &rot;
        }
        for (int basis = 0; basis < 2; ++basis) {
            for (int bit = 0; bit < 2; ++bit) {
                const SwitchSetting setting =
                    prepare(bit, basis == 0 ? Basis::Time : Basis::Phase);
                const auto probs = link::chain_probabilities(config, setting, rot_ptr);
                tables[k][basis * 2 + bit] = make_gate_table(config, probs);
            }
        }
    }

    const std::uint64_t session_base = rng.next_u64();
    std::vector<PulseRecord> records;
    records.reserve(static_cast<std::size_t>(n_pulses));

    for (long long i = 0; i < n_pulses; ++i) {
        SplitMix64 pulse_rng(derive_seed(session_base, kPulseStreamTag,
                                         static_cast<std::uint64_t>(i)));
        PulseRecord rec;
        rec.index = i;
        rec.alice_bit = static_cast<int>(pulse_rng.next_u64() & 1u);
        rec.alice_basis = (pulse_rng.next_u64() & 1u) ? Basis::Phase : Basis::Time;
        const int stratum =
            n_strata == 1 ? 0
                          : static_cast<int>(pulse_rng.below(static_cast<std::uint64_t>(n_strata)));
        const GateTable& gates =
            tables[stratum][(rec.alice_basis == Basis::Phase ? 2 : 0) + rec.alice_bit];

        int n_clicks = 0;
        for (int slot = 0; slot < 3; ++slot) {
            for (int port = 0; port < 2; ++port) {
                if (!gates.gated[slot][port]) continue;
                if (pulse_rng.bernoulli(gates.click[slot][port])) {
                    ++n_clicks;
                    rec.slot = slot;
                    rec.port = port;
                }
            }
        }
        if (n_clicks == 0) {
            rec.result = PulseRecord::Result::None;
            rec.slot = rec.port = -1;
        } else if (n_clicks == 1) {
            rec.result = PulseRecord::Result::Single;
        } else {
            rec.result = PulseRecord::Result::Double;
            rec.slot = rec.port = -2;
        }
        records.push_back(rec);
    }
    return records;
}

SiftedKey sift(const std::vector<PulseRecord>& records) {
    SiftedKey key;
    long long errors_time = 0;
    long long errors_phase = 0;
    for (const PulseRecord& rec : records) {
        if (rec.result != PulseRecord::Result::Single) continue;
        const auto [basis, bob_bit] = interpret(rec.slot, rec.port);
        if (basis != rec.alice_basis) continue;
        key.bits_alice.push_back(static_cast<std::uint8_t>(rec.alice_bit));
        key.bits_bob.push_back(static_cast<std::uint8_t>(bob_bit));
        if (basis == Basis::Time) {
            ++key.kept_time;
            if (bob_bit != rec.alice_bit) ++errors_time;
        } else {
            ++key.kept_phase;
            if (bob_bit != rec.alice_bit) ++errors_phase;
        }
    }
    if (key.kept_time > 0) {
        key.qber_time = static_cast<double>(errors_time) / static_cast<double>(key.kept_time);
    }
    if (key.kept_phase > 0) {
        key.qber_phase = static_cast<double>(errors_phase) / static_cast<double>(key.kept_phase);
    }
    key.sift_ratio = records.empty()
                         ? 0.0
                         : static_cast<double>(key.bits_alice.size()) /
                               static_cast<double>(records.size());
    return key;
}

double qber_phase_prediction(double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw std::invalid_argument("qber_phase_prediction: visibility must lie in [0, 1]");
    }
    return 0.5 * (1.0 - visibility);
}

std::string bits_to_hex(const std::vector<std::uint8_t>& bits) {
    static const char* digits = "0123456789abcdef";
    std::string hex;
    hex.reserve((bits.size() + 3) / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        int nibble = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            nibble <<= 1;
            if (i + j < bits.size() && bits[i + j]) nibble |= 1;
        }
        hex.push_back(digits[nibble]);
    }
    return hex;
}

void write_records_csv(std::ostream& os, const std::vector<PulseRecord>& records) {
    os << "index,alice_bit,alice_basis,slot,port,kept\n";
    char buf[128];
    for (const PulseRecord& rec : records) {
        bool kept = false;
        if (rec.result == PulseRecord::Result::Single) {
            kept = interpret(rec.slot, rec.port).first == rec.alice_basis;
        }
        std::snprintf(buf, sizeof buf, "%lld,%d,%s,%d,%d,%d\n", rec.index, rec.alice_bit,
                      rec.alice_basis == Basis::Time ? "time" : "phase", rec.slot, rec.port,
                      kept ? 1 : 0);
        os << buf;
    }
}

}  // namespace qkdsim::bb84
