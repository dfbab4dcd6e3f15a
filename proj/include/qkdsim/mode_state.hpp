#pragma once

#include <compare>
#include <map>

#include "qkdsim/jones.hpp"

namespace qkdsim::optics {

/// Discrete optical mode label: a time slot (in units of one interferometer
/// delay) on a spatial port.
struct ModeIndex {
    int slot = 0;
    int port = 0;

    auto operator<=>(const ModeIndex&) const = default;
};

/// Sparse single-photon amplitude table over (slot, port) modes, each entry
/// carrying a two-component polarisation amplitude. Absent entries are
/// exactly zero. States are plain values: every transform below returns a
/// new state and never mutates shared data.
class ModeState {
public:
    using Table = std::map<ModeIndex, JonesVector>;

    ModeState() = default;
    explicit ModeState(double slot_pitch_s) : slot_pitch_s_(slot_pitch_s) {}

    const Table& amplitudes() const { return table_; }

    /// Amplitude at a mode; zero when the mode is absent.
    JonesVector amplitude(ModeIndex m) const {
        const auto it = table_.find(m);
        return it == table_.end() ? JonesVector{} : it->second;
    }

    /// Stores an amplitude; exact zeros are erased to keep the table sparse.
    void set_amplitude(ModeIndex m, const JonesVector& j) {
        if (j.is_zero()) {
            table_.erase(m);
        } else {
            table_[m] = j;
        }
    }

    void add_amplitude(ModeIndex m, const JonesVector& j) {
        set_amplitude(m, amplitude(m) + j);
    }

    bool empty() const { return table_.empty(); }

    double slot_pitch_s() const { return slot_pitch_s_; }

private:
    Table table_;
    double slot_pitch_s_ = 8e-9;
};

/// State with a single populated mode. Throws std::invalid_argument on a
/// zero-norm polarisation amplitude.
ModeState new_basis_state(int slot, int port, const JonesVector& jones,
                          double slot_pitch_s = 8e-9);

/// Symmetric beamsplitter on two ports, applied slot by slot and identically
/// to both polarisation components:
///   (a, b) -> (sqrt(r) a + i sqrt(1-r) b,  i sqrt(1-r) a + sqrt(r) b)
ModeState apply_coupler(const ModeState& state, int port_a, int port_b, double ratio);

/// Multiplies every amplitude on `port` by e^{i phi}.
ModeState apply_phase(const ModeState& state, int port, double phi);

/// Moves amplitudes on `port` from slot k to slot k + n_slots.
ModeState apply_delay(const ModeState& state, int port, int n_slots);

/// Scales amplitudes on `port` by sqrt(t), t an intensity transmission.
ModeState apply_loss(const ModeState& state, int port, double transmission);

/// Left-multiplies every polarisation amplitude on `port` by m.
ModeState apply_jones(const ModeState& state, int port, const JonesMatrix& m);

/// Removes every mode on `port` (light leaving the modelled circuit).
ModeState drop_port(const ModeState& state, int port);

/// Sum over modes of |h|^2 + |v|^2.
double total_probability(const ModeState& state);

}  // namespace qkdsim::optics
