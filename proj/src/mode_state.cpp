#include "qkdsim/mode_state.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace qkdsim::optics {

ModeState new_basis_state(int slot, int port, const JonesVector& jones,
                          double slot_pitch_s) {
    if (jones.norm_sq() <= 0.0) {
        throw std::invalid_argument("new_basis_state: zero-norm polarisation amplitude");
    }
    if (slot < 0) {
        throw std::invalid_argument("new_basis_state: slot must be >= 0");
    }
    ModeState s(slot_pitch_s);
    s.set_amplitude({slot, port}, jones);
    return s;
}

ModeState apply_coupler(const ModeState& state, int port_a, int port_b, double ratio) {
    if (port_a == port_b) {
        throw std::invalid_argument("apply_coupler: ports must differ");
    }
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw std::invalid_argument("apply_coupler: ratio must lie in [0, 1]");
    }
    const Complex bar{std::sqrt(ratio), 0.0};
    const Complex cross{0.0, std::sqrt(1.0 - ratio)};

    std::set<int> slots;
    for (const auto& [m, amp] : state.amplitudes()) {
        if (m.port == port_a || m.port == port_b) slots.insert(m.slot);
    }

    ModeState out = state;
    for (int slot : slots) {
        const JonesVector a = state.amplitude({slot, port_a});
        const JonesVector b = state.amplitude({slot, port_b});
        out.set_amplitude({slot, port_a}, bar * a + cross * b);
        out.set_amplitude({slot, port_b}, cross * a + bar * b);
    }
    return out;
}

ModeState apply_phase(const ModeState& state, int port, double phi) {
    const Complex factor = std::polar(1.0, phi);
    ModeState out(state.slot_pitch_s());
    for (const auto& [m, amp] : state.amplitudes()) {
        out.set_amplitude(m, m.port == port ? amp * factor : amp);
    }
    return out;
}

ModeState apply_delay(const ModeState& state, int port, int n_slots) {
    if (n_slots < 0) {
        throw std::invalid_argument("apply_delay: n_slots must be >= 0");
    }
    ModeState out(state.slot_pitch_s());
    for (const auto& [m, amp] : state.amplitudes()) {
        if (m.port == port) {
            out.set_amplitude({m.slot + n_slots, m.port}, amp);
        } else {
            out.set_amplitude(m, amp);
        }
    }
    return out;
}

ModeState apply_loss(const ModeState& state, int port, double transmission) {
    if (!(transmission >= 0.0 && transmission <= 1.0)) {
        throw std::invalid_argument("apply_loss: transmission must lie in [0, 1]");
    }
    const Complex factor{std::sqrt(transmission), 0.0};
    ModeState out(state.slot_pitch_s());
    for (const auto& [m, amp] : state.amplitudes()) {
        out.set_amplitude(m, m.port == port ? amp * factor : amp);
    }
    return out;
}

ModeState apply_jones(const ModeState& state, int port, const JonesMatrix& mat) {
    ModeState out(state.slot_pitch_s());
    for (const auto& [m, amp] : state.amplitudes()) {
        out.set_amplitude(m, m.port == port ? mat * amp : amp);
    }
    return out;
}

ModeState drop_port(const ModeState& state, int port) {
    ModeState out(state.slot_pitch_s());
    for (const auto& [m, amp] : state.amplitudes()) {
        if (m.port != port) out.set_amplitude(m, amp);
    }
    return out;
}

double total_probability(const ModeState& state) {
    double total = 0.0;
    for (const auto& [m, amp] : state.amplitudes()) {
        total += amp.norm_sq();
    }
    return total;
}

}  // namespace qkdsim::optics
