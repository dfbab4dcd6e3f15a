#include "qkdsim/devices.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace qkdsim::devices {

using optics::ModeIndex;

void MziSpec::validate() const {
    if (delay_slots < 1) throw std::invalid_argument("mzi: delay_slots must be >= 1");
    auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in01(r_in)) throw std::invalid_argument("mzi: r_in must lie in [0, 1]");
    if (!in01(r_out)) throw std::invalid_argument("mzi: r_out must lie in [0, 1]");
    if (!in01(t_short)) throw std::invalid_argument("mzi: t_short must lie in [0, 1]");
    if (!in01(t_long)) throw std::invalid_argument("mzi: t_long must lie in [0, 1]");
    if (!in01(overlap)) throw std::invalid_argument("mzi: overlap must lie in [0, 1]");
    if (!(thermal.delta_l_m > 0.0) || !(thermal.lambda_m > 0.0) || !(thermal.dn_dt_per_k > 0.0)) {
        throw std::invalid_argument("mzi: thermal constants must be positive");
    }
}

double FibreSpec::transmission() const {
    return db_to_transmission(length_km * atten_db_per_km);
}

double db_to_transmission(double db) {
    return std::pow(10.0, -db / 10.0);
}

double temperature_to_phase(const ThermalSpec& thermal, double temperature_k) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double phi = (two_pi / thermal.lambda_m) * thermal.dn_dt_per_k *
                       thermal.delta_l_m * (temperature_k - thermal.t_ref_k);
    double reduced = std::fmod(phi, two_pi);
    if (reduced < 0.0) reduced += two_pi;
    return reduced;
}

double temperature_fringe_period_k(const ThermalSpec& thermal) {
    return thermal.lambda_m / (thermal.delta_l_m * thermal.dn_dt_per_k);
}

ModeState mzsw_prepare(const SwitchSetting& setting, const ModeState& state,
                       int short_port, int long_port) {
    if (state.amplitudes().size() != 1) {
        throw std::invalid_argument("mzsw_prepare: state must populate exactly one mode");
    }
    const auto& [mode, amp] = *state.amplitudes().begin();

    ModeState out(state.slot_pitch_s());
    switch (setting.mode) {
        case SwitchMode::Bar:
            out.set_amplitude({mode.slot, short_port}, amp);
            break;
        case SwitchMode::Cross:
            out.set_amplitude({mode.slot, long_port}, amp);
            break;
        case SwitchMode::Split: {
            const Complex half{std::numbers::sqrt2 / 2.0, 0.0};
            out.set_amplitude({mode.slot, short_port}, amp * half);
            out.set_amplitude({mode.slot, long_port},
                              amp * (half * std::polar(1.0, setting.pm_phase_rad)));
            break;
        }
    }
    return out;
}

namespace {

// Output coupler with partial temporal overlap gamma between the arms. The
// long-arm amplitude decomposes into gamma * b on the interfering output
// modes and sqrt(1 - gamma^2) * b on the orthogonal leak modes, which keeps
// total probability exact for every gamma.
ModeState recombine_with_overlap(const ModeState& state, int short_port, int long_port,
                                 double ratio, double gamma) {
    const Complex bar{std::sqrt(ratio), 0.0};
    const Complex cross{0.0, std::sqrt(1.0 - ratio)};
    const double residual = std::sqrt(std::max(0.0, 1.0 - gamma * gamma));

    std::set<int> slots;
    for (const auto& [m, amp] : state.amplitudes()) {
        if (m.port == short_port || m.port == long_port) slots.insert(m.slot);
    }

    ModeState out = state;
    for (int slot : slots) {
        const JonesVector a = state.amplitude({slot, short_port});
        const JonesVector b = state.amplitude({slot, long_port});
        out.set_amplitude({slot, short_port}, bar * a + gamma * (cross * b));
        out.set_amplitude({slot, long_port}, cross * a + gamma * (bar * b));
        if (residual > 0.0 && !b.is_zero()) {
            out.add_amplitude({slot, leak_port(short_port)}, residual * (cross * b));
            out.add_amplitude({slot, leak_port(long_port)}, residual * (bar * b));
        }
    }
    return out;
}

}  // namespace

ModeState mzi_transfer(const MziSpec& spec, const ModeState& state, int in_port,
                       int out_port_0, int out_port_1) {
    spec.validate();
    if (out_port_0 == out_port_1) {
        throw std::invalid_argument("mzi_transfer: output ports must differ");
    }

    ModeState work(state.slot_pitch_s());
    ModeState passthrough(state.slot_pitch_s());
    for (const auto& [m, amp] : state.amplitudes()) {
        if (m.port == in_port) {
            work.set_amplitude({m.slot, out_port_0}, amp);
        } else if (m.port == out_port_0 || m.port == out_port_1 ||
                   m.port == leak_port(out_port_0) || m.port == leak_port(out_port_1)) {
            throw std::invalid_argument("mzi_transfer: output ports must be empty");
        } else {
            passthrough.set_amplitude(m, amp);
        }
    }

    using namespace optics;
    work = apply_coupler(work, out_port_0, out_port_1, spec.r_in);
    work = apply_delay(work, out_port_1, spec.delay_slots);
    work = apply_phase(work, out_port_1, temperature_to_phase(spec.thermal, spec.temperature_k));
    work = apply_loss(work, out_port_1, spec.t_long);
    work = apply_jones(work, out_port_1, spec.u_long);
    work = apply_loss(work, out_port_0, spec.t_short);
    work = apply_jones(work, out_port_0, spec.u_short);
    work = recombine_with_overlap(work, out_port_0, out_port_1, spec.r_out, spec.overlap);

    for (const auto& [m, amp] : passthrough.amplitudes()) {
        work.add_amplitude(m, amp);
    }
    return work;
}

ModeState fibre_transfer(const FibreSpec& spec, const ModeState& state,
                         const JonesMatrix* rotation) {
    const Complex factor{std::sqrt(spec.transmission()), 0.0};
    ModeState out(state.slot_pitch_s());
    for (const auto& [m, amp] : state.amplitudes()) {
        JonesVector j = amp * factor;
        if (rotation != nullptr) j = (*rotation) * j;
        out.set_amplitude(m, j);
    }
    return out;
}

ModeState fibre_transfer(const FibreSpec& spec, const ModeState& state, SplitMix64& rng) {
    if (!spec.scramble) {
        return fibre_transfer(spec, state, nullptr);
    }
    const JonesMatrix rotation = optics::haar_random_unitary(rng);
    return fibre_transfer(spec, state, &rotation);
}

double click_probability(double p_mode, const SourceSpec& source, const DetectorSpec& det) {
    if (!(p_mode >= 0.0 && p_mode <= 1.0)) {
        throw std::invalid_argument("click_probability: p_mode must lie in [0, 1]");
    }
    const double p_photon =
        -std::expm1(-source.mean_photons * det.efficiency * p_mode);
    return 1.0 - (1.0 - p_photon) * (1.0 - det.dark_prob_per_gate);
}

}  // namespace qkdsim::devices
