#pragma once

#include <vector>

#include "qkdsim/mode_state.hpp"
#include "qkdsim/rng.hpp"

namespace qkdsim::devices {

using optics::Complex;
using optics::JonesMatrix;
using optics::JonesVector;
using optics::ModeState;

/// Thermo-optic phase tuning of one interferometer arm.
struct ThermalSpec {
    double t_ref_k = 293.15;
    double dn_dt_per_k = 1.0e-5;
    double delta_l_m = 1.6;
    double lambda_m = 1.55e-6;
};

/// Unbalanced Mach-Zehnder interferometer with per-arm imperfections.
/// `overlap` is the temporal mode-overlap between the recombining arms
/// (sub-slot path mismatch reduced to a scalar coherence factor).
struct MziSpec {
    int delay_slots = 1;
    double r_in = 0.5;
    double r_out = 0.5;
    double t_short = 1.0;
    double t_long = 1.0;
    JonesMatrix u_short;
    JonesMatrix u_long;
    ThermalSpec thermal;
    double temperature_k = 293.15;
    double overlap = 1.0;

    void validate() const;
};

enum class SwitchMode { Bar, Cross, Split };

/// Mach-Zehnder switch control: route to one arm, or split with a relative
/// phase from the modulator.
struct SwitchSetting {
    SwitchMode mode = SwitchMode::Split;
    double pm_phase_rad = 0.0;
};

/// Faint pulsed laser.
struct SourceSpec {
    double mean_photons = 0.2;
    double rep_rate_hz = 500e3;
    JonesVector polarisation{{1.0, 0.0}, {0.0, 0.0}};  // TE
};

struct FibreSpec {
    double length_km = 0.0;
    double atten_db_per_km = 0.2;
    bool scramble = true;

    double transmission() const;
};

/// Gated single-photon detector.
struct DetectorSpec {
    double efficiency = 0.1;
    double dark_prob_per_gate = 1e-6;
    double gate_width_s = 2.5e-9;
    std::vector<int> gated_slots{0, 1, 2};
};

double db_to_transmission(double db);

/// Interferometric phase from temperature detuning,
/// (2 pi / lambda) * dn/dT * dL * (t - t_ref), reduced mod 2 pi.
double temperature_to_phase(const ThermalSpec& thermal, double temperature_k);

/// Temperature change corresponding to one full fringe period,
/// lambda / (dL * dn/dT).
double temperature_fringe_period_k(const ThermalSpec& thermal);

/// Long-arm light that fails the temporal overlap at recombination leaves on
/// a companion port: same detector gate, orthogonal temporal mode. Callers
/// must keep ordinary port labels below this offset.
constexpr int kOverlapLeakOffset = 16;
constexpr int leak_port(int port) { return port + kOverlapLeakOffset; }

/// Routes a single-mode input onto (short_port, long_port) according to the
/// switch setting. Split puts 1/sqrt(2) on each with e^{i pm_phase} on the
/// long arm.
ModeState mzsw_prepare(const SwitchSetting& setting, const ModeState& state,
                       int short_port, int long_port);

/// Full unbalanced-MZI transfer: input coupler, short arm (loss + Jones),
/// long arm (delay + thermal phase + loss + Jones), output coupler. At the
/// output coupler the long-arm amplitude splits into a coherent part
/// (weight `overlap`) that interferes on (out_port_0, out_port_1) and an
/// orthogonal residual on the leak ports. Ports other than `in_port` pass
/// through untouched; the four output ports must be empty on entry.
ModeState mzi_transfer(const MziSpec& spec, const ModeState& state, int in_port,
                       int out_port_0, int out_port_1);

/// Attenuates every mode by the fibre transmission and, when `scramble` is
/// set, applies one Haar-random polarisation rotation drawn from `rng`
/// identically to every mode (both pulses see the same rotation).
ModeState fibre_transfer(const FibreSpec& spec, const ModeState& state, SplitMix64& rng);

/// As above with a caller-chosen fixed rotation (nullptr: no rotation).
ModeState fibre_transfer(const FibreSpec& spec, const ModeState& state,
                         const JonesMatrix* rotation);

/// Probability that a gate clicks given the single-photon mode probability:
/// the complement of "no photon detected and no dark count" under Poissonian
/// faint-pulse statistics.
double click_probability(double p_mode, const SourceSpec& source, const DetectorSpec& det);

}  // namespace qkdsim::devices
