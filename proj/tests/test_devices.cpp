#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "qkdsim/devices.hpp"

using namespace qkdsim;
using namespace qkdsim::devices;
using optics::Complex;
using optics::JonesMatrix;
using optics::JonesVector;
using optics::ModeState;

namespace {

constexpr double kTol = 1e-12;

bool amp_close(const JonesVector& a, const JonesVector& b, double tol = kTol) {
    return std::abs(a.h - b.h) <= tol && std::abs(a.v - b.v) <= tol;
}

bool states_close(const ModeState& a, const ModeState& b, double tol = kTol) {
    for (const auto& [m, amp] : a.amplitudes()) {
        if (!amp_close(amp, b.amplitude(m), tol)) return false;
    }
    for (const auto& [m, amp] : b.amplitudes()) {
        if (!amp_close(amp, a.amplitude(m), tol)) return false;
    }
    return true;
}

MziSpec ideal_mzi() {
    MziSpec mzi;
    mzi.delay_slots = 1;
    mzi.r_in = mzi.r_out = 0.5;
    mzi.t_short = mzi.t_long = 1.0;
    mzi.overlap = 1.0;
    return mzi;
}

}  // namespace

TEST_SUITE("devices") {

TEST_CASE("temperature detuning maps to interferometric phase") {
    const ThermalSpec thermal{293.15, 1.0e-5, 1.6, 1.55e-6};
    CHECK(temperature_to_phase(thermal, thermal.t_ref_k) == 0.0);

    // Fringe period in temperature: lambda / (dL * dn/dT).
    const double period = temperature_fringe_period_k(thermal);
    CHECK(period == doctest::Approx(0.0969).epsilon(1e-3));
    CHECK(period == doctest::Approx(1.55e-6 / (1.6 * 1.0e-5)).epsilon(1e-12));

    // Half a period is exactly pi.
    CHECK(temperature_to_phase(thermal, thermal.t_ref_k + period / 2.0) ==
          doctest::Approx(std::numbers::pi).epsilon(1e-9));

    // Reduction keeps the value in [0, 2pi).
    const double wrapped = temperature_to_phase(thermal, thermal.t_ref_k + 2.5 * period);
    CHECK(wrapped == doctest::Approx(std::numbers::pi).epsilon(1e-6));
    const double negative = temperature_to_phase(thermal, thermal.t_ref_k - period / 4.0);
    CHECK(negative == doctest::Approx(1.5 * std::numbers::pi).epsilon(1e-9));

    // A 48.4 mK detuning, evaluated with the same constants.
    const double direct = 2.0 * std::numbers::pi / 1.55e-6 * 1.0e-5 * 1.6 * 0.0484;
    CHECK(temperature_to_phase(thermal, thermal.t_ref_k + 0.0484) ==
          doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("switch routes a single pulse") {
    const ModeState in = optics::new_basis_state(0, 7, {{1.0, 0.0}, {0.0, 0.0}});
    const double r = 1.0 / std::numbers::sqrt2;

    const ModeState bar = mzsw_prepare({SwitchMode::Bar, 0.0}, in, 0, 1);
    CHECK(amp_close(bar.amplitude({0, 0}), {{1.0, 0.0}, {0.0, 0.0}}));
    CHECK(bar.amplitude({0, 1}).is_zero());

    const ModeState cross = mzsw_prepare({SwitchMode::Cross, 0.0}, in, 0, 1);
    CHECK(cross.amplitude({0, 0}).is_zero());
    CHECK(amp_close(cross.amplitude({0, 1}), {{1.0, 0.0}, {0.0, 0.0}}));

    const ModeState plus = mzsw_prepare({SwitchMode::Split, 0.0}, in, 0, 1);
    CHECK(amp_close(plus.amplitude({0, 0}), {{r, 0.0}, {0.0, 0.0}}));
    CHECK(amp_close(plus.amplitude({0, 1}), {{r, 0.0}, {0.0, 0.0}}));

    const ModeState minus = mzsw_prepare({SwitchMode::Split, std::numbers::pi}, in, 0, 1);
    CHECK(amp_close(minus.amplitude({0, 1}), {{-r, 0.0}, {0.0, 0.0}}));
}

TEST_CASE("switch preserves probability for all settings") {
    SplitMix64 rng(17);
    for (int i = 0; i < 100; ++i) {
        const JonesMatrix u = optics::haar_random_unitary(rng);
        const ModeState in = optics::new_basis_state(
            static_cast<int>(rng.below(3)), 5, u * JonesVector{{1.0, 0.0}, {0.0, 0.0}});
        for (const SwitchSetting setting :
             {SwitchSetting{SwitchMode::Bar, 0.0}, SwitchSetting{SwitchMode::Cross, 0.0},
              SwitchSetting{SwitchMode::Split, 2.0 * std::numbers::pi * rng.next_double_co()}}) {
            const ModeState out = mzsw_prepare(setting, in, 0, 1);
            CHECK(std::abs(optics::total_probability(out) - optics::total_probability(in)) < 1e-15);
        }
    }
}

TEST_CASE("switch rejects multi-mode input") {
    ModeState in = optics::new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    in.set_amplitude({1, 0}, {{0.5, 0.0}, {0.0, 0.0}});
    CHECK_THROWS_AS(mzsw_prepare({SwitchMode::Bar, 0.0}, in, 0, 1), std::invalid_argument);
}

TEST_CASE("ideal interferometer splits a pulse into four equal modes") {
    const MziSpec mzi = ideal_mzi();
    const ModeState in = optics::new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    const ModeState out = mzi_transfer(mzi, in, 0, 1, 2);

    CHECK(amp_close(out.amplitude({0, 1}), {{0.5, 0.0}, {0.0, 0.0}}));
    CHECK(amp_close(out.amplitude({1, 1}), {{-0.5, 0.0}, {0.0, 0.0}}));
    CHECK(amp_close(out.amplitude({0, 2}), {{0.0, 0.5}, {0.0, 0.0}}));
    CHECK(amp_close(out.amplitude({1, 2}), {{0.0, 0.5}, {0.0, 0.0}}));
    for (const auto& [m, amp] : out.amplitudes()) {
        CHECK(amp.norm_sq() == doctest::Approx(0.25).epsilon(1e-12));
    }
    CHECK(optics::total_probability(out) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("blocked long arm leaves only prompt output") {
    MziSpec mzi = ideal_mzi();
    mzi.t_long = 0.0;
    const ModeState in = optics::new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    const ModeState out = mzi_transfer(mzi, in, 0, 1, 2);
    for (const auto& [m, amp] : out.amplitudes()) {
        CHECK(m.slot == 0);
    }
    CHECK(optics::total_probability(out) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("interferometer maps the zero state to the zero state") {
    const ModeState out = mzi_transfer(ideal_mzi(), ModeState{}, 0, 1, 2);
    CHECK(out.empty());
}

TEST_CASE("interferometer rejects occupied output ports") {
    ModeState in = optics::new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    in.set_amplitude({0, 1}, {{0.1, 0.0}, {0.0, 0.0}});
    CHECK_THROWS_AS(mzi_transfer(ideal_mzi(), in, 0, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(mzi_transfer(ideal_mzi(), in, 0, 2, 2), std::invalid_argument);
}

TEST_CASE("ideal interferometer preserves probability over random inputs") {
    SplitMix64 rng(23);
    for (int i = 0; i < 1000; ++i) {
        MziSpec mzi = ideal_mzi();
        mzi.temperature_k = mzi.thermal.t_ref_k +
                            temperature_fringe_period_k(mzi.thermal) * rng.next_double_co();
        mzi.u_short = optics::haar_random_unitary(rng);
        mzi.u_long = optics::haar_random_unitary(rng);

        ModeState in;
        const int n_slots = 1 + static_cast<int>(rng.below(2));
        for (int s = 0; s < n_slots; ++s) {
            in.add_amplitude({s, 0}, {{rng.gaussian(), rng.gaussian()},
                                      {rng.gaussian(), rng.gaussian()}});
        }
        const double p_in = optics::total_probability(in);
        const ModeState out = mzi_transfer(mzi, in, 0, 1, 2);
        CHECK(std::abs(optics::total_probability(out) - p_in) < kTol * std::max(1.0, p_in));
    }
}

TEST_CASE("interferometer agrees with the dense matrix oracle") {
    SplitMix64 rng(31);
    for (int i = 0; i < 1000; ++i) {
        MziSpec mzi;
        mzi.delay_slots = 1 + static_cast<int>(rng.below(2));
        mzi.r_in = 0.3 + 0.4 * rng.next_double_co();
        mzi.r_out = 0.3 + 0.4 * rng.next_double_co();
        mzi.t_short = db_to_transmission(10.0 * rng.next_double_co());
        mzi.t_long = db_to_transmission(10.0 * rng.next_double_co());
        mzi.overlap = 0.9 + 0.1 * rng.next_double_co();
        mzi.u_short = optics::haar_random_unitary(rng);
        mzi.u_long = optics::haar_random_unitary(rng);
        mzi.temperature_k = mzi.thermal.t_ref_k +
                            temperature_fringe_period_k(mzi.thermal) * rng.next_double_co();

        ModeState in;
        const int n_slots = 1 + static_cast<int>(rng.below(2));
        for (int s = 0; s < n_slots; ++s) {
            in.add_amplitude({s, 0}, {{rng.gaussian(), rng.gaussian()},
                                      {rng.gaussian(), rng.gaussian()}});
        }

        const ModeState got = mzi_transfer(mzi, in, 0, 1, 2);
        const ModeState want = testing::mzi_oracle_transfer(mzi, in, 0, 1, 2);
        CHECK(states_close(got, want));
    }
}

TEST_CASE("fibre attenuates by the decibel law") {
    const ModeState in = optics::new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});

    FibreSpec none{0.0, 0.2, false};
    CHECK(states_close(fibre_transfer(none, in, nullptr), in));

    FibreSpec ten_km{10.0, 0.2, false};
    CHECK(optics::total_probability(fibre_transfer(ten_km, in, nullptr)) ==
          doctest::Approx(0.6310).epsilon(1e-4));
}

TEST_CASE("scrambling applies one rotation to every slot") {
    // Proportional slot amplitudes stay proportional with the same factor.
    const Complex ratio{0.3, -0.4};
    ModeState in;
    const JonesVector base{{0.5, 0.1}, {-0.2, 0.3}};
    in.set_amplitude({0, 0}, base);
    in.set_amplitude({1, 0}, base * ratio);

    FibreSpec spec{5.0, 0.2, true};
    SplitMix64 rng(41);
    const ModeState out = fibre_transfer(spec, in, rng);
    const JonesVector a = out.amplitude({0, 0});
    const JonesVector b = out.amplitude({1, 0});
    CHECK(amp_close(b, a * ratio, 1e-15));

    SplitMix64 rng2(41);
    const ModeState out2 = fibre_transfer(spec, in, rng2);
    CHECK(states_close(out, out2, 0.0));
}

TEST_CASE("click probability follows the faint-pulse model") {
    SourceSpec source;
    DetectorSpec det;

    source.mean_photons = 0.1;
    det.efficiency = 0.1;
    det.dark_prob_per_gate = 1e-5;
    CHECK(click_probability(0.0, source, det) == doctest::Approx(1e-5).epsilon(1e-12));

    det.dark_prob_per_gate = 0.0;
    CHECK(click_probability(0.25, source, det) ==
          doctest::Approx(1.0 - std::exp(-0.0025)).epsilon(1e-12));
    CHECK(click_probability(0.25, source, det) == doctest::Approx(2.4969e-3).epsilon(1e-4));

    source.mean_photons = 1e9;
    CHECK(click_probability(0.5, source, det) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(click_probability(-0.1, source, det), std::invalid_argument);
    CHECK_THROWS_AS(click_probability(1.1, source, det), std::invalid_argument);
}

TEST_CASE("click probability is monotone in every argument") {
    SplitMix64 rng(53);
    for (int i = 0; i < 1000; ++i) {
        SourceSpec source;
        DetectorSpec det;
        source.mean_photons = rng.next_double_co();
        det.efficiency = rng.next_double_co();
        det.dark_prob_per_gate = 0.1 * rng.next_double_co();
        const double p = rng.next_double_co();
        const double base = click_probability(p, source, det);

        SourceSpec source_up = source;
        source_up.mean_photons += rng.next_double_co();
        CHECK(click_probability(p, source_up, det) >= base);

        DetectorSpec det_eta = det;
        det_eta.efficiency += (1.0 - det.efficiency) * rng.next_double_co();
        CHECK(click_probability(p, source, det_eta) >= base);

        DetectorSpec det_dark = det;
        det_dark.dark_prob_per_gate += (1.0 - det.dark_prob_per_gate) * 0.5 * rng.next_double_co();
        CHECK(click_probability(p, source, det_dark) >= base);

        const double p_up = p + (1.0 - p) * rng.next_double_co();
        CHECK(click_probability(p_up, source, det) >= base);
    }
}

}  // TEST_SUITE
