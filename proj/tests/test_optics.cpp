#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qkdsim/mode_state.hpp"

using namespace qkdsim;
using namespace qkdsim::optics;

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

// Random sparse state with a handful of modes and total probability <= 1.
ModeState random_state(SplitMix64& rng) {
    const int n_modes = 1 + static_cast<int>(rng.below(6));
    ModeState s;
    double norm = 0.0;
    for (int i = 0; i < n_modes; ++i) {
        const int slot = static_cast<int>(rng.below(4));
        const int port = static_cast<int>(rng.below(3));
        const JonesVector j{{rng.gaussian(), rng.gaussian()}, {rng.gaussian(), rng.gaussian()}};
        s.add_amplitude({slot, port}, j);
    }
    norm = total_probability(s);
    ModeState out(s.slot_pitch_s());
    const Complex scale{1.0 / std::sqrt(std::max(norm, 1e-12)), 0.0};
    for (const auto& [m, amp] : s.amplitudes()) out.set_amplitude(m, amp * scale);
    return out;
}

}  // namespace

TEST_SUITE("optics") {

TEST_CASE("basis state carries the input probability") {
    const ModeState s = new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    CHECK(total_probability(s) == doctest::Approx(1.0).epsilon(1e-14));

    const double r = 1.0 / std::numbers::sqrt2;
    const ModeState sup = new_basis_state(3, 1, {{r, 0.0}, {0.0, r}});
    CHECK(total_probability(sup) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sup.amplitude({3, 1}).norm_sq() == doctest::Approx(1.0));
}

TEST_CASE("basis state rejects degenerate input") {
    CHECK_THROWS_AS(new_basis_state(0, 0, {{0.0, 0.0}, {0.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(new_basis_state(-1, 0, {{1.0, 0.0}, {0.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("50/50 coupler convention") {
    const ModeState in = new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    const ModeState out = apply_coupler(in, 0, 1, 0.5);
    const double r = 1.0 / std::numbers::sqrt2;
    CHECK(amp_close(out.amplitude({0, 0}), {{r, 0.0}, {0.0, 0.0}}));
    CHECK(amp_close(out.amplitude({0, 1}), {{0.0, r}, {0.0, 0.0}}));
}

TEST_CASE("coupler with r=1 is the identity") {
    SplitMix64 rng(7);
    const ModeState in = random_state(rng);
    CHECK(states_close(apply_coupler(in, 0, 1, 1.0), in));
}

TEST_CASE("two 50/50 couplers swap the ports with a global i") {
    const ModeState in = new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    const ModeState out = apply_coupler(apply_coupler(in, 0, 1, 0.5), 0, 1, 0.5);
    CHECK(amp_close(out.amplitude({0, 0}), {{0.0, 0.0}, {0.0, 0.0}}));
    CHECK(amp_close(out.amplitude({0, 1}), {{0.0, 1.0}, {0.0, 0.0}}));
}

TEST_CASE("coupler validates its arguments") {
    const ModeState in = new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    CHECK_THROWS_AS(apply_coupler(in, 0, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(apply_coupler(in, 0, 1, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(apply_coupler(in, 0, 1, 1.1), std::invalid_argument);
}

TEST_CASE("phase shifts compose and preserve the state") {
    SplitMix64 rng(11);
    const ModeState in = random_state(rng);
    CHECK(states_close(apply_phase(in, 0, 0.0), in));

    const ModeState negated = apply_phase(in, 1, std::numbers::pi);
    for (const auto& [m, amp] : in.amplitudes()) {
        if (m.port == 1) {
            CHECK(amp_close(negated.amplitude(m), amp * Complex{-1.0, 0.0}));
        }
    }

    const ModeState twice = apply_phase(apply_phase(in, 1, std::numbers::pi / 2),
                                        1, std::numbers::pi / 2);
    CHECK(states_close(twice, negated));
}

TEST_CASE("delay moves slots on one port only") {
    ModeState in = new_basis_state(0, 1, {{1.0, 0.0}, {0.0, 0.0}});
    in.set_amplitude({1, 1}, {{0.5, 0.0}, {0.0, 0.0}});
    in.set_amplitude({0, 0}, {{0.0, 0.5}, {0.0, 0.0}});

    CHECK(states_close(apply_delay(in, 1, 0), in));

    const ModeState moved = apply_delay(in, 1, 2);
    CHECK(amp_close(moved.amplitude({2, 1}), {{1.0, 0.0}, {0.0, 0.0}}));
    CHECK(amp_close(moved.amplitude({3, 1}), {{0.5, 0.0}, {0.0, 0.0}}));
    CHECK(amp_close(moved.amplitude({0, 0}), {{0.0, 0.5}, {0.0, 0.0}}));
    CHECK(moved.amplitude({0, 1}).is_zero());
    CHECK_THROWS_AS(apply_delay(in, 1, -1), std::invalid_argument);
}

TEST_CASE("loss scales intensity") {
    const ModeState in = new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    CHECK(states_close(apply_loss(in, 0, 1.0), in));

    const double t_8db = std::pow(10.0, -0.8);
    CHECK(total_probability(apply_loss(in, 0, t_8db)) == doctest::Approx(0.15849).epsilon(1e-5));

    CHECK(apply_loss(in, 0, 0.0).empty());
    CHECK_THROWS_AS(apply_loss(in, 0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(apply_loss(in, 0, 1.5), std::invalid_argument);
}

TEST_CASE("jones transforms act on the targeted port") {
    const double r = 1.0 / std::numbers::sqrt2;
    const ModeState in = new_basis_state(0, 0, {{r, 0.0}, {r, 0.0}});
    CHECK(states_close(apply_jones(in, 0, JonesMatrix::identity()), in));

    const ModeState flipped = apply_jones(in, 0, JonesMatrix::diagonal({1.0, 0.0}, {-1.0, 0.0}));
    CHECK(amp_close(flipped.amplitude({0, 0}), {{r, 0.0}, {-r, 0.0}}));
}

TEST_CASE("total probability of simple states") {
    CHECK(total_probability(ModeState{}) == 0.0);
    const ModeState in = new_basis_state(0, 0, {{1.0, 0.0}, {0.0, 0.0}});
    const double t_3db = std::pow(10.0, -0.3);
    CHECK(total_probability(apply_loss(in, 0, t_3db)) == doctest::Approx(0.50119).epsilon(1e-5));
}

TEST_CASE("lossless elements preserve probability over random states") {
    SplitMix64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const ModeState in = random_state(rng);
        const double p0 = total_probability(in);
        const double phi = 2.0 * std::numbers::pi * rng.next_double_co();
        const double ratio = rng.next_double_co();
        const JonesMatrix u = haar_random_unitary(rng);

        CHECK(std::abs(total_probability(apply_coupler(in, 0, 1, ratio)) - p0) < kTol);
        CHECK(std::abs(total_probability(apply_phase(in, 1, phi)) - p0) < kTol);
        CHECK(std::abs(total_probability(apply_delay(in, 2, 3)) - p0) < kTol);
        CHECK(std::abs(total_probability(apply_jones(in, 0, u)) - p0) < kTol);
    }
}

TEST_CASE("sequential losses multiply") {
    SplitMix64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const ModeState in = random_state(rng);
        const double t1 = rng.next_double_co();
        const double t2 = rng.next_double_co();
        const ModeState a = apply_loss(apply_loss(in, 1, t1), 1, t2);
        const ModeState b = apply_loss(in, 1, t1 * t2);
        CHECK(states_close(a, b));
    }
}

TEST_CASE("delay commutes with phase and jones on the same port") {
    SplitMix64 rng(6);
    for (int i = 0; i < 1000; ++i) {
        const ModeState in = random_state(rng);
        const double phi = 2.0 * std::numbers::pi * rng.next_double_co();
        const JonesMatrix u = haar_random_unitary(rng);
        const int n = static_cast<int>(rng.below(3));

        CHECK(states_close(apply_delay(apply_phase(in, 1, phi), 1, n),
                           apply_phase(apply_delay(in, 1, n), 1, phi)));
        CHECK(states_close(apply_delay(apply_jones(in, 1, u), 1, n),
                           apply_jones(apply_delay(in, 1, n), 1, u)));
    }
}

TEST_CASE("double 50/50 coupler equals port swap times i on random states") {
    SplitMix64 rng(8);
    for (int i = 0; i < 200; ++i) {
        const ModeState in = random_state(rng);
        const ModeState twice = apply_coupler(apply_coupler(in, 0, 1, 0.5), 0, 1, 0.5);
        for (const auto& [m, amp] : in.amplitudes()) {
            const JonesVector expect = amp * Complex{0.0, 1.0};
            if (m.port == 0) {
                CHECK(amp_close(twice.amplitude({m.slot, 1}), expect, 1e-12));
            } else if (m.port == 1) {
                CHECK(amp_close(twice.amplitude({m.slot, 0}), expect, 1e-12));
            }
        }
    }
}

TEST_CASE("haar unitaries are unitary and deterministic per seed") {
    SplitMix64 rng(99);
    for (int i = 0; i < 200; ++i) {
        const JonesMatrix u = haar_random_unitary(rng);
        CHECK(u.is_unitary(1e-12));
        const Complex det = u.m00 * u.m11 - u.m01 * u.m10;
        CHECK(std::abs(std::abs(det) - 1.0) < 1e-12);
    }

    SplitMix64 a(123), b(123);
    for (int i = 0; i < 32; ++i) {
        const JonesMatrix ua = haar_random_unitary(a);
        const JonesMatrix ub = haar_random_unitary(b);
        CHECK(ua.m00 == ub.m00);
        CHECK(ua.m01 == ub.m01);
        CHECK(ua.m10 == ub.m10);
        CHECK(ua.m11 == ub.m11);
    }
}

TEST_CASE("haar mean overlap is 1/2") {
    // |<psi|U|psi>|^2 is uniform on [0,1] for Haar U(2): mean 1/2, var 1/12.
    SplitMix64 rng(314159);
    const int n = 100000;
    const JonesVector psi{{1.0, 0.0}, {0.0, 0.0}};
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        const JonesMatrix u = haar_random_unitary(rng);
        const JonesVector u_psi = u * psi;
        const Complex overlap = std::conj(psi.h) * u_psi.h + std::conj(psi.v) * u_psi.v;
        mean += std::norm(overlap);
    }
    mean /= n;
    const double three_sigma = 3.0 * std::sqrt(1.0 / 12.0 / n);
    CHECK(std::abs(mean - 0.5) < three_sigma);
}

}  // TEST_SUITE
