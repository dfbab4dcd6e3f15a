#pragma once

#include <complex>

#include "qkdsim/rng.hpp"

namespace qkdsim::optics {

using Complex = std::complex<double>;

/// Two-component polarisation amplitude (horizontal, vertical).
struct JonesVector {
    Complex h{0.0, 0.0};
    Complex v{0.0, 0.0};

    /// |h|^2 + |v|^2.
    double norm_sq() const { return std::norm(h) + std::norm(v); }

    bool is_zero() const { return h == Complex{0.0, 0.0} && v == Complex{0.0, 0.0}; }

    JonesVector operator*(Complex s) const { return {h * s, v * s}; }
    JonesVector operator+(const JonesVector& o) const { return {h + o.h, v + o.v}; }
    JonesVector operator-(const JonesVector& o) const { return {h - o.h, v - o.v}; }
};

inline JonesVector operator*(Complex s, const JonesVector& j) { return j * s; }

/// 2x2 complex polarisation transform, row-major.
struct JonesMatrix {
    Complex m00{1.0, 0.0}, m01{0.0, 0.0};
    Complex m10{0.0, 0.0}, m11{1.0, 0.0};

    static JonesMatrix identity() { return {}; }

    static JonesMatrix diagonal(Complex d0, Complex d1) {
        return {d0, {0.0, 0.0}, {0.0, 0.0}, d1};
    }

    /// diag(e^{i delta}, e^{-i delta}); a pure differential path retardance.
    static JonesMatrix retarder(double delta) {
        return diagonal(std::polar(1.0, delta), std::polar(1.0, -delta));
    }

    JonesMatrix adjoint() const {
        return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
    }

    Complex trace() const { return m00 + m11; }

    JonesMatrix operator*(const JonesMatrix& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }

    JonesVector operator*(const JonesVector& j) const {
        return {m00 * j.h + m01 * j.v, m10 * j.h + m11 * j.v};
    }

    /// True when M†M = I to within `tol` per entry.
    bool is_unitary(double tol = 1e-12) const;
};

/// Haar-uniform 2x2 unitary: a unit quaternion mapped to SU(2) times a
/// uniform global phase.
JonesMatrix haar_random_unitary(SplitMix64& rng);

}  // namespace qkdsim::optics
