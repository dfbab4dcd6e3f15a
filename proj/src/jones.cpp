#include "qkdsim/jones.hpp"

#include <cmath>

namespace qkdsim::optics {

bool JonesMatrix::is_unitary(double tol) const {
    const JonesMatrix g = adjoint() * (*this);
    return std::abs(g.m00 - Complex{1.0, 0.0}) <= tol && std::abs(g.m01) <= tol &&
           std::abs(g.m10) <= tol && std::abs(g.m11 - Complex{1.0, 0.0}) <= tol;
}

JonesMatrix haar_random_unitary(SplitMix64& rng) {
    double a, b, c, d, n2;
    do {
        a = rng.gaussian();
        b = rng.gaussian();
        c = rng.gaussian();
        d = rng.gaussian();
        n2 = a * a + b * b + c * c + d * d;
    } while (n2 < 1e-290);
    const double inv = 1.0 / std::sqrt(n2);
    a *= inv;
    b *= inv;
    c *= inv;
    d *= inv;
    const Complex phase = std::polar(1.0, 2.0 * std::numbers::pi * rng.next_double_co());
    JonesMatrix u;
    u.m00 = phase * Complex{a, b};
    u.m01 = phase * Complex{c, d};
    u.m10 = phase * Complex{-c, d};
    u.m11 = phase * Complex{a, -b};
    return u;
}

}  // namespace qkdsim::optics
