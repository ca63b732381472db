#pragma once

#include <cmath>
#include <random>
#include <stdexcept>

namespace qlap {

// C^1 radial test function supported on [a, b]:
//   u(r) = amplitude * 16 s^2 (1-s)^2,  s = (r-a)/(b-a),
// peaking at amplitude in the middle of the support.  Used wherever the suite
// needs compactly supported trial functions with an explicit derivative.
struct RadialBump {
    double a = 0, b = 1, amplitude = 1;

    RadialBump() = default;
    RadialBump(double a_, double b_, double amp) : a(a_), b(b_), amplitude(amp) {
        if (!(a >= 0) || !(b > a)) throw std::invalid_argument("bump support must satisfy 0 <= a < b");
    }

    double value(double r) const {
        if (r <= a || r >= b) return 0.0;
        const double s = (r - a) / (b - a);
        const double t = s * (1.0 - s);
        return amplitude * 16.0 * t * t;
    }

    double derivative(double r) const {
        if (r <= a || r >= b) return 0.0;
        const double s = (r - a) / (b - a);
        return amplitude * 32.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (b - a);
    }

    static RadialBump random(std::mt19937_64& rng) {
        std::uniform_real_distribution<double> inner(0.1, 1.0), width(0.5, 2.0), amp(0.5, 2.0);
        const double a_ = inner(rng);
        const double w = width(rng);
        return RadialBump(a_, a_ + w, amp(rng));
    }
};

} // namespace qlap
