#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace jpakit {

// Deterministic random stream. The transforms are written out by hand because
// std:: distributions are implementation-defined and would break byte-level
// reproducibility across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // standard normal, Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // unit-mean exponential
    double exponential() {
        double u = uniform();
        return -std::log1p(-u);
    }

    // circular complex Gaussian with E|z|^2 = sigma^2
    std::complex<double> complex_normal(double sigma) {
        double s = sigma * 0.7071067811865476;
        double re = normal();
        double im = normal();
        return {s * re, s * im};
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace jpakit
