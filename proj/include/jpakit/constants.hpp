#pragma once

// SI defining constants (2019 revision) plus derived quantities used throughout.
namespace jpakit::constants {

inline constexpr double h    = 6.62607015e-34;       // Planck constant, J s
inline constexpr double hbar = h / 6.283185307179586476925286766559;
inline constexpr double k_b  = 1.380649e-23;          // Boltzmann constant, J/K
inline constexpr double e    = 1.602176634e-19;       // elementary charge, C
inline constexpr double phi0 = h / (2.0 * e);         // flux quantum, Wb
inline constexpr double pi   = 3.141592653589793238462643383279;
inline constexpr double two_pi = 2.0 * pi;

} // namespace jpakit::constants
