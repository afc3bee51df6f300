#pragma once

// Atomic units are used throughout the library (hbar = m_e = e = 1).
// User-facing values are eV, Angstrom and femtoseconds.

namespace tdelay::units {

inline constexpr double hartree_in_ev = 27.211386245988;
inline constexpr double bohr_in_angstrom = 0.529177210903;
inline constexpr double au_time_in_fs = 0.024188843265857;

constexpr double ev_to_hartree(double ev) { return ev / hartree_in_ev; }
constexpr double hartree_to_ev(double ha) { return ha * hartree_in_ev; }
constexpr double angstrom_to_bohr(double a) { return a / bohr_in_angstrom; }
constexpr double bohr_to_angstrom(double b) { return b * bohr_in_angstrom; }
constexpr double au_to_fs(double t) { return t * au_time_in_fs; }
constexpr double fs_to_au(double fs) { return fs / au_time_in_fs; }

enum class EnergyUnit { hartree, ev };
enum class LengthUnit { bohr, angstrom };

constexpr double to_hartree(double value, EnergyUnit unit) {
  return unit == EnergyUnit::ev ? ev_to_hartree(value) : value;
}
constexpr double to_bohr(double value, LengthUnit unit) {
  return unit == LengthUnit::angstrom ? angstrom_to_bohr(value) : value;
}

}  // namespace tdelay::units
