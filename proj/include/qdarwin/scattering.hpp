#pragma once

// Decoherence of a dielectric sphere's position superposition under blackbody
// illumination. Maps physical inputs (sphere radius, permittivity, separation,
// temperature, irradiance, geometry) to a decoherence time tau_D, so that the
// measures in info.hpp apply with Gamma = exp(-t / tau_D).
//
// Two regimes, split by the separation against the thermal peak wavelength:
//   dipole     dx << lambda: photons resolve the two sites only partially;
//              rate ~ T^5 and grows with dx^2.
//   saturated  dx >> lambda: every scattered photon is a perfect which-path
//              record; the rate is dx-independent and equals twice the total
//              elastic scattering rate (~ T^3).
// All quantities SI.

#include <cstdint>
#include <numbers>
#include <string>

#include "qdarwin/errors.hpp"
#include "qdarwin/info.hpp"

namespace qdarwin::scattering {

// SI defining constants (2019 redefinition; exact).
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);

// Riemann zeta values entering the thermal averages (truncated exact digits).
inline constexpr double kZeta3 = 1.2020569031595942854;
inline constexpr double kZeta7 = 1.0083492773819228268;
inline constexpr double kZeta9 = 1.0020083928260822144;

// Root of x = 5 (1 - exp(-x)): displacement-law constant for the peak of the
// spectral radiance density in wavelength.
inline constexpr double kWienX = 4.9651142317442763037;

enum class Regime { Dipole, Saturated, Auto };

// Default maps the permittivity onto an equivalent perfect scatterer through
// the polarizability factor (eps - 1)/(eps + 2). MinusTwoDenominator is a
// historical variant with (eps - 2) instead; it is singular at eps = 2 and
// undefined below, and exists only so the discrepancy can be demonstrated.
enum class RadiusConvention { ClausiusMossotti, MinusTwoDenominator };

// a_tilde = a * [(eps - 1)/(eps + 2)]^(1/3); enters all rates as a_tilde^6.
double effective_radius(double radius_m, double epsilon,
                        RadiusConvention convention = RadiusConvention::ClausiusMossotti);

struct PhysicalScenario {
    double radius_m;         // sphere radius a > 0
    double epsilon;          // relative permittivity > 1
    double separation_m;     // superposition separation dx >= 0
    double temperature_K;    // blackbody temperature T > 0
    double irradiance_W_m2;  // energy flux I >= 0
    double theta_rad;        // angle between dx and the beam, [0, pi]
    info::Illumination illumination;
    Regime regime;           // Auto picks from separation vs peak wavelength
};

// Throws schema_error / std::domain_error on out-of-range fields.
void validate_scenario(const PhysicalScenario& s);

// Strict JSON codec for PhysicalScenario. Unknown keys, missing keys, and
// non-numeric values are schema errors. Canonical serialization (sorted keys,
// shortest round-trip floats) so the hash below is reproducible.
PhysicalScenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const PhysicalScenario& s);
std::uint64_t scenario_hash(const PhysicalScenario& s);  // FNV-1a of the canonical JSON

// Matrix element for one photon of wavelength lambda in quantization volume V
// scattering off the superposition, after time t:
//   1 - (256 pi^7 / 15) a_tilde^6 dx^2 (3 + 11 cos^2 theta) c t / (V lambda^6).
// Perturbative: throws regime_error once the deficit reaches 1 (volume too
// small for a single-photon treatment).
double single_photon_element(const PhysicalScenario& s, double lambda_m,
                             double t_s, double volume_m3);

// Thermally averaged decoherence rates 1/tau_D. Both require irradiance > 0.
// Dipole additionally requires separation > 0 (the rate would vanish) and
// uses the angular factor 3 + 11 cos^2 theta for a point source, or its
// solid-angle average 20/3 for isotropic illumination.
double decoherence_rate_dipole(const PhysicalScenario& s);
double decoherence_rate_saturated(const PhysicalScenario& s);

struct DecoherenceTime {
    // +inf when nothing ever distinguishes the branches: zero irradiance or
    // zero separation (coinciding branches scatter identically in any regime).
    double tau_s;
    Regime regime_used;      // Dipole or Saturated, never Auto
    bool crossover_warning;  // separation within a decade of the peak wavelength
    double lambda_peak_m;
};

// Regime selection: Auto takes Saturated when dx > lambda_peak, else Dipole.
// Near the crossover neither expansion is trustworthy; the warning flag
// covers lambda_peak/10 <= dx <= 10 lambda_peak.
DecoherenceTime decoherence_time(const PhysicalScenario& s);

// Gamma after t seconds of illumination, via decoherence_time.
info::DecoherenceFactor gamma_at_time(const PhysicalScenario& s, double t_s);

// lambda_peak = h c / (x* kB T) with x* = kWienX.
double wien_peak_wavelength(double temperature_K);

// <E> = [pi^4 / (30 zeta(3))] kB T ~= 2.701 kB T, the mean energy of a
// blackbody photon; converts irradiance to number density n = I / (c <E>).
double mean_photon_energy(double temperature_K);
double irradiance_to_density(double irradiance_W_m2, double temperature_K);
double density_to_irradiance(double density_m3, double temperature_K);

// Blackbody moment integral over x in (0, inf) of x^(2+m) / (e^x - 1) dx,
// by adaptive Simpson quadrature after x = e^u. Exposed so the closed-form
// thermal constants can be re-derived numerically.
double planck_weighted_moment(int m, double rel_tol = 1e-10);

// Cross-check of the two thermal prefactors against quadrature:
//   dipole     (4 pi / 15) <x^6>/<x>  == 161280 zeta(9) / pi^3
//   saturated  (16 pi / 3) <x^4>/<x>  == 57600 zeta(7) / pi^3
// where <x^k> are the moments above and 16 pi/3 is twice the total elastic
// cross-section coefficient 8 pi/3. Also reports <E>/(kB T) = <x>/<x^0>.
struct ThermalConstantCheck {
    double dipole_quadrature;
    double dipole_reference;
    double saturated_quadrature;
    double saturated_reference;
    double mean_energy_ratio;  // expect pi^4 / (30 zeta3)
    double worst_rel_err;
};
ThermalConstantCheck thermal_constant_check();

// Thermal prefactors as used by the rate functions.
inline constexpr double kDipoleThermalConstant =
    161280.0 * kZeta9 / (std::numbers::pi * std::numbers::pi * std::numbers::pi);
inline constexpr double kSaturatedThermalConstant =
    57600.0 * kZeta7 / (std::numbers::pi * std::numbers::pi * std::numbers::pi);

// Lowercase names used in scenario files and CLI flags; *_from_string throws
// schema_error on anything else.
std::string to_string(Regime r);
std::string to_string(info::Illumination i);
Regime regime_from_string(const std::string& s);
info::Illumination illumination_from_string(const std::string& s);

}  // namespace qdarwin::scattering
