#include "qdarwin/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "qdarwin/table.hpp"

namespace qdarwin::scattering {
namespace {

using std::numbers::pi;

// 256 pi^7 / 15: per-photon deficit prefactor with the wavelength in the
// denominator. Dividing by (2 pi)^6 recovers the wavenumber form (4 pi/15) k^6.
constexpr double pi2 = pi * pi;
constexpr double kElementPrefactor = 256.0 * (pi2 * pi2 * pi2 * pi) / 15.0;

constexpr double inf = std::numeric_limits<double>::infinity();

double angular_factor(const PhysicalScenario& s) {
    if (s.illumination == info::Illumination::Isotropic)
        return 20.0 / 3.0;  // solid-angle average of 3 + 11 cos^2
    const double c = std::cos(s.theta_rad);
    return 3.0 + 11.0 * c * c;
}

double pow6(double v) { return v * v * v * (v * v * v); }

// Shared chain of every thermal rate: a_tilde^6, the photon flux n c from
// the irradiance, and the requested power of the typical thermal wavenumber
// kB T / (hbar c).
double rate_core(const PhysicalScenario& s, int wavenumber_power) {
    const double at = effective_radius(s.radius_m, s.epsilon);
    const double kth = kBoltzmann * s.temperature_K / (kHbar * kSpeedOfLight);
    return s.irradiance_W_m2 / (kBoltzmann * s.temperature_K) * pow6(at) *
           std::pow(kth, wavenumber_power);
}

// Adaptive Simpson with Richardson correction; eps is absolute.
double simpson_step(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double eps,
                    int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double eps_abs) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, eps_abs, 40);
}

const nlohmann::json& scenario_schema() {
    // key -> required; all values numeric except the two enums.
    static const nlohmann::json schema = {
        {"radius_m", true},        {"epsilon", true},
        {"separation_m", true},    {"temperature_K", true},
        {"irradiance_W_m2", true}, {"theta_rad", true},
        {"illumination", true},    {"regime", false},
    };
    return schema;
}

}  // namespace

double effective_radius(double radius_m, double epsilon,
                        RadiusConvention convention) {
    if (!(radius_m > 0.0)) throw std::domain_error("radius must be positive");
    if (!(epsilon > 1.0))
        throw std::domain_error("relative permittivity must exceed 1");
    if (convention == RadiusConvention::ClausiusMossotti)
        return radius_m * std::cbrt((epsilon - 1.0) / (epsilon + 2.0));
    // (eps - 2) denominator: pole at eps = 2, no real root below it.
    if (std::abs(epsilon - 2.0) < 1e-9)
        throw regime_error("minus-two radius convention is singular at epsilon = 2");
    if (epsilon < 2.0)
        throw regime_error("minus-two radius convention undefined for epsilon < 2");
    return radius_m * std::cbrt((epsilon - 1.0) / (epsilon - 2.0));
}

void validate_scenario(const PhysicalScenario& s) {
    if (!(s.radius_m > 0.0)) throw std::domain_error("radius_m must be positive");
    if (!(s.epsilon > 1.0)) throw std::domain_error("epsilon must exceed 1");
    if (!(s.separation_m >= 0.0))
        throw std::domain_error("separation_m must be nonnegative");
    if (!(s.temperature_K > 0.0))
        throw std::domain_error("temperature_K must be positive");
    if (!(s.irradiance_W_m2 >= 0.0))
        throw std::domain_error("irradiance_W_m2 must be nonnegative");
    if (!(s.theta_rad >= 0.0 && s.theta_rad <= pi))
        throw std::domain_error("theta_rad must lie in [0, pi]");
}

double single_photon_element(const PhysicalScenario& s, double lambda_m,
                             double t_s, double volume_m3) {
    validate_scenario(s);
    if (!(lambda_m > 0.0)) throw std::domain_error("wavelength must be positive");
    if (!(t_s >= 0.0)) throw std::domain_error("time must be nonnegative");
    if (!(volume_m3 > 0.0)) throw std::domain_error("volume must be positive");
    const double c2 = std::cos(s.theta_rad) * std::cos(s.theta_rad);
    const double at = effective_radius(s.radius_m, s.epsilon);
    const double deficit = kElementPrefactor * (3.0 + 11.0 * c2) * pow6(at) *
                           s.separation_m * s.separation_m * kSpeedOfLight *
                           t_s / (volume_m3 * pow6(lambda_m));
    if (deficit >= 1.0)
        throw regime_error(
            "single-photon suppression reached unity; the perturbative matrix "
            "element needs a larger quantization volume or shorter time");
    return 1.0 - deficit;
}

double decoherence_rate_dipole(const PhysicalScenario& s) {
    validate_scenario(s);
    if (!(s.separation_m > 0.0))
        throw std::domain_error("dipole rate requires positive separation");
    if (!(s.irradiance_W_m2 > 0.0))
        throw std::domain_error("dipole rate requires positive irradiance");
    // C (3 + 11 cos^2) I a~^6 dx^2 (kB T)^5 / (c^6 hbar^6),
    // C = 161280 zeta(9)/pi^3 = (4 pi/15) <x^6>/<x>.
    return kDipoleThermalConstant * angular_factor(s) *
           s.separation_m * s.separation_m * rate_core(s, 6);
}

double decoherence_rate_saturated(const PhysicalScenario& s) {
    validate_scenario(s);
    if (!(s.irradiance_W_m2 > 0.0))
        throw std::domain_error("saturated rate requires positive irradiance");
    // C~ I a~^6 (kB T)^3 / (c^4 hbar^4), C~ = 57600 zeta(7)/pi^3
    // = (16 pi/3) <x^4>/<x>: twice the elastic scattering rate, because each
    // scattered photon is a perfect record in this regime.
    return kSaturatedThermalConstant * rate_core(s, 4);
}

DecoherenceTime decoherence_time(const PhysicalScenario& s) {
    validate_scenario(s);
    DecoherenceTime out;
    out.lambda_peak_m = wien_peak_wavelength(s.temperature_K);
    out.crossover_warning = s.separation_m >= out.lambda_peak_m / 10.0 &&
                            s.separation_m <= 10.0 * out.lambda_peak_m;
    Regime r = s.regime;
    if (r == Regime::Auto)
        r = s.separation_m > out.lambda_peak_m ? Regime::Saturated : Regime::Dipole;
    out.regime_used = r;
    if (s.irradiance_W_m2 == 0.0 || s.separation_m == 0.0) {
        out.tau_s = inf;
        return out;
    }
    out.tau_s = 1.0 / (r == Regime::Dipole ? decoherence_rate_dipole(s)
                                           : decoherence_rate_saturated(s));
    return out;
}

info::DecoherenceFactor gamma_at_time(const PhysicalScenario& s, double t_s) {
    return info::DecoherenceFactor::from_time(t_s, decoherence_time(s).tau_s);
}

double wien_peak_wavelength(double temperature_K) {
    if (!(temperature_K > 0.0))
        throw std::domain_error("temperature must be positive");
    return kPlanck * kSpeedOfLight / (kWienX * kBoltzmann * temperature_K);
}

double mean_photon_energy(double temperature_K) {
    if (!(temperature_K > 0.0))
        throw std::domain_error("temperature must be positive");
    constexpr double pi4 = pi2 * pi2;
    return pi4 / (30.0 * kZeta3) * kBoltzmann * temperature_K;
}

double irradiance_to_density(double irradiance_W_m2, double temperature_K) {
    if (!(irradiance_W_m2 >= 0.0))
        throw std::domain_error("irradiance must be nonnegative");
    return irradiance_W_m2 / (kSpeedOfLight * mean_photon_energy(temperature_K));
}

double density_to_irradiance(double density_m3, double temperature_K) {
    if (!(density_m3 >= 0.0))
        throw std::domain_error("density must be nonnegative");
    return density_m3 * kSpeedOfLight * mean_photon_energy(temperature_K);
}

double planck_weighted_moment(int m, double rel_tol) {
    if (m < 0 || m > 8) throw std::domain_error("moment order out of range");
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2))
        throw std::domain_error("relative tolerance out of range");
    // x = e^u maps (0, inf) to the line; the tails beyond [-16, 6.2] are
    // below 1e-20 of the total for every m in range.
    const auto integrand = [m](double u) {
        const double x = std::exp(u);
        return std::pow(x, 3 + m) / std::expm1(x);
    };
    const double coarse = adaptive_simpson(integrand, -16.0, 6.2, 1e-3);
    return adaptive_simpson(integrand, -16.0, 6.2, rel_tol * coarse);
}

ThermalConstantCheck thermal_constant_check() {
    const double m1 = planck_weighted_moment(1);
    const double m4 = planck_weighted_moment(4);
    const double m6 = planck_weighted_moment(6);
    const double m0 = planck_weighted_moment(0);
    ThermalConstantCheck c;
    c.dipole_quadrature = kElementPrefactor / pow6(2.0 * pi) * m6 / m1;
    c.dipole_reference = kDipoleThermalConstant;
    c.saturated_quadrature = (16.0 * pi / 3.0) * m4 / m1;
    c.saturated_reference = kSaturatedThermalConstant;
    c.mean_energy_ratio = m1 / m0;
    c.worst_rel_err =
        std::max(std::abs(c.dipole_quadrature / c.dipole_reference - 1.0),
                 std::abs(c.saturated_quadrature / c.saturated_reference - 1.0));
    return c;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Dipole: return "dipole";
        case Regime::Saturated: return "saturated";
        case Regime::Auto: return "auto";
    }
    throw std::logic_error("unreachable");
}

std::string to_string(info::Illumination i) {
    return i == info::Illumination::PointSource ? "point" : "isotropic";
}

Regime regime_from_string(const std::string& s) {
    if (s == "dipole") return Regime::Dipole;
    if (s == "saturated") return Regime::Saturated;
    if (s == "auto") return Regime::Auto;
    throw schema_error("regime must be dipole, saturated or auto: got '" + s + "'");
}

info::Illumination illumination_from_string(const std::string& s) {
    if (s == "point") return info::Illumination::PointSource;
    if (s == "isotropic") return info::Illumination::Isotropic;
    throw schema_error("illumination must be point or isotropic: got '" + s + "'");
}

PhysicalScenario scenario_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw schema_error(std::string("invalid scenario JSON: ") + e.what());
    }
    if (!j.is_object()) throw schema_error("scenario must be a JSON object");
    const auto& schema = scenario_schema();
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!schema.contains(key))
            throw schema_error("unknown scenario key: '" + key + "'");
    }
    for (const auto& [key, required] : schema.items()) {
        if (required.get<bool>() && !j.contains(key))
            throw schema_error("missing scenario key: '" + key + "'");
    }
    const auto num = [&j](const char* key) {
        if (!j[key].is_number())
            throw schema_error(std::string("scenario key '") + key +
                               "' must be a number");
        return j[key].get<double>();
    };
    const auto str = [&j](const char* key) {
        if (!j[key].is_string())
            throw schema_error(std::string("scenario key '") + key +
                               "' must be a string");
        return j[key].get<std::string>();
    };
    PhysicalScenario s;
    s.radius_m = num("radius_m");
    s.epsilon = num("epsilon");
    s.separation_m = num("separation_m");
    s.temperature_K = num("temperature_K");
    s.irradiance_W_m2 = num("irradiance_W_m2");
    s.theta_rad = num("theta_rad");
    s.illumination = illumination_from_string(str("illumination"));
    s.regime = j.contains("regime") ? regime_from_string(str("regime")) : Regime::Auto;
    validate_scenario(s);
    return s;
}

std::string scenario_to_json(const PhysicalScenario& s) {
    nlohmann::json j;
    j["radius_m"] = s.radius_m;
    j["epsilon"] = s.epsilon;
    j["separation_m"] = s.separation_m;
    j["temperature_K"] = s.temperature_K;
    j["irradiance_W_m2"] = s.irradiance_W_m2;
    j["theta_rad"] = s.theta_rad;
    j["illumination"] = to_string(s.illumination);
    j["regime"] = to_string(s.regime);
    return j.dump(2) + "\n";  // nlohmann objects iterate sorted: canonical
}

std::uint64_t scenario_hash(const PhysicalScenario& s) {
    return table::fnv1a64(scenario_to_json(s));
}

}  // namespace qdarwin::scattering
