#include "qdarwin/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdarwin/errors.hpp"
#include "qdarwin/info.hpp"
#include "qdarwin/oracle.hpp"
#include "qdarwin/scattering.hpp"
#include "qdarwin/table.hpp"

namespace qdarwin::cli {
namespace {

using info::DecoherenceFactor;
using info::kLn2;
using table::Cell;
using table::format_double;
using table::OutputTable;

constexpr const char* kFormulaVersion = "1";

// "a:b:step" (endpoints inclusive when hit within 1e-12) or "v1,v2,..." or a
// single value.
std::vector<double> parse_values(const std::string& text) {
    const auto to_double = [](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw schema_error("not a number: '" + s + "'");
        }
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::istringstream in(text);
        for (std::string p; std::getline(in, p, ':');) parts.push_back(p);
        if (parts.size() != 3)
            throw schema_error("grid must be start:stop:step: '" + text + "'");
        const double start = to_double(parts[0]);
        const double stop = to_double(parts[1]);
        const double step = to_double(parts[2]);
        if (!(step > 0.0)) throw schema_error("grid step must be positive");
        if (!(stop >= start)) throw schema_error("grid stop must be >= start");
        // Count so that stop lands on the grid when (stop-start)/step is an
        // integer to within accumulated rounding.
        const double q = (stop - start) / step;
        if (q > 2e6) throw schema_error("grid has more than 2e6 points");
        const long n = static_cast<long>(std::floor(q + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(start + i * step);
        return out;
    }
    std::istringstream in(text);
    for (std::string p; std::getline(in, p, ',');) out.push_back(to_double(p));
    if (out.empty()) throw schema_error("empty value list");
    return out;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void emit_text(const std::string& text, const std::string& output_path,
               std::ostream& out) {
    if (output_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(output_path, std::ios::binary);
    if (!f) throw schema_error("cannot open output file: " + output_path);
    f << text;
    if (!f) throw schema_error("failed writing output file: " + output_path);
}

void emit(const OutputTable& t, const std::string& format,
          const std::string& output_path, std::ostream& out) {
    emit_text(format == "json" ? table::to_json(t) : table::to_csv(t),
              output_path, out);
}

struct GammaSource {
    // One entry per requested time point.
    std::vector<DecoherenceFactor> gammas;
    std::vector<double> t_over_tau;
    std::vector<double> times_s;  // empty for dimensionless sources
    bool from_scenario = false;
    scattering::PhysicalScenario scenario{};
    scattering::DecoherenceTime tau{};
};

// Exactly one of --gamma-exponent / (--scenario with --times); --strict
// escalates the regime crossover warning from a note to exit 3.
GammaSource resolve_gamma_source(const std::string& gamma_exponents,
                                 const std::string& scenario_path,
                                 const std::string& times,
                                 bool strict, std::ostream& err) {
    GammaSource src;
    if (!gamma_exponents.empty() && !scenario_path.empty())
        throw schema_error("--gamma-exponent and --scenario are mutually exclusive");
    if (gamma_exponents.empty() && scenario_path.empty())
        throw schema_error("need a decoherence source: --gamma-exponent or --scenario");
    if (!gamma_exponents.empty()) {
        if (!times.empty())
            throw schema_error("--times requires --scenario (seconds need a tau_D)");
        for (double x : parse_values(gamma_exponents)) {
            src.gammas.push_back(DecoherenceFactor::from_exponent(x));
            src.t_over_tau.push_back(src.gammas.back().exponent());
        }
        return src;
    }
    if (times.empty())
        throw schema_error("--scenario needs --times (list of elapsed seconds)");
    std::ifstream f(scenario_path);
    if (!f) throw schema_error("cannot read scenario file: " + scenario_path);
    std::stringstream buf;
    buf << f.rdbuf();
    src.from_scenario = true;
    src.scenario = scattering::scenario_from_json(buf.str());
    src.tau = scattering::decoherence_time(src.scenario);
    if (src.tau.crossover_warning) {
        err << "warning: separation is within a decade of the thermal peak "
               "wavelength ("
            << format_double(src.tau.lambda_peak_m)
            << " m); neither regime expansion is reliable there\n";
        if (strict)
            throw regime_error("crossover warning escalated by --strict");
    }
    for (double t : parse_values(times)) {
        src.gammas.push_back(DecoherenceFactor::from_time(t, src.tau.tau_s));
        src.t_over_tau.push_back(src.gammas.back().exponent());
        src.times_s.push_back(t);
    }
    return src;
}

void add_source_metadata(OutputTable& t, const GammaSource& src) {
    t.metadata["formula_version"] = kFormulaVersion;
    if (!src.from_scenario) {
        t.metadata["source"] = "gamma-exponent";
        return;
    }
    t.metadata["source"] = "scenario";
    t.metadata["scenario_hash"] = hash_hex(scattering::scenario_hash(src.scenario));
    t.metadata["tau_d_s"] = format_double(src.tau.tau_s);
    t.metadata["regime_used"] = scattering::to_string(src.tau.regime_used);
    t.metadata["lambda_peak_m"] = format_double(src.tau.lambda_peak_m);
}

int cmd_pip(const GammaSource& src, const std::string& fractions_text,
            info::Illumination illum, const std::string& format,
            const std::string& output_path, std::ostream& out) {
    const std::vector<double> fractions = parse_values(fractions_text);
    OutputTable t;
    t.columns = src.from_scenario
                    ? std::vector<std::string>{"t_s", "t_over_tau", "fraction",
                                               "info_nats", "info_bits"}
                    : std::vector<std::string>{"t_over_tau", "fraction",
                                               "info_nats", "info_bits"};
    add_source_metadata(t, src);
    t.metadata["illumination"] = scattering::to_string(illum);
    for (std::size_t k = 0; k < src.gammas.size(); ++k) {
        const info::InfoCurve curve =
            info::info_curve(src.gammas[k], illum, fractions);
        for (const auto& p : curve.points) {
            std::vector<Cell> row;
            if (src.from_scenario) row.push_back(src.times_s[k]);
            row.insert(row.end(), {Cell{src.t_over_tau[k]}, Cell{p.fraction},
                                   Cell{p.info_nats}, Cell{p.info_nats / kLn2}});
            t.add_row(std::move(row));
        }
    }
    emit(t, format, output_path, out);
    return kExitOk;
}

int cmd_redundancy(const GammaSource& src, double delta,
                   const std::string& format, const std::string& output_path,
                   std::ostream& out, std::ostream& err) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("--delta must lie in (0, 1)");
    const bool asym_defined = 2.0 * delta * kLn2 < 1.0;
    if (delta >= 0.5)
        err << "warning: the large-time approximation degrades with delta; at "
               "delta >= 0.5 its column is "
            << (asym_defined ? "unreliable" : "undefined and left empty") << "\n";
    OutputTable t;
    t.columns = src.from_scenario
                    ? std::vector<std::string>{"t_s", "t_over_tau", "f_delta",
                                               "redundancy",
                                               "redundancy_asymptotic",
                                               "has_plateau"}
                    : std::vector<std::string>{"t_over_tau", "f_delta",
                                               "redundancy",
                                               "redundancy_asymptotic",
                                               "has_plateau"};
    add_source_metadata(t, src);
    t.metadata["delta"] = format_double(delta);
    for (std::size_t k = 0; k < src.gammas.size(); ++k) {
        std::vector<Cell> row;
        if (src.from_scenario) row.push_back(src.times_s[k]);
        row.push_back(src.t_over_tau[k]);
        if (src.gammas[k].fully_coherent()) {
            // Nothing has been recorded yet: no fragment reaches the target,
            // redundancy 0, and the asymptotic form gives 0 as well.
            row.insert(row.end(),
                       {Cell{}, Cell{0.0},
                        asym_defined ? Cell{0.0} : Cell{}, Cell{0.0}});
        } else {
            const info::RedundancyResult r =
                info::redundancy_exact(src.gammas[k], delta);
            row.insert(row.end(),
                       {Cell{r.f_delta}, Cell{r.redundancy},
                        std::isnan(r.asymptotic) ? Cell{} : Cell{r.asymptotic},
                        Cell{r.has_plateau ? 1.0 : 0.0}});
        }
        t.add_row(std::move(row));
    }
    emit(t, format, output_path, out);
    return kExitOk;
}

int cmd_decohere(const GammaSource& src, const std::string& format,
                 const std::string& output_path, std::ostream& out) {
    OutputTable t;
    t.columns = src.from_scenario
                    ? std::vector<std::string>{"t_s", "t_over_tau", "gamma",
                                               "entropy_nats", "entropy_bits"}
                    : std::vector<std::string>{"t_over_tau", "gamma",
                                               "entropy_nats", "entropy_bits"};
    add_source_metadata(t, src);
    for (std::size_t k = 0; k < src.gammas.size(); ++k) {
        const double h = info::branch_entropy(src.gammas[k]);
        std::vector<Cell> row;
        if (src.from_scenario) row.push_back(src.times_s[k]);
        row.insert(row.end(), {Cell{src.t_over_tau[k]},
                               Cell{src.gammas[k].gamma()}, Cell{h},
                               Cell{h / kLn2}});
        t.add_row(std::move(row));
    }
    emit(t, format, output_path, out);
    return kExitOk;
}

int cmd_scenario(const GammaSource& src, double t_s, double delta,
                 const std::string& format, const std::string& output_path,
                 std::ostream& out) {
    const auto& s = src.scenario;
    const auto& tau = src.tau;
    const DecoherenceFactor gamma = src.gammas.at(0);
    const double x = gamma.exponent();
    const double h = info::branch_entropy(gamma);
    const double a_eff = scattering::effective_radius(s.radius_m, s.epsilon);
    const double density =
        scattering::irradiance_to_density(s.irradiance_W_m2, s.temperature_K);
    const bool decoheres = std::isfinite(tau.tau_s);

    std::optional<info::RedundancyResult> red;
    if (x > 0.0 && !gamma.fully_decohered())
        red = info::redundancy_exact(gamma, delta);
    const bool asym_defined = 2.0 * delta * kLn2 < 1.0;

    if (format == "json") {
        nlohmann::json j;
        j["scenario"] = nlohmann::json::parse(scattering::scenario_to_json(s));
        j["scenario_hash"] = hash_hex(scattering::scenario_hash(s));
        j["formula_version"] = kFormulaVersion;
        auto& d = j["derived"];
        d["effective_radius_m"] = a_eff;
        d["lambda_peak_m"] = tau.lambda_peak_m;
        d["mean_photon_energy_J"] =
            scattering::mean_photon_energy(s.temperature_K);
        d["photon_density_m3"] = density;
        d["regime_used"] = scattering::to_string(tau.regime_used);
        d["crossover_warning"] = tau.crossover_warning;
        d["decoheres"] = decoheres;
        if (decoheres) d["tau_d_s"] = tau.tau_s;  // omitted when infinite
        auto& a = j["at_time"];
        a["t_s"] = t_s;
        a["t_over_tau"] = x;
        a["gamma"] = gamma.gamma();
        a["entropy_nats"] = h;
        a["entropy_bits"] = h / kLn2;
        a["delta"] = delta;
        if (red) {
            a["f_delta"] = red->f_delta;
            a["redundancy"] = red->redundancy;
            if (!std::isnan(red->asymptotic))
                a["redundancy_asymptotic"] = red->asymptotic;
            a["has_plateau"] = red->has_plateau;
        } else {
            a["redundancy"] = 0.0;
            if (asym_defined) a["redundancy_asymptotic"] = 0.0;
            a["has_plateau"] = false;
        }
        emit_text(j.dump(2) + "\n", output_path, out);
        return kExitOk;
    }

    std::ostringstream body;
    const auto line = [&body](const char* label, const std::string& value) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%-24s", label);
        body << "  " << buf << value << "\n";
    };
    const auto num = [](double v, const char* unit = "") {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.10g%s", v, unit);
        return std::string(buf);
    };
    body << "scenario " << hash_hex(scattering::scenario_hash(s)) << "\n";
    line("radius", num(s.radius_m, " m"));
    line("effective radius", num(a_eff, " m"));
    line("separation", num(s.separation_m, " m"));
    line("temperature", num(s.temperature_K, " K"));
    line("irradiance", num(s.irradiance_W_m2, " W/m^2"));
    line("illumination", scattering::to_string(s.illumination));
    line("theta", num(s.theta_rad, " rad"));
    line("photon density", num(density, " 1/m^3"));
    line("peak wavelength", num(tau.lambda_peak_m, " m"));
    line("regime", scattering::to_string(tau.regime_used) +
                       (s.regime == scattering::Regime::Auto ? " (auto)" : ""));
    if (tau.crossover_warning)
        line("note", "separation within a decade of the peak wavelength");
    if (!decoheres) {
        line("decoherence time", "inf (nothing distinguishes the branches)");
    } else {
        line("decoherence time", num(tau.tau_s, " s"));
    }
    body << "after t = " << num(t_s, " s") << "\n";
    line("t / tau_D", num(x));
    line("gamma", num(gamma.gamma()));
    line("branch entropy", num(h) + " nats = " + num(h / kLn2) + " bits");
    line("delta", num(delta));
    if (red) {
        line("f_delta", num(red->f_delta));
        line("redundancy", num(red->redundancy));
        line("asymptotic redundancy",
             std::isnan(red->asymptotic) ? "undefined at this delta"
                                         : num(red->asymptotic));
        line("classical plateau", red->has_plateau ? "yes" : "no");
    } else {
        line("redundancy", "0 (nothing recorded yet)");
        line("classical plateau", "no");
    }
    emit_text(body.str(), output_path, out);
    return kExitOk;
}

int cmd_validate(int max_n, double tolerance, const std::string& format,
                 std::ostream& out) {
    struct Check {
        std::string name;
        double worst;
        std::string note;
    };
    std::vector<Check> checks;

    // Closed form vs direct series on a Gamma x fraction grid.
    {
        double worst_h = 0.0, worst_pt = 0.0, worst_iso = 0.0;
        for (int gi = 0; gi <= 64; ++gi) {
            const auto g = DecoherenceFactor::from_gamma(gi / 64.0);
            worst_h = std::max(worst_h, std::abs(info::branch_entropy(g) -
                                                 info::branch_entropy_series(g)));
            for (int fi = 0; fi <= 32; ++fi) {
                const double f = fi / 32.0;
                worst_pt = std::max(
                    worst_pt,
                    std::abs(info::mutual_information_point(g, f) -
                             info::mutual_information_point_series(g, f)));
                worst_iso = std::max(
                    worst_iso,
                    std::abs(info::mutual_information_isotropic(g, f) -
                             info::mutual_information_isotropic_series(g, f)));
            }
        }
        checks.push_back({"entropy closed form vs series", worst_h,
                          "65 Gamma values"});
        checks.push_back({"point MI closed form vs series", worst_pt,
                          "65x33 grid"});
        checks.push_back({"isotropic MI closed form vs series", worst_iso,
                          "65x33 grid"});
    }

    // Finite-N oracle vs the closed forms.
    {
        std::vector<double> gammas;
        for (int i = 0; i <= 20; ++i) gammas.push_back(i / 20.0);
        const auto suite =
            oracle::run_oracle_suite(max_n, std::min(max_n, 8), gammas);
        const std::string scope = "N <= " + std::to_string(max_n) + ", " +
                                  std::to_string(gammas.size()) + " gammas, " +
                                  std::to_string(suite.cases) + " cases";
        checks.push_back({"oracle vs point MI", suite.worst_point_mi, scope});
        checks.push_back({"oracle vs isotropic MI", suite.worst_iso_mi, scope});
        checks.push_back(
            {"oracle MI route agreement", suite.worst_route_gap, scope});
        checks.push_back(
            {"oracle fragment spectrum law", suite.worst_spectrum_gap, scope});
        checks.push_back({"oracle off-diagonal suppression",
                          suite.worst_suppression_gap, scope});
    }

    // Thermal prefactors against quadrature.
    {
        const auto c = scattering::thermal_constant_check();
        checks.push_back({"thermal constants vs quadrature", c.worst_rel_err,
                          "dipole " + format_double(c.dipole_quadrature) +
                              " vs " + format_double(c.dipole_reference) +
                              ", saturated " +
                              format_double(c.saturated_quadrature) + " vs " +
                              format_double(c.saturated_reference)});
    }

    bool ok = true;
    for (const auto& c : checks) ok = ok && c.worst <= tolerance;

    if (format == "json") {
        nlohmann::json j;
        j["tolerance"] = tolerance;
        j["ok"] = ok;
        auto& arr = j["checks"] = nlohmann::json::array();
        for (const auto& c : checks)
            arr.push_back({{"name", c.name},
                           {"worst_abs_deviation", c.worst},
                           {"scope", c.note},
                           {"ok", c.worst <= tolerance}});
        out << j.dump(2) << "\n";
    } else {
        for (const auto& c : checks) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%-36s", c.name.c_str());
            out << buf << " worst " << format_double(c.worst) << "  ["
                << (c.worst <= tolerance ? "ok" : "FAIL") << "]  (" << c.note
                << ")\n";
        }
        out << (ok ? "ok" : "MISMATCH") << " at tolerance "
            << format_double(tolerance) << "\n";
    }
    return ok ? kExitOk : kExitValidation;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{
        "Decoherence, partial information and redundancy for an object "
        "illuminated by blackbody radiation"};
    app.require_subcommand(1);

    std::string gamma_exponents, scenario_path, times, fractions = "0:1:0.01";
    std::string illumination = "point", format = "csv", output_path;
    double delta = 0.1, time_s = 0.0, tolerance = 1e-10;
    int max_n = 12;
    bool strict = false;

    const auto add_source_opts = [&](CLI::App* cmd, bool needs_illum) {
        cmd->add_option("--gamma-exponent", gamma_exponents,
                        "t/tau_D values (grid a:b:s or comma list)");
        cmd->add_option("--scenario", scenario_path, "scenario JSON file");
        cmd->add_option("--times", times,
                        "elapsed seconds (grid or list; needs --scenario)");
        cmd->add_option("--output", output_path, "write to file instead of stdout");
        cmd->add_flag("--strict", strict, "escalate regime warnings to exit 3");
        if (needs_illum)
            cmd->add_option("--illumination", illumination,
                            "point or isotropic (default: point, or the "
                            "scenario's value)")
                ->check(CLI::IsMember({"point", "isotropic"}));
        cmd->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* pip = app.add_subcommand(
        "pip", "partial-information curve I(f) over fragment fractions");
    add_source_opts(pip, true);
    pip->add_option("--fractions", fractions,
                    "fragment fractions (grid a:b:s or comma list)");

    auto* red = app.add_subcommand(
        "redundancy", "f_delta, redundancy and plateau flag over time");
    add_source_opts(red, false);
    red->add_option("--delta", delta, "information deficit in (0,1)");

    auto* dec = app.add_subcommand(
        "decohere", "decoherence factor and branch entropy over time");
    add_source_opts(dec, false);

    auto* scn = app.add_subcommand(
        "scenario", "full report for one scenario at one elapsed time");
    scn->add_option("--scenario", scenario_path, "scenario JSON file")
        ->required();
    scn->add_option("--time", time_s, "elapsed seconds")->required();
    scn->add_option("--delta", delta, "information deficit in (0,1)");
    scn->add_option("--format", format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    scn->add_option("--output", output_path, "write to file instead of stdout");
    scn->add_flag("--strict", strict, "escalate regime warnings to exit 3");

    auto* val = app.add_subcommand(
        "validate", "dual-route self checks: oracle, series, thermal constants");
    val->add_option("--max-n", max_n, "largest photon number for the oracle")
        ->check(CLI::Range(1, 14));
    val->add_option("--tolerance", tolerance, "largest accepted deviation");
    val->add_option("--format", format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        for (CLI::App* sc : app.get_subcommands()) {
            out << sc->help();
            return kExitOk;
        }
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (val->parsed()) {
            if (!(tolerance > 0.0))
                throw schema_error("--tolerance must be positive");
            if (format == "csv") format = "text";
            return cmd_validate(max_n, tolerance, format, out);
        }
        if (scn->parsed()) {
            if (format == "csv") format = "text";
            GammaSource src = resolve_gamma_source(
                "", scenario_path, format_double(time_s), strict, err);
            return cmd_scenario(src, time_s, delta, format, output_path, out);
        }
        GammaSource src = resolve_gamma_source(gamma_exponents, scenario_path,
                                               times, strict, err);
        if (pip->parsed()) {
            info::Illumination illum =
                src.from_scenario && pip->get_option("--illumination")->empty()
                    ? src.scenario.illumination
                    : scattering::illumination_from_string(illumination);
            return cmd_pip(src, fractions, illum, format, output_path, out);
        }
        if (red->parsed())
            return cmd_redundancy(src, delta, format, output_path, out, err);
        if (dec->parsed())
            return cmd_decohere(src, format, output_path, out);
        err << "error: unknown subcommand\n";
        return kExitUsage;
    } catch (const regime_error& e) {
        err << "regime error: " << e.what() << "\n";
        return kExitRegime;
    } catch (const schema_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace qdarwin::cli
