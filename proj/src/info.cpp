#include "qdarwin/info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qdarwin/parallel.hpp"

namespace qdarwin::info {
namespace {

constexpr double kDomainSlack = 1e-12;
constexpr long kSeriesMaxTerms = 100'000'000;

// s(x) = sum_{n>=1} x^n / (2n (2n-1)) on [0, 1]; s(0) = 0, s(1) = ln2, and
// the branch entropy is ln2 - s(x). Kahan-compensated partial sums. Term
// ratios are below x, so the remaining tail is bounded by term * x / (1-x);
// iteration stops once that bound is negligible against the running sum.
// Near x = 1 this needs ~3e7 terms, hence the closed form for production.
double series_s(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return kLn2;
    double sum = 0.0;
    double comp = 0.0;
    double p = 1.0;
    for (long n = 1; n <= kSeriesMaxTerms; ++n) {
        p *= x;
        const double term = p / (2.0 * n * (2.0 * n - 1.0));
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (term * x / (1.0 - x) < std::max(1e-17, 1e-16 * sum)) break;
    }
    return sum;
}

// H of Gamma^p given x = -ln Gamma, evaluated as the binary entropy of the
// eigenvalues (1 +- g)/2 with g = sqrt(Gamma^p):
//   h = ln2 - [(1+g) ln(1+g) + (1-g) ln(1-g)] / 2.
// 1 - g is computed as -expm1(-p x / 2), which stays exact where direct
// subtraction would cancel (small x). p == 0 must give H(1) = 0 even when
// x is +inf, so the product is short-circuited before 0 * inf can occur.
double entropy_of_power(double x, double p) {
    const double xp = (p == 0.0) ? 0.0 : p * x;
    const double g = std::exp(-0.5 * xp);
    const double u = -std::expm1(-0.5 * xp);  // 1 - g without cancellation
    if (u <= 0.0) return 0.0;                 // Gamma^p == 1: pure, no entropy
    if (g <= 0.0) return kLn2;                // Gamma^p == 0: fully decohered
    return kLn2 - 0.5 * ((1.0 + g) * std::log1p(g) + u * std::log(u));
}

double checked_fraction(double fraction) { return FragmentFraction(fraction).f; }

}  // namespace

DecoherenceFactor DecoherenceFactor::from_gamma(double gamma) {
    if (!(gamma >= -kDomainSlack && gamma <= 1.0 + kDomainSlack))
        throw std::domain_error("decoherence factor must lie in [0, 1]");
    gamma = std::clamp(gamma, 0.0, 1.0);
    return DecoherenceFactor(
        gamma == 0.0 ? std::numeric_limits<double>::infinity() : -std::log(gamma));
}

DecoherenceFactor DecoherenceFactor::from_exponent(double x) {
    if (!(x >= -kDomainSlack))
        throw std::domain_error("decoherence exponent must be nonnegative");
    return DecoherenceFactor(std::max(x, 0.0));
}

DecoherenceFactor DecoherenceFactor::from_time(double t, double tau_d) {
    if (!(t >= 0.0)) throw std::domain_error("elapsed time must be nonnegative");
    if (!(tau_d > 0.0)) throw std::domain_error("decoherence time must be positive");
    return DecoherenceFactor(t / tau_d);  // tau_d == +inf gives x == 0
}

double DecoherenceFactor::gamma() const { return std::exp(-x_); }

double DecoherenceFactor::pow(double p) const {
    if (p == 0.0) return 1.0;
    return std::exp(-p * x_);
}

bool DecoherenceFactor::fully_decohered() const { return std::isinf(x_); }

FragmentFraction::FragmentFraction(double value) {
    if (!(value >= -kDomainSlack && value <= 1.0 + kDomainSlack))
        throw std::domain_error("fragment fraction must lie in [0, 1]");
    f = std::clamp(value, 0.0, 1.0);
}

double branch_entropy(DecoherenceFactor gamma) {
    return entropy_of_power(gamma.exponent(), 1.0);
}

double branch_entropy_series(DecoherenceFactor gamma) {
    return kLn2 - series_s(gamma.gamma());
}

double mutual_information_point(DecoherenceFactor gamma, double fraction) {
    const double f = checked_fraction(fraction);
    const double x = gamma.exponent();
    return entropy_of_power(x, f) + entropy_of_power(x, 1.0) -
           entropy_of_power(x, 1.0 - f);
}

double mutual_information_point_series(DecoherenceFactor gamma, double fraction) {
    const double f = checked_fraction(fraction);
    // ln2 - s(G^f) + (ln2 - s(G)) - (ln2 - s(G^(1-f)))
    return kLn2 - series_s(gamma.pow(f)) - series_s(gamma.gamma()) +
           series_s(gamma.pow(1.0 - f));
}

double mutual_information_isotropic(DecoherenceFactor gamma, double fraction) {
    const double f = checked_fraction(fraction);
    const double x = gamma.exponent();
    return entropy_of_power(x, 1.0) - entropy_of_power(x, 1.0 - f);
}

double mutual_information_isotropic_series(DecoherenceFactor gamma, double fraction) {
    const double f = checked_fraction(fraction);
    return series_s(gamma.pow(1.0 - f)) - series_s(gamma.gamma());
}

RedundancyResult redundancy_exact(DecoherenceFactor gamma, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("information deficit must lie in (0, 1)");
    if (gamma.fully_coherent() || gamma.fully_decohered())
        throw std::domain_error(
            "redundancy needs 0 < Gamma < 1: at Gamma = 1 nothing is recorded, "
            "at Gamma = 0 the fragment curve is discontinuous at f = 0");

    const double hs = branch_entropy(gamma);
    const double target = (1.0 - delta) * hs;

    // I_point is continuous and strictly increasing on [0, 1] with
    // I(0) = 0 < target < 2 hs = I(1); plain bisection is exact enough and
    // immune to the flat plateau that defeats Newton steps.
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mutual_information_point(gamma, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    const double f_delta = 0.5 * (lo + hi);

    RedundancyResult r;
    r.f_delta = f_delta;
    r.redundancy = 1.0 / f_delta;
    r.asymptotic = (2.0 * delta * kLn2 < 1.0)
                       ? redundancy_asymptotic(gamma.exponent(), delta)
                       : std::numeric_limits<double>::quiet_NaN();
    // Classical plateau: the curve must reach (1 - delta) of a full bit by
    // f = 1/2. By antisymmetry I(1/2) = H_S exactly, so this is a closed test.
    r.has_plateau = hs >= (1.0 - delta) * kLn2;
    return r;
}

double redundancy_asymptotic(double t_over_tau, double delta) {
    if (!(t_over_tau >= 0.0))
        throw std::domain_error("t / tau_D must be nonnegative");
    const double arg = 2.0 * delta * kLn2;
    if (!(delta > 0.0) || arg >= 1.0)
        throw std::domain_error("asymptotic redundancy needs 0 < 2 delta ln2 < 1");
    return t_over_tau / -std::log(arg);
}

InfoCurve info_curve(DecoherenceFactor gamma, Illumination illumination,
                     const std::vector<double>& fractions) {
    // Validate everything up front: worker threads must not throw.
    for (double f : fractions) (void)FragmentFraction(f);
    for (std::size_t i = 0; i + 1 < fractions.size(); ++i)
        if (!(fractions[i] < fractions[i + 1]))
            throw std::invalid_argument("fractions must be strictly increasing");

    InfoCurve curve;
    curve.gamma_exponent = gamma.exponent();
    curve.illumination = illumination;
    curve.points.resize(fractions.size());
    parallel_for(fractions.size(), [&](std::size_t i) {
        const double f = fractions[i];
        const double v = illumination == Illumination::PointSource
                             ? mutual_information_point(gamma, f)
                             : mutual_information_isotropic(gamma, f);
        curve.points[i] = InfoCurvePoint{f, v};
    });
    return curve;
}

}  // namespace qdarwin::info
