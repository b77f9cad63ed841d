#pragma once

// Information-theoretic quantities for a two-location object monitored by a
// large photon environment. Everything here depends on the photon state only
// through the aggregate decoherence factor Gamma and a fragment fraction f,
// so the functions are pure math: no physical units enter.
//
// Entropies are returned in nats. Divide by ln 2 for bits.

#include <cstddef>
#include <vector>

namespace qdarwin::info {

inline constexpr double kLn2 = 0.6931471805599453094;

// Aggregate suppression of the object's position coherence,
// Gamma = exp(-t / tau_D) in [0, 1].
//
// Stored as the exponent x = -ln Gamma. Deep-decoherence inputs reach
// t/tau_D ~ 1e7 (bundled sunlight scenario), where Gamma itself underflows
// to zero and fragment powers Gamma^f would lose all f dependence; the
// exponent keeps them exact.
class DecoherenceFactor {
  public:
    // gamma in [0, 1]; values within 1e-12 outside are clamped, the rest throw.
    static DecoherenceFactor from_gamma(double gamma);
    // x = -ln(gamma) >= 0; same 1e-12 clamp below zero.
    static DecoherenceFactor from_exponent(double x);
    // t >= 0 elapsed seconds and tau_d > 0 (tau_d may be +inf: no decoherence).
    static DecoherenceFactor from_time(double t, double tau_d);

    double gamma() const;                    // exp(-x); underflows to 0 for x > ~745
    double exponent() const { return x_; }   // -ln Gamma = t / tau_D
    // Gamma^p = exp(-p x). p == 0 gives 1 even at Gamma == 0.
    double pow(double p) const;

    bool fully_coherent() const { return x_ == 0.0; }
    bool fully_decohered() const;

  private:
    explicit DecoherenceFactor(double x) : x_(x) {}
    double x_;  // in [0, +inf]
};

// Fraction of the environment held by an observer, f in [0, 1].
// Values within 1e-12 outside are clamped; the rest throw.
struct FragmentFraction {
    explicit FragmentFraction(double value);
    double f;
};

enum class Illumination { PointSource, Isotropic };

// Entropy of the object's reduced state once the whole environment is traced
// out: H_S = ln2 - sum_{n>=1} Gamma^n / (2n(2n-1)). Evaluated in closed form
// as the binary entropy of the eigenvalues (1 +- sqrt(Gamma))/2, which is the
// same function; the series route below exists to cross-check that identity.
double branch_entropy(DecoherenceFactor gamma);

// Same quantity by direct Kahan-compensated partial sums of the series.
// Agrees with branch_entropy to < 1e-12 absolute over all of [0, 1].
double branch_entropy_series(DecoherenceFactor gamma);

// Mutual information between the object and a fragment holding fraction f of
// the photons.
//
// Point-source illumination (pure environment):
//   I(f) = H(Gamma^f) + H(Gamma) - H(Gamma^(1-f))
// where H is branch_entropy. Antisymmetric about f = 1/2:
// I(f) + I(1-f) = 2 H(Gamma), and I(1/2) = H(Gamma) exactly.
double mutual_information_point(DecoherenceFactor gamma, double fraction);

// Isotropic illumination (maximally mixed environment): the fragment carries
// no marginal information, only the conditional term survives:
//   I(f) = H(Gamma) - H(Gamma^(1-f)).
// Lacks the classical plateau; I stays near zero until f -> 1.
double mutual_information_isotropic(DecoherenceFactor gamma, double fraction);

// Series-route twins of the two functions above (verification path; never
// collapse these into the closed-form ones).
double mutual_information_point_series(DecoherenceFactor gamma, double fraction);
double mutual_information_isotropic_series(DecoherenceFactor gamma, double fraction);

struct RedundancyResult {
    double f_delta;      // smallest f with I(f) >= (1 - delta) H_S
    double redundancy;   // R_delta = 1 / f_delta
    double asymptotic;   // large-t closed form below; NaN when 2 delta ln2 >= 1
    bool has_plateau;    // a half-environment fragment already supplies (1-delta) ln2
};

// Number of independent fragments that each supply all but a fraction delta
// of the object's entropy, from the exact curve: bisection on f in [0, 1]
// for I_point(f) = (1 - delta) H_S, resolved to |df| < 1e-12.
// Requires 0 < Gamma < 1 (strictly between: both endpoints are degenerate).
RedundancyResult redundancy_exact(DecoherenceFactor gamma, double delta);

// Large-t approximation R ~ (t/tau_D) / ln[1 / (2 delta ln2)], valid for
// t >> tau_D and small delta; requires 2 delta ln2 < 1, i.e. delta < 0.7213.
// Overestimates the exact value by O(1%) at delta = 0.1 and degrades as
// delta grows (the discarded affine term scales with delta).
double redundancy_asymptotic(double t_over_tau, double delta);

struct InfoCurvePoint {
    double fraction;
    double info_nats;
};

// Partial-information curve: I(f) sampled on the given fractions, which must
// be strictly increasing. Rows are evaluated in parallel (see parallel.hpp)
// and the result is independent of the thread count.
struct InfoCurve {
    std::vector<InfoCurvePoint> points;
    double gamma_exponent;  // t / tau_D
    Illumination illumination;
};

InfoCurve info_curve(DecoherenceFactor gamma, Illumination illumination,
                     const std::vector<double>& fractions);

}  // namespace qdarwin::info
