#pragma once

// Brute-force finite-N oracle: builds the joint object-photon state as an
// explicit vector or density matrix and extracts every entropy by dense
// eigendecomposition. No formula from info.hpp is reused here; this module
// is the independent route the closed forms are validated against.
//
// Model: object at one of two sites, N environment qubits ("photons"), each
// carrying overlap |<e1|e2>|^2 = gamma_1 between its two conditional states.
// A fragment is any subset of the photons.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace qdarwin::oracle {

inline constexpr int kMaxPhotonsPure = 14;   // statevector of 2^(N+1) amplitudes
inline constexpr int kMaxPhotonsMixed = 10;  // density matrix of 4^(m+1) entries

enum class EnvMixedness { PureDirectional, MaximallyMixed };

struct OracleModel {
    int n_photons;
    double per_photon_gamma;  // |<e1|e2>|^2 in [0, 1]
    EnvMixedness env_mixedness;
    int record_dimension;  // Hilbert dimension of one photon's record (2 here)
    // Construction knobs, used by robustness tests; the entropies must not
    // depend on them.
    double record_phase;   // arg <e1|e2> (pure model)
    double axis_polar;     // rotation axis of the conditional unitary (mixed)
    double axis_azimuth;
};

// Pure model: |Psi> = (|x1>|e1>^N + |x2>|e2>^N) / sqrt2 with
// |e1> = (1, 0), |e2> = (sqrt(g) e^{i phase}, sqrt(1-g)).
OracleModel point_source_model(int n_photons, double gamma,
                               double record_phase = 0.0);

// Mixed model: photons start maximally mixed; conditional on the object's
// site every photon is rotated by angle 2*acos(sqrt(g)) about the given
// Bloch axis, so each still carries branch overlap of magnitude sqrt(g).
OracleModel isotropic_model(int n_photons, double gamma,
                            double axis_polar = 0.0, double axis_azimuth = 0.0);

struct FragmentEntropies {
    int fragment_size;
    double h_system;    // H(S)
    double h_fragment;  // H(F)
    double h_joint;     // H(SF)
    // I(S:F) by the two independent routes (must agree):
    double mi_subadditivity;   // H(S) + H(F) - H(SF)
    double mi_decomposition;   // [H(F) - H(F_0)] + [H(S|dec E) - H(S|dec E\F)]
    // Spectrum of the fragment's reduced state, descending. Pure model: the
    // nonzero part lives on min(2^m, 2^(N-m+1)) entries (smaller bipartition
    // side); expected {(1 + g^(m/2))/2, (1 - g^(m/2))/2, 0, ...}. Mixed
    // model: all 2^m entries, expected uniform 2^-m.
    std::vector<double> fragment_eigenvalues;
};

// Entropies for the fragment made of the first `fragment_size` photons.
FragmentEntropies fragment_entropies(const OracleModel& m, int fragment_size);

// Same, for an arbitrary photon subset (bit j of `photon_mask` selects photon
// j). Entropies must agree with fragment_entropies of equal popcount.
FragmentEntropies fragment_entropies_mask(const OracleModel& m,
                                          std::uint32_t photon_mask);

// |off-diagonal of rho_S| / initial value = gamma^(N/2), extracted from the
// explicitly traced-out object state.
double decoherence_suppression(const OracleModel& m);

struct SpectrumReport {
    OracleModel model;
    std::vector<FragmentEntropies> fragments;  // m = 0 .. N
};

SpectrumReport spectrum_report(const OracleModel& m);
std::string spectrum_report_to_json(const SpectrumReport& r);

// Shannon entropy of an eigenvalue list in nats; values below 1e-14 are
// treated as exact zeros.
double entropy_from_eigenvalues(const std::vector<double>& eigenvalues);

// Worst absolute deviations between the oracle and the closed forms from
// info.hpp, swept over photon numbers and a gamma grid. Dual route: nothing
// here shares code with the formulas it checks.
struct SuiteReport {
    double worst_point_mi;        // oracle MI vs closed-form point-source MI
    double worst_iso_mi;          // oracle MI vs closed-form isotropic MI
    double worst_route_gap;       // subadditivity route vs decomposition route
    double worst_spectrum_gap;    // fragment spectrum vs its analytic law
    double worst_suppression_gap; // off-diagonal decay vs gamma^(N/2)
    long cases;
};
SuiteReport run_oracle_suite(int max_n_pure, int max_n_mixed,
                             const std::vector<double>& gammas);

}  // namespace qdarwin::oracle
