#include "qdarwin/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "qdarwin/info.hpp"

namespace qdarwin::oracle {
namespace {

using cd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Qubit layout of the pure model: photon j is bit j, the object is bit N.

std::vector<int> mask_bits(std::uint32_t mask) {
    std::vector<int> bits;
    for (int j = 0; mask >> j; ++j)
        if ((mask >> j) & 1u) bits.push_back(j);
    return bits;
}

std::uint32_t gather_bits(std::uint32_t idx, const std::vector<int>& bits) {
    std::uint32_t out = 0;
    for (std::size_t k = 0; k < bits.size(); ++k)
        out |= ((idx >> bits[k]) & 1u) << k;
    return out;
}

std::vector<double> sorted_desc(Eigen::VectorXd v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

std::vector<double> spectrum_of(const Mat& rho) {
    Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
    return sorted_desc(es.eigenvalues());
}

// Schmidt spectrum of the cut (bits in `mask`) vs (the rest) of a pure state
// on n_qubits. rho_A = M M^dagger for the amplitude matrix M[a, b]; the
// smaller side is diagonalized, which caps the dense work at 2^ceil(n/2).
std::vector<double> cut_spectrum(const Vec& psi, int n_qubits, std::uint32_t mask) {
    const std::uint32_t full = (n_qubits == 32) ? ~0u : ((1u << n_qubits) - 1u);
    const auto a_bits = mask_bits(mask & full);
    const auto b_bits = mask_bits(full & ~mask);
    const bool swap_sides = a_bits.size() > b_bits.size();
    const auto& rows = swap_sides ? b_bits : a_bits;
    const auto& cols = swap_sides ? a_bits : b_bits;
    Mat m = Mat::Zero(std::int64_t{1} << rows.size(), std::int64_t{1} << cols.size());
    for (std::uint32_t idx = 0; idx <= full; ++idx)
        m(gather_bits(idx, rows), gather_bits(idx, cols)) += psi[idx];
    return spectrum_of(m * m.adjoint());
}

// rho' = Tr_traced(rho) keeping the qubits in `keep` (ascending positions of
// a 2^n density matrix).
Mat partial_trace(const Mat& rho, int n_qubits, const std::vector<int>& keep) {
    std::uint32_t keep_mask = 0;
    for (int b : keep) keep_mask |= 1u << b;
    const auto trace_bits = mask_bits(((1u << n_qubits) - 1u) & ~keep_mask);
    const std::int64_t dk = std::int64_t{1} << keep.size();
    const std::int64_t dt = std::int64_t{1} << trace_bits.size();
    const auto scatter = [](std::uint32_t compact, const std::vector<int>& bits) {
        std::uint32_t out = 0;
        for (std::size_t k = 0; k < bits.size(); ++k)
            out |= ((compact >> k) & 1u) << bits[k];
        return out;
    };
    Mat out = Mat::Zero(dk, dk);
    for (std::int64_t a = 0; a < dk; ++a)
        for (std::int64_t b = 0; b < dk; ++b) {
            const std::uint32_t ia = scatter(static_cast<std::uint32_t>(a), keep);
            const std::uint32_t ib = scatter(static_cast<std::uint32_t>(b), keep);
            cd acc = 0.0;
            for (std::int64_t t = 0; t < dt; ++t) {
                const std::uint32_t it = scatter(static_cast<std::uint32_t>(t), trace_bits);
                acc += rho(ia | it, ib | it);
            }
            out(a, b) = acc;
        }
    return out;
}

// Integer power by repeated multiplication: exact for p == 0 even at z == 0,
// where std::pow(complex) would produce NaN via exp(0 * log 0).
cd ipow(cd z, int p) {
    cd out = 1.0;
    for (int i = 0; i < p; ++i) out *= z;
    return out;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat kron_power(const Mat& a, int n) {
    Mat out = Mat::Identity(1, 1);
    for (int i = 0; i < n; ++i) out = kron(out, a);
    return out;
}

void check_model(const OracleModel& m) {
    const int cap = m.env_mixedness == EnvMixedness::PureDirectional
                        ? kMaxPhotonsPure
                        : kMaxPhotonsMixed;
    if (m.n_photons < 1 || m.n_photons > cap)
        throw std::length_error("photon count outside the tractable range");
    if (!(m.per_photon_gamma >= 0.0 && m.per_photon_gamma <= 1.0))
        throw std::domain_error("per-photon gamma must lie in [0, 1]");
}

// (|x1>|e1>^N + |x2>|e2>^N)/sqrt2 as 2^(N+1) amplitudes.
Vec point_source_state(const OracleModel& m) {
    const int n = m.n_photons;
    const cd e1[2] = {1.0, 0.0};
    const cd e2[2] = {std::polar(std::sqrt(m.per_photon_gamma), m.record_phase),
                      std::sqrt(1.0 - m.per_photon_gamma)};
    const double root_half = std::sqrt(0.5);
    Vec psi = Vec::Zero(std::int64_t{1} << (n + 1));
    for (std::uint32_t b = 0; b < (1u << n); ++b) {
        cd a1 = root_half;
        cd a2 = root_half;
        for (int j = 0; j < n; ++j) {
            a1 *= e1[(b >> j) & 1u];
            a2 *= e2[(b >> j) & 1u];
        }
        psi[b] += a1;
        psi[(std::int64_t{1} << n) + b] += a2;
    }
    return psi;
}

// Branch unitary of the mixed model: rotation by 2 acos(sqrt(g)) about the
// Bloch axis (axis_polar, axis_azimuth), so tr(U)/2 = sqrt(g) for any axis.
Mat branch_unitary(const OracleModel& m) {
    const double half_angle = std::acos(std::clamp(
        std::sqrt(m.per_photon_gamma), 0.0, 1.0));
    const double nx = std::sin(m.axis_polar) * std::cos(m.axis_azimuth);
    const double ny = std::sin(m.axis_polar) * std::sin(m.axis_azimuth);
    const double nz = std::cos(m.axis_polar);
    const cd i(0.0, 1.0);
    Mat sigma(2, 2);
    sigma << nz, nx - i * ny, nx + i * ny, -nz;
    return std::cos(half_angle) * Mat::Identity(2, 2) -
           i * std::sin(half_angle) * sigma;
}

// Joint state of the object and the photons in the fragment, mixed model.
// Photons start at I/2 and branch q applies U_q to each, so the environment
// enters only through W_pq = U_p (I/2) U_q^dagger per photon, and tracing a
// photon out contributes tr W_pq. Object bit is the block index.
Mat isotropic_joint(const OracleModel& m, int fragment_size) {
    const Mat u2 = branch_unitary(m);
    const Mat w11 = 0.5 * Mat::Identity(2, 2);
    const Mat w12 = 0.5 * u2.adjoint();
    const Mat w22 = 0.5 * (u2 * u2.adjoint());
    const cd c12 = w12.trace();
    const int rest = m.n_photons - fragment_size;
    const std::int64_t dim = std::int64_t{1} << fragment_size;
    Mat rho(2 * dim, 2 * dim);
    rho.block(0, 0, dim, dim) = 0.5 * kron_power(w11, fragment_size);
    rho.block(dim, dim, dim, dim) = 0.5 * kron_power(w22, fragment_size);
    const Mat cross = 0.5 * ipow(c12, rest) * kron_power(w12, fragment_size);
    rho.block(0, dim, dim, dim) = cross;
    rho.block(dim, 0, dim, dim) = cross.adjoint();
    return rho;
}

// Object state when only `n_scatterers` photons have interacted, built as an
// explicit 2x2: off-diagonal = overlap of the two environment records.
Mat decohered_object_state(const OracleModel& m, int n_scatterers) {
    cd overlap;
    if (m.env_mixedness == EnvMixedness::PureDirectional) {
        const cd e1e2 = std::polar(std::sqrt(m.per_photon_gamma), m.record_phase);
        overlap = ipow(std::conj(e1e2), n_scatterers);
    } else {
        overlap = ipow(branch_unitary(m).adjoint().trace() / 2.0, n_scatterers);
    }
    Mat rho(2, 2);
    rho << 0.5, 0.5 * overlap, 0.5 * std::conj(overlap), 0.5;
    return rho;
}

FragmentEntropies entropies_pure(const OracleModel& m, std::uint32_t photon_mask) {
    const int n = m.n_photons;
    const Vec psi = point_source_state(m);
    const std::uint32_t sys = 1u << n;

    FragmentEntropies fe;
    fe.fragment_size = std::popcount(photon_mask);
    fe.fragment_eigenvalues = cut_spectrum(psi, n + 1, photon_mask);
    fe.h_system = entropy_from_eigenvalues(cut_spectrum(psi, n + 1, sys));
    fe.h_fragment = entropy_from_eigenvalues(fe.fragment_eigenvalues);
    fe.h_joint = entropy_from_eigenvalues(cut_spectrum(psi, n + 1, photon_mask | sys));
    fe.mi_subadditivity = fe.h_system + fe.h_fragment - fe.h_joint;
    // Initially the photons are a pure product, so the fragment brings zero
    // entropy of its own and the first bracket is H_F - 0.
    const double h_sde = entropy_from_eigenvalues(
        spectrum_of(decohered_object_state(m, n)));
    const double h_sde_rest = entropy_from_eigenvalues(
        spectrum_of(decohered_object_state(m, n - fe.fragment_size)));
    fe.mi_decomposition = fe.h_fragment + (h_sde - h_sde_rest);
    return fe;
}

FragmentEntropies entropies_mixed_contiguous(const OracleModel& m, int fragment_size) {
    const Mat rho_sf = isotropic_joint(m, fragment_size);
    const int qubits = fragment_size + 1;  // object is the top bit
    std::vector<int> photon_bits(fragment_size);
    for (int j = 0; j < fragment_size; ++j) photon_bits[j] = j;

    FragmentEntropies fe;
    fe.fragment_size = fragment_size;
    const Mat rho_f = partial_trace(rho_sf, qubits, photon_bits);
    const Mat rho_s = partial_trace(rho_sf, qubits, {fragment_size});
    fe.fragment_eigenvalues = spectrum_of(rho_f);
    fe.h_system = entropy_from_eigenvalues(spectrum_of(rho_s));
    fe.h_fragment = entropy_from_eigenvalues(fe.fragment_eigenvalues);
    fe.h_joint = entropy_from_eigenvalues(spectrum_of(rho_sf));
    fe.mi_subadditivity = fe.h_system + fe.h_fragment - fe.h_joint;
    // Here the fragment starts maximally mixed: H_F^0 = m ln2, evaluated from
    // the explicit initial state rather than assumed.
    const double h_f0 = entropy_from_eigenvalues(
        spectrum_of(kron_power(0.5 * Mat::Identity(2, 2), fragment_size)));
    const double h_sde = entropy_from_eigenvalues(
        spectrum_of(decohered_object_state(m, m.n_photons)));
    const double h_sde_rest = entropy_from_eigenvalues(
        spectrum_of(decohered_object_state(m, m.n_photons - fragment_size)));
    fe.mi_decomposition = (fe.h_fragment - h_f0) + (h_sde - h_sde_rest);
    return fe;
}

// Mask route for the mixed model: build the full object+N-photon density
// matrix and trace honestly. Exponential in N; the contiguous route above
// stays the production path.
FragmentEntropies entropies_mixed_mask(const OracleModel& m, std::uint32_t photon_mask) {
    const int n = m.n_photons;
    const Mat rho_all = isotropic_joint(m, n);
    const int qubits = n + 1;
    const auto photons = mask_bits(photon_mask);

    FragmentEntropies fe;
    fe.fragment_size = static_cast<int>(photons.size());
    auto with_sys = photons;
    with_sys.push_back(n);
    const Mat rho_sf = partial_trace(rho_all, qubits, with_sys);
    const Mat rho_f = partial_trace(rho_all, qubits, photons);
    const Mat rho_s = partial_trace(rho_all, qubits, {n});
    fe.fragment_eigenvalues = spectrum_of(rho_f);
    fe.h_system = entropy_from_eigenvalues(spectrum_of(rho_s));
    fe.h_fragment = entropy_from_eigenvalues(fe.fragment_eigenvalues);
    fe.h_joint = entropy_from_eigenvalues(spectrum_of(rho_sf));
    fe.mi_subadditivity = fe.h_system + fe.h_fragment - fe.h_joint;
    const double h_f0 = entropy_from_eigenvalues(spectrum_of(
        kron_power(0.5 * Mat::Identity(2, 2), fe.fragment_size)));
    const double h_sde = entropy_from_eigenvalues(
        spectrum_of(decohered_object_state(m, n)));
    const double h_sde_rest = entropy_from_eigenvalues(
        spectrum_of(decohered_object_state(m, n - fe.fragment_size)));
    fe.mi_decomposition = (fe.h_fragment - h_f0) + (h_sde - h_sde_rest);
    return fe;
}

}  // namespace

OracleModel point_source_model(int n_photons, double gamma, double record_phase) {
    OracleModel m;
    m.n_photons = n_photons;
    m.per_photon_gamma = gamma;
    m.env_mixedness = EnvMixedness::PureDirectional;
    m.record_dimension = 2;
    m.record_phase = record_phase;
    m.axis_polar = 0.0;
    m.axis_azimuth = 0.0;
    check_model(m);
    return m;
}

OracleModel isotropic_model(int n_photons, double gamma, double axis_polar,
                            double axis_azimuth) {
    OracleModel m;
    m.n_photons = n_photons;
    m.per_photon_gamma = gamma;
    m.env_mixedness = EnvMixedness::MaximallyMixed;
    m.record_dimension = 2;
    m.record_phase = 0.0;
    m.axis_polar = axis_polar;
    m.axis_azimuth = axis_azimuth;
    check_model(m);
    return m;
}

double entropy_from_eigenvalues(const std::vector<double>& eigenvalues) {
    double h = 0.0;
    for (double lam : eigenvalues)
        if (lam > 1e-14) h -= lam * std::log(lam);
    return h;
}

FragmentEntropies fragment_entropies(const OracleModel& m, int fragment_size) {
    check_model(m);
    if (fragment_size < 0 || fragment_size > m.n_photons)
        throw std::out_of_range("fragment size outside [0, n_photons]");
    if (m.env_mixedness == EnvMixedness::PureDirectional)
        return entropies_pure(m, (1u << fragment_size) - 1u);
    return entropies_mixed_contiguous(m, fragment_size);
}

FragmentEntropies fragment_entropies_mask(const OracleModel& m,
                                          std::uint32_t photon_mask) {
    check_model(m);
    if (photon_mask >> m.n_photons)
        throw std::out_of_range("photon mask selects nonexistent photons");
    if (m.env_mixedness == EnvMixedness::PureDirectional)
        return entropies_pure(m, photon_mask);
    return entropies_mixed_mask(m, photon_mask);
}

double decoherence_suppression(const OracleModel& m) {
    check_model(m);
    Mat rho_s(2, 2);
    if (m.env_mixedness == EnvMixedness::PureDirectional) {
        const Vec psi = point_source_state(m);
        const int n = m.n_photons;
        // Trace the photons out explicitly: rho_S[s,s'] = sum_b psi psi*.
        rho_s.setZero();
        for (std::uint32_t b = 0; b < (1u << n); ++b)
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t)
                    rho_s(s, t) += psi[(std::int64_t{s} << n) + b] *
                                   std::conj(psi[(std::int64_t{t} << n) + b]);
    } else {
        rho_s = partial_trace(isotropic_joint(m, m.n_photons), m.n_photons + 1,
                              {m.n_photons});
    }
    return std::abs(rho_s(0, 1)) / 0.5;
}

SpectrumReport spectrum_report(const OracleModel& m) {
    check_model(m);
    SpectrumReport r;
    r.model = m;
    for (int size = 0; size <= m.n_photons; ++size)
        r.fragments.push_back(fragment_entropies(m, size));
    return r;
}

std::string spectrum_report_to_json(const SpectrumReport& r) {
    nlohmann::json j;
    j["model"] = {
        {"n_photons", r.model.n_photons},
        {"per_photon_gamma", r.model.per_photon_gamma},
        {"env_mixedness", r.model.env_mixedness == EnvMixedness::PureDirectional
                              ? "pure_directional"
                              : "maximally_mixed"},
        {"record_dimension", r.model.record_dimension},
    };
    auto& frags = j["fragments"] = nlohmann::json::array();
    for (const auto& fe : r.fragments) {
        frags.push_back({
            {"fragment_size", fe.fragment_size},
            {"h_system", fe.h_system},
            {"h_fragment", fe.h_fragment},
            {"h_joint", fe.h_joint},
            {"mi_subadditivity", fe.mi_subadditivity},
            {"mi_decomposition", fe.mi_decomposition},
            {"fragment_eigenvalues", fe.fragment_eigenvalues},
        });
    }
    return j.dump(2) + "\n";
}

SuiteReport run_oracle_suite(int max_n_pure, int max_n_mixed,
                             const std::vector<double>& gammas) {
    SuiteReport rep{0.0, 0.0, 0.0, 0.0, 0.0, 0};
    const auto track = [](double& worst, double dev) {
        worst = std::max(worst, std::abs(dev));
    };
    for (double g : gammas) {
        for (int n = 1; n <= max_n_pure; ++n) {
            const auto model = point_source_model(n, g);
            const auto gamma_n = info::DecoherenceFactor::from_gamma(std::pow(g, n));
            for (int size = 0; size <= n; ++size) {
                const auto fe = fragment_entropies(model, size);
                const double f = static_cast<double>(size) / n;
                track(rep.worst_point_mi,
                      fe.mi_subadditivity -
                          info::mutual_information_point(gamma_n, f));
                track(rep.worst_route_gap,
                      fe.mi_subadditivity - fe.mi_decomposition);
                // Expected spectrum: (1 +- g^(m/2))/2, all others zero.
                const double big = std::pow(g, 0.5 * size);
                std::vector<double> expected(fe.fragment_eigenvalues.size(), 0.0);
                expected[0] = 0.5 * (1.0 + big);
                if (expected.size() > 1) expected[1] = 0.5 * (1.0 - big);
                for (std::size_t k = 0; k < expected.size(); ++k)
                    track(rep.worst_spectrum_gap,
                          fe.fragment_eigenvalues[k] - expected[k]);
                ++rep.cases;
            }
            track(rep.worst_suppression_gap,
                  decoherence_suppression(model) - std::pow(g, 0.5 * n));
        }
        for (int n = 1; n <= max_n_mixed; ++n) {
            const auto model = isotropic_model(n, g);
            const auto gamma_n = info::DecoherenceFactor::from_gamma(std::pow(g, n));
            for (int size = 0; size <= n; ++size) {
                const auto fe = fragment_entropies(model, size);
                const double f = static_cast<double>(size) / n;
                track(rep.worst_iso_mi,
                      fe.mi_subadditivity -
                          info::mutual_information_isotropic(gamma_n, f));
                track(rep.worst_route_gap,
                      fe.mi_subadditivity - fe.mi_decomposition);
                // Fragment marginal must stay maximally mixed.
                for (double lam : fe.fragment_eigenvalues)
                    track(rep.worst_spectrum_gap,
                          lam - std::ldexp(1.0, -fe.fragment_size));
                ++rep.cases;
            }
            track(rep.worst_suppression_gap,
                  decoherence_suppression(model) - std::pow(g, 0.5 * n));
        }
    }
    return rep;
}

}  // namespace qdarwin::oracle
