#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "qdarwin/info.hpp"

using namespace qdarwin::info;

namespace {

// References below were computed once with 50-digit arithmetic and frozen.
constexpr double kTol = 4e-15;

DecoherenceFactor dx(double x) { return DecoherenceFactor::from_exponent(x); }
DecoherenceFactor dg(double g) { return DecoherenceFactor::from_gamma(g); }

}  // namespace

TEST_CASE("decoherence factor construction, clamping and powers") {
    CHECK(dg(1.0).exponent() == 0.0);
    CHECK(dg(1.0).gamma() == 1.0);
    CHECK(std::isinf(dg(0.0).exponent()));
    CHECK(dg(0.0).gamma() == 0.0);
    // 1e-12 slack clamps, beyond throws
    CHECK(dg(1.0 + 5e-13).exponent() == 0.0);
    CHECK(dg(-5e-13).gamma() == 0.0);
    CHECK_THROWS_AS((void)dg(1.0 + 1e-11), std::domain_error);
    CHECK_THROWS_AS((void)dg(-1e-11), std::domain_error);
    CHECK_THROWS_AS((void)dx(-1e-11), std::domain_error);
    CHECK_THROWS_AS((void)dg(std::nan("")), std::domain_error);
    CHECK(dx(-5e-13).exponent() == 0.0);

    const auto t = DecoherenceFactor::from_time(3.0, 1.5);
    CHECK(t.exponent() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS((void)DecoherenceFactor::from_time(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)DecoherenceFactor::from_time(1.0, 0.0), std::domain_error);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(DecoherenceFactor::from_time(1.0, inf).exponent() == 0.0);

    // powers survive deep decoherence where gamma underflows
    const auto deep = dx(2e7);
    CHECK(deep.gamma() == 0.0);
    CHECK(deep.pow(0.0) == 1.0);
    CHECK(deep.pow(1e-7) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(dg(0.0).pow(0.0) == 1.0);
    CHECK(dg(0.0).pow(0.5) == 0.0);
}

TEST_CASE("branch entropy matches frozen references") {
    CHECK(branch_entropy(dg(0.25)) ==
          doctest::Approx(0.562335144618808350288).epsilon(kTol));
    CHECK(branch_entropy(dg(0.5)) ==
          doctest::Approx(0.4164955306996874507318).epsilon(kTol));
    CHECK(branch_entropy(dx(1.0)) ==
          doctest::Approx(0.4958422580214430564861).epsilon(kTol));
    CHECK(branch_entropy(dx(4.0)) ==
          doctest::Approx(0.6839611990567596529799).epsilon(kTol));
}

TEST_CASE("entropy endpoints are exact") {
    CHECK(branch_entropy(dg(1.0)) == 0.0);
    CHECK(branch_entropy(dg(0.0)) == kLn2);
    CHECK(branch_entropy_series(dg(1.0)) == 0.0);
    CHECK(branch_entropy_series(dg(0.0)) == kLn2);
}

TEST_CASE("series route agrees with the closed form") {
    // corners where either route could lose digits
    for (double g : {1e-300, 1e-16, 0.1, 0.5, 0.9, 0.99, 0.9999, 1.0 - 1e-6}) {
        CAPTURE(g);
        CHECK(std::abs(branch_entropy(dg(g)) - branch_entropy_series(dg(g))) <
              1e-12);
    }
    std::mt19937_64 rng(0x9d2c5680u);
    std::uniform_real_distribution<double> u(0.0, 1.0 - 1e-6);
    for (int i = 0; i < 2000; ++i) {
        const double g = u(rng);
        const double f = u(rng);
        const auto gamma = dg(g);
        CAPTURE(g);
        CAPTURE(f);
        CHECK(std::abs(branch_entropy(gamma) - branch_entropy_series(gamma)) <
              1e-12);
        CHECK(std::abs(mutual_information_point(gamma, f) -
                       mutual_information_point_series(gamma, f)) < 1e-12);
        CHECK(std::abs(mutual_information_isotropic(gamma, f) -
                       mutual_information_isotropic_series(gamma, f)) < 1e-12);
    }
}

TEST_CASE("mutual information frozen references") {
    CHECK(mutual_information_point(dx(10.0), 0.1) ==
          doctest::Approx(0.4958812640560668665106).epsilon(kTol));
    CHECK(mutual_information_point(dg(0.3), 0.25) ==
          doctest::Approx(0.3139421431077217640796).epsilon(kTol));
    CHECK(mutual_information_isotropic(dx(10.0), 0.5) ==
          doctest::Approx(0.003350066924081131334).epsilon(kTol));
    CHECK(mutual_information_isotropic(dg(0.3), 0.25) ==
          doctest::Approx(0.06066633051303208038591).epsilon(kTol));
}

TEST_CASE("exact identities at special fractions") {
    for (double x : {0.01, 0.3, 1.0, 10.0, 2e7}) {
        const auto g = dx(x);
        const double h = branch_entropy(g);
        // at f = 0 and f = 1 the canceling terms are identical subexpressions,
        // so these hold bitwise; at f = 1/2 the cancellation happens after an
        // intermediate rounding and is only good to a couple of ulps
        CHECK(mutual_information_point(g, 0.0) == 0.0);
        CHECK(std::abs(mutual_information_point(g, 0.5) - h) <= 4e-16);
        CHECK(mutual_information_point(g, 1.0) == 2.0 * h);
        CHECK(mutual_information_isotropic(g, 0.0) == 0.0);
        CHECK(mutual_information_isotropic(g, 1.0) == h);
    }
}

TEST_CASE("antisymmetry, monotonicity and the point-isotropic gap") {
    std::mt19937_64 rng(0x4d595df4u);
    std::uniform_real_distribution<double> ux(1e-4, 50.0);
    std::uniform_real_distribution<double> uf(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const auto g = dx(ux(rng));
        const double f = uf(rng);
        const double h = branch_entropy(g);
        CAPTURE(g.exponent());
        CAPTURE(f);
        CHECK(std::abs(mutual_information_point(g, f) +
                       mutual_information_point(g, 1.0 - f) - 2.0 * h) < 1e-12);
        // the pure-environment curve exceeds the mixed one by exactly the
        // fragment's own branch entropy
        CHECK(std::abs(mutual_information_point(g, f) -
                       mutual_information_isotropic(g, f) -
                       branch_entropy(dx(f * g.exponent()))) < 5e-15);
        CHECK(mutual_information_isotropic(g, f) <=
              mutual_information_point(g, f) + 1e-15);
    }
    for (double x : {0.3, 3.0, 30.0}) {
        std::vector<double> fr;
        for (int i = 0; i <= 100; ++i) fr.push_back(i / 100.0);
        for (auto ill : {Illumination::PointSource, Illumination::Isotropic}) {
            const auto curve = info_curve(dx(x), ill, fr);
            for (std::size_t i = 0; i + 1 < curve.points.size(); ++i)
                CHECK(curve.points[i + 1].info_nats >=
                      curve.points[i].info_nats - 1e-13);
        }
    }
}

TEST_CASE("redundancy matches frozen references") {
    const auto r1 = redundancy_exact(dx(100.0), 0.1);
    CHECK(r1.f_delta == doctest::Approx(0.019995549788084212).epsilon(1e-9));
    CHECK(r1.redundancy == doctest::Approx(50.0111280058886903).epsilon(1e-10));
    CHECK(r1.asymptotic == doctest::Approx(50.6085466951505728).epsilon(1e-14));
    CHECK(r1.has_plateau);
    CHECK(r1.redundancy * r1.f_delta == doctest::Approx(1.0).epsilon(1e-14));

    const auto r2 = redundancy_exact(dx(100.0), 0.25);
    CHECK(r2.redundancy == doctest::Approx(89.2264136244499363).epsilon(1e-10));
    CHECK(r2.asymptotic == doctest::Approx(94.3698832222393123).epsilon(1e-14));

    const auto r3 = redundancy_exact(dx(100.0), 0.01);
    CHECK(r3.redundancy == doctest::Approx(23.3598399979360392).epsilon(1e-10));

    // barely decohered: far from a full bit, no plateau; in the weak limit
    // the curve flattens to I = 2 f H, so f_delta -> (1 - delta)/2
    const auto r4 = redundancy_exact(dx(0.01), 0.1);
    CHECK_FALSE(r4.has_plateau);
    CHECK(r4.redundancy == doctest::Approx(2.0 / 0.9).epsilon(0.01));

    // the bisection target is actually hit
    const double target = (1.0 - 0.1) * branch_entropy(dx(100.0));
    CHECK(std::abs(mutual_information_point(dx(100.0), r1.f_delta) - target) <
          1e-9);
}

TEST_CASE("asymptotic redundancy formula and its domain") {
    CHECK(redundancy_asymptotic(100.0, 0.1) ==
          doctest::Approx(100.0 / 1.975950833015764701613).epsilon(1e-15));
    CHECK(redundancy_asymptotic(100.0, 0.01) ==
          doctest::Approx(100.0 / 4.278535926009810385631).epsilon(1e-15));
    CHECK(redundancy_asymptotic(0.0, 0.1) == 0.0);
    CHECK_THROWS_AS((void)redundancy_asymptotic(-1.0, 0.1), std::domain_error);
    CHECK_THROWS_AS((void)redundancy_asymptotic(10.0, 0.0), std::domain_error);
    // defined up to 2 delta ln2 = 1, i.e. delta ~ 0.7213
    CHECK(redundancy_asymptotic(10.0, 0.70) > 0.0);
    CHECK_THROWS_AS((void)redundancy_asymptotic(10.0, 0.73), std::domain_error);
    const auto r = redundancy_exact(dx(100.0), 0.8);
    CHECK(std::isnan(r.asymptotic));
}

TEST_CASE("redundancy domain errors") {
    CHECK_THROWS_AS((void)redundancy_exact(dx(0.0), 0.1), std::domain_error);
    CHECK_THROWS_AS((void)redundancy_exact(dg(0.0), 0.1), std::domain_error);
    CHECK_THROWS_AS((void)redundancy_exact(dx(1.0), 0.0), std::domain_error);
    CHECK_THROWS_AS((void)redundancy_exact(dx(1.0), 1.0), std::domain_error);
    CHECK_THROWS_AS((void)mutual_information_point(dx(1.0), 1.1), std::domain_error);
    CHECK_THROWS_AS((void)mutual_information_point(dx(1.0), -0.1), std::domain_error);
}

TEST_CASE("curve evaluation is independent of the thread count") {
    std::vector<double> fr;
    for (int i = 0; i <= 200; ++i) fr.push_back(i / 200.0);
    setenv("QDARWIN_THREADS", "1", 1);
    const auto serial = info_curve(dx(5.0), Illumination::PointSource, fr);
    setenv("QDARWIN_THREADS", "7", 1);
    const auto parallel = info_curve(dx(5.0), Illumination::PointSource, fr);
    unsetenv("QDARWIN_THREADS");
    REQUIRE(serial.points.size() == parallel.points.size());
    for (std::size_t i = 0; i < serial.points.size(); ++i)
        CHECK(serial.points[i].info_nats == parallel.points[i].info_nats);
    CHECK_THROWS_AS(
        (void)info_curve(dx(1.0), Illumination::PointSource, {0.5, 0.5}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)info_curve(dx(1.0), Illumination::PointSource, {0.2, 1.2}),
        std::domain_error);
}

TEST_CASE("deep decoherence keeps full fragment resolution") {
    // t/tau ~ 2e7 as in the bundled sunlight scenario: Gamma underflows but
    // the fragment dependence must survive in the exponent
    const auto g = dx(2e7);
    CHECK(branch_entropy(g) == kLn2);
    CHECK(mutual_information_point(g, 0.5) == kLn2);
    const auto r = redundancy_exact(g, 0.1);
    CHECK(r.f_delta > 0.0);
    CHECK(r.f_delta < 1e-6);
    CHECK(r.redundancy > 1e6);
    CHECK(std::isfinite(r.redundancy));
}
