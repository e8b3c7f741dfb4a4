#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "zeno/core.hpp"
#include "zeno/models.hpp"

using namespace zeno;
using models::build_model;
using models::ModelSpec;

namespace {

constexpr double kPi = 3.14159265358979323846;

double nonherm_survival(double omega, double k, double t) {
    const Complex s = std::sqrt(Complex(k * k - omega * omega, 0.0));
    const Complex r = k / s;
    const Complex amp = 0.5 * (1.0 + r) * std::exp(-(k - s) * t) +
                        0.5 * (1.0 - r) * std::exp(-(k + s) * t);
    return std::norm(amp);
}

}  // namespace

TEST_CASE("peres3 is the printed three-level matrix") {
    auto pair = build_model({"peres3", {{"omega", 1.0}, {"k", 3.0}}});
    CMatrix expected(3, 3);
    expected(0, 1) = expected(1, 0) = 1.0;
    expected(1, 2) = expected(2, 1) = 3.0;
    CHECK(max_abs(pair.total() - expected) == 0.0);
    CHECK(pair.labels == std::vector<std::string>{"|1>", "|2>", "|3>"});
}

TEST_CASE("nonherm at K=0 reduces to the bare Rabi system") {
    auto pair = build_model({"nonherm", {{"omega", 1.0}, {"k", 0.0}}});
    CMatrix rabi(2, 2);
    rabi(0, 1) = rabi(1, 0) = 1.0;
    CHECK(max_abs(pair.total() - rabi) == 0.0);
    CHECK_FALSE(pair.hermitian_meas);
}

TEST_CASE("fourlevel matches the printed chain in both readings") {
    CMatrix expected(4, 4);
    expected(0, 1) = expected(1, 0) = 1.0;
    expected(1, 2) = expected(2, 1) = 2.0;
    expected(2, 3) = expected(3, 2) = 5.0;

    auto r1 = build_model({"fourlevel", {{"omega", 1.0}, {"k", 2.0}, {"kprime", 5.0}}});
    CHECK(max_abs(r1.total() - expected) == 0.0);
    CHECK(r1.k == 2.0);

    auto r2 = build_model(
        {"fourlevel", {{"omega", 1.0}, {"k", 2.0}, {"kprime", 5.0}, {"reading", 2.0}}});
    CHECK(max_abs(r2.total() - expected) == 0.0);
    CHECK(r2.k == 5.0);
    // the measurement part differs between readings
    CHECK(max_abs(r1.h_meas - r2.h_meas) > 0.5);
}

TEST_CASE("cavity measurement Hamiltonian: damping and printed N=1 block") {
    auto pair = build_model({"cavity", {{"g", 1.0}, {"kappa", 1.0}, {"nmax", 2.0}}});
    CHECK(pair.dim == 27);
    CHECK_FALSE(pair.hermitian_meas);

    // diagonal damping -i kappa n on photon-occupied states
    for (std::size_t j1 = 0; j1 < 3; ++j1)
        for (std::size_t j2 = 0; j2 < 3; ++j2)
            for (std::size_t n = 0; n <= 2; ++n) {
                const std::size_t idx = (j1 * 3 + j2) * 3 + n;
                CHECK(std::abs(pair.h_meas(idx, idx) - Complex(0.0, -double(n))) < 1e-15);
            }

    // the printed 8x8 restriction to N=1, basis
    // {|020>,|002>,|100>,|110>,|101>,|021>,|012>,|111>}
    auto label_index = [&](const std::string& label) {
        for (std::size_t i = 0; i < pair.labels.size(); ++i)
            if (pair.labels[i] == label) return i;
        return pair.labels.size();
    };
    const std::vector<std::string> n1 = {"|020>", "|002>", "|100>", "|110>",
                                         "|101>", "|021>", "|012>", "|111>"};
    std::vector<std::size_t> idx;
    for (const auto& label : n1) {
        const std::size_t i = label_index(label);
        REQUIRE(i < pair.dim);
        idx.push_back(i);
    }
    const CMatrix block = submatrix(pair.h_meas, idx, idx);

    CMatrix printed(8, 8);
    const Complex ig(0.0, 1.0), mik(0.0, -1.0);
    printed(0, 3) = ig;
    printed(1, 4) = ig;
    printed(2, 2) = mik;
    printed(3, 0) = -ig;
    printed(3, 3) = mik;
    printed(4, 1) = -ig;
    printed(4, 4) = mik;
    printed(5, 7) = ig;
    printed(6, 7) = ig;
    printed(7, 5) = -ig;
    printed(7, 6) = -ig;
    printed(7, 7) = mik;
    CHECK(max_abs(block - printed) < 1e-15);
}

TEST_CASE("model validation errors") {
    CHECK_THROWS_AS(build_model({"no_such_model", {}}), models::ModelError);
    CHECK_THROWS_AS(build_model({"peres3", {{"omega", 1.0}}}), models::ModelError);  // missing k
    CHECK_THROWS_AS(build_model({"peres3", {{"omega", 1.0}, {"k", 1.0}, {"zz", 1.0}}}),
                    models::ModelError);
    CHECK_THROWS_AS(build_model({"cavity", {{"g", 1.0}, {"kappa", -1.0}, {"nmax", 2.0}}}),
                    models::ModelError);
    CHECK_THROWS_AS(build_model({"cavity", {{"g", 1.0}, {"kappa", 1.0}, {"nmax", 0.0}}}),
                    models::ModelError);
    CHECK_THROWS_AS(models::dilate_flat_continuum(1.0, 2.0, 40.0, 1), models::ModelError);
    CHECK_THROWS_AS(models::dilate_flat_continuum(1.0, -2.0, 40.0, 100), models::ModelError);
}

TEST_CASE("flat continuum: coupling formula and hermiticity") {
    // M=2, W=1: domega = 2, so g = sqrt(2K/pi * 2) = sqrt(2) at K = pi/2
    auto pair = models::dilate_flat_continuum(1.0, kPi / 2.0, 1.0, 2);
    CHECK(std::abs(pair.k * pair.h_meas(1, 2) - Complex(std::sqrt(2.0), 0.0)) < 1e-14);
    CHECK(is_hermitian(pair.total(), 1e-12));
    CHECK(pair.dim == 4);
    CHECK(pair.h_sys(2, 2).real() == doctest::Approx(-1.0));
    CHECK(pair.h_sys(3, 3).real() == doctest::Approx(1.0));
}

TEST_CASE("flat continuum defaults resolve the decay line") {
    // W = 20 max(omega, k), domega = (omega^2/k)/20
    auto pair = build_model({"flat_continuum", {{"omega", 1.0}, {"k", 1.0}}});
    CHECK(pair.dim == 2 + 801);
    CHECK(pair.h_sys(2, 2).real() == doctest::Approx(-20.0));
    CHECK(pair.h_sys(2 + 800, 2 + 800).real() == doctest::Approx(20.0));
}

TEST_CASE("every Hermitian-flagged model passes the hermiticity check") {
    const std::vector<ModelSpec> specs = {
        {"rabi2", {{"omega", 0.7}}},
        {"peres3", {{"omega", 0.3}, {"k", 11.0}}},
        {"fourlevel", {{"omega", 1.1}, {"k", 4.0}, {"kprime", 9.0}}},
        {"twoqubit", {{"omega", 2.0}, {"k", 5.0}, {"eta1", 0.4}, {"eta2", 1.9}}},
        {"twoqubit_peres", {{"omega", 1.0}, {"k", 2.0}}},
        {"twoqubit_peres_fixed", {{"omega", 1.0}, {"k", 2.0}}},
        {"flat_continuum", {{"omega", 1.0}, {"k", 2.0}, {"w", 10.0}, {"m", 41.0}}},
    };
    for (const auto& spec : specs) {
        auto pair = build_model(spec);
        CHECK(pair.hermitian_sys);
        CHECK(pair.hermitian_meas);
        CHECK(is_hermitian(pair.total(), 1e-12));
    }
}

TEST_CASE("peres3 equals twoqubit_peres under the basis identification") {
    // |1> = |00>, |2> = |10>, |3> = |11>, idle |4> = |01>
    auto three = build_model({"peres3", {{"omega", 0.9}, {"k", 4.5}}});
    auto prod = build_model({"twoqubit_peres", {{"omega", 0.9}, {"k", 4.5}}});
    const CMatrix t3 = three.total();
    const CMatrix t4 = prod.total();
    const std::vector<std::size_t> map = {0, 2, 3};  // |00>, |10>, |11>
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(std::abs(t4(map[i], map[j]) - t3(i, j)) <= 1e-15);
    for (std::size_t i = 0; i < 4; ++i) {
        if (i != 1) {
            CHECK(std::abs(t4(1, i)) == 0.0);
            CHECK(std::abs(t4(i, 1)) == 0.0);
        }
    }
}

TEST_CASE("excitation sectors of the cavity model") {
    auto pair = build_model({"cavity", {{"g", 1.0}, {"kappa", 1.0}, {"nmax", 2.0}}});
    auto decomposition = models::excitation_sectors(pair, 2);

    // N runs 0 .. 4 for nmax = 2
    CHECK(decomposition.sectors.size() == 5);
    CHECK(decomposition.sectors[0].excitation == 0);
    CHECK(decomposition.sectors[0].basis_indices.size() == 4);
    CHECK(decomposition.sectors[1].basis_indices.size() == 8);

    // N=0 sector is {|000>,|001>,|010>,|011>}
    std::vector<std::string> labels;
    for (std::size_t i : decomposition.sectors[0].basis_indices) labels.push_back(pair.labels[i]);
    std::sort(labels.begin(), labels.end());
    CHECK(labels == std::vector<std::string>{"|000>", "|001>", "|010>", "|011>"});

    // sectors partition the basis
    std::size_t covered = 0;
    for (const auto& sector : decomposition.sectors) covered += sector.basis_indices.size();
    CHECK(covered == pair.dim);

    // H_meas has no cross-sector blocks
    for (std::size_t a = 0; a < decomposition.sectors.size(); ++a)
        for (std::size_t b = 0; b < decomposition.sectors.size(); ++b) {
            if (a == b) continue;
            const CMatrix cross = submatrix(pair.h_meas, decomposition.sectors[a].basis_indices,
                                            decomposition.sectors[b].basis_indices);
            CHECK(max_abs(cross) <= 1e-12);
        }

    CHECK_THROWS_AS(
        models::excitation_sectors(build_model({"peres3", {{"omega", 1.0}, {"k", 1.0}}}), 2),
        models::ModelError);
}

TEST_CASE("decay model carries the printed non-Hermitian width") {
    auto pair = build_model({"decay", {{"tauz", 0.5}, {"gamma", 2.0}, {"k", 3.0}}});
    CHECK(std::abs(pair.h_sys(0, 1) - Complex(2.0, 0.0)) < 1e-15);
    CHECK(std::abs(pair.h_sys(1, 1) - Complex(0.0, -2.0 / (0.25 * 2.0))) < 1e-15);
    CHECK(std::abs(pair.total()(1, 2) - Complex(3.0, 0.0)) < 1e-15);
    CHECK_FALSE(pair.hermitian_sys);
    CHECK(pair.hermitian_meas);
}

TEST_CASE("dilation converges to the closed form as the band widens") {
    // The residual error against the infinite-band closed form is the
    // band-truncation effect: it saturates in M at fixed W (already at
    // M ~ 100) and shrinks ~1/W once the mode spacing resolves the line.
    auto max_error = [](double w, std::size_t m) {
        auto pair = models::dilate_flat_continuum(1.0, 2.0, w, m);
        std::vector<double> times;
        for (int i = 0; i <= 60; ++i) times.push_back(0.05 * i);
        CVector psi0(pair.dim, Complex(0.0, 0.0));
        psi0[0] = 1.0;
        auto traj = core::evolve(pair.total(), psi0, times);
        double err = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i)
            err = std::max(err, std::abs(traj.survival[i] - nonherm_survival(1.0, 2.0, times[i])));
        return err;
    };
    const double at_w40 = max_error(40.0, 401);
    const double at_w80 = max_error(80.0, 801);
    CHECK(at_w40 < 2e-2);
    CHECK(at_w80 < at_w40);
}
