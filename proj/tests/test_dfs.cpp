#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "zeno/core.hpp"
#include "zeno/dfs.hpp"
#include "zeno/models.hpp"

using namespace zeno;
using models::build_model;

namespace {

models::HamiltonianPair cavity() {
    return build_model({"cavity", {{"g", 1.0}, {"kappa", 1.0}, {"nmax", 2.0}}});
}

// single-atom drive |0><1| + h.c. on atom 1, identity elsewhere
CMatrix atom1_drive(std::size_t n_max) {
    const std::size_t dim = 9 * (n_max + 1);
    CMatrix drive(dim, dim);
    for (std::size_t j2 = 0; j2 < 3; ++j2)
        for (std::size_t n = 0; n <= n_max; ++n) {
            const std::size_t i0 = (0 * 3 + j2) * (n_max + 1) + n;
            const std::size_t i1 = (1 * 3 + j2) * (n_max + 1) + n;
            drive(i0, i1) = 1.0;
            drive(i1, i0) = 1.0;
        }
    return drive;
}

// smallest principal-angle cosine between equal-dimension column spans
double min_principal_cosine(const CMatrix& a, const CMatrix& b) {
    EigenDecomposition overlap = herm_eig(adjoint(adjoint(b) * a) * (adjoint(b) * a));
    double lam_min = 1e30;
    for (const Complex lam : overlap.values) lam_min = std::min(lam_min, lam.real());
    return std::sqrt(std::max(0.0, lam_min));
}

}  // namespace

TEST_CASE("real spectrum of a Hermitian input recovers the spectral partition") {
    auto pair = build_model({"peres3", {{"omega", 1.0}, {"k", 1.0}}});
    auto partition = core::spectral_partition(pair.h_meas);
    auto spectrum = dfs::real_spectrum_subspace(pair.h_meas, 1e-8);

    REQUIRE(spectrum.etas.size() == partition.size());
    for (std::size_t n = 0; n < partition.size(); ++n) {
        CHECK(spectrum.etas[n] == doctest::Approx(partition.etas[n]).epsilon(1e-10));
        REQUIRE(spectrum.bases[n].cols() == partition.multiplicities[n]);
        // the span must sit inside the range of the sector projector:
        // principal angles within 1e-8 of zero
        for (std::size_t k = 0; k < spectrum.bases[n].cols(); ++k) {
            CVector v(3);
            for (std::size_t i = 0; i < 3; ++i) v[i] = spectrum.bases[n](i, k);
            CVector pv = matvec(partition.projectors[n], v);
            double diff = 0.0;
            for (std::size_t i = 0; i < 3; ++i) diff += std::norm(pv[i] - v[i]);
            CHECK(std::sqrt(diff) < 1e-8);
        }
    }
}

TEST_CASE("real spectrum of diag(0, -i)") {
    CMatrix m(2, 2);
    m(1, 1) = Complex(0.0, -1.0);
    auto spectrum = dfs::real_spectrum_subspace(m, 1e-8);
    REQUIRE(spectrum.etas.size() == 1);
    CHECK(spectrum.etas[0] == doctest::Approx(0.0));
    REQUIRE(spectrum.bases[0].cols() == 1);
    CHECK(std::abs(spectrum.bases[0](0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("full cavity H_meas has a real cluster only at eta = 0") {
    auto pair = cavity();
    auto spectrum = dfs::real_spectrum_subspace(pair.h_meas, 1e-8);
    REQUIRE(spectrum.etas.size() == 1);
    CHECK(std::abs(spectrum.etas[0]) < 1e-8);
    CHECK(spectrum.bases[0].cols() == 5);
}

TEST_CASE("dfs report: 5-dimensional decoherence-free subspace") {
    auto pair = cavity();
    auto sectors = models::excitation_sectors(pair, 2);
    auto report = dfs::dfs_report(pair, sectors);

    CHECK(report.dimension == 5);
    CHECK(report.per_sector[0] == std::pair<std::size_t, std::size_t>{0, 4});
    CHECK(report.per_sector[1] == std::pair<std::size_t, std::size_t>{1, 1});
    for (std::size_t s = 2; s < report.per_sector.size(); ++s)
        CHECK(report.per_sector[s].second == 0);
    CHECK(report.nonzero_real_etas.empty());

    // basis columns orthonormal and inside the kernel of H_meas
    CHECK(max_abs(adjoint(report.basis) * report.basis - CMatrix::identity(5)) < 1e-10);
    const double scale = spectral_norm(pair.h_meas);
    for (std::size_t k = 0; k < 5; ++k) {
        CVector v(pair.dim);
        for (std::size_t i = 0; i < pair.dim; ++i) v[i] = report.basis(i, k);
        CHECK(norm(matvec(pair.h_meas, v)) <= 1e-8 * scale);
    }

    // the N=1 contribution is (|021> - |012>)/sqrt(2)
    std::size_t i021 = 0, i012 = 0;
    for (std::size_t i = 0; i < pair.dim; ++i) {
        if (pair.labels[i] == "|021>") i021 = i;
        if (pair.labels[i] == "|012>") i012 = i;
    }
    CVector target(pair.dim, Complex(0.0, 0.0));
    target[i021] = 1.0 / std::sqrt(2.0);
    target[i012] = -1.0 / std::sqrt(2.0);
    double best = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        CVector v(pair.dim);
        for (std::size_t i = 0; i < pair.dim; ++i) v[i] = report.basis(i, k);
        best = std::max(best, std::norm(dot(target, v)));
    }
    CHECK(best >= 1.0 - 1e-10);
}

TEST_CASE("labels name the ket combinations") {
    auto pair = cavity();
    auto report = dfs::dfs_report(pair, models::excitation_sectors(pair, 2));
    bool found_singlet = false;
    for (const auto& label : report.labels)
        if (label.find("|021>") != std::string::npos && label.find("|012>") != std::string::npos)
            found_singlet = true;
    CHECK(found_singlet);
}

TEST_CASE("projected weak Hamiltonians") {
    auto pair = cavity();
    auto report = dfs::dfs_report(pair, models::excitation_sectors(pair, 2));

    CHECK(max_abs(dfs::project_effective_hamiltonian(CMatrix::identity(pair.dim), report.basis) -
                  CMatrix::identity(5)) < 1e-10);
    CHECK(max_abs(dfs::project_effective_hamiltonian(pair.h_meas, report.basis)) < 1e-8);

    // the atom-1 drive acts inside the DFS as a Hermitian 5x5 block; the
    // expected matrix follows from direct algebra: |000> <-> |010>,
    // |001> <-> |011>, singlet isolated
    const CMatrix drive = atom1_drive(2);
    const CMatrix reduced = dfs::project_effective_hamiltonian(drive, report.basis);
    CHECK(is_hermitian(reduced, 1e-10));

    // identify which report column is which ket
    auto column_of = [&](const std::string& ket) {
        for (std::size_t k = 0; k < 5; ++k)
            if (report.labels[k].find(ket) != std::string::npos) return k;
        return std::size_t(5);
    };
    const std::size_t c000 = column_of("|000>"), c010 = column_of("|010>");
    const std::size_t c001 = column_of("|001>"), c011 = column_of("|011>");
    const std::size_t singlet = column_of("|021>");
    REQUIRE(c000 < 5);
    REQUIRE(singlet < 5);
    CHECK(std::abs(reduced(c000, c010)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(reduced(c001, c011)) == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(reduced(singlet, k)) < 1e-10);
    CHECK(std::abs(reduced(c000, c001)) < 1e-10);
    CHECK(std::abs(reduced(c000, c011)) < 1e-10);
}

TEST_CASE("DFS states survive the strong measurement; other states dissipate") {
    auto pair = cavity();
    auto report = dfs::dfs_report(pair, models::excitation_sectors(pair, 2));
    const CMatrix drive = atom1_drive(2);

    auto deviation_at = [&](double k) {
        const CMatrix generator = Complex(0.0, -1.0) * (drive + k * pair.h_meas);
        const CMatrix u = expm(generator);
        CVector v(pair.dim);
        for (std::size_t i = 0; i < pair.dim; ++i) v[i] = report.basis(i, 4);  // singlet
        return std::abs(1.0 - norm(matvec(u, v)));
    };
    // leakage through the damped modes scales like 1/K
    const double at_100 = deviation_at(100.0);
    const double at_1000 = deviation_at(1000.0);
    CHECK(at_100 < 1e-2);
    CHECK(at_1000 < at_100);
    CHECK(at_1000 < 1e-3);

    // a random S1 state outside the kernel loses essentially all its norm
    const CMatrix u = expm(Complex(0.0, -1.0) * (drive + 100.0 * pair.h_meas));
    CVector lost(pair.dim, Complex(0.0, 0.0));
    lost[(0 * 3 + 0) * 3 + 1] = 1.0;  // |100>
    CHECK(norm(matvec(u, lost)) < 0.5);
}

TEST_CASE("subspace comparison helper sanity") {
    auto pair = build_model({"peres3", {{"omega", 1.0}, {"k", 1.0}}});
    auto eig = herm_eig(pair.h_meas);
    CMatrix a(3, 1), b(3, 1);
    for (std::size_t i = 0; i < 3; ++i) {
        a(i, 0) = eig.vectors(i, 0);
        b(i, 0) = eig.vectors(i, 0);
    }
    CHECK(min_principal_cosine(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}
