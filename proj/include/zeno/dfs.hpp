#pragma once

#include <string>
#include <utility>
#include <vector>

#include "zeno/linalg.hpp"
#include "zeno/models.hpp"

// Decoherence-free subspace extraction for non-Hermitian measurement
// Hamiltonians.  Complex eigenvalues dissipate into the environment; only
// the real-eigenvalue sectors support unitary Zeno dynamics, and the
// eta = 0 sector of the cavity model is its decoherence-free subspace.

namespace zeno::dfs {

struct RealSpectrum {
    std::vector<double> etas;     // distinct real eigenvalues, ascending
    std::vector<CMatrix> bases;   // orthonormal eigenvector spans, per eta
};

/// Eigenvalues of H_meas with |Im| <= imag_tol * ||H_meas|| grouped into
/// real clusters, with orthonormalized eigenvector spans.
RealSpectrum real_spectrum_subspace(const CMatrix& h_meas, double imag_tol);

struct DfsReport {
    std::size_t dimension = 0;
    CMatrix basis;  // orthonormal columns spanning the eta = 0 eigenspace
    std::vector<std::pair<std::size_t, std::size_t>> per_sector;  // (excitation, kernel dim)
    std::vector<std::string> labels;
    std::vector<double> nonzero_real_etas;  // real clusters outside eta = 0, flagged
};

/// Per-excitation-sector decoherence-free subspace of the cavity model: the
/// eta = 0 eigenvectors of each sector restriction, assembled into one
/// orthonormal basis with ket-combination labels.
DfsReport dfs_report(const models::HamiltonianPair& cavity_pair,
                     const models::SectorDecomposition& sectors, double imag_tol = 1e-8);

/// Restriction B' H B of a weak Hamiltonian to the subspace spanned by the
/// orthonormal columns of B.
CMatrix project_effective_hamiltonian(const CMatrix& h_weak, const CMatrix& basis);

}  // namespace zeno::dfs
