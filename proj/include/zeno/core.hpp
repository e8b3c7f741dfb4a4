#pragma once

#include <optional>
#include <vector>

#include "zeno/linalg.hpp"
#include "zeno/models.hpp"

// Zeno subspaces and the strong-coupling limit: spectral partition of the
// measurement Hamiltonian, the Zeno Hamiltonian
//     H^Z = sum_n (P_n H P_n + K eta_n P_n),
// exact and limiting evolutions, finite-K convergence defects, and the
// perturbative expansion that backs the limit.

namespace zeno::core {

class DegeneracyError : public Error {
  public:
    using Error::Error;
};

/// Distinct eigenvalues eta_n of a Hermitian measurement Hamiltonian with
/// their orthogonal eigenprojectors, ascending in eta.
struct ZenoPartition {
    std::vector<double> etas;
    std::vector<CMatrix> projectors;
    std::vector<std::size_t> multiplicities;

    std::size_t size() const { return etas.size(); }
};

/// Eigenvalues closer than cluster_tol * max(1, ||H_meas||) are merged into
/// one sector.  Pass cluster_tol <= 0 for the default 1e-9.
ZenoPartition spectral_partition(const CMatrix& h_meas, double cluster_tol = -1.0);

CMatrix zeno_hamiltonian(const models::HamiltonianPair& pair, const ZenoPartition& partition);

/// exp(-i H^Z t)
CMatrix zeno_limit_evolution(const models::HamiltonianPair& pair, const ZenoPartition& partition,
                             double t);

struct Trajectory {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<std::vector<double>> subspace_probs;  // [time][sector], optional
    std::vector<CVector> states;                      // optional snapshots
};

/// Survival probability |<psi0| exp(-i total t) |psi0>|^2 on a time grid.
/// The evolved state is never renormalized, so for non-Hermitian generators
/// the survival decays with the lost norm.  With a partition the per-sector
/// probabilities ||P_n psi(t)||^2 are recorded as well.
Trajectory evolve(const CMatrix& total, const CVector& psi0, const std::vector<double>& times,
                  const ZenoPartition* partition = nullptr, bool keep_states = false);

/// max_n || U_K(t) P_n - P_n U_K(t) || (spectral norm) for each coupling in
/// k_values, with U_K = exp(-i (H + K H_meas) t).  Hermitian pairs only.
std::vector<double> intertwining_defect(const models::HamiltonianPair& pair,
                                        const ZenoPartition& partition,
                                        const std::vector<double>& k_values, double t);

/// Stationary perturbation expansion of H_meas + lambda H around the Zeno
/// partition.  eta_expansions[j] holds (eta_n, eta^(1), [eta^(2)]) for the
/// j-th perturbed level; first_order_projections[j] is the lambda-linear
/// correction to its projector.
struct PerturbativeSpectrum {
    std::vector<std::vector<double>> eta_expansions;
    std::vector<CMatrix> first_order_projections;

    /// eta_n + lambda eta^(1) + lambda^2 eta^(2), sorted ascending.
    std::vector<double> predicted_eigenvalues(double lambda) const;
};

PerturbativeSpectrum perturbative_spectrum(const models::HamiltonianPair& pair, double lambda,
                                           int order);

/// One leg of a piecewise-constant measurement schedule.
struct ScheduleSegment {
    CMatrix h_meas;
    double duration = 0.0;
};

/// Transport defect || U P_n(0) - P_n(T) U || for the tracked sector of a
/// piecewise-constant schedule, U the ordered product of the segment
/// propagators exp(-i (H + K H_meas_j) dt_j).  Sectors are matched between
/// adjacent segments by maximal projector overlap.
double adiabatic_transport_defect(const std::vector<ScheduleSegment>& schedule,
                                  const CMatrix& h_sys, double k, std::size_t tracked_sector);

}  // namespace zeno::core
