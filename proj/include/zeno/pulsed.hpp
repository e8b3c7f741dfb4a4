#pragma once

#include <vector>

#include "zeno/core.hpp"
#include "zeno/linalg.hpp"

// Pulsed-measurement protocols: survival under repeated projections, the
// Zeno time, nonselective superoperator evolution, and effective decay
// rates gamma_eff(tau) = -log p(tau) / tau.

namespace zeno::pulsed {

class StationaryStateError : public Error {
  public:
    using Error::Error;
};

/// Zeno time (variance of H in psi0)^(-1/2).  Throws StationaryStateError
/// when the variance vanishes (eigenstate: the Zeno time is infinite).
double zeno_time(const CMatrix& h, const CVector& psi0);

struct PulsedResult {
    std::size_t n_pulses = 0;
    double tau = 0.0;
    double survival = 0.0;
    CMatrix state;           // unnormalized surviving density matrix
    double gamma_eff = 0.0;  // -log(survival) / (N tau); +inf at exact zeros
};

/// Selective protocol: psi -> [P U(t/N) P]^N psi0, survived branch kept
/// unnormalized.  P must be a projector and psi0 must lie in Ran P.
PulsedResult pulsed_selective(const CMatrix& h, const CMatrix& p, const CVector& psi0,
                              std::size_t n, double t);

struct NonselectiveResult {
    CMatrix rho;
    std::vector<double> subspace_probs;  // Tr[rho P_n]
};

/// Nonselective protocol: rho advances through N rounds of free evolution
/// over t/N followed by the measurement superoperator sum_n P_n . P_n.
/// Trace is preserved; cross-sector coherence decays with N.
NonselectiveResult pulsed_nonselective(const CMatrix& h, const core::ZenoPartition& partition,
                                       const CMatrix& rho0, std::size_t n, double t);

/// gamma_eff(tau) for each tau.  Entries where the survival vanishes are
/// reported as +infinity.
std::vector<double> effective_rate_pulsed(const CMatrix& h, const CMatrix& p, const CVector& psi0,
                                          const std::vector<double>& tau_values, double t);

}  // namespace zeno::pulsed
