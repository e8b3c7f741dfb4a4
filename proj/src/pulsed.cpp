#include "zeno/pulsed.hpp"

#include <cmath>
#include <limits>

namespace zeno::pulsed {

namespace {

void check_projector(const CMatrix& p) {
    if (!p.square()) throw DimensionError("pulsed: P must be square");
    if (max_abs(p * p - p) > 1e-10 || !is_hermitian(p, 1e-10))
        throw Error("pulsed: P is not a projector");
}

void check_density_matrix(const CMatrix& rho) {
    if (!rho.square()) throw DimensionError("pulsed: rho must be square");
    if (!is_hermitian(rho, 1e-10)) throw Error("pulsed: rho is not Hermitian");
    if (std::abs(trace(rho).real() - 1.0) > 1e-10)
        throw Error("pulsed: rho does not have unit trace");
    EigenDecomposition eig = herm_eig(rho);
    for (const Complex lam : eig.values)
        if (lam.real() < -1e-10) throw Error("pulsed: rho is not positive semidefinite");
}

}  // namespace

double zeno_time(const CMatrix& h, const CVector& psi0) {
    if (!is_hermitian(h, 1e-10)) throw HermiticityError("zeno_time: H must be Hermitian");
    if (std::abs(norm(psi0) - 1.0) > 1e-12) throw Error("zeno_time: psi0 is not normalized");

    const CVector h_psi = matvec(h, psi0);
    const double h2 = std::real(dot(h_psi, h_psi));
    const double h1 = std::real(dot(psi0, h_psi));
    const double variance = h2 - h1 * h1;
    if (variance <= 1e-14)
        throw StationaryStateError("zeno_time: stationary state, infinite Zeno time");
    return 1.0 / std::sqrt(variance);
}

PulsedResult pulsed_selective(const CMatrix& h, const CMatrix& p, const CVector& psi0,
                              std::size_t n, double t) {
    if (!is_hermitian(h, 1e-10)) throw HermiticityError("pulsed_selective: H must be Hermitian");
    check_projector(p);
    if (n == 0) throw Error("pulsed_selective: need at least one pulse");

    CVector projected = matvec(p, psi0);
    for (std::size_t i = 0; i < psi0.size(); ++i) projected[i] -= psi0[i];
    if (norm(projected) > 1e-10) throw Error("pulsed_selective: psi0 is not in Ran P");

    const double tau = t / double(n);
    const CMatrix step = p * expm(Complex(0.0, -tau) * h) * p;

    CVector psi = psi0;
    for (std::size_t pulse = 0; pulse < n; ++pulse) psi = matvec(step, psi);

    PulsedResult result;
    result.n_pulses = n;
    result.tau = tau;
    const double nrm = norm(psi);
    result.survival = nrm * nrm;
    result.state = outer(psi, psi);
    if (result.survival > 0.0 && t > 0.0)
        result.gamma_eff = -std::log(result.survival) / t;
    else if (t > 0.0)
        result.gamma_eff = std::numeric_limits<double>::infinity();
    return result;
}

NonselectiveResult pulsed_nonselective(const CMatrix& h, const core::ZenoPartition& partition,
                                       const CMatrix& rho0, std::size_t n, double t) {
    if (!is_hermitian(h, 1e-10))
        throw HermiticityError("pulsed_nonselective: H must be Hermitian");
    check_density_matrix(rho0);
    if (n == 0) throw Error("pulsed_nonselective: need at least one pulse");
    if (partition.size() == 0 || partition.projectors[0].rows() != rho0.rows())
        throw DimensionError("pulsed_nonselective: partition does not match rho");

    const double tau = t / double(n);
    const CMatrix u = expm(Complex(0.0, -tau) * h);
    const CMatrix u_dag = adjoint(u);

    auto measure = [&](const CMatrix& rho) {
        CMatrix lumped(rho.rows(), rho.cols());
        for (const CMatrix& p : partition.projectors) lumped += p * rho * p;
        return lumped;
    };

    CMatrix rho = rho0;
    for (std::size_t pulse = 0; pulse < n; ++pulse) rho = measure(u * rho * u_dag);

    NonselectiveResult result;
    result.subspace_probs.reserve(partition.size());
    for (const CMatrix& p : partition.projectors)
        result.subspace_probs.push_back(trace(rho * p).real());
    result.rho = std::move(rho);
    return result;
}

std::vector<double> effective_rate_pulsed(const CMatrix& h, const CMatrix& p, const CVector& psi0,
                                          const std::vector<double>& tau_values, double t) {
    (void)t;  // the rate depends on the interval only: -log p(tau) / tau
    std::vector<double> rates;
    rates.reserve(tau_values.size());
    for (const double tau : tau_values) {
        if (tau <= 0.0) throw Error("effective_rate_pulsed: tau values must be positive");
        const PulsedResult single = pulsed_selective(h, p, psi0, 1, tau);
        rates.push_back(single.gamma_eff);
    }
    return rates;
}

}  // namespace zeno::pulsed
