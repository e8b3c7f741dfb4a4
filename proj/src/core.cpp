#include "zeno/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zeno::core {

namespace {

bool grid_is_uniform(const std::vector<double>& times) {
    if (times.size() < 3) return true;
    const double dt = times[1] - times[0];
    for (std::size_t i = 2; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-12 * std::max(1.0, std::abs(dt)))
            return false;
    return true;
}

void check_times(const std::vector<double>& times) {
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw Error("evolve: times must be strictly increasing");
}

std::vector<double> sector_probabilities(const ZenoPartition& partition, const CVector& psi) {
    std::vector<double> probs(partition.size());
    for (std::size_t n = 0; n < partition.size(); ++n)
        probs[n] = norm(matvec(partition.projectors[n], psi));
    for (auto& p : probs) p *= p;
    return probs;
}

}  // namespace

ZenoPartition spectral_partition(const CMatrix& h_meas, double cluster_tol) {
    if (!is_hermitian(h_meas, 1e-10))
        throw HermiticityError("spectral_partition: H_meas is not Hermitian");

    EigenDecomposition eig = herm_eig(h_meas);
    const std::size_t dim = h_meas.rows();

    double lam_max = 0.0;
    for (const Complex lam : eig.values) lam_max = std::max(lam_max, std::abs(lam.real()));
    if (cluster_tol <= 0.0) cluster_tol = 1e-9;
    const double merge_gap = cluster_tol * std::max(1.0, lam_max);

    ZenoPartition partition;
    std::size_t start = 0;
    while (start < dim) {
        std::size_t end = start + 1;
        while (end < dim && eig.values[end].real() - eig.values[end - 1].real() <= merge_gap) ++end;

        CMatrix projector(dim, dim);
        double eta = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            eta += eig.values[k].real();
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j)
                    projector(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
        }
        partition.etas.push_back(eta / double(end - start));
        partition.projectors.push_back(std::move(projector));
        partition.multiplicities.push_back(end - start);
        start = end;
    }
    return partition;
}

CMatrix zeno_hamiltonian(const models::HamiltonianPair& pair, const ZenoPartition& partition) {
    const std::size_t dim = pair.dim;
    if (partition.size() == 0 || partition.projectors[0].rows() != dim)
        throw DimensionError("zeno_hamiltonian: partition does not match the pair");

    // probe H_meas P_n = eta_n P_n on a fixed dense vector
    CVector probe(dim);
    for (std::size_t i = 0; i < dim; ++i)
        probe[i] = Complex(std::cos(0.7 * double(i + 1)), std::sin(1.3 * double(i + 1)));
    const double scale = std::max(1.0, max_abs(pair.h_meas)) * norm(probe);
    for (std::size_t n = 0; n < partition.size(); ++n) {
        CVector pv = matvec(partition.projectors[n], probe);
        CVector hv = matvec(pair.h_meas, pv);
        for (std::size_t i = 0; i < dim; ++i) hv[i] -= partition.etas[n] * pv[i];
        if (norm(hv) > 1e-8 * scale)
            throw Error("zeno_hamiltonian: partition was not derived from this pair's H_meas");
    }

    CMatrix hz(dim, dim);
    for (std::size_t n = 0; n < partition.size(); ++n) {
        const CMatrix& p = partition.projectors[n];
        hz += p * pair.h_sys * p;
        hz += (pair.k * partition.etas[n]) * p;
    }
    return hz;
}

CMatrix zeno_limit_evolution(const models::HamiltonianPair& pair, const ZenoPartition& partition,
                             double t) {
    return expm(Complex(0.0, -t) * zeno_hamiltonian(pair, partition));
}

Trajectory evolve(const CMatrix& total, const CVector& psi0, const std::vector<double>& times,
                  const ZenoPartition* partition, bool keep_states) {
    if (total.rows() != psi0.size())
        throw DimensionError("evolve: state dimension does not match the Hamiltonian");
    if (std::abs(norm(psi0) - 1.0) > 1e-12)
        throw Error("evolve: initial state is not normalized");
    check_times(times);

    Trajectory traj;
    traj.times = times;
    traj.survival.reserve(times.size());

    auto record = [&](const CVector& psi) {
        const Complex amp = dot(psi0, psi);
        traj.survival.push_back(std::norm(amp));
        if (partition) traj.subspace_probs.push_back(sector_probabilities(*partition, psi));
        if (keep_states) traj.states.push_back(psi);
    };

    if (is_hermitian(total, 1e-10)) {
        // one spectral decomposition, then exact phases at every time
        EigenDecomposition eig = herm_eig(total);
        const std::size_t n = psi0.size();
        CVector coeff(n);
        for (std::size_t k = 0; k < n; ++k) {
            Complex c = 0.0;
            for (std::size_t i = 0; i < n; ++i) c += std::conj(eig.vectors(i, k)) * psi0[i];
            coeff[k] = c;
        }
        const bool need_state = partition != nullptr || keep_states;
        for (const double t : times) {
            if (need_state) {
                CVector psi(n, Complex(0.0, 0.0));
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex phase = std::exp(Complex(0.0, -eig.values[k].real() * t)) * coeff[k];
                    for (std::size_t i = 0; i < n; ++i) psi[i] += phase * eig.vectors(i, k);
                }
                record(psi);
            } else {
                Complex amp = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    amp += std::norm(coeff[k]) * std::exp(Complex(0.0, -eig.values[k].real() * t));
                traj.survival.push_back(std::norm(amp));
            }
        }
        return traj;
    }

    if (grid_is_uniform(times) && times.size() > 2) {
        const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
        CMatrix u_step = expm(Complex(0.0, -dt) * total);
        CVector psi = matvec(expm(Complex(0.0, -times[0]) * total), psi0);
        record(psi);
        for (std::size_t i = 1; i < times.size(); ++i) {
            psi = matvec(u_step, psi);
            record(psi);
        }
        return traj;
    }

    for (const double t : times) record(matvec(expm(Complex(0.0, -t) * total), psi0));
    return traj;
}

std::vector<double> intertwining_defect(const models::HamiltonianPair& pair,
                                        const ZenoPartition& partition,
                                        const std::vector<double>& k_values, double t) {
    if (!pair.hermitian_meas)
        throw HermiticityError("intertwining_defect: defined only for Hermitian H_meas");
    if (!pair.hermitian_sys)
        throw HermiticityError("intertwining_defect: defined only for Hermitian pairs");
    for (std::size_t i = 1; i < k_values.size(); ++i)
        if (k_values[i] <= k_values[i - 1])
            throw Error("intertwining_defect: K values must be positive increasing");

    std::vector<double> defects;
    defects.reserve(k_values.size());
    for (const double k : k_values) {
        const CMatrix u = expm(Complex(0.0, -t) * (pair.h_sys + k * pair.h_meas));
        double worst = 0.0;
        for (const CMatrix& p : partition.projectors)
            worst = std::max(worst, spectral_norm(u * p - p * u));
        defects.push_back(worst);
    }
    return defects;
}

std::vector<double> PerturbativeSpectrum::predicted_eigenvalues(double lambda) const {
    std::vector<double> out;
    out.reserve(eta_expansions.size());
    for (const auto& coeffs : eta_expansions) {
        double value = 0.0, power = 1.0;
        for (const double c : coeffs) {
            value += c * power;
            power *= lambda;
        }
        out.push_back(value);
    }
    std::sort(out.begin(), out.end());
    return out;
}

PerturbativeSpectrum perturbative_spectrum(const models::HamiltonianPair& pair, double lambda,
                                           int order) {
    if (order != 1 && order != 2)
        throw Error("perturbative_spectrum: order must be 1 or 2");
    if (!pair.hermitian_sys || !pair.hermitian_meas)
        throw HermiticityError("perturbative_spectrum: needs a Hermitian pair");

    const CMatrix& h = pair.h_sys;
    EigenDecomposition meas_eig = herm_eig(pair.h_meas);
    ZenoPartition partition = spectral_partition(pair.h_meas);

    // validity window: the perturbation must stay well below the sector gaps
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < partition.size(); ++n)
        min_gap = std::min(min_gap, partition.etas[n] - partition.etas[n - 1]);
    const double h_norm = spectral_norm(h);
    if (partition.size() > 1 && std::abs(lambda) * h_norm >= min_gap / 4.0)
        throw Error("perturbative_spectrum: |lambda|*||H|| exceeds a quarter of the sector gap");

    const std::size_t dim = pair.dim;
    PerturbativeSpectrum result;

    // Q_n / a_n = sum_{m != n} P_m / (eta_n - eta_m), per sector
    std::vector<CMatrix> reduced_resolvent(partition.size(), CMatrix(dim, dim));
    for (std::size_t n = 0; n < partition.size(); ++n)
        for (std::size_t m = 0; m < partition.size(); ++m) {
            if (m == n) continue;
            reduced_resolvent[n] +=
                (1.0 / (partition.etas[n] - partition.etas[m])) * partition.projectors[m];
        }

    std::size_t column = 0;
    for (std::size_t n = 0; n < partition.size(); ++n) {
        const std::size_t mult = partition.multiplicities[n];
        // sector basis = the eigenvector columns of this cluster
        CMatrix basis(dim, mult);
        for (std::size_t a = 0; a < mult; ++a)
            for (std::size_t i = 0; i < dim; ++i) basis(i, a) = meas_eig.vectors(i, column + a);
        column += mult;

        // first order: diagonalize the restriction of H to the sector
        const CMatrix h_block = adjoint(basis) * h * basis;
        EigenDecomposition block_eig = herm_eig(h_block);
        const CMatrix refined = basis * block_eig.vectors;

        const CMatrix second_order_op = h * reduced_resolvent[n] * h;
        const CMatrix second_block = adjoint(refined) * second_order_op * refined;

        // a first-order degeneracy is acceptable only if the second-order
        // matrix is simultaneously diagonal on the degenerate cluster
        const double deg_tol = 1e-8 * std::max(1.0, h_norm);
        for (std::size_t a = 0; a < mult; ++a)
            for (std::size_t b = a + 1; b < mult; ++b) {
                const double gap1 =
                    std::abs(block_eig.values[a].real() - block_eig.values[b].real());
                if (gap1 <= deg_tol && std::abs(second_block(a, b)) > deg_tol)
                    throw DegeneracyError(
                        "perturbative_spectrum: degeneracy not lifted at first order");
            }

        for (std::size_t a = 0; a < mult; ++a) {
            std::vector<double> coeffs = {partition.etas[n], block_eig.values[a].real()};
            if (order == 2) coeffs.push_back(second_block(a, a).real());
            result.eta_expansions.push_back(std::move(coeffs));

            CVector v(dim);
            for (std::size_t i = 0; i < dim; ++i) v[i] = refined(i, a);
            const CMatrix p_na = outer(v, v);
            const CMatrix cross = reduced_resolvent[n] * h * p_na;
            result.first_order_projections.push_back(cross + adjoint(cross));
        }
    }
    return result;
}

double adiabatic_transport_defect(const std::vector<ScheduleSegment>& schedule,
                                  const CMatrix& h_sys, double k, std::size_t tracked_sector) {
    if (schedule.empty()) throw Error("adiabatic_transport_defect: empty schedule");
    for (const auto& segment : schedule) {
        if (!is_hermitian(segment.h_meas, 1e-10))
            throw HermiticityError("adiabatic_transport_defect: segment H_meas not Hermitian");
        if (segment.duration <= 0.0)
            throw Error("adiabatic_transport_defect: segment durations must be positive");
    }

    std::vector<ZenoPartition> partitions;
    partitions.reserve(schedule.size());
    for (const auto& segment : schedule) partitions.push_back(spectral_partition(segment.h_meas));

    const std::size_t sectors = partitions.front().size();
    for (const auto& partition : partitions)
        if (partition.size() != sectors)
            throw Error("adiabatic_transport_defect: segments have different sector counts");
    if (tracked_sector >= sectors)
        throw Error("adiabatic_transport_defect: tracked sector out of range");

    // follow the sector across segments by maximal Frobenius overlap
    std::size_t current = tracked_sector;
    std::vector<std::size_t> track = {current};
    for (std::size_t seg = 1; seg < schedule.size(); ++seg) {
        const CMatrix& p_prev = partitions[seg - 1].projectors[current];
        double best = -1.0, second = -1.0;
        std::size_t best_index = 0;
        for (std::size_t m = 0; m < sectors; ++m) {
            const double overlap = trace(p_prev * partitions[seg].projectors[m]).real();
            if (overlap > best) {
                second = best;
                best = overlap;
                best_index = m;
            } else if (overlap > second) {
                second = overlap;
            }
        }
        if (second >= 0.0 && best - second < 1e-6)
            throw Error("adiabatic_transport_defect: ambiguous sector tracking");
        current = best_index;
        track.push_back(current);
    }

    CMatrix u = CMatrix::identity(h_sys.rows());
    for (const auto& segment : schedule)
        u = expm(Complex(0.0, -segment.duration) * (h_sys + k * segment.h_meas)) * u;

    const CMatrix& p_start = partitions.front().projectors[tracked_sector];
    const CMatrix& p_end = partitions.back().projectors[track.back()];
    return spectral_norm(u * p_start - p_end * u);
}

}  // namespace zeno::core
