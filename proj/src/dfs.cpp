#include "zeno/dfs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace zeno::dfs {

namespace {

void orthonormalize_columns(CMatrix& m) {
    for (std::size_t k = 0; k < m.cols(); ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            Complex overlap = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i)
                overlap += std::conj(m(i, j)) * m(i, k);
            for (std::size_t i = 0; i < m.rows(); ++i) m(i, k) -= overlap * m(i, j);
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) nrm += std::norm(m(i, k));
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < m.rows(); ++i) m(i, k) /= nrm;
    }
}

std::string format_amplitude(Complex amp) {
    char buf[64];
    if (std::abs(amp.imag()) < 1e-9) {
        std::snprintf(buf, sizeof(buf), "%+.4f", amp.real());
    } else {
        std::snprintf(buf, sizeof(buf), "(%+.4f%+.4fi)", amp.real(), amp.imag());
    }
    return buf;
}

std::string ket_combination(const CMatrix& basis, std::size_t col,
                            const std::vector<std::string>& kets) {
    std::string text;
    for (std::size_t i = 0; i < basis.rows(); ++i) {
        const Complex amp = basis(i, col);
        if (std::abs(amp) < 1e-9) continue;
        if (!text.empty()) text += " ";
        text += format_amplitude(amp) + kets[i];
    }
    return text.empty() ? "0" : text;
}

}  // namespace

RealSpectrum real_spectrum_subspace(const CMatrix& h_meas, double imag_tol) {
    if (!h_meas.square()) throw DimensionError("real_spectrum_subspace: input must be square");
    if (imag_tol <= 0.0) throw Error("real_spectrum_subspace: imag_tol must be positive");

    EigenDecomposition eig = gen_eig(h_meas);
    const double scale = std::max(1.0, spectral_norm(h_meas));
    const double imag_cut = imag_tol * scale;

    // pick real eigenvalues, cluster by real part
    std::vector<std::pair<double, std::size_t>> real_values;  // (eta, column)
    for (std::size_t k = 0; k < eig.values.size(); ++k)
        if (std::abs(eig.values[k].imag()) <= imag_cut)
            real_values.emplace_back(eig.values[k].real(), k);
    std::sort(real_values.begin(), real_values.end());

    RealSpectrum spectrum;
    std::size_t start = 0;
    while (start < real_values.size()) {
        std::size_t end = start + 1;
        while (end < real_values.size() &&
               real_values[end].first - real_values[end - 1].first <= imag_cut)
            ++end;

        CMatrix span(h_meas.rows(), end - start);
        double eta = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            eta += real_values[k].first;
            for (std::size_t i = 0; i < h_meas.rows(); ++i)
                span(i, k - start) = eig.vectors(i, real_values[k].second);
        }
        orthonormalize_columns(span);
        spectrum.etas.push_back(eta / double(end - start));
        spectrum.bases.push_back(std::move(span));
        start = end;
    }
    return spectrum;
}

DfsReport dfs_report(const models::HamiltonianPair& cavity_pair,
                     const models::SectorDecomposition& sectors, double imag_tol) {
    const std::size_t dim = cavity_pair.dim;
    const double scale = std::max(1.0, spectral_norm(cavity_pair.h_meas));
    const double zero_cut = imag_tol * scale;

    DfsReport report;
    std::vector<CVector> kernel_vectors;

    for (const auto& sector : sectors.sectors) {
        const CMatrix block =
            submatrix(cavity_pair.h_meas, sector.basis_indices, sector.basis_indices);
        const RealSpectrum spectrum = real_spectrum_subspace(block, imag_tol);

        std::size_t kernel_dim = 0;
        for (std::size_t c = 0; c < spectrum.etas.size(); ++c) {
            if (std::abs(spectrum.etas[c]) > zero_cut) {
                report.nonzero_real_etas.push_back(spectrum.etas[c]);
                continue;
            }
            kernel_dim += spectrum.bases[c].cols();
            for (std::size_t k = 0; k < spectrum.bases[c].cols(); ++k) {
                CVector lifted(dim, Complex(0.0, 0.0));
                for (std::size_t i = 0; i < sector.basis_indices.size(); ++i)
                    lifted[sector.basis_indices[i]] = spectrum.bases[c](i, k);
                kernel_vectors.push_back(std::move(lifted));
            }
        }
        report.per_sector.emplace_back(sector.excitation, kernel_dim);
    }

    report.dimension = kernel_vectors.size();
    report.basis = CMatrix(dim, report.dimension);
    for (std::size_t k = 0; k < kernel_vectors.size(); ++k)
        for (std::size_t i = 0; i < dim; ++i) report.basis(i, k) = kernel_vectors[k][i];
    orthonormalize_columns(report.basis);

    for (std::size_t k = 0; k < report.dimension; ++k)
        report.labels.push_back(ket_combination(report.basis, k, cavity_pair.labels));
    return report;
}

CMatrix project_effective_hamiltonian(const CMatrix& h_weak, const CMatrix& basis) {
    if (h_weak.rows() != basis.rows() || !h_weak.square())
        throw DimensionError("project_effective_hamiltonian: shape mismatch");
    return adjoint(basis) * h_weak * basis;
}

}  // namespace zeno::dfs
