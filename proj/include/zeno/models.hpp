#pragma once

#include <map>
#include <string>
#include <vector>

#include "zeno/linalg.hpp"

// Catalogue of the model Hamiltonians used throughout the library, each
// decomposed as  H_total = H + K * H_meas  with a system part H and a
// measurement (apparatus) part H_meas.

namespace zeno::models {

class ModelError : public Error {
  public:
    using Error::Error;
};

struct HamiltonianPair {
    std::size_t dim = 0;
    CMatrix h_sys;
    CMatrix h_meas;
    double k = 0.0;  // measurement coupling strength
    bool hermitian_sys = true;
    bool hermitian_meas = true;
    std::vector<std::string> labels;
    std::string model;  // catalogue name; empty for hand-built pairs

    CMatrix total() const { return h_sys + k * h_meas; }
};

struct ModelSpec {
    std::string name;
    std::map<std::string, double> params;
};

struct ParamInfo {
    std::string name;
    bool required = false;
    std::string doc;
};

struct ModelInfo {
    std::string name;
    std::string doc;
    std::vector<ParamInfo> params;
};

/// The ten catalogue models with their parameter lists (for the CLI).
const std::vector<ModelInfo>& catalogue();

/// Construct a catalogue model.
///
///   rabi2                two-level Rabi system, H = omega*sigma1, no apparatus
///   nonherm              Rabi system with absorbing level, K*H_meas = -2iK |2><2|
///   flat_continuum       Hermitian dilation of nonherm onto M flat-band modes
///   peres3               three-level chain, level 3 observes level 2
///   fourlevel            chain with a second observer level (param reading=1|2
///                        selects which coupling is read as the measurement)
///   twoqubit             system qubit + detector qubit, H_meas = P1 x V_d with
///                        V_d eigenvalues (eta1, eta2) complementary to H_d
///   twoqubit_peres       peres3 rewritten on two qubits (idle fourth state)
///   twoqubit_peres_fixed same, with the system drive acting for any detector state
///   cavity               two 3-level atoms + leaky cavity mode (non-Hermitian)
///   decay                spontaneous emission into a continuum, observed level 2
HamiltonianPair build_model(const ModelSpec& spec);

/// Discretized flat-continuum dilation: 2-level block omega*sigma1 plus M
/// modes uniformly spaced on [-W, W], each coupled to level |2> with
/// strength sqrt(2K/pi * domega).  H_meas stores the unit-K coupling so
/// that H + K*H_meas reproduces the dilation built at this K.
HamiltonianPair dilate_flat_continuum(double omega, double k, double w, std::size_t m);

struct Sector {
    std::size_t excitation = 0;
    std::vector<std::size_t> basis_indices;
};

struct SectorDecomposition {
    std::vector<Sector> sectors;
};

/// Partition of the cavity basis by the conserved excitation number
/// N = (# atoms in level 2) + photon number.  H_meas is block diagonal
/// across sectors.
SectorDecomposition excitation_sectors(const HamiltonianPair& cavity_pair, std::size_t n_max);

}  // namespace zeno::models
