#include "zeno/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace zeno::models {

namespace {

constexpr double kPi = 3.14159265358979323846;

class Params {
  public:
    Params(const ModelSpec& spec, std::initializer_list<const char*> known) : spec_(spec) {
        std::set<std::string> allowed(known.begin(), known.end());
        for (const auto& [key, value] : spec.params)
            if (!allowed.count(key))
                throw ModelError("model '" + spec.name + "': unknown parameter '" + key + "'");
    }

    double require(const std::string& name) const {
        auto it = spec_.params.find(name);
        if (it == spec_.params.end())
            throw ModelError("model '" + spec_.name + "': missing parameter '" + name + "'");
        return it->second;
    }

    double get(const std::string& name, double fallback) const {
        auto it = spec_.params.find(name);
        return it == spec_.params.end() ? fallback : it->second;
    }

    bool has(const std::string& name) const { return spec_.params.count(name) > 0; }

  private:
    const ModelSpec& spec_;
};

std::size_t as_count(double x, const std::string& what) {
    if (x < 0.0 || x != std::floor(x))
        throw ModelError(what + " must be a nonnegative integer");
    return static_cast<std::size_t>(x);
}

CMatrix coupling(std::size_t dim, std::size_t a, std::size_t b, Complex amp = 1.0) {
    CMatrix m(dim, dim);
    m(a, b) = amp;
    m(b, a) = std::conj(amp);
    return m;
}

std::vector<std::string> level_labels(std::size_t dim) {
    std::vector<std::string> labels;
    for (std::size_t i = 1; i <= dim; ++i) labels.push_back("|" + std::to_string(i) + ">");
    return labels;
}

std::vector<std::string> qubit_labels() { return {"|00>", "|01>", "|10>", "|11>"}; }

CMatrix sigma1() { return coupling(2, 0, 1); }

CMatrix sigma3() {
    CMatrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

CMatrix qubit_projector(std::size_t level) {
    CMatrix p(2, 2);
    p(level, level) = 1.0;
    return p;
}

HamiltonianPair make_rabi2(const ModelSpec& spec) {
    Params p(spec, {"omega"});
    const double omega = p.require("omega");
    HamiltonianPair pair;
    pair.dim = 2;
    pair.h_sys = omega * sigma1();
    pair.h_meas = CMatrix(2, 2);
    pair.k = 0.0;
    pair.labels = level_labels(2);
    pair.model = "rabi2";
    return pair;
}

HamiltonianPair make_nonherm(const ModelSpec& spec) {
    Params p(spec, {"omega", "k"});
    const double omega = p.require("omega");
    HamiltonianPair pair;
    pair.dim = 2;
    pair.h_sys = omega * sigma1();
    pair.h_meas = CMatrix(2, 2);
    pair.h_meas(1, 1) = Complex(0.0, -2.0);
    pair.k = p.require("k");
    pair.hermitian_meas = false;
    pair.labels = level_labels(2);
    pair.model = "nonherm";
    return pair;
}

HamiltonianPair make_peres3(const ModelSpec& spec) {
    Params p(spec, {"omega", "k"});
    const double omega = p.require("omega");
    HamiltonianPair pair;
    pair.dim = 3;
    pair.h_sys = omega * coupling(3, 0, 1);
    pair.h_meas = coupling(3, 1, 2);
    pair.k = p.require("k");
    pair.labels = level_labels(3);
    pair.model = "peres3";
    return pair;
}

HamiltonianPair make_fourlevel(const ModelSpec& spec) {
    Params p(spec, {"omega", "k", "kprime", "reading"});
    const double omega = p.require("omega");
    const double k = p.require("k");
    const double kprime = p.require("kprime");
    const double reading = p.get("reading", 1.0);
    if (reading != 1.0 && reading != 2.0)
        throw ModelError("model 'fourlevel': reading must be 1 or 2");

    const CMatrix rabi = omega * coupling(4, 0, 1);
    const CMatrix tau = coupling(4, 1, 2);
    const CMatrix tau_prime = coupling(4, 2, 3);

    HamiltonianPair pair;
    pair.dim = 4;
    if (reading == 1.0) {
        // strong observer on level 2: H_meas = tau1, H carries the rest
        pair.h_sys = rabi + kprime * tau_prime;
        pair.h_meas = tau;
        pair.k = k;
    } else {
        // strong observer of the observer: H_meas = tau1', H carries the rest
        pair.h_sys = rabi + k * tau;
        pair.h_meas = tau_prime;
        pair.k = kprime;
    }
    pair.labels = level_labels(4);
    pair.model = "fourlevel";
    return pair;
}

HamiltonianPair make_twoqubit(const ModelSpec& spec) {
    Params p(spec, {"omega", "b", "eta1", "eta2", "k"});
    const double omega = p.require("omega");
    const double b = p.get("b", 1.0);
    const double eta1 = p.get("eta1", 1.0);
    const double eta2 = p.get("eta2", -1.0);

    // V_d has eigenvalues (eta1, eta2) along |+x>, |-x>: complementary to
    // H_d = b*sigma3 whenever eta1 != eta2.
    CMatrix v_d(2, 2);
    v_d(0, 0) = v_d(1, 1) = 0.5 * (eta1 + eta2);
    v_d(0, 1) = v_d(1, 0) = 0.5 * (eta1 - eta2);

    HamiltonianPair pair;
    pair.dim = 4;
    pair.h_sys = kron(omega * sigma1(), CMatrix::identity(2)) + kron(CMatrix::identity(2), b * sigma3());
    pair.h_meas = kron(qubit_projector(1), v_d);
    pair.k = p.require("k");
    pair.labels = qubit_labels();
    pair.model = "twoqubit";
    return pair;
}

HamiltonianPair make_twoqubit_peres(const ModelSpec& spec, bool fixed) {
    Params p(spec, {"omega", "k"});
    const double omega = p.require("omega");
    const CMatrix detector_part = fixed ? CMatrix::identity(2) : qubit_projector(0);

    HamiltonianPair pair;
    pair.dim = 4;
    pair.h_sys = kron(omega * sigma1(), detector_part);
    pair.h_meas = kron(qubit_projector(1), sigma1());
    pair.k = p.require("k");
    pair.labels = qubit_labels();
    pair.model = fixed ? "twoqubit_peres_fixed" : "twoqubit_peres";
    return pair;
}

// Basis index for the cavity model: two 3-level atoms (j1, j2) and a photon
// mode truncated at n_max, photon index fastest.
std::size_t cavity_index(std::size_t j1, std::size_t j2, std::size_t n, std::size_t n_max) {
    return (j1 * 3 + j2) * (n_max + 1) + n;
}

HamiltonianPair make_cavity(const ModelSpec& spec) {
    Params p(spec, {"g", "kappa", "nmax", "k"});
    const double g = p.require("g");
    const double kappa = p.require("kappa");
    if (kappa < 0.0) throw ModelError("model 'cavity': kappa must be nonnegative");
    const std::size_t n_max = as_count(p.require("nmax"), "model 'cavity': nmax");
    if (n_max < 1) throw ModelError("model 'cavity': nmax must be >= 1");

    const std::size_t dim = 9 * (n_max + 1);
    CMatrix h_meas(dim, dim);
    const Complex ig(0.0, g);
    for (std::size_t j1 = 0; j1 < 3; ++j1)
        for (std::size_t j2 = 0; j2 < 3; ++j2)
            for (std::size_t n = 0; n <= n_max; ++n) {
                const std::size_t src = cavity_index(j1, j2, n, n_max);
                // i g b |2><1| per atom: absorb a photon, raise the atom
                if (j1 == 1 && n >= 1)
                    h_meas(cavity_index(2, j2, n - 1, n_max), src) += ig * std::sqrt(double(n));
                if (j2 == 1 && n >= 1)
                    h_meas(cavity_index(j1, 2, n - 1, n_max), src) += ig * std::sqrt(double(n));
                // -i g b' |1><2| per atom: emit a photon, lower the atom
                if (j1 == 2 && n < n_max)
                    h_meas(cavity_index(1, j2, n + 1, n_max), src) -= ig * std::sqrt(double(n + 1));
                if (j2 == 2 && n < n_max)
                    h_meas(cavity_index(j1, 1, n + 1, n_max), src) -= ig * std::sqrt(double(n + 1));
                // -i kappa b'b: photons leak through the mirrors
                h_meas(src, src) += Complex(0.0, -kappa * double(n));
            }

    HamiltonianPair pair;
    pair.dim = dim;
    pair.h_sys = CMatrix(dim, dim);
    pair.h_meas = std::move(h_meas);
    pair.k = p.get("k", 1.0);
    pair.hermitian_meas = false;
    pair.labels.resize(dim);
    for (std::size_t j1 = 0; j1 < 3; ++j1)
        for (std::size_t j2 = 0; j2 < 3; ++j2)
            for (std::size_t n = 0; n <= n_max; ++n)
                pair.labels[cavity_index(j1, j2, n, n_max)] =
                    "|" + std::to_string(n) + std::to_string(j1) + std::to_string(j2) + ">";
    pair.model = "cavity";
    return pair;
}

HamiltonianPair make_decay(const ModelSpec& spec) {
    Params p(spec, {"tauz", "gamma", "k"});
    const double tauz = p.require("tauz");
    const double gamma = p.require("gamma");
    if (tauz <= 0.0 || gamma <= 0.0)
        throw ModelError("model 'decay': tauz and gamma must be positive");

    HamiltonianPair pair;
    pair.dim = 3;
    pair.h_sys = coupling(3, 0, 1, 1.0 / tauz);
    pair.h_sys(1, 1) = Complex(0.0, -2.0 / (tauz * tauz * gamma));
    pair.h_meas = coupling(3, 1, 2);
    pair.k = p.require("k");
    pair.hermitian_sys = false;
    pair.labels = level_labels(3);
    pair.model = "decay";
    return pair;
}

HamiltonianPair make_flat_continuum(const ModelSpec& spec) {
    Params p(spec, {"omega", "k", "w", "m"});
    const double omega = p.require("omega");
    const double k = p.require("k");
    const double w = p.get("w", 20.0 * std::max(std::abs(omega), std::abs(k)));
    std::size_t m;
    if (p.has("m")) {
        m = as_count(p.require("m"), "model 'flat_continuum': m");
    } else {
        // resolve the decay line: domega <= gamma_est / 20
        const double gamma_est = omega * omega / k;
        m = static_cast<std::size_t>(std::ceil(2.0 * w / (gamma_est / 20.0))) + 1;
    }
    return dilate_flat_continuum(omega, k, w, m);
}

}  // namespace

HamiltonianPair dilate_flat_continuum(double omega, double k, double w, std::size_t m) {
    if (m < 2) throw ModelError("flat_continuum: need at least two modes");
    if (w <= 0.0 || k <= 0.0) throw ModelError("flat_continuum: W and K must be positive");

    const std::size_t dim = 2 + m;
    const double domega = 2.0 * w / double(m - 1);
    const double g_mode = std::sqrt(2.0 * k / kPi * domega);

    HamiltonianPair pair;
    pair.dim = dim;
    pair.h_sys = CMatrix(dim, dim);
    pair.h_sys(0, 1) = pair.h_sys(1, 0) = omega;
    pair.h_meas = CMatrix(dim, dim);
    pair.labels = {"|1>", "|2>"};
    for (std::size_t j = 0; j < m; ++j) {
        pair.h_sys(2 + j, 2 + j) = -w + double(j) * domega;
        pair.h_meas(1, 2 + j) = pair.h_meas(2 + j, 1) = g_mode / k;
        pair.labels.push_back("|w" + std::to_string(j) + ">");
    }
    pair.k = k;
    pair.model = "flat_continuum";
    return pair;
}

const std::vector<ModelInfo>& catalogue() {
    static const std::vector<ModelInfo> infos = {
        {"rabi2",
         "two-level Rabi oscillator",
         {{"omega", true, "Rabi coupling"}}},
        {"nonherm",
         "Rabi system with absorbing upper level",
         {{"omega", true, "Rabi coupling"}, {"k", true, "absorption strength"}}},
        {"flat_continuum",
         "Hermitian dilation of nonherm onto a flat band of modes",
         {{"omega", true, "Rabi coupling"},
          {"k", true, "continuum coupling"},
          {"w", false, "half-bandwidth (default 20*max(omega,k))"},
          {"m", false, "number of modes (default resolves omega^2/k / 20)"}}},
        {"peres3",
         "three-level chain, level 3 observes level 2",
         {{"omega", true, "Rabi coupling"}, {"k", true, "observer coupling"}}},
        {"fourlevel",
         "watched-cook chain with a second observer",
         {{"omega", true, "Rabi coupling"},
          {"k", true, "first observer coupling"},
          {"kprime", true, "second observer coupling"},
          {"reading", false, "1: H_meas = tau1 (default); 2: H_meas = tau1'"}}},
        {"twoqubit",
         "system qubit watched by a detector qubit",
         {{"omega", true, "system Rabi coupling"},
          {"k", true, "measurement coupling"},
          {"b", false, "detector level splitting (default 1)"},
          {"eta1", false, "first detector eigenvalue (default 1)"},
          {"eta2", false, "second detector eigenvalue (default -1)"}}},
        {"twoqubit_peres",
         "peres3 on two qubits, drive gated by the detector state",
         {{"omega", true, "system Rabi coupling"}, {"k", true, "measurement coupling"}}},
        {"twoqubit_peres_fixed",
         "peres3 on two qubits, drive independent of the detector",
         {{"omega", true, "system Rabi coupling"}, {"k", true, "measurement coupling"}}},
        {"cavity",
         "two 3-level atoms in a leaky cavity (non-Hermitian H_meas)",
         {{"g", true, "atom-cavity coupling"},
          {"kappa", true, "cavity loss rate"},
          {"nmax", true, "photon-number truncation (>= 1)"},
          {"k", false, "overall measurement strength (default 1)"}}},
        {"decay",
         "spontaneous emission with an observed decay product",
         {{"tauz", true, "Zeno time of the decay"},
          {"gamma", true, "golden-rule decay rate"},
          {"k", true, "observer coupling"}}},
    };
    return infos;
}

HamiltonianPair build_model(const ModelSpec& spec) {
    HamiltonianPair pair;
    if (spec.name == "rabi2") pair = make_rabi2(spec);
    else if (spec.name == "nonherm") pair = make_nonherm(spec);
    else if (spec.name == "flat_continuum") pair = make_flat_continuum(spec);
    else if (spec.name == "peres3") pair = make_peres3(spec);
    else if (spec.name == "fourlevel") pair = make_fourlevel(spec);
    else if (spec.name == "twoqubit") pair = make_twoqubit(spec);
    else if (spec.name == "twoqubit_peres") pair = make_twoqubit_peres(spec, false);
    else if (spec.name == "twoqubit_peres_fixed") pair = make_twoqubit_peres(spec, true);
    else if (spec.name == "cavity") pair = make_cavity(spec);
    else if (spec.name == "decay") pair = make_decay(spec);
    else throw ModelError("unknown model '" + spec.name + "'");

    // hermiticity flags must agree with the matrices actually built
    if (pair.hermitian_sys != is_hermitian(pair.h_sys) ||
        pair.hermitian_meas != is_hermitian(pair.h_meas))
        throw ModelError("model '" + spec.name + "': hermiticity flags are inconsistent");
    return pair;
}

SectorDecomposition excitation_sectors(const HamiltonianPair& cavity_pair, std::size_t n_max) {
    if (cavity_pair.model != "cavity" || cavity_pair.dim != 9 * (n_max + 1))
        throw ModelError("excitation_sectors: input is not a cavity model with this nmax");

    std::map<std::size_t, std::vector<std::size_t>> by_excitation;
    for (std::size_t j1 = 0; j1 < 3; ++j1)
        for (std::size_t j2 = 0; j2 < 3; ++j2)
            for (std::size_t n = 0; n <= n_max; ++n) {
                const std::size_t excitation = (j1 == 2 ? 1 : 0) + (j2 == 2 ? 1 : 0) + n;
                by_excitation[excitation].push_back(cavity_index(j1, j2, n, n_max));
            }

    SectorDecomposition decomposition;
    for (auto& [excitation, indices] : by_excitation) {
        std::sort(indices.begin(), indices.end());
        decomposition.sectors.push_back({excitation, std::move(indices)});
    }
    return decomposition;
}

}  // namespace zeno::models
