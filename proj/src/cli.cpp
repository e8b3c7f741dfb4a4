#include "zeno/cli.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "zeno/classify.hpp"
#include "zeno/core.hpp"
#include "zeno/dfs.hpp"
#include "zeno/linalg.hpp"
#include "zeno/models.hpp"
#include "zeno/pulsed.hpp"

namespace zeno::cli {

namespace {

// ---------------------------------------------------------------------------
// formatting and output
// ---------------------------------------------------------------------------

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> meta;  // echoed into the header
};

void write_table(const Table& table, const std::string& path, const std::string& format,
                 const std::string& subcommand) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file '" + path + "'");

    if (format == "csv") {
        out << "# zeno-lab " << subcommand << "\n";
        for (const auto& [key, value] : table.meta) out << "# " << key << " = " << value << "\n";
        out << "# columns: ";
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            out << (c ? "," : "") << table.columns[c];
        out << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt17(row[c]);
            out << "\n";
        }
    } else {  // json-lines
        out << "{\"meta\":{\"subcommand\":\"" << subcommand << "\"";
        for (const auto& [key, value] : table.meta) out << ",\"" << key << "\":\"" << value << "\"";
        out << "}}\n";
        for (const auto& row : table.rows) {
            out << "{";
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << "\"" << table.columns[c] << "\":" << fmt17(row[c]);
            out << "}\n";
        }
    }
    if (!out) throw Error("failed writing output file '" + path + "'");
}

void emit_plot_script(const std::string& csv_path, std::size_t column_count) {
    std::ofstream out(csv_path + ".gp", std::ios::binary);
    out << "set datafile separator \",\"\n"
        << "set key autotitle columnhead\n"
        << "set xlabel \"t\"\n"
        << "plot ";
    for (std::size_t c = 2; c <= std::max<std::size_t>(column_count, 2); ++c)
        out << (c > 2 ? ", " : "") << "\"" << csv_path << "\" using 1:" << c << " with lines";
    out << "\n";
}

// ---------------------------------------------------------------------------
// run configuration
// ---------------------------------------------------------------------------

struct Options {
    std::string model;
    std::vector<std::string> raw_params;
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    double t_max = 10.0;
    double dt = 0.01;
    std::size_t state = 0;
    double tol = 1e-9;
    double lambda = 0.01;
    int order = 2;
    std::string mode = "selective";
    std::string projector = "rank1";
    std::string k_values;
    std::string n_values = "4,16,64,256";
    double t_total = 1.0;
    std::string window;
    double rate_tol = 0.05;
    unsigned jobs = 0;
    bool plot_script = false;
};

std::size_t default_jobs() {
    if (const char* env = std::getenv("ZENO_LAB_JOBS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    for (auto& worker : workers) worker.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError(std::string(what) + ": cannot parse '" + item + "'");
        }
    }
    if (values.empty()) throw CLI::ValidationError(std::string(what) + ": empty list");
    return values;
}

// sweep lists must be positive and increasing
std::vector<double> parse_sweep_list(const std::string& text, const char* what) {
    std::vector<double> values = parse_list(text, what);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] <= 0.0)
            throw CLI::ValidationError(std::string(what) + ": values must be positive");
        if (i > 0 && values[i] <= values[i - 1])
            throw CLI::ValidationError(std::string(what) + ": values must be increasing");
    }
    return values;
}

models::ModelSpec make_spec(const Options& opt) {
    if (opt.model.empty()) throw CLI::ValidationError("--model is required");
    models::ModelSpec spec;
    spec.name = opt.model;
    for (const std::string& raw : opt.raw_params) {
        const auto eq = raw.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--param expects key=value, got '" + raw + "'");
        const std::string key = raw.substr(0, eq);
        try {
            spec.params[key] = std::stod(raw.substr(eq + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--param " + key + ": cannot parse value");
        }
    }
    return spec;
}

std::vector<std::pair<std::string, std::string>> model_meta(const models::ModelSpec& spec,
                                                            const Options& opt,
                                                            bool with_grid = true) {
    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("model", spec.name);
    for (const auto& [key, value] : spec.params) meta.emplace_back(key, fmt17(value));
    if (with_grid) {
        meta.emplace_back("t-max", fmt17(opt.t_max));
        meta.emplace_back("dt", fmt17(opt.dt));
    }
    meta.emplace_back("state", std::to_string(opt.state));
    return meta;
}

std::vector<double> time_grid(double t_max, double dt) {
    if (dt <= 0.0 || t_max <= 0.0) throw CLI::ValidationError("t-max and dt must be positive");
    std::vector<double> times;
    const std::size_t steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
    times.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) times.push_back(double(i) * dt);
    return times;
}

CVector basis_state(std::size_t dim, std::size_t index) {
    if (index >= dim) throw CLI::ValidationError("--state index is out of range for this model");
    CVector psi(dim, Complex(0.0, 0.0));
    psi[index] = 1.0;
    return psi;
}

// ---------------------------------------------------------------------------
// config file merge: `key = value` lines; known keys become flags, anything
// else is treated as a model parameter.  Explicit flags win.
// ---------------------------------------------------------------------------

const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "model",  "out",    "format",    "t-max",  "dt",     "state",  "tol",
        "lambda", "order",  "mode",      "projector", "k-values", "n-values", "t-total",
        "window", "rate-tol", "jobs",    "emit-plot-script"};
    return keys;
}

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw CLI::ValidationError("cannot read config file '" + config_path + "'");

    std::vector<std::string> merged;
    if (!args.empty()) merged.push_back(args.front());  // subcommand stays first
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = normalize_key(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) continue;
        if (known_config_keys().count(key)) {
            if (key == "emit-plot-script") {
                if (value == "true" || value == "1") merged.push_back("--emit-plot-script");
            } else {
                merged.push_back("--" + key);
                merged.push_back(value);
            }
        } else {
            merged.push_back("--param");
            merged.push_back(key + "=" + value);
        }
    }
    // explicit flags come after config-derived ones, so TakeLast lets them win
    for (std::size_t i = 1; i < args.size(); ++i) merged.push_back(args[i]);
    return merged;
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

void require_out(const Options& opt) {
    if (opt.out_path.empty()) throw CLI::ValidationError("--out is required for this subcommand");
}

int cmd_models() {
    for (const auto& info : models::catalogue()) {
        std::cout << info.name << " - " << info.doc << "\n";
        for (const auto& param : info.params)
            std::cout << "    " << param.name << (param.required ? " (required) " : " (optional) ")
                      << param.doc << "\n";
    }
    return 0;
}

int cmd_simulate(const Options& opt) {
    require_out(opt);
    const models::ModelSpec spec = make_spec(opt);
    const models::HamiltonianPair pair = models::build_model(spec);
    const std::vector<double> times = time_grid(opt.t_max, opt.dt);
    const core::Trajectory traj =
        core::evolve(pair.total(), basis_state(pair.dim, opt.state), times);

    Table table;
    table.columns = {"t", "survival"};
    table.meta = model_meta(spec, opt);
    for (std::size_t i = 0; i < times.size(); ++i)
        table.rows.push_back({times[i], traj.survival[i]});
    write_table(table, opt.out_path, opt.format, "simulate");
    if (opt.plot_script) emit_plot_script(opt.out_path, table.columns.size());
    return 0;
}

int cmd_sweep_k(const Options& opt) {
    require_out(opt);
    if (opt.k_values.empty()) throw CLI::ValidationError("--k-values is required");
    const std::vector<double> ks = parse_sweep_list(opt.k_values, "--k-values");
    const models::ModelSpec base = make_spec(opt);
    const std::vector<double> times = time_grid(opt.t_max, opt.dt);

    std::vector<core::Trajectory> trajs(ks.size());
    parallel_for(ks.size(), opt.jobs ? opt.jobs : default_jobs(), [&](std::size_t i) {
        models::ModelSpec spec = base;
        spec.params["k"] = ks[i];
        const models::HamiltonianPair pair = models::build_model(spec);
        trajs[i] = core::evolve(pair.total(), basis_state(pair.dim, opt.state), times);
    });

    Table table;
    table.columns = {"t"};
    for (const double k : ks) {
        std::string name = fmt17(k);
        std::replace(name.begin(), name.end(), ',', '.');
        table.columns.push_back("survival_k" + name);
    }
    table.meta = model_meta(base, opt);
    table.meta.emplace_back("k-values", opt.k_values);
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> row = {times[i]};
        for (const auto& traj : trajs) row.push_back(traj.survival[i]);
        table.rows.push_back(std::move(row));
    }
    write_table(table, opt.out_path, opt.format, "sweep-k");
    if (opt.plot_script) emit_plot_script(opt.out_path, table.columns.size());
    return 0;
}

int cmd_pulsed(const Options& opt) {
    require_out(opt);
    const models::ModelSpec spec = make_spec(opt);
    const models::HamiltonianPair pair = models::build_model(spec);
    const CMatrix total = pair.total();
    const CVector psi0 = basis_state(pair.dim, opt.state);

    std::vector<double> n_list = parse_sweep_list(opt.n_values, "--n-values");
    std::vector<std::size_t> ns;
    for (const double v : n_list) {
        if (v < 1.0 || v != std::floor(v))
            throw CLI::ValidationError("--n-values entries must be positive integers");
        ns.push_back(static_cast<std::size_t>(v));
    }

    Table table;
    table.meta = model_meta(spec, opt, false);
    table.meta.emplace_back("t-total", fmt17(opt.t_total));
    table.meta.emplace_back("mode", opt.mode);

    if (opt.mode == "selective") {
        CMatrix projector;
        if (opt.projector == "rank1") {
            projector = outer(psi0, psi0);
        } else if (opt.projector == "sector") {
            const core::ZenoPartition partition = core::spectral_partition(pair.h_meas);
            double best = -1.0;
            for (const CMatrix& p : partition.projectors) {
                const double weight = norm(matvec(p, psi0));
                if (weight > best) {
                    best = weight;
                    projector = p;
                }
            }
        } else {
            throw CLI::ValidationError("--projector must be rank1 or sector");
        }

        std::vector<pulsed::PulsedResult> results(ns.size());
        parallel_for(ns.size(), opt.jobs ? opt.jobs : default_jobs(), [&](std::size_t i) {
            results[i] = pulsed::pulsed_selective(total, projector, psi0, ns[i], opt.t_total);
        });
        table.columns = {"n", "tau", "survival", "gamma_eff"};
        for (std::size_t i = 0; i < ns.size(); ++i)
            table.rows.push_back(
                {double(ns[i]), results[i].tau, results[i].survival, results[i].gamma_eff});
    } else if (opt.mode == "nonselective") {
        const core::ZenoPartition partition = core::spectral_partition(pair.h_meas);
        const CMatrix rho0 = outer(psi0, psi0);
        std::vector<pulsed::NonselectiveResult> results(ns.size());
        parallel_for(ns.size(), opt.jobs ? opt.jobs : default_jobs(), [&](std::size_t i) {
            results[i] = pulsed::pulsed_nonselective(total, partition, rho0, ns[i], opt.t_total);
        });
        table.columns = {"n", "tau", "trace", "purity"};
        for (std::size_t s = 0; s < partition.size(); ++s)
            table.columns.push_back("p" + std::to_string(s));
        for (std::size_t s = 0; s < partition.size(); ++s)
            table.meta.emplace_back("eta" + std::to_string(s), fmt17(partition.etas[s]));
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const CMatrix& rho = results[i].rho;
            std::vector<double> row = {double(ns[i]), opt.t_total / double(ns[i]),
                                       trace(rho).real(), trace(rho * rho).real()};
            for (const double p : results[i].subspace_probs) row.push_back(p);
            table.rows.push_back(std::move(row));
        }
    } else {
        throw CLI::ValidationError("--mode must be selective or nonselective");
    }

    write_table(table, opt.out_path, opt.format, "pulsed");
    return 0;
}

int cmd_zeno_limit(const Options& opt) {
    require_out(opt);
    const models::ModelSpec spec = make_spec(opt);
    const models::HamiltonianPair pair = models::build_model(spec);
    const core::ZenoPartition partition = core::spectral_partition(pair.h_meas);

    Table table;
    table.meta = model_meta(spec, opt);
    for (std::size_t s = 0; s < partition.size(); ++s)
        table.meta.emplace_back("eta" + std::to_string(s), fmt17(partition.etas[s]));

    if (!opt.k_values.empty()) {
        // convergence toward the limit: || U_K - exp(-i H^Z t) || per K
        const std::vector<double> ks = parse_sweep_list(opt.k_values, "--k-values");
        table.columns = {"k", "limit_distance", "intertwining_defect"};
        std::vector<std::array<double, 2>> rows(ks.size());
        parallel_for(ks.size(), opt.jobs ? opt.jobs : default_jobs(), [&](std::size_t i) {
            models::HamiltonianPair scaled = pair;
            scaled.k = ks[i];
            const CMatrix u_k =
                expm(Complex(0.0, -opt.t_max) * (scaled.h_sys + ks[i] * scaled.h_meas));
            const CMatrix u_z = core::zeno_limit_evolution(scaled, partition, opt.t_max);
            rows[i][0] = spectral_norm(u_k - u_z);
            rows[i][1] = core::intertwining_defect(scaled, partition, {ks[i]}, opt.t_max)[0];
        });
        for (std::size_t i = 0; i < ks.size(); ++i)
            table.rows.push_back({ks[i], rows[i][0], rows[i][1]});
        write_table(table, opt.out_path, opt.format, "zeno-limit");
        return 0;
    }

    const std::vector<double> times = time_grid(opt.t_max, opt.dt);
    const CMatrix hz = core::zeno_hamiltonian(pair, partition);
    const core::Trajectory traj =
        core::evolve(hz, basis_state(pair.dim, opt.state), times, &partition);

    table.columns = {"t", "survival"};
    for (std::size_t s = 0; s < partition.size(); ++s)
        table.columns.push_back("p" + std::to_string(s));
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> row = {times[i], traj.survival[i]};
        for (const double p : traj.subspace_probs[i]) row.push_back(p);
        table.rows.push_back(std::move(row));
    }
    write_table(table, opt.out_path, opt.format, "zeno-limit");
    if (opt.plot_script) emit_plot_script(opt.out_path, table.columns.size());
    return 0;
}

int cmd_classify(const Options& opt) {
    const models::ModelSpec spec = make_spec(opt);
    const models::HamiltonianPair pair = models::build_model(spec);
    const std::vector<double> times = time_grid(opt.t_max, opt.dt);
    const CVector psi0 = basis_state(pair.dim, opt.state);

    const core::Trajectory disturbed = core::evolve(pair.total(), psi0, times);
    const core::Trajectory undisturbed = core::evolve(pair.h_sys, psi0, times);
    const double t_poincare = classify::poincare_time_estimate(pair.total());
    const classify::ZenoClassification verdict =
        classify::classify_intervals(disturbed, undisturbed, opt.tol, t_poincare);

    std::cout << "model: " << spec.name << "\n";
    std::cout << "poincare time: " << fmt17(verdict.poincare_time) << "\n";
    std::cout << "verdict: " << classify::to_string(verdict.verdict) << "\n";
    for (const auto& interval : verdict.intervals)
        std::cout << "  " << classify::to_string(interval.kind) << " [" << fmt17(interval.t1)
                  << ", " << fmt17(interval.t2) << "]\n";

    if (!opt.window.empty()) {
        const std::vector<double> window = parse_list(opt.window, "--window");
        if (window.size() != 2) throw CLI::ValidationError("--window expects t_lo,t_hi");
        const double gamma = classify::fit_effective_rate(undisturbed, window[0], window[1]);
        const double gamma_eff = classify::fit_effective_rate(disturbed, window[0], window[1]);
        std::cout << "gamma: " << fmt17(gamma) << "\n";
        std::cout << "gamma_eff: " << fmt17(gamma_eff) << "\n";
        if (gamma >= 0.0 && gamma_eff >= 0.0) {
            std::cout << "rate verdict: "
                      << classify::to_string(
                             classify::classify_rates(gamma, gamma_eff, opt.rate_tol))
                      << "\n";
        } else {
            std::cout << "rate verdict: not applicable (fitted slope is negative; "
                         "the survival is not decaying on this window)\n";
        }
    }

    if (!opt.out_path.empty()) {
        Table table;
        table.columns = {"t", "survival_k", "survival_0"};
        table.meta = model_meta(spec, opt);
        for (std::size_t i = 0; i < times.size(); ++i)
            table.rows.push_back({times[i], disturbed.survival[i], undisturbed.survival[i]});
        write_table(table, opt.out_path, opt.format, "classify");
    }
    return 0;
}

int cmd_dfs(const Options& opt) {
    const models::ModelSpec spec = make_spec(opt);
    const models::HamiltonianPair pair = models::build_model(spec);
    const auto nmax_it = spec.params.find("nmax");
    if (pair.model != "cavity" || nmax_it == spec.params.end())
        throw CLI::ValidationError("dfs requires the cavity model with nmax");
    const auto nmax = static_cast<std::size_t>(nmax_it->second);

    const models::SectorDecomposition sectors = models::excitation_sectors(pair, nmax);
    const dfs::DfsReport report = dfs::dfs_report(pair, sectors);

    std::cout << "model: " << spec.name << "\n";
    std::cout << "dimension: " << report.dimension << "\n";
    for (const auto& [excitation, kernel_dim] : report.per_sector)
        std::cout << "sector N=" << excitation << ": kernel dimension " << kernel_dim << "\n";
    std::cout << "basis:\n";
    for (std::size_t k = 0; k < report.labels.size(); ++k)
        std::cout << "  [" << k << "] " << report.labels[k] << "\n";
    if (report.nonzero_real_etas.empty()) {
        std::cout << "nonzero real eigenvalues: none\n";
    } else {
        std::cout << "nonzero real eigenvalues (flagged):";
        for (const double eta : report.nonzero_real_etas) std::cout << " " << fmt17(eta);
        std::cout << "\n";
    }
    return 0;
}

int cmd_perturb(const Options& opt) {
    const models::ModelSpec spec = make_spec(opt);
    const models::HamiltonianPair pair = models::build_model(spec);
    const core::PerturbativeSpectrum expansion =
        core::perturbative_spectrum(pair, opt.lambda, opt.order);

    std::cout << "model: " << spec.name << "\n";
    std::cout << "lambda: " << fmt17(opt.lambda) << ", order: " << opt.order << "\n";
    for (std::size_t j = 0; j < expansion.eta_expansions.size(); ++j) {
        std::cout << "level " << j << ": eta";
        for (std::size_t p = 0; p < expansion.eta_expansions[j].size(); ++p)
            std::cout << (p ? " + " : " = ") << fmt17(expansion.eta_expansions[j][p])
                      << (p ? "*lambda^" + std::to_string(p) : "");
        std::cout << "\n";
    }

    const std::vector<double> predicted = expansion.predicted_eigenvalues(opt.lambda);
    const EigenDecomposition exact = herm_eig(pair.h_meas + opt.lambda * pair.h_sys);
    double worst = 0.0;
    for (std::size_t j = 0; j < predicted.size(); ++j)
        worst = std::max(worst, std::abs(predicted[j] - exact.values[j].real()));
    std::cout << "max |predicted - exact|: " << fmt17(worst) << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"zeno-lab: quantum Zeno dynamics laboratory"};
    app.require_subcommand(1);

    Options opt;
    std::string config_dummy;

    auto add_common = [&](CLI::App* cmd, bool with_model) {
        cmd->add_option("--config", config_dummy, "key = value config file; flags win");
        if (with_model) {
            cmd->add_option("--model", opt.model, "catalogue model name")
                ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            cmd->add_option("--param", opt.raw_params, "model parameter key=value (repeatable)");
        }
        cmd->add_option("--out", opt.out_path, "output file path")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        cmd->add_option("--format", opt.format, "csv or json-lines")
            ->check(CLI::IsMember({"csv", "json-lines"}))
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        cmd->add_option("--jobs", opt.jobs, "worker threads for sweeps (env ZENO_LAB_JOBS)")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        cmd->add_flag("--emit-plot-script", opt.plot_script, "write a gnuplot script next to the CSV");
        return cmd;
    };
    auto add_grid = [&](CLI::App* cmd) {
        cmd->add_option("--t-max", opt.t_max, "time horizon")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        cmd->add_option("--dt", opt.dt, "grid spacing")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        cmd->add_option("--state", opt.state, "initial basis-state index")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    };

    app.add_subcommand("models", "list the model catalogue");

    add_grid(add_common(app.add_subcommand("simulate", "survival under H + K H_meas"), true));

    CLI::App* sweep = app.add_subcommand("sweep-k", "survival curves for several K");
    add_grid(add_common(sweep, true));
    sweep->add_option("--k-values", opt.k_values, "comma-separated K list")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    CLI::App* pulsed_cmd = app.add_subcommand("pulsed", "pulsed-measurement protocols");
    add_common(pulsed_cmd, true);
    pulsed_cmd->add_option("--state", opt.state, "initial basis-state index")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    pulsed_cmd->add_option("--mode", opt.mode, "selective or nonselective")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    pulsed_cmd->add_option("--projector", opt.projector, "rank1 or sector (selective mode)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    pulsed_cmd->add_option("--n-values", opt.n_values, "comma-separated pulse counts")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    pulsed_cmd->add_option("--t-total", opt.t_total, "total protocol time")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    CLI::App* zeno_cmd = app.add_subcommand("zeno-limit", "limiting Zeno dynamics");
    add_grid(add_common(zeno_cmd, true));
    zeno_cmd->add_option("--k-values", opt.k_values,
                         "when given: tabulate ||U_K - U_Z|| and the intertwining defect at t-max")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    CLI::App* classify_cmd = app.add_subcommand("classify", "QZE/IZE verdict against K=0");
    add_grid(add_common(classify_cmd, true));
    classify_cmd->add_option("--tol", opt.tol, "strict-inequality tolerance")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    classify_cmd->add_option("--window", opt.window, "t_lo,t_hi rate-fit window (optional)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    classify_cmd->add_option("--rate-tol", opt.rate_tol, "rate-comparison tolerance")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    add_common(app.add_subcommand("dfs", "decoherence-free subspace of the cavity model"), true);

    CLI::App* perturb_cmd = app.add_subcommand("perturb", "perturbative sector spectrum");
    add_common(perturb_cmd, true);
    perturb_cmd->add_option("--lambda", opt.lambda, "perturbation strength")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    perturb_cmd->add_option("--order", opt.order, "expansion order (1 or 2)")
        ->check(CLI::IsMember({1, 2}))
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::vector<std::string> merged;
    try {
        merged = merge_config(args);
    } catch (const CLI::Error& error) {
        std::cerr << "zeno-lab: " << error.what() << "\n";
        return 2;
    }

    std::vector<const char*> argv = {"zeno-lab"};
    for (const auto& arg : merged) argv.push_back(arg.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& help) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::Error& error) {
        std::cerr << "zeno-lab: " << error.what() << "\n";
        return 2;
    }

    const std::string subcommand = app.get_subcommands().front()->get_name();
    try {
        if (subcommand == "models") return cmd_models();
        if (subcommand == "simulate") return cmd_simulate(opt);
        if (subcommand == "sweep-k") return cmd_sweep_k(opt);
        if (subcommand == "pulsed") return cmd_pulsed(opt);
        if (subcommand == "zeno-limit") return cmd_zeno_limit(opt);
        if (subcommand == "classify") return cmd_classify(opt);
        if (subcommand == "dfs") return cmd_dfs(opt);
        if (subcommand == "perturb") return cmd_perturb(opt);
    } catch (const CLI::Error& error) {
        std::cerr << "zeno-lab " << subcommand << ": " << error.what() << "\n";
        return 2;
    } catch (const models::ModelError& error) {
        std::cerr << "zeno-lab " << subcommand << ": " << error.what() << "\n";
        return 2;
    } catch (const Error& error) {
        std::cerr << "zeno-lab " << subcommand << " (model " << opt.model
                  << "): " << error.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace zeno::cli
