#include "zeno/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zeno::classify {

namespace {

constexpr double kPi = 3.14159265358979323846;

// total interval length inside [0, horizon]
double clipped_length(const std::vector<Interval>& intervals, Verdict kind, double horizon) {
    double total = 0.0;
    for (const Interval& iv : intervals) {
        if (iv.kind != kind) continue;
        const double lo = std::max(0.0, iv.t1);
        const double hi = std::min(horizon, iv.t2);
        if (hi > lo) total += hi - lo;
    }
    return total;
}

}  // namespace

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::QZE: return "QZE";
        case Verdict::IZE: return "IZE";
        case Verdict::MIXED: return "MIXED";
        case Verdict::NONE: return "NONE";
    }
    return "NONE";
}

double poincare_time_estimate(const CMatrix& total) {
    std::vector<Complex> values;
    if (is_hermitian(total, 1e-10)) {
        for (const Complex lam : herm_eig(total).values) values.push_back(lam);
    } else {
        for (const Complex lam : gen_eig(total).values) values.push_back(lam);
    }
    const double scale = std::max(1.0, max_abs(total));
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            const double gap = std::abs(values[i] - values[j]);
            if (gap > 1e-9 * scale) min_gap = std::min(min_gap, gap);
        }
    if (!std::isfinite(min_gap)) return std::numeric_limits<double>::infinity();
    return 2.0 * kPi / min_gap;
}

ZenoClassification classify_intervals(const core::Trajectory& p_k, const core::Trajectory& p_0,
                                      double tol, double poincare_time) {
    if (tol <= 0.0) throw Error("classify_intervals: tol must be positive");
    if (p_k.times.size() != p_0.times.size())
        throw DimensionError("classify_intervals: time grids differ in length");
    for (std::size_t i = 0; i < p_k.times.size(); ++i)
        if (std::abs(p_k.times[i] - p_0.times[i]) > 1e-12 * std::max(1.0, std::abs(p_0.times[i])))
            throw Error("classify_intervals: time grids do not match");

    ZenoClassification result;
    result.poincare_time = poincare_time;

    // maximal runs of strict inequality beyond tol
    const std::size_t count = p_k.times.size();
    std::size_t i = 0;
    while (i < count) {
        int sign = 0;
        const double diff = p_k.survival[i] - p_0.survival[i];
        if (diff > tol) sign = 1;
        else if (diff < -tol) sign = -1;
        if (sign == 0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < count) {
            const double d = p_k.survival[j + 1] - p_0.survival[j + 1];
            if ((sign > 0 && d > tol) || (sign < 0 && d < -tol)) ++j;
            else break;
        }
        result.intervals.push_back(
            {p_k.times[i], p_k.times[j], sign > 0 ? Verdict::QZE : Verdict::IZE});
        i = j + 1;
    }

    const double horizon = std::isfinite(poincare_time)
                               ? poincare_time
                               : (p_k.times.empty() ? 0.0 : p_k.times.back());
    const double qze_length = clipped_length(result.intervals, Verdict::QZE, horizon);
    const double ize_length = clipped_length(result.intervals, Verdict::IZE, horizon);

    const double dominant = 0.5 * horizon;
    const double negligible = 0.05 * horizon;
    if (qze_length >= dominant && ize_length < negligible) result.verdict = Verdict::QZE;
    else if (ize_length >= dominant && qze_length < negligible) result.verdict = Verdict::IZE;
    else if (qze_length >= negligible && ize_length >= negligible) result.verdict = Verdict::MIXED;
    else result.verdict = Verdict::NONE;

    // only intervals inside the horizon support the verdict
    std::vector<Interval> clipped;
    for (Interval iv : result.intervals) {
        iv.t1 = std::max(0.0, iv.t1);
        iv.t2 = std::min(horizon, iv.t2);
        if (iv.t2 >= iv.t1) clipped.push_back(iv);
    }
    result.intervals = std::move(clipped);
    return result;
}

double fit_effective_rate(const core::Trajectory& traj, double t_lo, double t_hi) {
    if (t_hi <= t_lo) throw Error("fit_effective_rate: empty window");

    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t < t_lo || t > t_hi) continue;
        const double p = traj.survival[i];
        if (p <= 0.0) throw Error("fit_effective_rate: nonpositive survival in window");
        ts.push_back(t);
        ys.push_back(-std::log(p));
    }
    if (ts.size() < 8) throw Error("fit_effective_rate: fewer than 8 samples in window");

    double t_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        t_mean += ts[i];
        y_mean += ys[i];
    }
    t_mean /= double(ts.size());
    y_mean /= double(ts.size());

    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        cov += (ts[i] - t_mean) * (ys[i] - y_mean);
        var += (ts[i] - t_mean) * (ts[i] - t_mean);
    }
    return cov / var;
}

double golden_rule_rate(const std::vector<double>& h0_diag, const CMatrix& h_int, std::size_t a,
                        double broadening) {
    if (broadening <= 0.0) throw Error("golden_rule_rate: broadening must be positive");
    if (!h_int.square() || h_int.rows() != h0_diag.size())
        throw DimensionError("golden_rule_rate: shape mismatch");
    if (a >= h0_diag.size()) throw Error("golden_rule_rate: initial index out of range");
    if (!is_hermitian(h_int, 1e-10))
        throw HermiticityError("golden_rule_rate: H_int must be Hermitian");
    if (std::abs(h_int(a, a)) > 1e-10 * std::max(1.0, max_abs(h_int)))
        throw Error("golden_rule_rate: diagonal coupling <a|H_int|a> is nonzero");

    const double omega_a = h0_diag[a];
    double rate = 0.0;
    for (std::size_t f = 0; f < h0_diag.size(); ++f) {
        if (f == a) continue;
        const double detuning = omega_a - h0_diag[f];
        const double lorentzian =
            broadening / (kPi * (detuning * detuning + broadening * broadening));
        rate += std::norm(h_int(f, a)) * lorentzian;
    }
    return 2.0 * kPi * rate;
}

Verdict classify_rates(double gamma, double gamma_eff, double tol) {
    if (gamma < 0.0 || gamma_eff < 0.0) throw Error("classify_rates: rates must be nonnegative");
    if (gamma_eff < gamma * (1.0 - tol)) return Verdict::QZE;
    if (gamma_eff > gamma * (1.0 + tol)) return Verdict::IZE;
    return Verdict::NONE;
}

}  // namespace zeno::classify
