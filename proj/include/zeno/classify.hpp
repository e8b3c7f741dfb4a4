#pragma once

#include <optional>
#include <vector>

#include "zeno/core.hpp"
#include "zeno/linalg.hpp"

// Zeno-effect classification.  Oscillating systems are compared interval by
// interval against the undisturbed survival curve; unstable systems are
// compared through decay rates (fitted or golden-rule).

namespace zeno::classify {

enum class Verdict { QZE, IZE, MIXED, NONE };

const char* to_string(Verdict verdict);

struct Interval {
    double t1 = 0.0;
    double t2 = 0.0;
    Verdict kind = Verdict::NONE;
};

struct RateComparison {
    double gamma = 0.0;
    double gamma_eff = 0.0;
};

struct ZenoClassification {
    Verdict verdict = Verdict::NONE;
    std::vector<Interval> intervals;  // clipped to [0, poincare_time]
    double poincare_time = 0.0;
    std::optional<RateComparison> rate_based;
};

/// Recurrence-time estimate 2 pi / (smallest nonzero eigenvalue gap of the
/// total Hamiltonian); infinity when the spectrum is fully degenerate.
double poincare_time_estimate(const CMatrix& total);

/// Interval-based QZE/IZE classification of a disturbed survival curve p_K
/// against the undisturbed p_0 on an identical time grid.  Maximal runs with
/// p_K > p_0 + tol (or <, - tol) become intervals; the verdict compares the
/// interval lengths accumulated inside [0, poincare_time].
ZenoClassification classify_intervals(const core::Trajectory& p_k, const core::Trajectory& p_0,
                                      double tol, double poincare_time);

/// Least-squares slope of -log p(t) over the window [t_lo, t_hi].
/// Needs at least 8 samples and strictly positive survival there.
double fit_effective_rate(const core::Trajectory& traj, double t_lo, double t_hi);

/// Golden-rule rate 2 pi sum_f |<f|H_int|a>|^2 L(omega_a - omega_f) with a
/// unit-area Lorentzian L of half-width `broadening` standing in for the
/// energy delta.  Requires <a|H_int|a> = 0.
double golden_rule_rate(const std::vector<double>& h0_diag, const CMatrix& h_int, std::size_t a,
                        double broadening);

/// Rate-based verdict: QZE when gamma_eff < gamma (1 - tol), IZE when
/// gamma_eff > gamma (1 + tol), NONE otherwise.
Verdict classify_rates(double gamma, double gamma_eff, double tol);

}  // namespace zeno::classify
