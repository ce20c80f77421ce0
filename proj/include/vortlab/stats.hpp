#pragma once

#include <cstdint>
#include <vector>

#include "vortlab/dynamics.hpp"

namespace vortlab {

struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0, se_mean = 0.0;
    double variance = 0.0, se_variance = 0.0;
    double fourth = 0.0, se_fourth = 0.0;
};
MomentSummary moments(const std::vector<double>& xs);

/// Two-sided Kolmogorov-Smirnov statistic against the standard normal CDF.
double ks_statistic_normal(std::vector<double> xs);
/// Asymptotic rejection threshold sqrt(ln(2/alpha)/2) / sqrt(n).
double ks_threshold(std::size_t n, double alpha);

struct StationarityCell {
    double time = 0.0;
    Mode mode{0, 0};
    double variance = 0.0, se = 0.0;
    double ks = 0.0, ks_limit = 0.0;
    bool variance_ok = false, ks_ok = false;
};

struct EnsembleSummary {
    std::size_t n_paths = 0;
    std::vector<StationarityCell> cells;  // one per (recorded time > 0, observable)
    bool all_ok = true;
};

/// Per-time, per-observable variance (4-SE band around 1) and KS normality
/// at the given significance. Requires at least 100 paths on a common grid.
EnsembleSummary stationarity_report(const std::vector<TrajectoryRecord>& ensemble,
                                    double ks_alpha = 1e-3);

struct QvFit {
    double slope = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
};

/// Least-squares slope (through the origin) of realized QV against time,
/// with a path-level bootstrap percentile interval.
QvFit qv_fit(const std::vector<TrajectoryRecord>& ensemble, Mode l, Mode m,
             std::uint64_t bootstrap_seed, int n_boot = 1000, double ci_level = 0.95);

struct MomentScanPoint {
    double gap = 0.0;
    double moment = 0.0;
    double se = 0.0;
};
struct MomentScan {
    std::vector<MomentScanPoint> points;
    double loglog_slope = 0.0;
};

/// E[(x_{t+g} - x_t)^order] per gap from recorded trajectories (overlapping
/// windows, path-level standard errors) plus the log-log regression slope.
MomentScan increment_moments(const std::vector<TrajectoryRecord>& ensemble, Mode obs,
                             const std::vector<double>& gaps, int order = 4);

/// Convenience wrapper: simulate an ensemble under cfg and scan it.
MomentScan increment_moment_scan(const SimulationConfig& cfg, int n_paths,
                                 const std::vector<double>& gaps, int order = 4,
                                 int threads = 0);

struct AutocorrCurve {
    std::vector<double> lags;
    std::vector<double> rho;
    std::vector<double> lo, hi;  // bootstrap bands
};
struct AutocorrCompare {
    AutocorrCurve a, b;
    double distance = 0.0;  // discrete L2 distance between the two curves
    bool bands_overlap = true;
};

/// Stationary autocorrelation of <omega_t, e_l> for two ensembles on a common
/// lag grid (lags must be multiples of both record spacings).
AutocorrCompare autocorrelation_compare(const std::vector<TrajectoryRecord>& ens_a,
                                        const std::vector<TrajectoryRecord>& ens_b, Mode l,
                                        const std::vector<double>& lags,
                                        std::uint64_t bootstrap_seed, int n_boot = 400,
                                        double ci_level = 0.95);

}  // namespace vortlab
