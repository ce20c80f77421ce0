#include "vortlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vortlab {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

int observable_index(const TrajectoryRecord& rec, Mode l) {
    for (std::size_t i = 0; i < rec.observables.size(); ++i)
        if (rec.observables[i] == l) return int(i);
    return -1;
}

double percentile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    const double pos = q * double(xs.size() - 1);
    const std::size_t lo = std::size_t(pos);
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double w = pos - double(lo);
    return (1.0 - w) * xs[lo] + w * xs[hi];
}

// least squares y ~ a + b x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

void check_common_grid(const std::vector<TrajectoryRecord>& ensemble) {
    if (ensemble.empty()) throw std::invalid_argument("stats: empty ensemble");
    const auto& t0 = ensemble.front().times;
    for (const auto& rec : ensemble)
        if (rec.times != t0 || rec.observables != ensemble.front().observables)
            throw std::invalid_argument("stats: ensemble paths disagree on grid or observables");
}

}  // namespace

MomentSummary moments(const std::vector<double>& xs) {
    MomentSummary m;
    m.n = xs.size();
    if (m.n < 2) throw std::invalid_argument("moments: need at least two samples");
    const double n = double(m.n);
    for (double x : xs) m.mean += x;
    m.mean /= n;
    double s2 = 0.0, s4 = 0.0, s8 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        s2 += d * d;
        const double d4 = d * d * d * d;
        s4 += d4;
        s8 += d4 * d4;
    }
    m.variance = s2 / (n - 1.0);
    m.fourth = s4 / n;
    m.se_mean = std::sqrt(m.variance / n);
    // SE of the sample variance via the fourth central moment
    m.se_variance = std::sqrt(std::max(0.0, (s4 / n - m.variance * m.variance)) / n);
    m.se_fourth = std::sqrt(std::max(0.0, (s8 / n - m.fourth * m.fourth)) / n);
    return m;
}

double ks_statistic_normal(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("ks_statistic_normal: empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = normal_cdf(xs[i]);
        d = std::max(d, std::max((double(i) + 1.0) / n - f, f - double(i) / n));
    }
    return d;
}

double ks_threshold(std::size_t n, double alpha) {
    return std::sqrt(std::log(2.0 / alpha) / 2.0) / std::sqrt(double(n));
}

EnsembleSummary stationarity_report(const std::vector<TrajectoryRecord>& ensemble,
                                    double ks_alpha) {
    check_common_grid(ensemble);
    if (ensemble.size() < 100)
        throw std::invalid_argument("stationarity_report: need at least 100 paths");
    EnsembleSummary out;
    out.n_paths = ensemble.size();
    const auto& times = ensemble.front().times;
    const auto& obs = ensemble.front().observables;
    for (std::size_t t = 0; t < times.size(); ++t) {
        if (times[t] == 0.0) continue;  // the initial slice is the sampler itself
        for (std::size_t o = 0; o < obs.size(); ++o) {
            std::vector<double> xs(ensemble.size());
            for (std::size_t p = 0; p < ensemble.size(); ++p) xs[p] = ensemble[p].mode_values[t][o];
            const MomentSummary m = moments(xs);
            StationarityCell c;
            c.time = times[t];
            c.mode = obs[o];
            c.variance = m.variance;
            c.se = m.se_variance;
            c.variance_ok = std::abs(m.variance - 1.0) <= 4.0 * m.se_variance;
            c.ks = ks_statistic_normal(xs);
            c.ks_limit = ks_threshold(ensemble.size(), ks_alpha);
            c.ks_ok = c.ks <= c.ks_limit;
            out.all_ok = out.all_ok && c.variance_ok && c.ks_ok;
            out.cells.push_back(c);
        }
    }
    if (out.cells.empty()) throw std::invalid_argument("stationarity_report: no recorded times");
    return out;
}

QvFit qv_fit(const std::vector<TrajectoryRecord>& ensemble, Mode l, Mode m,
             std::uint64_t bootstrap_seed, int n_boot, double ci_level) {
    check_common_grid(ensemble);
    const auto& times = ensemble.front().times;
    if (times.size() < 3) throw std::invalid_argument("qv_fit: fewer than 3 time points");
    const int il = observable_index(ensemble.front(), l);
    const int im = observable_index(ensemble.front(), m);
    if (il < 0 || im < 0) throw std::invalid_argument("qv_fit: observable not recorded");
    const std::size_t nobs = ensemble.front().observables.size();
    const std::size_t q_idx = std::size_t(il) * nobs + std::size_t(im);

    // per-path through-origin slope of QV(t)
    double stt = 0.0;
    for (double t : times) stt += t * t;
    std::vector<double> slopes(ensemble.size());
    for (std::size_t p = 0; p < ensemble.size(); ++p) {
        double sty = 0.0;
        for (std::size_t t = 0; t < times.size(); ++t)
            sty += times[t] * ensemble[p].qv_accum[t][q_idx];
        slopes[p] = sty / stt;
    }
    double mean_slope = 0.0;
    for (double s : slopes) mean_slope += s;
    mean_slope /= double(slopes.size());

    RngStream rng(SeededSampler{bootstrap_seed, 0});
    std::vector<double> boot(std::size_t(n_boot));
    for (int b = 0; b < n_boot; ++b) {
        double acc = 0.0;
        for (std::size_t p = 0; p < slopes.size(); ++p) {
            const std::size_t pick =
                std::size_t(rng.uniform() * double(slopes.size())) % slopes.size();
            acc += slopes[pick];
        }
        boot[std::size_t(b)] = acc / double(slopes.size());
    }
    const double a = (1.0 - ci_level) / 2.0;
    return {mean_slope, percentile(boot, a), percentile(boot, 1.0 - a)};
}

MomentScan increment_moments(const std::vector<TrajectoryRecord>& ensemble, Mode obs,
                             const std::vector<double>& gaps, int order) {
    check_common_grid(ensemble);
    if (gaps.size() < 2)
        throw std::invalid_argument("increment_moments: slope needs at least two gaps");
    const int io = observable_index(ensemble.front(), obs);
    if (io < 0) throw std::invalid_argument("increment_moments: observable not recorded");
    const auto& times = ensemble.front().times;
    if (times.size() < 2) throw std::invalid_argument("increment_moments: too few records");
    const double spacing = times[1] - times[0];

    MomentScan out;
    std::vector<double> lx, ly;
    for (double g : gaps) {
        const double steps_d = g / spacing;
        const long steps = std::lround(steps_d);
        if (steps < 1 || std::abs(steps_d - double(steps)) > 1e-9)
            throw std::invalid_argument("increment_moments: gap is not a multiple of the record spacing");
        if (std::size_t(steps) >= times.size())
            throw std::invalid_argument("increment_moments: gap exceeds the horizon");
        std::vector<double> per_path(ensemble.size());
        for (std::size_t p = 0; p < ensemble.size(); ++p) {
            double acc = 0.0;
            std::size_t cnt = 0;
            for (std::size_t t = 0; t + std::size_t(steps) < times.size(); ++t) {
                const double d = ensemble[p].mode_values[t + std::size_t(steps)][std::size_t(io)] -
                                 ensemble[p].mode_values[t][std::size_t(io)];
                acc += std::pow(d, double(order));
                ++cnt;
            }
            per_path[p] = acc / double(cnt);
        }
        const MomentSummary m = moments(per_path);
        out.points.push_back({g, m.mean, m.se_mean});
        lx.push_back(std::log(g));
        ly.push_back(std::log(std::max(m.mean, 1e-300)));
    }
    out.loglog_slope = ls_slope(lx, ly);
    return out;
}

MomentScan increment_moment_scan(const SimulationConfig& cfg, int n_paths,
                                 const std::vector<double>& gaps, int order, int threads) {
    if (cfg.observables.empty())
        throw std::invalid_argument("increment_moment_scan: config must name an observable");
    for (double g : gaps)
        if (g > cfg.horizon) throw std::invalid_argument("increment_moment_scan: gap beyond horizon");
    const auto ensemble = simulate_ensemble(cfg, n_paths, threads);
    return increment_moments(ensemble, cfg.observables.front(), gaps, order);
}

namespace {

AutocorrCurve autocorr_curve(const std::vector<TrajectoryRecord>& ens, Mode l,
                             const std::vector<double>& lags, RngStream& rng, int n_boot,
                             double ci_level) {
    const int io = observable_index(ens.front(), l);
    if (io < 0) throw std::invalid_argument("autocorrelation: observable not recorded");
    const auto& times = ens.front().times;
    const double spacing = times[1] - times[0];
    const std::size_t P = ens.size(), T = times.size();

    std::vector<long> steps(lags.size());
    for (std::size_t g = 0; g < lags.size(); ++g) {
        const double s = lags[g] / spacing;
        steps[g] = std::lround(s);
        if (std::abs(s - double(steps[g])) > 1e-9 || steps[g] < 0 || std::size_t(steps[g]) >= T)
            throw std::invalid_argument("autocorrelation: lag grid mismatched with records");
    }

    // per-path cross products; global variance normalization
    std::vector<std::vector<double>> num(lags.size(), std::vector<double>(P, 0.0));
    std::vector<double> var_p(P, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        const auto& mv = ens[p].mode_values;
        double v = 0.0;
        for (std::size_t t = 0; t < T; ++t) v += mv[t][std::size_t(io)] * mv[t][std::size_t(io)];
        var_p[p] = v / double(T);
        for (std::size_t g = 0; g < lags.size(); ++g) {
            const std::size_t s = std::size_t(steps[g]);
            double acc = 0.0;
            for (std::size_t t = 0; t + s < T; ++t)
                acc += mv[t][std::size_t(io)] * mv[t + s][std::size_t(io)];
            num[g][p] = acc / double(T - s);
        }
    }

    const auto rho_of = [&](const std::vector<std::size_t>& picks) {
        std::vector<double> rho(lags.size());
        double v = 0.0;
        for (std::size_t p : picks) v += var_p[p];
        v /= double(picks.size());
        for (std::size_t g = 0; g < lags.size(); ++g) {
            double acc = 0.0;
            for (std::size_t p : picks) acc += num[g][p];
            rho[g] = acc / double(picks.size()) / v;
        }
        return rho;
    };

    std::vector<std::size_t> all(P);
    for (std::size_t p = 0; p < P; ++p) all[p] = p;
    AutocorrCurve out;
    out.lags = lags;
    out.rho = rho_of(all);

    std::vector<std::vector<double>> boots(lags.size(), std::vector<double>(std::size_t(n_boot)));
    std::vector<std::size_t> picks(P);
    for (int b = 0; b < n_boot; ++b) {
        for (std::size_t p = 0; p < P; ++p)
            picks[p] = std::size_t(rng.uniform() * double(P)) % P;
        const auto rho = rho_of(picks);
        for (std::size_t g = 0; g < lags.size(); ++g) boots[g][std::size_t(b)] = rho[g];
    }
    const double a = (1.0 - ci_level) / 2.0;
    for (std::size_t g = 0; g < lags.size(); ++g) {
        out.lo.push_back(percentile(boots[g], a));
        out.hi.push_back(percentile(boots[g], 1.0 - a));
    }
    return out;
}

}  // namespace

AutocorrCompare autocorrelation_compare(const std::vector<TrajectoryRecord>& ens_a,
                                        const std::vector<TrajectoryRecord>& ens_b, Mode l,
                                        const std::vector<double>& lags,
                                        std::uint64_t bootstrap_seed, int n_boot,
                                        double ci_level) {
    check_common_grid(ens_a);
    check_common_grid(ens_b);
    if (lags.empty()) throw std::invalid_argument("autocorrelation_compare: empty lag grid");
    RngStream rng(SeededSampler{bootstrap_seed, 1});
    AutocorrCompare out;
    out.a = autocorr_curve(ens_a, l, lags, rng, n_boot, ci_level);
    out.b = autocorr_curve(ens_b, l, lags, rng, n_boot, ci_level);
    double d2 = 0.0;
    bool overlap = true;
    for (std::size_t g = 0; g < lags.size(); ++g) {
        const double d = out.a.rho[g] - out.b.rho[g];
        d2 += d * d;
        if (out.a.lo[g] > out.b.hi[g] || out.b.lo[g] > out.a.hi[g]) overlap = false;
    }
    out.distance = std::sqrt(d2);
    out.bands_overlap = overlap;
    return out;
}

}  // namespace vortlab
