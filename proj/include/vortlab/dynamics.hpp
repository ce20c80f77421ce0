#pragma once

#include <memory>
#include <vector>

#include "vortlab/measure.hpp"
#include "vortlab/nonlinear.hpp"

namespace vortlab {

enum class Scheme { ito_em, cayley_split };
enum class Equation { transport_euler, limit_nse };

struct SimulationConfig {
    Equation equation = Equation::transport_euler;
    double nu = 0.0;
    int cutoff = 0;  // state lives on Lambda_cutoff
    SetKind noise_kind = SetKind::third;
    Scheme scheme = Scheme::cayley_split;
    double dt = 0.0;
    double horizon = 0.0;
    int record_stride = 1;
    SeededSampler seed;
    std::vector<Mode> observables;

    /// Explicit-scheme stability bound dt <= 0.1 / (4 nu pi^2 N^2) for ito_em.
    double ito_em_dt_bound() const;
    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;
};

struct TrajectoryRecord {
    std::vector<Mode> observables;
    std::vector<double> times;                     // strictly increasing, starts at 0
    std::vector<std::vector<double>> mode_values;  // [time][observable]
    std::vector<double> enstrophy;                 // ||omega||_{L^2}^2 per time
    std::vector<std::vector<double>> qv_accum;     // [time][a*nobs+b] running sum dX_a dX_b
};

/// Running realized quadratic covariation of two recorded observables.
std::vector<std::pair<double, double>> realized_qv(const TrajectoryRecord& rec, Mode l, Mode m);

/// b_N(omega) + 4 nu eps~^2 sum_{k in noise set} A_k(A_k omega): the full Ito
/// drift of the transport equation. On safe-band modes the correction part
/// equals -4 nu pi^2 |j|^2 <omega,e_j> exactly.
RealField ito_drift(const RealField& omega, const SimulationConfig& cfg);

/// One-step integrators; the state vector x holds real coefficients on
/// Lambda_N in canonical order. Instances own FFTW plans and RNG-independent
/// scratch, so share one per thread.
class TransportIntegrator {
public:
    explicit TransportIntegrator(const SimulationConfig& cfg);
    ~TransportIntegrator();

    /// Advance by dt; dW values are drawn from `noise[q]`, one stream per
    /// noise mode q in canonical order.
    void step(std::vector<double>& x, std::vector<RngStream>& noise);

    /// The Cayley noise substep alone (for norm-preservation checks).
    void noise_substep(std::vector<double>& x, const std::vector<double>& dW);

    const ModeSet& state_set() const { return *state_; }
    const ModeSet& noise_set() const { return *noise_; }
    double eps_noise() const { return eps_; }

private:
    struct Impl;
    std::shared_ptr<const ModeSet> state_;
    std::shared_ptr<const ModeSet> noise_;
    double eps_;
    SimulationConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

class LimitNseIntegrator {
public:
    explicit LimitNseIntegrator(const SimulationConfig& cfg);
    ~LimitNseIntegrator();

    void step(std::vector<double>& x, std::vector<RngStream>& noise);
    const ModeSet& state_set() const { return *state_; }

private:
    struct Impl;
    std::shared_ptr<const ModeSet> state_;
    SimulationConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

/// One Monte-Carlo path: initial condition sampled from the Lambda_N white
/// noise marginal, observables recorded every record_stride steps, realized
/// QV accumulated per step. Deterministic in (cfg.seed, path_index).
TrajectoryRecord simulate_path(const SimulationConfig& cfg, std::uint64_t path_index = 0);

/// Independent paths 0..n_paths-1; `threads` <= 0 picks hardware concurrency.
/// Results are independent of the thread count.
std::vector<TrajectoryRecord> simulate_ensemble(const SimulationConfig& cfg, int n_paths,
                                                int threads = 0);

}  // namespace vortlab
