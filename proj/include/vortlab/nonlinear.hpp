#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "vortlab/basis.hpp"

namespace vortlab {

/// Lambda_M-truncated Biot-Savart kernel K_M(z). The spherical partial sums
/// converge only distributionally; pointwise they carry an O(1) oscillation
/// (see docs/oracles note), so this is a test/diagnostic object only.
std::array<double, 2> kernel_truncated(double z1, double z2, int M);

/// H_{e_j}(x,y) evaluated with the Lambda_M kernel:
/// (1/2) K_M(x-y) . (grad e_j(x) - grad e_j(y)), and 0 when x = y.
double h_phi_eval(Mode j, std::array<double, 2> x, std::array<double, 2> y, int M);

/// <H_{e_j}, e~_k (x) e~_l>: closed form. Purely real for positive j,
/// purely imaginary otherwise; zero unless j = +-(k+l) with k,l nonzero.
cplx h_coeff(Mode j, Mode k, Mode l);

/// |h_coeff|^2 through the reduced form
/// 2 pi^4 delta_{j,+-(k+l)} (j.k_perp)^2 (1/|l|^2 - 1/|k|^2)^2.
double h_coeff_sq(Mode j, Mode k, Mode l);

/// sum over k,l in Lambda_cutoff of |h_coeff(j,k,l)|^2, reduced to a single
/// lattice sum over k.
double h_coeff_sq_sum(Mode j, int cutoff);

/// The full sum over Z^2_0 x Z^2_0 with a certified absolute tail <= tol.
double h_coeff_sq_sum_all(Mode j, double tol);

/// Nonlinear drift of the vorticity equation on Lambda_N, i.e. the term that
/// appears on the right-hand side of d<omega,e_j>/dt:
///   <drift, e_j> = <omega_N (x) omega_N, H_{e_j}>
///                = sum_{k,l in Lambda_N} h_coeff(j,k,l) w_k w_l
/// with w the complex coefficients of omega. Equals -Pi_N(u(omega).grad omega).
class DriftOperator {
public:
    enum class Backend { direct, pseudospectral };

    /// grid = 0 picks the smallest friendly FFT size >= 3N+1; an explicit
    /// grid below 3N is rejected (exact dealiasing requirement).
    DriftOperator(std::shared_ptr<const ModeSet> set, Backend backend, int grid = 0);
    ~DriftOperator();
    DriftOperator(const DriftOperator&) = delete;
    DriftOperator& operator=(const DriftOperator&) = delete;

    /// out = drift(x). Per-instance scratch: instances are not shareable
    /// across threads; clone one per thread instead.
    void apply(const double* x, double* out);
    RealField apply(const RealField& f);

    Backend backend() const { return backend_; }
    int grid() const { return grid_; }
    const ModeSet& set() const { return *set_; }

private:
    struct Impl;
    std::shared_ptr<const ModeSet> set_;
    Backend backend_;
    int grid_ = 0;
    std::unique_ptr<Impl> impl_;
};

/// Single drift coefficient <omega (x) omega, H_{e_j}> at omega's own cutoff,
/// O(|Lambda_N|) without any precomputed stencil.
double drift_coefficient(const RealField& omega, Mode j);

/// R_{l,m}(set) = sum_{k in set} C_{k,l} C_{k,m}
///                (<omega, e_k e_{-l}> <omega, e_k e_{-m}> - delta_{l,m}).
/// The pairings are exact product expansions; omega must carry every product
/// mode (cutoff >= noise cutoff + max(|l|,|m|)), otherwise this throws.
double r_term(const RealField& omega, Mode l, Mode m, const ModeSet& noise_set);

/// Cylinder function descriptor F = f(<omega,e_l>; l in support).
struct CylinderFunction {
    std::vector<Mode> support;
    std::function<double(const std::vector<double>&)> value;
    std::function<std::vector<double>(const std::vector<double>&)> grad;
    std::function<std::vector<std::vector<double>>(const std::vector<double>&)> hess;
};

struct GeneratorMode {
    bool limit = true;
    int approx_cutoff = 0;  // N of the Galerkin generator when limit = false
    static GeneratorMode limit_mode() { return {true, 0}; }
    static GeneratorMode approx(int N) { return {false, N}; }
};

/// Generator action on cylinder functions:
///  limit:     4 nu pi^2 sum_l |l|^2 [f_ll - f_l <omega,e_l>]
///             + sum_l f_l <omega (x) omega, H_{e_l}>
///  approx(N): 8 nu eps~_N^2 L0_N F + sum_l f_l <omega_N (x) omega_N, H_{e_l}>,
///             L0_N by the R-term + diagonal decomposition over Gamma_N.
/// approx mode requires support(F) inside the safe band Lambda_{N/3}.
double generator_apply(const CylinderFunction& F, const RealField& omega, double nu,
                       GeneratorMode mode);

/// Truncation tail of the Galerkin drift in H^{-2-delta}:
/// T(N) = 2 sum_j |j|^{-(4+2delta)} sum_{(k,l) not in Lambda_N^2} |h_coeff|^2,
/// evaluated with a window common to every N (j in Lambda_Jmax, k in
/// Lambda_Kmax), so differences between the returned values are exact.
struct BTailResult {
    std::vector<double> values;   // T(N) per requested N
    double window_tail_bound;     // bound on the common omitted mass
};
BTailResult b_tail_curve(const std::vector<int>& cutoffs, double delta, int j_max, int k_max);

/// All (k,l,value) triples of <H_{e_j}, e~_k (x) e~_l> with k,l in Lambda_N.
struct HTableEntry {
    Mode k, l;
    cplx value;
};
std::vector<HTableEntry> h_table(Mode j, int cutoff);

}  // namespace vortlab
