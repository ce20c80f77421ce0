#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <memory>
#include <vector>

#include "vortlab/lattice.hpp"

namespace vortlab {

using cplx = std::complex<double>;

/// e_k(x) = sqrt2 cos(2 pi k.x) for positive k, sqrt2 sin(2 pi k.x) otherwise.
double eval_basis(Mode k, double x1, double x2);

/// grad e_k(x) = 2 pi k e_{-k}(x).
std::array<double, 2> grad_basis(Mode k, double x1, double x2);

/// sigma_k(x) = (1/sqrt2) (k_perp / |k|^2) e_k(x).
std::array<double, 2> sigma_eval(Mode k, double x1, double x2);

/// Q_N(x) = sum_{k in set} sigma_k(x) (x) sigma_k(x), returned row-major.
/// Independent of x and equal to (1/4) eps^{-2} I_2.
std::array<double, 4> quadratic_form_Q(const ModeSet& set, double x1, double x2);

/// Vorticity on the real basis {e_k}: dense coefficients in canonical order.
class RealField {
public:
    explicit RealField(std::shared_ptr<const ModeSet> set)
        : set_(std::move(set)), a_(set_->size(), 0.0) {}

    const ModeSet& set() const { return *set_; }
    const std::shared_ptr<const ModeSet>& set_ptr() const { return set_; }
    std::size_t size() const { return a_.size(); }

    double& operator[](std::size_t i) { return a_[i]; }
    double operator[](std::size_t i) const { return a_[i]; }
    double coeff(Mode k) const {
        const int i = set_->index_of(k);
        return i < 0 ? 0.0 : a_[std::size_t(i)];
    }
    void set_coeff(Mode k, double v);

    std::vector<double>& data() { return a_; }
    const std::vector<double>& data() const { return a_; }

    /// ||omega||_{L^2}^2 = sum of squared coefficients.
    double l2_norm_sq() const;

private:
    std::shared_ptr<const ModeSet> set_;
    std::vector<double> a_;
};

/// Coefficients on the complex basis {e~_k}: omega = mean + sum c_k e~_k.
/// Real functions have c_{-k} = conj(c_k); zero-mean fields have mean = 0.
class ComplexField {
public:
    explicit ComplexField(std::shared_ptr<const ModeSet> set)
        : set_(std::move(set)), c_(set_->size(), cplx{0.0, 0.0}) {}

    const ModeSet& set() const { return *set_; }
    const std::shared_ptr<const ModeSet>& set_ptr() const { return set_; }
    std::size_t size() const { return c_.size(); }

    cplx& operator[](std::size_t i) { return c_[i]; }
    cplx operator[](std::size_t i) const { return c_[i]; }
    cplx coeff(Mode k) const {
        const int i = set_->index_of(k);
        return i < 0 ? cplx{0.0, 0.0} : c_[std::size_t(i)];
    }

    cplx mean() const { return mean_; }
    void set_mean(cplx m) { mean_ = m; }

    std::vector<cplx>& data() { return c_; }
    const std::vector<cplx>& data() const { return c_; }

private:
    std::shared_ptr<const ModeSet> set_;
    std::vector<cplx> c_;
    cplx mean_{0.0, 0.0};
};

/// Basis change fixed by e_{-j} = (e~_{-j} - e~_j) / (sqrt2 i) for positive j.
ComplexField real_to_complex(const RealField& f);

/// Inverse of real_to_complex. Throws if conjugate symmetry (or a nonzero
/// mean) is violated beyond `tol` relative to the largest coefficient,
/// naming the worst mode.
RealField complex_to_real(const ComplexField& f, double tol = 1e-12);

/// In-place raw-buffer conversions between real coefficients and complex
/// expansion coefficients (canonical order). Used by the integrators.
struct BasisMap {
    explicit BasisMap(const ModeSet& set);
    void to_complex(const double* x, cplx* z) const;
    void to_real(const cplx* z, double* x) const;
    // (positive index, negative index) pairs
    std::vector<std::pair<int, int>> pairs;
    std::size_t n = 0;
};

/// u = omega * K componentwise: u_hat(k) = 2 pi i (k_perp/|k|^2) omega_hat(k).
/// Requires zero mean; the output satisfies k . u_hat(k) = 0 exactly.
std::pair<ComplexField, ComplexField> biot_savart(const ComplexField& omega);

/// Exact expansion of the pointwise product e_a * e_b in {1} U {e_m}.
struct ProductExpansion {
    double constant = 0.0;
    int n = 0;
    std::array<std::pair<Mode, double>, 4> term{};
};
ProductExpansion expand_product(Mode a, Mode b);

/// Galerkin matrix of sigma_k . grad on span{e_l : l in set}:
/// A[m,l] = <Pi(sigma_k . grad e_l), e_m> = sqrt2 pi C_{k,l} <e_k e_{-l}, e_m>.
/// Stored column-sparse; antisymmetry A[m,l] = -A[l,m] holds bit-exactly by
/// construction, and A[m,l] = 0 unless m in {+-(k+l), +-(k-l)}.
class NoiseCoupling {
public:
    NoiseCoupling(Mode k, std::shared_ptr<const ModeSet> set);

    Mode k() const { return k_; }
    const ModeSet& set() const { return *set_; }

    /// y = A x (y zeroed first). Buffers of length set().size().
    void apply(const double* x, double* y) const;
    /// y += s * A x.
    void apply_add(const double* x, double* y, double s = 1.0) const;

    double entry(Mode m, Mode l) const;
    std::size_t nnz() const { return row_.size(); }

private:
    Mode k_;
    std::shared_ptr<const ModeSet> set_;
    std::vector<int> col_start_;
    std::vector<int> row_;
    std::vector<double> val_;
};

/// Field serialization: one metadata header line, then k1,k2,re,im rows with
/// shortest round-trip decimal floats (bit-exact across write/read).
void write_field_csv(std::ostream& os, const RealField& f);
void write_field_csv(std::ostream& os, const ComplexField& f);
struct FieldCsv {
    int cutoff;
    SetKind kind;
    bool is_real;
    std::shared_ptr<RealField> real;
    std::shared_ptr<ComplexField> complex_field;
};
FieldCsv read_field_csv(std::istream& is);

}  // namespace vortlab
