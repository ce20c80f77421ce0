#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace vortlab {

/// Wavevector on the integer lattice Z^2 \ {0}.
struct Mode {
    int k1 = 0;
    int k2 = 0;

    friend bool operator==(Mode a, Mode b) { return a.k1 == b.k1 && a.k2 == b.k2; }
    friend bool operator!=(Mode a, Mode b) { return !(a == b); }
    Mode operator-() const { return {-k1, -k2}; }
    Mode operator+(Mode o) const { return {k1 + o.k1, k2 + o.k2}; }
    Mode operator-(Mode o) const { return {k1 - o.k1, k2 - o.k2}; }

    long norm2() const { return long(k1) * k1 + long(k2) * k2; }
    bool is_zero() const { return k1 == 0 && k2 == 0; }

    /// Sign class: k is "positive" iff k1 > 0, or k1 = 0 and k2 > 0.
    bool is_positive() const { return k1 > 0 || (k1 == 0 && k2 > 0); }
};

/// a_perp . b where a_perp = (a2, -a1).
inline long perp_dot(Mode a, Mode b) { return long(a.k2) * b.k1 - long(a.k1) * b.k2; }

enum class SetKind { full, third };

/// A ball of lattice modes: Lambda_N (|k| <= N) or Gamma_N (|k| <= N/3).
/// Membership for the "third" kind uses the exact integer test 9|k|^2 <= N^2.
/// Modes are ordered colexicographically on (k2, k1); the order is the
/// canonical one used everywhere (matrices, RNG streams, file output).
class ModeSet {
public:
    ModeSet(int cutoff, SetKind kind);

    int cutoff() const { return cutoff_; }
    SetKind kind() const { return kind_; }
    std::size_t size() const { return modes_.size(); }
    const std::vector<Mode>& modes() const { return modes_; }
    Mode operator[](std::size_t i) const { return modes_[i]; }

    bool contains(Mode k) const { return index_of(k) >= 0; }

    /// Index in the canonical order, or -1 if not a member.
    int index_of(Mode k) const {
        if (k.k1 < -bound_ || k.k1 > bound_ || k.k2 < -bound_ || k.k2 > bound_) return -1;
        return lookup_[std::size_t(k.k2 + bound_) * (2 * bound_ + 1) + std::size_t(k.k1 + bound_)];
    }

private:
    int cutoff_;
    SetKind kind_;
    int bound_;  // max |k_i| of any member
    std::vector<Mode> modes_;
    std::vector<int> lookup_;
};

/// eps = (sum_{k in set} |k|^{-2})^{-1/2}. Rejects an empty set.
double eps_constant(const ModeSet& set);
double eps_constant(int cutoff, SetKind kind);

/// C_{k,l} = k_perp . l / |k|^2.
inline double coupling(Mode k, Mode l) {
    if (k.is_zero()) throw std::invalid_argument("coupling: k must be nonzero");
    return double(perp_dot(k, l)) / double(k.norm2());
}

/// sum_{k in set} C_{k,l}^2; equals (1/2) eps^{-2} |l|^2 for any ball cutoff.
double sum_coupling_sq(Mode l, const ModeSet& set);

struct LatticeSumResult {
    double value;       // partial sum over Lambda_R plus midpoint tail correction
    double tail_bound;  // certified bound on |value - S|
    int radius;         // R actually used
};

/// S = sum_{k in Z^2_0} |k|^{-4}, evaluated to a certified relative accuracy.
/// Throws if the required radius exceeds max_radius.
LatticeSumResult lattice_sum_S(double rel_tol, int max_radius = 20000);

/// Uniqueness threshold 2 sqrt(5 S) / pi^2 of the limit equation.
double viscosity_threshold(double S);

}  // namespace vortlab
