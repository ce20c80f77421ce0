#include "vortlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vortlab {

ModeSet::ModeSet(int cutoff, SetKind kind) : cutoff_(cutoff), kind_(kind) {
    if (cutoff < 1) throw std::invalid_argument("ModeSet: cutoff must be >= 1");
    bound_ = (kind == SetKind::full) ? cutoff : cutoff / 3;
    if (bound_ < 1) bound_ = 1;  // keep a valid (possibly empty) lookup table
    const long n2max = long(cutoff) * cutoff;
    for (int k2 = -bound_; k2 <= bound_; ++k2) {
        for (int k1 = -bound_; k1 <= bound_; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            const long n2 = long(k1) * k1 + long(k2) * k2;
            const bool in = (kind == SetKind::full) ? (n2 <= n2max) : (9 * n2 <= n2max);
            if (in) modes_.push_back({k1, k2});
        }
    }
    // colexicographic on (k2, k1); the generation loop already emits this order
    lookup_.assign(std::size_t(2 * bound_ + 1) * (2 * bound_ + 1), -1);
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const Mode m = modes_[i];
        lookup_[std::size_t(m.k2 + bound_) * (2 * bound_ + 1) + std::size_t(m.k1 + bound_)] = int(i);
    }
}

double eps_constant(const ModeSet& set) {
    if (set.size() == 0) throw std::invalid_argument("eps_constant: empty mode set");
    double s = 0.0;
    for (const Mode& k : set.modes()) s += 1.0 / double(k.norm2());
    return 1.0 / std::sqrt(s);
}

double eps_constant(int cutoff, SetKind kind) { return eps_constant(ModeSet(cutoff, kind)); }

double sum_coupling_sq(Mode l, const ModeSet& set) {
    if (set.size() == 0) throw std::invalid_argument("sum_coupling_sq: empty mode set");
    double s = 0.0;
    for (const Mode& k : set.modes()) {
        const double c = coupling(k, l);
        s += c * c;
    }
    return s;
}

namespace {

// Two-sided bound on sum_{|k| > R} |k|^{-4} from covering unit cells:
// every member cell lies in {|x| >= R - 1/sqrt2} and 1/|k|^4 <= (|x|-1/sqrt2)^{-4}
// there, while the cells cover {|x| >= R + 1/sqrt2} from above.
struct TailInterval {
    double lo, hi;
};

TailInterval tail_interval(double R) {
    const double h = std::numbers::sqrt2 / 2.0;
    const double a = R - std::numbers::sqrt2;  // after substitution r = s + 1/sqrt2
    const double b = R + std::numbers::sqrt2;
    const double pi = std::numbers::pi;
    const double hi = 2 * pi * (0.5 / (a * a) + h / (3 * a * a * a));
    const double lo = 2 * pi * (0.5 / (b * b) - h / (3 * b * b * b));
    return {std::max(lo, 0.0), hi};
}

double partial_sum_inv4(int R) {
    const long R2 = long(R) * R;
    double s = 0.0;
    for (int k2 = -R; k2 <= R; ++k2) {
        const long k2sq = long(k2) * k2;
        for (int k1 = -R; k1 <= R; ++k1) {
            const long n2 = long(k1) * k1 + k2sq;
            if (n2 == 0 || n2 > R2) continue;
            const double d = double(n2);
            s += 1.0 / (d * d);
        }
    }
    return s;
}

}  // namespace

LatticeSumResult lattice_sum_S(double rel_tol, int max_radius) {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("lattice_sum_S: rel_tol must be > 0");
    const double pi = std::numbers::pi;
    int R = 8;
    for (;;) {
        const TailInterval t = tail_interval(double(R));
        const double mid = pi / ((R + 0.5) * (R + 0.5));  // midpoint integral correction
        const double bound = std::max(t.hi - mid, mid - t.lo);
        // cheap lower estimate of the value (partial sum >= sum over Lambda_1 = 4)
        if (bound <= rel_tol * 4.0) {
            const double value = partial_sum_inv4(R) + mid;
            if (bound <= rel_tol * value) return {value, bound, R};
        }
        if (R >= max_radius)
            throw std::runtime_error("lattice_sum_S: requested tolerance needs radius beyond configured maximum");
        R = std::min(max_radius, R * 2);
    }
}

double viscosity_threshold(double S) {
    if (!(S > 0.0)) throw std::invalid_argument("viscosity_threshold: S must be > 0");
    const double pi = std::numbers::pi;
    return 2.0 * std::sqrt(5.0 * S) / (pi * pi);
}

}  // namespace vortlab
