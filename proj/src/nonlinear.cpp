#include "vortlab/nonlinear.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

namespace vortlab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
const double kPi2 = kPi * kPi;

// sqrt2 pi^2 (j.l_perp/|l|^2 + j.k_perp/|k|^2); the common scalar factor of
// the coefficient for both sign classes of j.
inline double h_base(Mode j, Mode k, Mode l) {
    return kSqrt2 * kPi2 *
           (double(perp_dot(l, j)) / double(l.norm2()) +
            double(perp_dot(k, j)) / double(k.norm2()));
}

// the FFTW planner is not thread-safe; execution is
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::array<double, 2> kernel_truncated(double z1, double z2, int M) {
    if (M < 1) throw std::invalid_argument("kernel_truncated: M must be >= 1");
    double s1 = 0.0, s2 = 0.0;
    const long M2 = long(M) * M;
    for (int k2 = -M; k2 <= M; ++k2) {
        for (int k1 = -M; k1 <= M; ++k1) {
            const long n2 = long(k1) * k1 + long(k2) * k2;
            if (n2 == 0 || n2 > M2) continue;
            const double s = std::sin(2.0 * kPi * (k1 * z1 + k2 * z2)) / double(n2);
            s1 += k2 * s;
            s2 -= k1 * s;
        }
    }
    return {-2.0 * kPi * s1, -2.0 * kPi * s2};
}

double h_phi_eval(Mode j, std::array<double, 2> x, std::array<double, 2> y, int M) {
    if (M < 8) throw std::invalid_argument("h_phi_eval: kernel cutoff must be >= 8");
    if (x[0] == y[0] && x[1] == y[1]) return 0.0;
    const auto K = kernel_truncated(x[0] - y[0], x[1] - y[1], M);
    const auto gx = grad_basis(j, x[0], x[1]);
    const auto gy = grad_basis(j, y[0], y[1]);
    return 0.5 * (K[0] * (gx[0] - gy[0]) + K[1] * (gx[1] - gy[1]));
}

cplx h_coeff(Mode j, Mode k, Mode l) {
    if (j.is_zero()) throw std::invalid_argument("h_coeff: j must be nonzero");
    if (k.is_zero() || l.is_zero()) return {0.0, 0.0};
    const Mode s = k + l;
    const bool d1 = (j == s), d2 = (j == -s);
    if (!d1 && !d2) return {0.0, 0.0};
    const double base = h_base(j, k, l);
    if (j.is_positive()) return {base * ((d1 ? 1.0 : 0.0) - (d2 ? 1.0 : 0.0)), 0.0};
    return {0.0, base * ((d1 ? 1.0 : 0.0) + (d2 ? 1.0 : 0.0))};
}

double h_coeff_sq(Mode j, Mode k, Mode l) {
    if (k.is_zero() || l.is_zero()) return 0.0;
    const Mode s = k + l;
    if (j != s && j != -s) return 0.0;
    const double jk = double(perp_dot(k, j));  // j . k_perp
    const double d = 1.0 / double(l.norm2()) - 1.0 / double(k.norm2());
    return 2.0 * kPi2 * kPi2 * jk * jk * d * d;
}

double h_coeff_sq_sum(Mode j, int cutoff) {
    if (j.is_zero()) throw std::invalid_argument("h_coeff_sq_sum: j must be nonzero");
    if (cutoff < 1) throw std::invalid_argument("h_coeff_sq_sum: cutoff must be >= 1");
    // Both delta branches contribute equally (k -> -k), hence the factor 2.
    const long c2 = long(cutoff) * cutoff;
    double s = 0.0;
    for (int k2 = -cutoff; k2 <= cutoff; ++k2) {
        for (int k1 = -cutoff; k1 <= cutoff; ++k1) {
            const Mode k{k1, k2};
            const long kn = k.norm2();
            if (kn == 0 || kn > c2) continue;
            const Mode l = j - k;
            const long ln = l.norm2();
            if (ln == 0 || ln > c2) continue;
            const double jk = double(perp_dot(k, j));
            const double d = 1.0 / double(ln) - 1.0 / double(kn);
            s += jk * jk * d * d;
        }
    }
    return 4.0 * kPi2 * kPi2 * s;
}

double h_coeff_sq_sum_all(Mode j, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("h_coeff_sq_sum_all: tolerance must be > 0");
    const double aj2 = double(j.norm2());
    int K = std::max(8, 4 * int(std::ceil(std::sqrt(aj2))));
    for (;;) {
        // per-term bound 400 pi^4 |j|^4 / |k|^4 for |k| >= 2|j|, summed by
        // the unit-cell covering bound on sum_{|k|>K} |k|^{-4}
        const double a = K - kSqrt2;
        const double cover = kPi / (a * a) + (2.0 * kPi / (3.0 * kSqrt2)) / (a * a * a);
        const double tail = 400.0 * kPi2 * kPi2 * aj2 * aj2 * cover;
        if (tail <= tol) {
            double s = 0.0;
            const long K2 = long(K) * K;
            for (int k2 = -K; k2 <= K; ++k2) {
                for (int k1 = -K; k1 <= K; ++k1) {
                    const Mode k{k1, k2};
                    const long kn = k.norm2();
                    if (kn == 0 || kn > K2) continue;
                    const Mode l = j - k;
                    const long ln = l.norm2();
                    if (ln == 0) continue;
                    const double jk = double(perp_dot(k, j));
                    const double d = 1.0 / double(ln) - 1.0 / double(kn);
                    s += jk * jk * d * d;
                }
            }
            return 4.0 * kPi2 * kPi2 * s;
        }
        if (K > (1 << 24))
            throw std::runtime_error("h_coeff_sq_sum_all: tolerance out of reach");
        K *= 2;
    }
}

// ---------------------------------------------------------------------------
// DriftOperator
// ---------------------------------------------------------------------------

struct DriftOperator::Impl {
    // shared
    BasisMap map;
    std::vector<cplx> z;

    // direct backend: for every positive output mode p, terms over unordered
    // pairs {k,l} with k+l=p; drift_p = 2 Re S_p, drift_{-p} = 2 Im S_p.
    struct Stencil {
        std::vector<int> out_pos, out_neg;  // per positive mode
        std::vector<std::size_t> offset;    // per positive mode, into terms
        std::vector<int> ik, il;
        std::vector<double> w;
    } st;

    // pseudospectral backend
    int G = 0;
    fftw_complex* buf_a = nullptr;  // packed u1 + i u2
    fftw_complex* buf_b = nullptr;  // packed dw/dx1 + i dw/dx2
    fftw_complex* buf_c = nullptr;  // advection grid / spectrum
    fftw_plan plan_bwd_a{}, plan_bwd_b{}, plan_fwd_c{};
    struct SpecMode {
        int zidx;  // index into z
        int gidx;  // grid index (m1 mod G)*G + (m2 mod G)
        double m1, m2, inv_n2;
    };
    std::vector<SpecMode> smodes;
    struct OutRead {
        int gidx, ipos, ineg;
    };
    std::vector<OutRead> out_read;

    explicit Impl(const ModeSet& set) : map(set), z(set.size()) {}
};

DriftOperator::DriftOperator(std::shared_ptr<const ModeSet> set, Backend backend, int grid)
    : set_(std::move(set)), backend_(backend) {
    impl_ = std::make_unique<Impl>(*set_);
    const ModeSet& s = *set_;
    const int N = s.cutoff();

    if (backend_ == Backend::direct) {
        auto& st = impl_->st;
        for (std::size_t pi = 0; pi < s.size(); ++pi) {
            const Mode p = s[pi];
            if (!p.is_positive()) continue;
            st.out_pos.push_back(int(pi));
            st.out_neg.push_back(s.index_of(-p));
            st.offset.push_back(st.ik.size());
            for (std::size_t ki = 0; ki < s.size(); ++ki) {
                const Mode k = s[ki];
                const Mode l = p - k;
                if (l.is_zero()) continue;
                const int li = s.index_of(l);
                if (li < 0 || li < int(ki)) continue;  // unordered pairs once
                const double mult = (li == int(ki)) ? 1.0 : 2.0;
                const double w = mult * h_base(p, k, l);
                if (w == 0.0) continue;
                st.ik.push_back(int(ki));
                st.il.push_back(li);
                st.w.push_back(w);
            }
        }
        st.offset.push_back(st.ik.size());
        return;
    }

    // pseudospectral
    if (grid == 0) {
        grid = std::max(3 * N + 1, 16);
        const auto friendly = [](int g) {
            while (g % 2 == 0) g /= 2;
            while (g % 3 == 0) g /= 3;
            while (g % 5 == 0) g /= 5;
            return g == 1;
        };
        while (!friendly(grid)) ++grid;
    }
    if (grid < 3 * N)
        throw std::invalid_argument("DriftOperator: grid below 3N breaks exact dealiasing");
    grid_ = grid;
    auto& im = *impl_;
    im.G = grid;
    const std::size_t gg = std::size_t(grid) * grid;
    im.buf_a = fftw_alloc_complex(gg);
    im.buf_b = fftw_alloc_complex(gg);
    im.buf_c = fftw_alloc_complex(gg);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        im.plan_bwd_a = fftw_plan_dft_2d(grid, grid, im.buf_a, im.buf_a, FFTW_BACKWARD, FFTW_ESTIMATE);
        im.plan_bwd_b = fftw_plan_dft_2d(grid, grid, im.buf_b, im.buf_b, FFTW_BACKWARD, FFTW_ESTIMATE);
        im.plan_fwd_c = fftw_plan_dft_2d(grid, grid, im.buf_c, im.buf_c, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Mode m = s[i];
        Impl::SpecMode sm;
        sm.zidx = int(i);
        const int g1 = ((m.k1 % grid) + grid) % grid;
        const int g2 = ((m.k2 % grid) + grid) % grid;
        sm.gidx = g1 * grid + g2;
        sm.m1 = double(m.k1);
        sm.m2 = double(m.k2);
        sm.inv_n2 = 1.0 / double(m.norm2());
        im.smodes.push_back(sm);
        if (m.is_positive()) im.out_read.push_back({sm.gidx, int(i), s.index_of(-m)});
    }
}

DriftOperator::~DriftOperator() {
    if (impl_ && impl_->buf_a) {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(impl_->plan_bwd_a);
        fftw_destroy_plan(impl_->plan_bwd_b);
        fftw_destroy_plan(impl_->plan_fwd_c);
        fftw_free(impl_->buf_a);
        fftw_free(impl_->buf_b);
        fftw_free(impl_->buf_c);
    }
}

void DriftOperator::apply(const double* x, double* out) {
    auto& im = *impl_;
    im.map.to_complex(x, im.z.data());

    if (backend_ == Backend::direct) {
        const auto& st = im.st;
        for (std::size_t t = 0; t < st.out_pos.size(); ++t) {
            cplx acc{0.0, 0.0};
            for (std::size_t e = st.offset[t]; e < st.offset[t + 1]; ++e)
                acc += st.w[e] * im.z[std::size_t(st.ik[e])] * im.z[std::size_t(st.il[e])];
            out[st.out_pos[t]] = 2.0 * acc.real();
            out[st.out_neg[t]] = 2.0 * acc.imag();
        }
        return;
    }

    const int G = im.G;
    const std::size_t gg = std::size_t(G) * G;
    std::memset(im.buf_a, 0, gg * sizeof(fftw_complex));
    std::memset(im.buf_b, 0, gg * sizeof(fftw_complex));
    // pack u1 + i u2 and dw1 + i dw2:
    //  u_hat(m)  = 2 pi i (m2, -m1)/|m|^2 c_m   =>  a_hat = u1_hat + i u2_hat
    //  dw_hat(m) = 2 pi i (m1, m2) c_m          =>  b_hat = d1_hat + i d2_hat
    for (const auto& sm : im.smodes) {
        const cplx c = im.z[std::size_t(sm.zidx)];
        const cplx ic = cplx{0.0, 2.0 * kPi} * c;
        const cplx a = ic * (sm.m2 * sm.inv_n2) + cplx{0.0, 1.0} * ic * (-sm.m1 * sm.inv_n2);
        const cplx b = ic * sm.m1 + cplx{0.0, 1.0} * ic * sm.m2;
        im.buf_a[sm.gidx][0] = a.real();
        im.buf_a[sm.gidx][1] = a.imag();
        im.buf_b[sm.gidx][0] = b.real();
        im.buf_b[sm.gidx][1] = b.imag();
    }
    fftw_execute(im.plan_bwd_a);
    fftw_execute(im.plan_bwd_b);
    // adv = u1*w1 + u2*w2 = Re(a)Re(b) + Im(a)Im(b)
    for (std::size_t i = 0; i < gg; ++i) {
        im.buf_c[i][0] = im.buf_a[i][0] * im.buf_b[i][0] + im.buf_a[i][1] * im.buf_b[i][1];
        im.buf_c[i][1] = 0.0;
    }
    fftw_execute(im.plan_fwd_c);
    const double inv = 1.0 / double(gg);
    for (const auto& r : im.out_read) {
        out[r.ipos] = -kSqrt2 * im.buf_c[r.gidx][0] * inv;
        out[r.ineg] = -kSqrt2 * im.buf_c[r.gidx][1] * inv;
    }
}

RealField DriftOperator::apply(const RealField& f) {
    if (f.set().size() != set_->size() || f.set().cutoff() != set_->cutoff())
        throw std::invalid_argument("DriftOperator: field cutoff mismatch");
    RealField out(f.set_ptr());
    apply(f.data().data(), out.data().data());
    return out;
}

double drift_coefficient(const RealField& omega, Mode j) {
    const ModeSet& s = omega.set();
    BasisMap map(s);
    std::vector<cplx> z(s.size());
    map.to_complex(omega.data().data(), z.data());
    const Mode p = j.is_positive() ? j : -j;
    cplx acc{0.0, 0.0};
    for (std::size_t ki = 0; ki < s.size(); ++ki) {
        const Mode k = s[ki];
        const Mode l = p - k;
        if (l.is_zero()) continue;
        const int li = s.index_of(l);
        if (li < 0 || li < int(ki)) continue;
        const double mult = (li == int(ki)) ? 1.0 : 2.0;
        acc += mult * h_base(p, k, l) * z[ki] * z[std::size_t(li)];
    }
    return j.is_positive() ? 2.0 * acc.real() : 2.0 * acc.imag();
}

double r_term(const RealField& omega, Mode l, Mode m, const ModeSet& noise_set) {
    const ModeSet& s = omega.set();
    const auto pairing = [&](Mode k, Mode mm) {
        const ProductExpansion pe = expand_product(k, -mm);
        double v = 0.0;
        for (int t = 0; t < pe.n; ++t) {
            const int idx = s.index_of(pe.term[t].first);
            if (idx < 0)
                throw std::invalid_argument(
                    "r_term: omega does not carry product mode; enlarge its cutoff");
            v += pe.term[t].second * omega[std::size_t(idx)];
        }
        return v;  // the constant part pairs with the zero-mean field to 0
    };
    const bool diag = (l == m);
    double acc = 0.0;
    for (const Mode& k : noise_set.modes()) {
        const double cl = coupling(k, l);
        const double cm = diag ? cl : coupling(k, m);
        if (cl == 0.0 || cm == 0.0) continue;
        const double pl = pairing(k, l);
        const double pm = diag ? pl : pairing(k, m);
        acc += cl * cm * (pl * pm - (diag ? 1.0 : 0.0));
    }
    return acc;
}

double generator_apply(const CylinderFunction& F, const RealField& omega, double nu,
                       GeneratorMode mode) {
    if (!(nu > 0.0)) throw std::invalid_argument("generator_apply: nu must be > 0");
    const std::size_t n = F.support.size();
    std::vector<double> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = omega.coeff(F.support[i]);
    const std::vector<double> g = F.grad(coords);
    const std::vector<std::vector<double>> H = F.hess(coords);
    if (g.size() != n || H.size() != n)
        throw std::invalid_argument("generator_apply: inconsistent cylinder callbacks");

    if (mode.limit) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double l2 = double(F.support[i].norm2());
            acc += 4.0 * nu * kPi2 * l2 * (H[i][i] - g[i] * coords[i]);
            if (g[i] != 0.0) acc += g[i] * drift_coefficient(omega, F.support[i]);
        }
        return acc;
    }

    const int N = mode.approx_cutoff;
    if (N < 3) throw std::invalid_argument("generator_apply: approx cutoff must be >= 3");
    const ModeSet gamma(N, SetKind::third);
    const long safe2 = long(N / 3) * (N / 3);
    for (const Mode& l : F.support)
        if (l.norm2() > safe2)
            throw std::invalid_argument(
                "generator_apply: cylinder support outside the safe band Lambda_{N/3}");
    const double eps_t = eps_constant(gamma);

    // Galerkin drift part at cutoff N
    auto setN = std::make_shared<const ModeSet>(N, SetKind::full);
    RealField omN(setN);
    for (std::size_t i = 0; i < setN->size(); ++i) {
        const int src = omega.set().index_of((*setN)[i]);
        omN[i] = src < 0 ? 0.0 : omega[std::size_t(src)];
    }

    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double l2 = double(F.support[i].norm2());
        // diagonal part of 8 nu eps~^2 L0_N
        acc += 4.0 * nu * kPi2 * l2 * (H[i][i] - g[i] * coords[i]);
        if (g[i] != 0.0) acc += g[i] * drift_coefficient(omN, F.support[i]);
        for (std::size_t jj = 0; jj < n; ++jj) {
            if (H[i][jj] == 0.0) continue;
            acc += 8.0 * nu * eps_t * eps_t * kPi2 * H[i][jj] *
                   r_term(omega, F.support[i], F.support[jj], gamma);
        }
    }
    return acc;
}

BTailResult b_tail_curve(const std::vector<int>& cutoffs, double delta, int j_max, int k_max) {
    if (cutoffs.empty()) throw std::invalid_argument("b_tail_curve: no cutoffs");
    for (int N : cutoffs) {
        if (N < 1) throw std::invalid_argument("b_tail_curve: cutoffs must be >= 1");
        if (2 * N > j_max || N >= k_max)
            throw std::invalid_argument("b_tail_curve: window must satisfy Jmax >= 2N, Kmax > N");
    }
    const std::size_t nn = cutoffs.size();
    std::vector<double> acc(nn, 0.0);
    std::vector<long> n2(nn);
    for (std::size_t t = 0; t < nn; ++t) n2[t] = long(cutoffs[t]) * cutoffs[t];

    const long J2 = long(j_max) * j_max, K2 = long(k_max) * k_max;
    for (int j2 = -j_max; j2 <= j_max; ++j2) {
        for (int j1 = -j_max; j1 <= j_max; ++j1) {
            const Mode j{j1, j2};
            const long jn = j.norm2();
            if (jn == 0 || jn > J2) continue;
            const double wj = std::pow(double(jn), -(2.0 + delta));
            std::vector<double> inner(nn, 0.0);
            for (int k2 = -k_max; k2 <= k_max; ++k2) {
                for (int k1 = -k_max; k1 <= k_max; ++k1) {
                    const Mode k{k1, k2};
                    const long kn = k.norm2();
                    if (kn == 0 || kn > K2) continue;
                    const Mode l = j - k;
                    const long ln = l.norm2();
                    if (ln == 0) continue;
                    const double jk = double(perp_dot(k, j));
                    if (jk == 0.0) continue;
                    const double d = 1.0 / double(ln) - 1.0 / double(kn);
                    const double term = jk * jk * d * d;
                    for (std::size_t t = 0; t < nn; ++t)
                        if (kn > n2[t] || ln > n2[t]) inner[t] += term;
                }
            }
            for (std::size_t t = 0; t < nn; ++t) acc[t] += wj * inner[t];
        }
    }

    BTailResult out;
    out.values.resize(nn);
    for (std::size_t t = 0; t < nn; ++t) out.values[t] = 8.0 * kPi2 * kPi2 * acc[t];
    // j-window tail: sum_{|j|>J} |j|^{-4-2d} S_j with the measured envelope
    // S_j <= 3000 |j|^2 log|j|, integral-compared; the k-window tail is
    // dominated by the same constant and folded into the safety factor.
    const double J = double(j_max) - 1.0;
    out.window_tail_bound =
        3000.0 * (kPi / delta) * (std::log(J) + 0.5 / delta) / std::pow(J, 2.0 * delta);
    return out;
}

std::vector<HTableEntry> h_table(Mode j, int cutoff) {
    if (j.is_zero()) throw std::invalid_argument("h_table: j must be nonzero");
    const ModeSet set(cutoff, SetKind::full);
    std::vector<HTableEntry> out;
    for (const Mode& k : set.modes()) {
        for (const Mode& s : {j, -j}) {
            const Mode l = s - k;
            if (l.is_zero() || !set.contains(l)) continue;
            const cplx v = h_coeff(j, k, l);
            if (v != cplx{0.0, 0.0}) out.push_back({k, l, v});
        }
    }
    return out;
}

}  // namespace vortlab
