// Independent numerical oracles used only by the test suite: midpoint grid
// quadrature and the truncated-kernel tensor quadrature for H coefficients.
// Nothing here reuses the closed-form production paths it is meant to check.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include "vortlab/basis.hpp"

namespace vortlab::testing {

constexpr double kPi = std::numbers::pi;

/// Midpoint quadrature of f over [0,1)^2 on a G x G grid.
inline double grid_integrate(const std::function<double(double, double)>& f, int G) {
    double s = 0.0;
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) s += f((i + 0.5) / G, (j + 0.5) / G);
    return s / double(G) / double(G);
}

/// Both components of the Lambda_M kernel tabulated on the unshifted G x G
/// grid (z = (i/G, j/G)), via row-wise angle addition.
struct KernelGrid {
    int G;
    std::vector<double> K1, K2;  // index i*G + j

    KernelGrid(int M, int grid) : G(grid), K1(std::size_t(G) * G, 0.0), K2(std::size_t(G) * G, 0.0) {
        std::vector<double> s1(G), c1(G), s2(G), c2(G);
        const long M2 = long(M) * M;
        for (int k1 = -M; k1 <= M; ++k1) {
            for (int i = 0; i < G; ++i) {
                const double a = 2.0 * kPi * k1 * (double(i) / G);
                s1[i] = std::sin(a);
                c1[i] = std::cos(a);
            }
            for (int k2 = -M; k2 <= M; ++k2) {
                const long n2 = long(k1) * k1 + long(k2) * k2;
                if (n2 == 0 || n2 > M2) continue;
                for (int j = 0; j < G; ++j) {
                    const double b = 2.0 * kPi * k2 * (double(j) / G);
                    s2[j] = std::sin(b);
                    c2[j] = std::cos(b);
                }
                const double w1 = -2.0 * kPi * double(k2) / double(n2);
                const double w2 = 2.0 * kPi * double(k1) / double(n2);
                for (int i = 0; i < G; ++i) {
                    double* r1 = K1.data() + std::size_t(i) * G;
                    double* r2 = K2.data() + std::size_t(i) * G;
                    const double si = s1[i], ci = c1[i];
                    for (int j = 0; j < G; ++j) {
                        const double s = si * c2[j] + ci * s2[j];  // sin(2pi k.z)
                        r1[j] += w1 * s;
                        r2[j] += w2 * s;
                    }
                }
            }
        }
    }
};

/// Tensor-grid quadrature of <H_{e_j}, e~_k (x) e~_l>. The double integral
/// collapses over the circular convolution of the tabulated kernel:
///   value = pi (T^_j(l) + T^_j(k)) * (1/G^2) sum_x e_{-j}(x) e~_{k+l}(x),
/// with T^_j(a) = (1/G^2) sum_z (j . K_M(z)) e~_{-a}(z). All sums are grid
/// sums of the independently tabulated kernel; nothing uses the closed form.
class TensorHOracle {
public:
    TensorHOracle(int M, int G) : grid_(M, G) {}

    std::complex<double> coeff(Mode j, Mode k, Mode l) {
        const std::complex<double> t = that(j, l) + that(j, k);
        return kPi * t * pfactor(j, k + l);
    }

private:
    KernelGrid grid_;
    std::map<std::array<int, 4>, std::complex<double>> that_cache_, pfac_cache_;

    std::complex<double> that(Mode j, Mode a) {
        const std::array<int, 4> key{j.k1, j.k2, a.k1, a.k2};
        const auto it = that_cache_.find(key);
        if (it != that_cache_.end()) return it->second;
        const int G = grid_.G;
        std::complex<double> acc{0.0, 0.0};
        for (int i = 0; i < G; ++i) {
            for (int jj = 0; jj < G; ++jj) {
                const double t =
                    j.k1 * grid_.K1[std::size_t(i) * G + jj] + j.k2 * grid_.K2[std::size_t(i) * G + jj];
                const double ang = -2.0 * kPi * (a.k1 * (double(i) / G) + a.k2 * (double(jj) / G));
                acc += t * std::complex<double>{std::cos(ang), std::sin(ang)};
            }
        }
        acc /= double(G) * double(G);
        that_cache_[key] = acc;
        return acc;
    }

    std::complex<double> pfactor(Mode j, Mode s) {
        const std::array<int, 4> key{j.k1, j.k2, s.k1, s.k2};
        const auto it = pfac_cache_.find(key);
        if (it != pfac_cache_.end()) return it->second;
        const int G = grid_.G;
        std::complex<double> acc{0.0, 0.0};
        for (int i = 0; i < G; ++i) {
            for (int jj = 0; jj < G; ++jj) {
                const double x1 = double(i) / G, x2 = double(jj) / G;
                const double ang = 2.0 * kPi * (s.k1 * x1 + s.k2 * x2);
                acc += eval_basis(-j, x1, x2) * std::complex<double>{std::cos(ang), std::sin(ang)};
            }
        }
        acc /= double(G) * double(G);
        pfac_cache_[key] = acc;
        return acc;
    }
};

/// Quadrature of int (sigma_k . grad e_l) e_m dx on a G x G midpoint grid.
inline double sigma_grad_quadrature(Mode k, Mode l, Mode m, int G) {
    return grid_integrate(
        [&](double x1, double x2) {
            const auto s = sigma_eval(k, x1, x2);
            const auto g = grad_basis(l, x1, x2);
            return (s[0] * g[0] + s[1] * g[1]) * eval_basis(m, x1, x2);
        },
        G);
}

}  // namespace vortlab::testing
