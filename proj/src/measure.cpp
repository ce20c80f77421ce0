#include "vortlab/measure.hpp"

#include <cmath>
#include <numbers>

namespace vortlab {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RngStream::RngStream(SeededSampler s) {
    std::uint64_t st = s.master_seed;
    (void)splitmix64(st);
    st ^= 0x6a09e667f3bcc909ULL + s.stream_index;
    const std::uint64_t seed = splitmix64(st) ^ splitmix64(st);
    engine_.seed(seed);
}

double RngStream::uniform() {
    // 53-bit mantissa in (0, 1]
    return double((engine_() >> 11) + 1) * 0x1p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

RealField sample_white_noise(std::shared_ptr<const ModeSet> set, RngStream& rng) {
    RealField f(std::move(set));
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.normal();
    return f;
}

RealField sample_white_noise(int cutoff, SeededSampler seed) {
    RngStream rng(seed);
    return sample_white_noise(std::make_shared<const ModeSet>(cutoff, SetKind::full), rng);
}

double sobolev_norm(const RealField& f, double s) {
    double acc = 0.0;
    const ModeSet& set = f.set();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = std::pow(1.0 + double(set[i].norm2()), s);
        acc += w * f[i] * f[i];
    }
    return std::sqrt(acc);
}

}  // namespace vortlab
