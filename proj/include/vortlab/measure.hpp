#pragma once

#include <cstdint>
#include <random>

#include "vortlab/basis.hpp"

namespace vortlab {

/// Reproducible stream addressing: (master_seed, stream_index) fixes the draw
/// sequence bit-identically on a given build. Distinct stream indices are
/// decorrelated by passing (master_seed, stream_index) through splitmix64
/// before seeding the engine.
struct SeededSampler {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    SeededSampler with_stream(std::uint64_t idx) const { return {master_seed, idx}; }
};

std::uint64_t splitmix64(std::uint64_t& state);

/// mt19937_64 seeded through splitmix64; normals by the trigonometric
/// Box-Muller transform (method id "box_muller", recorded in run metadata).
class RngStream {
public:
    explicit RngStream(SeededSampler s);

    double uniform();  // in (0, 1]
    double normal();
    static constexpr const char* normal_method() { return "box_muller"; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// iid standard normal coefficients on the given mode set (the Lambda_N
/// marginal of the enstrophy measure), drawn in canonical mode order.
RealField sample_white_noise(std::shared_ptr<const ModeSet> set, RngStream& rng);
RealField sample_white_noise(int cutoff, SeededSampler seed);

/// (sum_k (1+|k|^2)^s <omega,e_k>^2)^{1/2}.
double sobolev_norm(const RealField& f, double s);

}  // namespace vortlab
