#include "vortlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <thread>

namespace vortlab {

namespace {
constexpr double kPi = std::numbers::pi;

int default_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : int(hc);
}

// RNG channel layout per path: channel 0 = initial condition, channels
// 1..n_noise = driving noises in canonical order. Streams of distinct paths
// never collide: index = base + path * (n_noise + 1) + channel.
std::uint64_t stream_index_for(const SimulationConfig& cfg, std::uint64_t path,
                               std::size_t n_noise, std::size_t channel) {
    return cfg.seed.stream_index + path * (n_noise + 1) + channel;
}
}  // namespace

double SimulationConfig::ito_em_dt_bound() const {
    return 0.1 / (4.0 * nu * kPi * kPi * double(cutoff) * double(cutoff));
}

void SimulationConfig::validate() const {
    if (!(nu >= 0.0)) throw std::invalid_argument("config: nu must be >= 0");
    if (cutoff < 1) throw std::invalid_argument("config: cutoff must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be > 0");
    if (horizon < 0.0) throw std::invalid_argument("config: horizon must be >= 0");
    if (horizon > 0.0 && dt > horizon) throw std::invalid_argument("config: dt must be <= horizon");
    if (record_stride < 1) throw std::invalid_argument("config: record_stride must be >= 1");
    if (horizon > 0.0 && record_stride * dt > horizon + 1e-12)
        throw std::invalid_argument("config: record_stride * dt must be <= horizon");
    if (equation == Equation::transport_euler) {
        if (noise_kind == SetKind::third && cutoff < 3)
            throw std::invalid_argument("config: third-kind noise needs cutoff >= 3");
        if (scheme == Scheme::ito_em && nu > 0.0 && dt > ito_em_dt_bound())
            throw std::invalid_argument("config: dt exceeds the ito_em stability bound 0.1/(4 nu pi^2 N^2)");
    }
    const long safe2 = (noise_kind == SetKind::third && equation == Equation::transport_euler)
                           ? long(cutoff / 3) * (cutoff / 3)
                           : long(cutoff) * cutoff;
    for (const Mode& l : observables) {
        if (l.is_zero()) throw std::invalid_argument("config: observable (0,0) is not a mode");
        if (l.norm2() > safe2)
            throw std::invalid_argument(
                "config: observables must lie in the safe band Lambda_{N/3} for third-kind noise");
    }
}

std::vector<std::pair<double, double>> realized_qv(const TrajectoryRecord& rec, Mode l, Mode m) {
    int il = -1, im = -1;
    for (std::size_t i = 0; i < rec.observables.size(); ++i) {
        if (rec.observables[i] == l) il = int(i);
        if (rec.observables[i] == m) im = int(i);
    }
    if (il < 0 || im < 0) throw std::invalid_argument("realized_qv: observable was not recorded");
    std::vector<std::pair<double, double>> out;
    out.reserve(rec.times.size());
    const std::size_t nobs = rec.observables.size();
    for (std::size_t t = 0; t < rec.times.size(); ++t)
        out.emplace_back(rec.times[t], rec.qv_accum[t][std::size_t(il) * nobs + std::size_t(im)]);
    return out;
}

// ---------------------------------------------------------------------------
// Noise ladders: the Galerkin operator of sigma_k . grad acting on complex
// coefficients couples modes along the line {m0 + t k}; the coupling constant
// C_{k,m} is invariant along the line, so each per-mode Cayley factor is a
// constant-coefficient tridiagonal solve per chain (all pivots >= 1).
// ---------------------------------------------------------------------------

namespace {

struct ChainSet {
    // flattened canonical chains: nodes[off[i]..off[i+1]) are z-indices along
    // +k; mirror[] holds the conjugate chain (reversed negated nodes), or the
    // chain itself when self-mirrored.
    std::vector<int> nodes;
    std::vector<int> mirror;
    std::vector<std::size_t> off;
    std::vector<double> coupling_const;  // C_{k, m0}
    std::vector<bool> self_mirror;
    bool k_positive = true;
};

ChainSet build_chains(Mode k, const ModeSet& set) {
    ChainSet cs;
    cs.k_positive = k.is_positive();
    std::vector<char> done(set.size(), 0);
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (done[i]) continue;
        const Mode head = set[i];
        if (set.contains(head - k)) continue;  // not a chain head
        // collect the chain
        std::vector<int> chain;
        Mode cur = head;
        int idx = int(i);
        while (idx >= 0) {
            chain.push_back(idx);
            cur = cur + k;
            idx = set.index_of(cur);
        }
        // mirror chain along +k starts at the negated tail; it coincides with
        // the chain itself exactly when the node set is symmetric under -1
        std::vector<int> mirr(chain.size());
        for (std::size_t t = 0; t < chain.size(); ++t)
            mirr[t] = set.index_of(-set[std::size_t(chain[chain.size() - 1 - t])]);
        const bool self = (mirr == chain);
        for (int t : chain) done[std::size_t(t)] = 1;
        if (!self)
            for (int t : mirr) done[std::size_t(t)] = 1;
        cs.off.push_back(cs.nodes.size());
        cs.nodes.insert(cs.nodes.end(), chain.begin(), chain.end());
        cs.mirror.insert(cs.mirror.end(), mirr.begin(), mirr.end());
        cs.coupling_const.push_back(coupling(k, head));
        cs.self_mirror.push_back(self);
    }
    cs.off.push_back(cs.nodes.size());
    return cs;
}

// Cayley factor (I - B/2)^{-1} (I + B/2) of B = c * ladder(k) on one chain,
// with alpha = c * pi * C / 2. Positive k couples with i*alpha symmetric
// off-diagonals, negative k with +-alpha antisymmetric ones.
void chain_cayley(const ChainSet& cs, std::size_t ci, double alpha, std::vector<cplx>& z,
                  std::vector<double>& dbuf, std::vector<cplx>& ybuf) {
    const std::size_t b = cs.off[ci], e = cs.off[ci + 1];
    const std::size_t L = e - b;
    if (L == 0) return;
    const int* nd = cs.nodes.data() + b;
    if (L == 1 || alpha == 0.0) {
        if (!cs.self_mirror[ci]) {
            const int* mr = cs.mirror.data() + b;
            for (std::size_t t = 0; t < L; ++t) z[std::size_t(mr[t])] = std::conj(z[std::size_t(nd[t])]);
        }
        return;
    }
    dbuf.resize(L);
    ybuf.resize(L);
    const double a2 = alpha * alpha;
    if (cs.k_positive) {
        // rhs_t = z_t + i a (z_{t-1} + z_{t+1}); T sub = sup = -i a
        cplx prev = z[std::size_t(nd[0])];
        ybuf[0] = prev + cplx{0.0, alpha} * z[std::size_t(nd[1])];
        dbuf[0] = 1.0;
        for (std::size_t t = 1; t < L; ++t) {
            const cplx zt = z[std::size_t(nd[t])];
            cplx rhs = zt + cplx{0.0, alpha} * prev;
            if (t + 1 < L) rhs += cplx{0.0, alpha} * z[std::size_t(nd[t + 1])];
            const double w = alpha / dbuf[t - 1];  // w_t = -i a / d: stored as magnitude
            dbuf[t] = 1.0 + a2 / dbuf[t - 1];
            ybuf[t] = rhs + cplx{0.0, w} * ybuf[t - 1];
            prev = zt;
        }
        z[std::size_t(nd[L - 1])] = ybuf[L - 1] / dbuf[L - 1];
        for (std::size_t t = L - 1; t-- > 0;)
            z[std::size_t(nd[t])] = (ybuf[t] + cplx{0.0, alpha} * z[std::size_t(nd[t + 1])]) / dbuf[t];
    } else {
        // rhs_t = z_t + a z_{t-1} - a z_{t+1}; T sub = -a, sup = +a
        cplx prev = z[std::size_t(nd[0])];
        ybuf[0] = prev - alpha * z[std::size_t(nd[1])];
        dbuf[0] = 1.0;
        for (std::size_t t = 1; t < L; ++t) {
            const cplx zt = z[std::size_t(nd[t])];
            cplx rhs = zt + alpha * prev;
            if (t + 1 < L) rhs -= alpha * z[std::size_t(nd[t + 1])];
            const double w = alpha / dbuf[t - 1];
            dbuf[t] = 1.0 + a2 / dbuf[t - 1];
            ybuf[t] = rhs + w * ybuf[t - 1];
            prev = zt;
        }
        z[std::size_t(nd[L - 1])] = ybuf[L - 1] / dbuf[L - 1];
        for (std::size_t t = L - 1; t-- > 0;)
            z[std::size_t(nd[t])] = (ybuf[t] - alpha * z[std::size_t(nd[t + 1])]) / dbuf[t];
    }
    if (!cs.self_mirror[ci]) {
        const int* mr = cs.mirror.data() + b;
        for (std::size_t t = 0; t < L; ++t) z[std::size_t(mr[t])] = std::conj(z[std::size_t(nd[t])]);
    }
}

}  // namespace

RealField ito_drift(const RealField& omega, const SimulationConfig& cfg) {
    cfg.validate();
    if (omega.set().cutoff() != cfg.cutoff)
        throw std::invalid_argument("ito_drift: field cutoff does not match config");
    auto noise = std::make_shared<const ModeSet>(cfg.cutoff, cfg.noise_kind);
    const double eps = eps_constant(*noise);

    DriftOperator b(omega.set_ptr(), DriftOperator::Backend::direct);
    RealField out = b.apply(omega);

    std::vector<double> tmp(omega.size()), tmp2(omega.size());
    const double fac = 4.0 * cfg.nu * eps * eps;
    for (const Mode& k : noise->modes()) {
        NoiseCoupling A(k, omega.set_ptr());
        A.apply(omega.data().data(), tmp.data());
        A.apply(tmp.data(), tmp2.data());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += fac * tmp2[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// TransportIntegrator
// ---------------------------------------------------------------------------

struct TransportIntegrator::Impl {
    std::unique_ptr<DriftOperator> drift;
    BasisMap map;
    std::vector<cplx> z;
    std::vector<ChainSet> chains;                   // per noise mode (cayley)
    std::vector<std::unique_ptr<NoiseCoupling>> A;  // per noise mode (ito_em)
    double noise_scale = 0.0;                       // 2 sqrt(2 nu) eps
    // scratch
    std::vector<double> k1, k2, k3, k4, xt, acc, tmp, tmp2, dW;
    std::vector<cplx> ybuf;
    std::vector<double> dbuf;

    explicit Impl(const ModeSet& set) : map(set), z(set.size()) {}
};

TransportIntegrator::TransportIntegrator(const SimulationConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg.equation != Equation::transport_euler)
        throw std::invalid_argument("TransportIntegrator: config is for the limit equation");
    state_ = std::make_shared<const ModeSet>(cfg.cutoff, SetKind::full);
    noise_ = std::make_shared<const ModeSet>(cfg.cutoff, cfg.noise_kind);
    eps_ = eps_constant(*noise_);
    impl_ = std::make_unique<Impl>(*state_);
    impl_->drift = std::make_unique<DriftOperator>(state_, DriftOperator::Backend::pseudospectral);
    impl_->noise_scale = 2.0 * std::sqrt(2.0 * cfg.nu) * eps_;
    const std::size_t n = state_->size();
    for (auto* v : {&impl_->k1, &impl_->k2, &impl_->k3, &impl_->k4, &impl_->xt, &impl_->acc,
                    &impl_->tmp, &impl_->tmp2})
        v->assign(n, 0.0);
    impl_->dW.assign(noise_->size(), 0.0);
    if (cfg.scheme == Scheme::cayley_split) {
        impl_->chains.reserve(noise_->size());
        for (const Mode& k : noise_->modes()) impl_->chains.push_back(build_chains(k, *state_));
    } else {
        impl_->A.reserve(noise_->size());
        for (const Mode& k : noise_->modes())
            impl_->A.push_back(std::make_unique<NoiseCoupling>(k, state_));
    }
}

TransportIntegrator::~TransportIntegrator() = default;

namespace {
void rk4_step(DriftOperator& b, std::vector<double>& x, double h, std::vector<double>& k1,
              std::vector<double>& k2, std::vector<double>& k3, std::vector<double>& k4,
              std::vector<double>& xt) {
    const std::size_t n = x.size();
    b.apply(x.data(), k1.data());
    for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * h * k1[i];
    b.apply(xt.data(), k2.data());
    for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * h * k2[i];
    b.apply(xt.data(), k3.data());
    for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + h * k3[i];
    b.apply(xt.data(), k4.data());
    const double w = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) x[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}
}  // namespace

void TransportIntegrator::noise_substep(std::vector<double>& x, const std::vector<double>& dW) {
    auto& im = *impl_;
    im.map.to_complex(x.data(), im.z.data());
    for (std::size_t q = 0; q < noise_->size(); ++q) {
        const ChainSet& cs = im.chains[q];
        const double c = im.noise_scale * dW[q];
        for (std::size_t ci = 0; ci + 1 < cs.off.size(); ++ci) {
            const double alpha = 0.5 * c * kPi * cs.coupling_const[ci];
            chain_cayley(cs, ci, alpha, im.z, im.dbuf, im.ybuf);
        }
    }
    im.map.to_real(im.z.data(), x.data());
}

void TransportIntegrator::step(std::vector<double>& x, std::vector<RngStream>& noise) {
    auto& im = *impl_;
    const std::size_t n = x.size();
    const double dt = cfg_.dt;
    const double sdt = std::sqrt(dt);
    if (noise.size() != noise_->size())
        throw std::invalid_argument("TransportIntegrator: one RNG stream per noise mode required");

    if (cfg_.scheme == Scheme::cayley_split) {
        rk4_step(*im.drift, x, 0.5 * dt, im.k1, im.k2, im.k3, im.k4, im.xt);
        for (std::size_t q = 0; q < noise_->size(); ++q) im.dW[q] = sdt * noise[q].normal();
        noise_substep(x, im.dW);
        rk4_step(*im.drift, x, 0.5 * dt, im.k1, im.k2, im.k3, im.k4, im.xt);
        return;
    }

    // ito_em: x += (b + 4 nu eps^2 sum A_k^2 x) dt + scale * sum (A_k x) dW_k
    im.drift->apply(x.data(), im.acc.data());
    const double fac = 4.0 * cfg_.nu * eps_ * eps_;
    std::fill(im.k1.begin(), im.k1.end(), 0.0);  // noise accumulator
    for (std::size_t q = 0; q < noise_->size(); ++q) {
        const NoiseCoupling& A = *im.A[q];
        A.apply(x.data(), im.tmp.data());
        A.apply(im.tmp.data(), im.tmp2.data());
        const double dw = sdt * noise[q].normal();
        for (std::size_t i = 0; i < n; ++i) {
            im.acc[i] += fac * im.tmp2[i];
            im.k1[i] += dw * im.tmp[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) x[i] += dt * im.acc[i] + im.noise_scale * im.k1[i];
}

// ---------------------------------------------------------------------------
// LimitNseIntegrator
// ---------------------------------------------------------------------------

struct LimitNseIntegrator::Impl {
    std::unique_ptr<DriftOperator> drift;
    std::vector<double> decay, noise_sd;  // per mode: e^{-l dt}, sqrt(1-e^{-2 l dt})
    std::vector<double> k1, k2, k3, k4, xt;
};

LimitNseIntegrator::LimitNseIntegrator(const SimulationConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg.equation != Equation::limit_nse)
        throw std::invalid_argument("LimitNseIntegrator: config is for the transport equation");
    state_ = std::make_shared<const ModeSet>(cfg.cutoff, SetKind::full);
    impl_ = std::make_unique<Impl>();
    impl_->drift = std::make_unique<DriftOperator>(state_, DriftOperator::Backend::pseudospectral);
    const std::size_t n = state_->size();
    impl_->decay.resize(n);
    impl_->noise_sd.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lam = 4.0 * cfg.nu * kPi * kPi * double((*state_)[i].norm2());
        impl_->decay[i] = std::exp(-lam * cfg.dt);
        impl_->noise_sd[i] = std::sqrt(1.0 - std::exp(-2.0 * lam * cfg.dt));
    }
    for (auto* v : {&impl_->k1, &impl_->k2, &impl_->k3, &impl_->k4, &impl_->xt}) v->assign(n, 0.0);
}

LimitNseIntegrator::~LimitNseIntegrator() = default;

void LimitNseIntegrator::step(std::vector<double>& x, std::vector<RngStream>& noise) {
    auto& im = *impl_;
    const std::size_t n = x.size();
    if (noise.size() != n)
        throw std::invalid_argument("LimitNseIntegrator: one RNG stream per mode required");
    rk4_step(*im.drift, x, 0.5 * cfg_.dt, im.k1, im.k2, im.k3, im.k4, im.xt);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = im.decay[i] * x[i] + im.noise_sd[i] * noise[i].normal();
    rk4_step(*im.drift, x, 0.5 * cfg_.dt, im.k1, im.k2, im.k3, im.k4, im.xt);
}

// ---------------------------------------------------------------------------
// Paths and ensembles
// ---------------------------------------------------------------------------

namespace {

struct PathRunner {
    const SimulationConfig& cfg;
    std::shared_ptr<const ModeSet> state;
    std::size_t n_noise;
    TransportIntegrator* transport = nullptr;
    LimitNseIntegrator* limit = nullptr;

    TrajectoryRecord run(std::uint64_t path_index) {
        TrajectoryRecord rec;
        rec.observables = cfg.observables;
        const std::size_t nobs = cfg.observables.size();

        RngStream init(cfg.seed.with_stream(stream_index_for(cfg, path_index, n_noise, 0)));
        std::vector<RngStream> noise;
        noise.reserve(n_noise);
        for (std::size_t q = 0; q < n_noise; ++q)
            noise.emplace_back(cfg.seed.with_stream(stream_index_for(cfg, path_index, n_noise, q + 1)));

        RealField omega = sample_white_noise(state, init);
        std::vector<double>& x = omega.data();

        std::vector<int> obs_idx(nobs);
        for (std::size_t i = 0; i < nobs; ++i) obs_idx[i] = state->index_of(cfg.observables[i]);

        std::vector<double> qv(nobs * nobs, 0.0), prev(nobs, 0.0);
        const auto snapshot = [&](double t) {
            rec.times.push_back(t);
            std::vector<double> vals(nobs);
            for (std::size_t i = 0; i < nobs; ++i) vals[i] = x[std::size_t(obs_idx[i])];
            rec.mode_values.push_back(std::move(vals));
            double e = 0.0;
            for (double v : x) e += v * v;
            rec.enstrophy.push_back(e);
            rec.qv_accum.push_back(qv);
        };

        snapshot(0.0);
        const long n_steps = std::lround(cfg.horizon / cfg.dt);
        for (std::size_t i = 0; i < nobs; ++i) prev[i] = x[std::size_t(obs_idx[i])];
        for (long s = 1; s <= n_steps; ++s) {
            if (transport)
                transport->step(x, noise);
            else
                limit->step(x, noise);
            for (std::size_t a = 0; a < nobs; ++a) {
                const double da = x[std::size_t(obs_idx[a])] - prev[a];
                for (std::size_t b = 0; b < nobs; ++b)
                    qv[a * nobs + b] += da * (x[std::size_t(obs_idx[b])] - prev[b]);
            }
            for (std::size_t i = 0; i < nobs; ++i) prev[i] = x[std::size_t(obs_idx[i])];
            if (s % cfg.record_stride == 0) snapshot(double(s) * cfg.dt);
        }
        return rec;
    }
};

}  // namespace

TrajectoryRecord simulate_path(const SimulationConfig& cfg, std::uint64_t path_index) {
    cfg.validate();
    PathRunner runner{cfg, nullptr, 0, nullptr, nullptr};
    if (cfg.equation == Equation::transport_euler) {
        TransportIntegrator integ(cfg);
        runner.state = std::make_shared<const ModeSet>(cfg.cutoff, SetKind::full);
        runner.n_noise = integ.noise_set().size();
        runner.transport = &integ;
        return runner.run(path_index);
    }
    LimitNseIntegrator integ(cfg);
    runner.state = std::make_shared<const ModeSet>(cfg.cutoff, SetKind::full);
    runner.n_noise = integ.state_set().size();
    runner.limit = &integ;
    return runner.run(path_index);
}

std::vector<TrajectoryRecord> simulate_ensemble(const SimulationConfig& cfg, int n_paths,
                                                int threads) {
    cfg.validate();
    if (n_paths < 1) throw std::invalid_argument("simulate_ensemble: n_paths must be >= 1");
    const int nt = std::min(default_threads(threads), n_paths);
    std::vector<TrajectoryRecord> out(std::size_t(n_paths));

    const auto worker = [&](int tid) {
        PathRunner runner{cfg, nullptr, 0, nullptr, nullptr};
        std::unique_ptr<TransportIntegrator> ti;
        std::unique_ptr<LimitNseIntegrator> li;
        if (cfg.equation == Equation::transport_euler) {
            ti = std::make_unique<TransportIntegrator>(cfg);
            runner.n_noise = ti->noise_set().size();
            runner.transport = ti.get();
        } else {
            li = std::make_unique<LimitNseIntegrator>(cfg);
            runner.n_noise = li->state_set().size();
            runner.limit = li.get();
        }
        runner.state = std::make_shared<const ModeSet>(cfg.cutoff, SetKind::full);
        for (int p = tid; p < n_paths; p += nt) out[std::size_t(p)] = runner.run(std::uint64_t(p));
    };

    if (nt == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(nt));
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    return out;
}

}  // namespace vortlab
