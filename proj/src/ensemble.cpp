#include "spinchain/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "spinchain/errors.hpp"

namespace spinchain {

namespace {

using DisplacementPattern = std::vector<std::pair<int, int>>;  // (site, sign)

DisplacementPattern sample_pattern(const ChainConfig& cfg, const NoiseModel& noise,
                                   RngStream& stream) {
    DisplacementPattern pattern;
    if (noise.xi <= 0.0) return pattern;
    for (int l = 0; l < cfg.n_qubits; ++l) {
        if (stream.next_bernoulli(noise.xi)) pattern.emplace_back(l, stream.next_sign());
    }
    return pattern;
}

SpinSystem apply_pattern(const ChainConfig& cfg, const DisplacementPattern& pattern, double v) {
    SpinSystem sys = SpinSystem::ideal_chain(cfg);
    for (const auto& [site, sign] : pattern) {
        const double step = static_cast<double>(sign) * v;
        sys = sys.displaced(site, step, step * cfg.delta_omega);
    }
    return sys;
}

double kahan_mean(const std::vector<double>& xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(xs.size());
}

double stderr_of_mean(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const auto n = static_cast<double>(xs.size());
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

void NoiseModel::validate() const {
    if (xi < 0.0 || xi > 1.0) throw std::invalid_argument("NoiseModel: xi must be in [0, 1]");
    if (v < 0.0) throw std::invalid_argument("NoiseModel: v must be >= 0");
    if (v_bar < 0.0) throw std::invalid_argument("NoiseModel: v_bar must be >= 0");
}

SpinSystem sample_chain(const ChainConfig& cfg, const NoiseModel& noise, RngStream& stream) {
    cfg.validate();
    noise.validate();
    return apply_pattern(cfg, sample_pattern(cfg, noise, stream), noise.v);
}

std::vector<double> sample_fluctuations(const PulseSequence& seq, const NoiseModel& noise,
                                        RngStream& stream) {
    noise.validate();
    std::vector<double> offsets(seq.size(), 0.0);
    if (noise.v_bar <= 0.0) return offsets;
    for (auto& x : offsets) x = stream.next_gaussian() * noise.v_bar;
    return offsets;
}

EnsembleResult run_ensemble(const ChainConfig& cfg, const NoiseModel& noise, int chains,
                            int realizations, Method method, int threads, int dephase_samples) {
    cfg.validate();
    noise.validate();
    if (chains < 1 || realizations < 1)
        throw std::invalid_argument("run_ensemble: chains and realizations must be >= 1");
    if (method == Method::exact && cfg.n_qubits > kMaxExactSpins)
        throw resource_limit_error("run_ensemble: exact method refuses more than 14 spins");
    if (method == Method::two_level && cfg.n_qubits > kMaxTwoLevelSpins)
        throw resource_limit_error("run_ensemble: two-level method refuses more than 20 spins");

    const PulseSequence seq = entanglement_protocol(cfg);
    const long total = static_cast<long>(chains) * static_cast<long>(realizations);
    std::vector<double> ms(static_cast<std::size_t>(total));
    std::vector<double> ps(static_cast<std::size_t>(total));

    // chains sharing a displacement pattern give identical results when the
    // per-pulse fluctuations are off, so memoize on the pattern
    const bool cacheable = noise.v_bar <= 0.0;
    std::map<DisplacementPattern, std::pair<double, double>> cache;
    std::mutex cache_mutex;

    const auto run_one = [&](long w) {
        const long r = w / chains;
        const long i = w % chains;
        RngStream stream = RngStream::derive(noise.seed, static_cast<std::uint64_t>(r),
                                             static_cast<std::uint64_t>(i));
        const DisplacementPattern pattern = sample_pattern(cfg, noise, stream);
        if (cacheable) {
            {
                std::lock_guard<std::mutex> lock(cache_mutex);
                const auto it = cache.find(pattern);
                if (it != cache.end()) {
                    ms[static_cast<std::size_t>(w)] = it->second.first;
                    ps[static_cast<std::size_t>(w)] = it->second.second;
                    return;
                }
            }
            const SpinSystem sys = apply_pattern(cfg, pattern, noise.v);
            RunOptions opts;
            opts.method = method;
            const RunResult res = run_protocol_dephased(sys, seq, opts, dephase_samples);
            {
                std::lock_guard<std::mutex> lock(cache_mutex);
                cache.emplace(pattern, std::make_pair(res.m, res.p));
            }
            ms[static_cast<std::size_t>(w)] = res.m;
            ps[static_cast<std::size_t>(w)] = res.p;
        } else {
            RunOptions opts;
            opts.method = method;
            for (double g : sample_fluctuations(seq, noise, stream))
                opts.pulse_offsets.push_back(g * cfg.delta_omega);
            const SpinSystem sys = apply_pattern(cfg, pattern, noise.v);
            const RunResult res = run_protocol_dephased(sys, seq, opts, dephase_samples);
            ms[static_cast<std::size_t>(w)] = res.m;
            ps[static_cast<std::size_t>(w)] = res.p;
        }
    };

    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    if (n_threads == 1 || total == 1) {
        for (long w = 0; w < total; ++w) run_one(w);
    } else {
        std::atomic<long> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&]() {
                try {
                    for (long w = next.fetch_add(1); w < total; w = next.fetch_add(1)) run_one(w);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(total);
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    EnsembleResult out;
    out.chains = chains;
    out.realizations = realizations;
    out.realization_m.resize(static_cast<std::size_t>(realizations));
    out.realization_p.resize(static_cast<std::size_t>(realizations));
    for (long r = 0; r < realizations; ++r) {
        const auto begin = static_cast<std::size_t>(r * chains);
        const std::vector<double> mr(ms.begin() + static_cast<long>(begin),
                                     ms.begin() + static_cast<long>(begin) + chains);
        const std::vector<double> pr(ps.begin() + static_cast<long>(begin),
                                     ps.begin() + static_cast<long>(begin) + chains);
        out.realization_m[static_cast<std::size_t>(r)] = kahan_mean(mr);
        out.realization_p[static_cast<std::size_t>(r)] = kahan_mean(pr);
    }
    out.m_mean = kahan_mean(out.realization_m);
    out.p_mean = kahan_mean(out.realization_p);
    out.m_stderr = stderr_of_mean(out.realization_m, out.m_mean);
    out.p_stderr = stderr_of_mean(out.realization_p, out.p_mean);
    return out;
}

}  // namespace spinchain
