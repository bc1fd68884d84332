#pragma once

#include <cstdint>
#include <vector>

#include "spinchain/dynamics.hpp"
#include "spinchain/model.hpp"
#include "spinchain/protocol.hpp"
#include "spinchain/rng.hpp"

namespace spinchain {

// Random imperfections of a chain ensemble: each qubit is independently
// displaced by one lattice step (+/- v in units of the spacing, direction
// uniform) with probability xi, and each pulse sees a Gaussian common-mode
// Larmor offset with dimensionless dispersion v_bar (in units of delta_omega).
struct NoiseModel {
    double xi = 0.0;
    double v = 0.0;
    double v_bar = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EnsembleResult {
    double m_mean = 0.0;
    double m_stderr = 0.0;
    double p_mean = 0.0;
    double p_stderr = 0.0;
    int realizations = 0;
    int chains = 0;
    std::vector<double> realization_m;  // per-realization chain means
    std::vector<double> realization_p;
};

// One random chain: qubit k displaced with probability xi by +/- v along x,
// shifting its Larmor frequency by +/- v * delta_omega and every coupling
// through the position change.
SpinSystem sample_chain(const ChainConfig& cfg, const NoiseModel& noise, RngStream& stream);

// One Gaussian(0, v_bar) draw per pulse, scaled by delta_omega; applied as a
// uniform Larmor offset to all spins while that pulse is on.
std::vector<double> sample_fluctuations(const PulseSequence& seq, const NoiseModel& noise,
                                        RngStream& stream);

// Monte Carlo over independent chains and realizations. Chain i of
// realization r draws from the stream derived from (seed, r, i), so the
// result is bit-identical for a fixed seed at any thread count.
// dephase_samples > 1 measures each chain with the timing-offset-averaged
// populations of run_protocol_dephased.
EnsembleResult run_ensemble(const ChainConfig& cfg, const NoiseModel& noise, int chains,
                            int realizations, Method method, int threads = 1,
                            int dephase_samples = 1);

}  // namespace spinchain
