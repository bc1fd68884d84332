#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <eigen3/Eigen/Dense>

#include "spinchain/model.hpp"
#include "spinchain/protocol.hpp"

namespace spinchain {

enum class Method { exact, two_level };

// Outcome of one protocol run. Amplitudes are Schroedinger-picture; P and M
// are basis-probability functionals so the picture does not matter for them.
struct RunResult {
    Eigen::VectorXcd amplitudes;
    double p = 0.0;           // error probability
    double m = 0.0;           // dimensionless magnetization
    double phase = 0.0;       // relative phase arg(C_{2^L-1}/C_0), rad
    double total_time = 0.0;  // us
    std::vector<std::pair<std::uint64_t, double>> leading_states;  // top basis probabilities
    // per-pulse probability of the expected excited-ladder state (optional)
    std::vector<double> ladder_probabilities;
};

// Diagonal energies E_p of a spin system over the full 2^N basis,
// shared between pulses of one run.
class EnergyTable {
  public:
    explicit EnergyTable(const SpinSystem& sys);

    // E_p plus a uniform Larmor offset applied to every spin.
    double energy(std::uint64_t p, double larmor_offset) const {
        return base_[p] + larmor_offset * (static_cast<double>(std::popcount(p)) -
                                           0.5 * static_cast<double>(n_spins_));
    }

    // Energy gained by flipping bit j of p from 0 to 1 (local-field form,
    // free of large cancellations): omega_j + offset + sum_{l != j} J_jl s_l(p).
    double flip_gap(std::uint64_t p, int j, double larmor_offset) const;

    int n_spins() const { return n_spins_; }

  private:
    std::vector<double> base_;
    std::vector<double> larmor_;
    std::vector<double> couplings_;  // row-major n x n
    int n_spins_;
};

// Hamiltonian of one pulse in its rotating frame: diagonal E_p - nu * ones(p),
// off-diagonal -(rabi/2) e^{-i phase} on every single-bit-flip pair (entry of
// the row with one extra excitation), Hermitian conjugate on the transpose.
Eigen::MatrixXcd rotating_frame_matrix(const Pulse& pulse, const SpinSystem& sys,
                                       double larmor_offset = 0.0);

// Exact propagation of one pulse via eigendecomposition of the rotating-frame
// Hamiltonian. t_start is the pulse start time (frame boundary phases).
QuantumState apply_pulse_exact(const QuantumState& state, const Pulse& pulse,
                               const SpinSystem& sys, double t_start = 0.0);

// Closed-form two-level (generalized Rabi) propagation: the analytic 2x2
// unitary applied to every basis pair differing in the pulse target bit.
QuantumState apply_pulse_two_level(const QuantumState& state, const Pulse& pulse,
                                   const SpinSystem& sys, double t_start = 0.0);

// Pulse propagator with cached energy table; reusable across pulses and
// noise realizations that share the geometry. Pure, thread-compatible.
class Propagator {
  public:
    explicit Propagator(const SpinSystem& sys);

    QuantumState apply_exact(const QuantumState& state, const Pulse& pulse, double t_start,
                             double larmor_offset = 0.0) const;
    QuantumState apply_two_level(const QuantumState& state, const Pulse& pulse, double t_start,
                                 double larmor_offset = 0.0) const;

    const SpinSystem& system() const { return sys_; }

  private:
    SpinSystem sys_;
    EnergyTable energies_;
};

struct RunOptions {
    Method method = Method::exact;
    // uniform Larmor offset per pulse (rad/us); empty means none
    std::vector<double> pulse_offsets;
    std::optional<QuantumState> initial;  // default |00...0>
    bool track_ladder = false;            // record per-pulse ladder-state probability
    int n_leading = 4;
};

// Fold a pulse sequence over the register, left to right.
RunResult run_protocol(const SpinSystem& sys, const PulseSequence& seq, const RunOptions& opts = {});
RunResult run_protocol(const SpinSystem& sys, const PulseSequence& seq, Method method);

// Systematic-error measurement for scaling studies: averages the final
// populations of n_samples protocol repetitions whose inter-pulse timing is
// offset over one beat period 2 pi / |delta omega| (deterministic grid).
// Single rectangular-pulse runs carry a phase-sensitive first-order
// interference between the two superposition branches (the next pulse still
// drives the freshly split pair off-resonantly); repetition-averaged
// populations isolate the systematic error channels. P and M are evaluated
// on the averaged populations; amplitudes hold their square roots.
RunResult run_protocol_dephased(const SpinSystem& sys, const PulseSequence& seq,
                                const RunOptions& opts = {}, int n_samples = 16);

// Independent verification path: fixed-step RK4 integration of the
// time-dependent Schroedinger equation with the lab-frame circular drive.
// Refuses more than 8 spins.
RunResult ode_oracle(const SpinSystem& sys, const PulseSequence& seq,
                     double target_error = 1e-9);

std::string run_result_json(const RunResult& result);

inline constexpr int kMaxExactSpins = 14;
inline constexpr int kMaxTwoLevelSpins = 20;
inline constexpr int kMaxOracleSpins = 8;

}  // namespace spinchain
