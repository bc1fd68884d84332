#pragma once

#include <string>
#include <vector>

#include "spinchain/model.hpp"

namespace spinchain {

enum class PulseKind { hadamard, cnot };

// One rectangular circularly polarized RF pulse. A hadamard pulse satisfies
// rabi * duration = pi/2, a cnot pulse rabi * duration = pi.
struct Pulse {
    int target = 0;         // site the pulse addresses
    double nu = 0.0;        // drive frequency, rad/us
    double rabi = 0.0;      // Rabi frequency, rad/us, > 0
    double phase = 0.0;     // rad
    double duration = 0.0;  // us
    PulseKind kind = PulseKind::cnot;
};

// Ordered protocol with contiguous pulses: start_times[0] = 0 and
// start_times[n+1] = start_times[n] + pulses[n].duration.
struct PulseSequence {
    std::vector<Pulse> pulses;
    std::vector<double> start_times;
    double total_time = 0.0;

    static PulseSequence from_pulses(std::vector<Pulse> pulses);
    std::size_t size() const { return pulses.size(); }
};

// Placement of the driven chain inside a parallel array of chains.
struct ChainGeometry {
    double spacing_d = 0.0;  // inter-chain distance D in nm, > 0
    double chi = 0.0;        // A / D, < 1
    int n_chains = 1;        // R
    int chain_index = 0;     // r, the chain being driven

    static ChainGeometry make(const ChainConfig& cfg, double spacing_d_nm, int n_chains = 3,
                              int chain_index = 1);
};

// pi/2 pulse flipping qubit 0 of the ground state:
// nu = omega0 + (J / 2A^3) sum_{l=1}^{L-1} 1/l^3, rabi = Omega_H, phase 0.
Pulse hadamard_pulse(const ChainConfig& cfg);

// pi pulse flipping qubit j (1 <= j <= L-1) in the excited ladder state
// |0...0 1_{j-1}...1_0>, with the flip of the same qubit in the ground state
// suppressed exactly by the 2piK choice of the Rabi frequency.
Pulse cnot_pulse(int j, const ChainConfig& cfg);

// Full entanglement protocol: hadamard followed by cnot(1) ... cnot(L-1).
PulseSequence entanglement_protocol(const ChainConfig& cfg);

// cnot_pulse with frequency and Rabi corrections for the fields of the two
// neighboring chains (intermediate chain assumed). Reduces to cnot_pulse as
// the chain distance goes to infinity.
Pulse corrected_pulse(int j, const ChainConfig& cfg, const ChainGeometry& geom);

// Corrected protocol: uncorrected hadamard + corrected cnot pulses.
PulseSequence entanglement_protocol(const ChainConfig& cfg, const ChainGeometry& geom);

// Largest chain length whose protocol duration fits within T2.
struct LmaxResult {
    int l_max = 1;              // from the exact pulse-duration sum (authoritative)
    int l_max_zeta = 1;         // from the (L-1)/zeta(3) + 0.3399 closed form
    double rhs = 0.0;           // |J| T2 / (pi A^3 sqrt(4K^2-1))
    double lhs_exact = 0.0;     // exact sum at l_max
    double lhs_zeta = 0.0;      // closed-form estimate at l_max
};
LmaxResult max_chain_length(double t2_us, const ChainConfig& cfg);

// Duration sum sum_{j=1}^{L-1} (sum_{m=1}^{j} m^-3)^-1 entering the T2 budget.
double protocol_duration_sum(int n_qubits);

// CSV with columns index,kind,target,nu_MHz,rabi_MHz,phase_rad,duration_us,t_start_us.
std::string pulse_schedule_csv(const PulseSequence& seq);

}  // namespace spinchain
