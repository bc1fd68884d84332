#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <eigen3/Eigen/Dense>

#include "spinchain/units.hpp"

namespace spinchain {

// Parameters of one ideal chain of dipole-coupled spin-1/2 qubits in a
// field gradient. Angular frequencies in rad/us; spacing in nm (dimensionless
// multiple of the 1 nm reference used by the coupling).
struct ChainConfig {
    int n_qubits = 2;             // L
    double omega0 = 0.0;          // Larmor frequency of qubit 0
    double delta_omega = 0.0;     // per-site Larmor increment, nonzero
    double coupling = 0.0;        // dipole constant J at 1 nm separation, signed
    double spacing = 1.0;         // neighbor distance A in nm, > 0
    int suppression_k = 1;        // K of the 2piK condition, >= 1
    double omega_hadamard = 0.0;  // Rabi frequency of the pi/2 pulse; 0 picks alpha*|delta_omega|
    double field_angle = kPi / 2.0;  // angle between chain and permanent field

    // Throws std::invalid_argument on hard violations.
    void validate() const;

    // Soft validity notes, e.g. |delta_omega| not >> |J|/A^3.
    std::vector<std::string> validity_warnings() const;

    // Effective Hadamard Rabi frequency (resolves the omega_hadamard == 0 default).
    double hadamard_rabi() const;
};

// Spin register over an arbitrary planar geometry. Coordinates are stored in
// units of the nominal qubit spacing (multiply by spacing_nm() for nm), which
// keeps ideal-chain distances and displacement steps exact. Pair couplings
// are J / r^3 with r the Euclidean distance in nm. Immutable after construction.
class SpinSystem {
  public:
    struct Site {
        double x = 0.0;  // in units of the nominal spacing
        double y = 0.0;
        double larmor = 0.0;  // rad/us
    };

    SpinSystem(std::vector<Site> sites, double coupling_at_1nm, double spacing_nm);

    // Straight chain along x: site l at x = l, larmor omega0 + l*delta_omega.
    static SpinSystem ideal_chain(const ChainConfig& cfg);

    // n_chains parallel copies stacked along y at the given spacing, sharing
    // the x-gradient Larmor profile. Spin (chain r, site l) has index r*L + l.
    static SpinSystem chain_array(const ChainConfig& cfg, int n_chains, double chain_spacing_nm);

    int n_spins() const { return static_cast<int>(sites_.size()); }
    double larmor(int l) const { return sites_[static_cast<std::size_t>(l)].larmor; }
    double coupling_at_1nm() const { return coupling_1nm_; }
    double spacing_nm() const { return spacing_nm_; }
    double x_nm(int l) const { return sites_[static_cast<std::size_t>(l)].x * spacing_nm_; }
    double y_nm(int l) const { return sites_[static_cast<std::size_t>(l)].y * spacing_nm_; }

    // Pair coupling J / r_{lk}^3 in rad/us.
    double coupling(int l, int k) const {
        return couplings_[static_cast<std::size_t>(l) * sites_.size() + static_cast<std::size_t>(k)];
    }

    // Copy with site moved along x by step*spacing and its Larmor frequency
    // shifted by larmor_shift (rad/us). Couplings follow the new position.
    SpinSystem displaced(int site, double step, double larmor_shift) const;

    // Copy with a uniform Larmor offset added to every spin.
    SpinSystem with_larmor_offset(double offset) const;

  private:
    std::vector<Site> sites_;
    double coupling_1nm_;
    double spacing_nm_;
    std::vector<double> couplings_;  // dense n x n, zero diagonal

    void rebuild_couplings();
};

// 2^N complex amplitudes over the product basis. Bit l of the basis index is
// the state of spin l: bit 0 <-> |0> <-> s_z = +1/2, bit 1 <-> |1> <-> s_z = -1/2.
// Index 0 is the ground state, index 2^N - 1 the fully excited state.
class QuantumState {
  public:
    explicit QuantumState(Eigen::VectorXcd amplitudes);

    static QuantumState ground(int n_spins);
    static QuantumState basis_state(int n_spins, std::uint64_t index);

    int n_spins() const { return n_spins_; }
    Eigen::Index dim() const { return amps_.size(); }
    const Eigen::VectorXcd& amplitudes() const { return amps_; }

  private:
    Eigen::VectorXcd amps_;
    int n_spins_;
};

// s_l^z eigenvalue of basis state p: +1/2 if bit l is 0, -1/2 if bit l is 1.
// Checked variant throws std::out_of_range.
inline double sz_bit(std::uint64_t p, int l) {
    return ((p >> static_cast<unsigned>(l)) & 1u) ? -0.5 : 0.5;
}
double sz(std::uint64_t p, int l, int n_spins);

// Diagonal energy E_p = -sum_l omega_l s_l - sum_{l<k} (J/r^3) s_l s_k  (rad/us).
double state_energy(std::uint64_t p, const SpinSystem& sys);

// Dipole coupling constant at 1 nm, J = mu^2 (3 cos^2 theta - 1) / (hbar nm^3),
// returned in the library unit rad/us. mu in erg/G, theta in rad.
double coupling_constant(double mu_erg_per_gauss, double theta_rad);

// Dimensionless z magnetization, (2/L) sum_p |C_p|^2 sum_l s_l^z(p).
// +1 for |00...0>, -1 for |11...1>, 0 for the balanced two-branch state.
double magnetization(const QuantumState& state);

// Magnetization of a single basis state.
inline double basis_magnetization(std::uint64_t p, int n_spins);

// Entanglement error P = |1/2 - |C_0|^2| + |1/2 - |C_{2^L-1}|^2|.
double error_probability(const QuantumState& state);

// Physical z magnetization (1/2) M mu R L in erg/G for R identical chains.
// Formula helper only; does not hold chain-by-chain under noise.
double physical_magnetization(double m, double mu_erg_per_gauss, int n_chains, int n_qubits);

inline double basis_magnetization(std::uint64_t p, int n_spins) {
    const int ones = static_cast<int>(__builtin_popcountll(p));
    return 1.0 - 2.0 * static_cast<double>(ones) / static_cast<double>(n_spins);
}

}  // namespace spinchain
