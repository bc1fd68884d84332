#pragma once

#include <string>
#include <vector>

#include "spinchain/model.hpp"

namespace spinchain {

// Master small parameter alpha = |J| / (sqrt(4K^2-1) A^3 |delta_omega|),
// proportional to the pi-pulse Rabi frequency over the neighbor frequency step.
double alpha(const ChainConfig& cfg);

// Per-pulse ratio alpha_k = Omega_k / |delta_omega| = alpha * sum_{m=1}^{k} m^-3
// for k >= 1; alpha_0 = alpha (the Hadamard pulse scale).
double alpha_k(int k, const ChainConfig& cfg);

// delta_omega magnitude implied by a target alpha (inverts the alpha formula).
double delta_omega_for_alpha(double target_alpha, const ChainConfig& cfg);

// Nonresonant-transition error and magnetization for L > 2, from the fitted
// scaling laws P = -P0 + P1 L, M = M0 - M1 L with power-law coefficients.
double p_nr(int n_qubits, double alpha);
double m_nr(int n_qubits, double alpha);

struct NrCoefficients {
    double p0 = 0.0, p1 = 0.0;  // P_nr = -p0 + p1 L
    double m0 = 0.0, m1 = 0.0;  // M_nr =  m0 - m1 L
};
NrCoefficients nr_coefficients(double alpha);

// Linear map M_nr = g0 + g1 P_nr implied by the two fitted lines.
struct MpMap {
    double g0 = 0.0, g1 = 0.0;
};
MpMap mp_map(double alpha);

// Residual amplitude left on the excited branch by one pulse when the fields
// of the two neighboring chains are ignored, and its K=1 lower bound
// sqrt(P_int) > 0.51 (L-1) chi^3 at the worst pulse j = L-1.
struct InterchainError {
    double amplitude = 0.0;     // |C_p'| after pulse j
    double p_int = 0.0;         // amplitude^2
    double sqrt_bound = 0.0;    // 0.51 (L-1) chi^3
};
InterchainError p_int_bound(int n_qubits, double chi, int suppression_k, int j = -1);

// Errors caused by one displaced qubit k acted on by its own pulse.
// p_d / p_d_prime(+/-) apply to k >= 1 (pi pulses, evaluated at alpha_k);
// eta and p_d_dprime describe the displaced qubit 0 under the Hadamard pulse.
struct DisplacementErrors {
    double p_d = 0.0;
    double p_d_prime_plus = 0.0;
    double p_d_prime_minus = 0.0;
    double eta = 0.0;        // excited-state probability after the Hadamard
    double p_d_dprime = 0.0;  // 1 - 2 eta
};
DisplacementErrors displacement_errors(double v, int k, const ChainConfig& cfg);

// Influence of a displaced qubit k on the pulse addressing qubit j != k.
struct CrosstalkErrors {
    double delta_jk = 0.0;   // detuning shift, rad/us
    double beta_jk = 0.0;    // delta_jk / Omega_j, dimensionless
    double p_jk = 0.0;       // excited-state error, 9(4K^2-1) v^2 / (8 (j-k)^8 zeta(3)^2)
    double p_prime_jk = 0.0;  // ground-state error, pi^2 (4K^2-1) / (128 K^4) beta^2
};
CrosstalkErrors displacement_crosstalk(double v, int j, int k, const ChainConfig& cfg);

// Ensemble-averaged displacement magnetization
// (xi/L) [ sum_{k=1}^{L-1} (P_d,k - avg P'_d,k) + P_d'' ].
double m_displacement_ensemble(double xi, double v, const ChainConfig& cfg);

// Total estimate M = M_nr + mean displacement magnetization.
double m_total_displacement(double xi, double v, const ChainConfig& cfg);

// Field-fluctuation (per-pulse random Larmor offset) error budget.
struct OscillationErrors {
    double p_osc_hadamard = 0.0;          // (1 - pi/4)(vbar/alpha_0)^2
    std::vector<double> p_osc_prime;      // ground-state branch, pulses k = 1..L-1
    std::vector<double> p_osc_dprime;     // excited-state branch
    double p_osc_total = 0.0;             // hadamard + sum of both branches
    double p_total = 0.0;                 // p_nr + p_osc_total
    double m_osc = 0.0;
};
OscillationErrors oscillation_errors(double v_bar, const ChainConfig& cfg);
double m_oscillation(double v_bar, const ChainConfig& cfg);

// Optimal alpha balancing nonresonant vs fluctuation errors (closed form).
double alpha_opt(double v_bar, int n_qubits, int suppression_k);

// All channels evaluated in one place, with soft validity notes.
struct ErrorBudget {
    double alpha = 0.0;
    double p_nr = 0.0;
    double m_nr = 0.0;
    DisplacementErrors displacement;  // at displaced_site
    int displaced_site = 0;
    double m_d_mean = 0.0;   // ensemble displacement magnetization
    double m_total = 0.0;    // m_nr + m_d_mean
    double p_total_displaced = 0.0;  // p_nr + p_d + p_d_prime(-) for the displaced site
    double p_int = 0.0;              // inter-chain, worst pulse; 0 when no chain spacing given
    double sqrt_p_int_bound = 0.0;
    double p_osc_total = 0.0;
    double p_total_osc = 0.0;        // p_nr + oscillation terms
    double m_osc = 0.0;
    double m_total_osc = 0.0;        // m_nr + m_osc
    double alpha_opt = 0.0;
    std::vector<std::string> warnings;
};
ErrorBudget error_budget(const ChainConfig& cfg, double xi, double v, double v_bar,
                         int displaced_site = -1, double chi = 0.0);

std::string error_budget_json(const ErrorBudget& budget);

}  // namespace spinchain
