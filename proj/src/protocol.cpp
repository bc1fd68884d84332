#include "spinchain/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace spinchain {

namespace {

double cube(double x) { return x * x * x; }

// s_l^z of the excited ladder state right before pulse j: qubits 0..j-1 are
// already flipped (-1/2), qubits j..L-1 still up (+1/2).
double ladder_sz(int l, int j) { return l < j ? -0.5 : 0.5; }

}  // namespace

PulseSequence PulseSequence::from_pulses(std::vector<Pulse> pulses) {
    PulseSequence seq;
    seq.pulses = std::move(pulses);
    seq.start_times.resize(seq.pulses.size());
    double t = 0.0;
    for (std::size_t n = 0; n < seq.pulses.size(); ++n) {
        seq.start_times[n] = t;
        t += seq.pulses[n].duration;
    }
    seq.total_time = t;
    return seq;
}

ChainGeometry ChainGeometry::make(const ChainConfig& cfg, double spacing_d_nm, int n_chains,
                                  int chain_index) {
    if (spacing_d_nm <= 0.0) throw std::invalid_argument("ChainGeometry: spacing must be > 0");
    ChainGeometry g;
    g.spacing_d = spacing_d_nm;
    g.chi = cfg.spacing / spacing_d_nm;
    g.n_chains = n_chains;
    g.chain_index = chain_index;
    if (g.chi >= 1.0) throw std::invalid_argument("ChainGeometry: requires chi = A/D < 1");
    return g;
}

Pulse hadamard_pulse(const ChainConfig& cfg) {
    cfg.validate();
    const double a3 = cube(cfg.spacing);
    double sum = 0.0;
    for (int l = cfg.n_qubits - 1; l >= 1; --l) sum += 1.0 / cube(static_cast<double>(l));
    Pulse p;
    p.target = 0;
    p.nu = cfg.omega0 + cfg.coupling / (2.0 * a3) * sum;
    p.rabi = cfg.hadamard_rabi();
    p.phase = 0.0;
    p.duration = kPi / (2.0 * p.rabi);
    p.kind = PulseKind::hadamard;
    return p;
}

Pulse cnot_pulse(int j, const ChainConfig& cfg) {
    cfg.validate();
    if (j < 1 || j >= cfg.n_qubits)
        throw std::invalid_argument("cnot_pulse: target must be in [1, L-1]; qubit 0 is the Hadamard target");
    const double a3 = cube(cfg.spacing);
    const double k = static_cast<double>(cfg.suppression_k);

    // resonance with the excited ladder state
    double field = 0.0;
    for (int l = 0; l < cfg.n_qubits; ++l) {
        if (l == j) continue;
        field += ladder_sz(l, j) / cube(static_cast<double>(std::abs(l - j)));
    }
    // ground-state detuning sum, sum_{l<j} (j-l)^-3
    double below = 0.0;
    for (int l = 0; l < j; ++l) below += 1.0 / cube(static_cast<double>(j - l));

    Pulse p;
    p.target = j;
    p.nu = cfg.omega0 + static_cast<double>(j) * cfg.delta_omega + cfg.coupling / a3 * field;
    p.rabi = std::abs(cfg.coupling) / (a3 * std::sqrt(4.0 * k * k - 1.0)) * below;
    p.phase = 0.0;
    p.duration = kPi / p.rabi;
    p.kind = PulseKind::cnot;
    return p;
}

PulseSequence entanglement_protocol(const ChainConfig& cfg) {
    cfg.validate();
    if (cfg.n_qubits < 2)
        throw std::invalid_argument("entanglement_protocol: need at least 2 qubits");
    std::vector<Pulse> pulses;
    pulses.reserve(static_cast<std::size_t>(cfg.n_qubits));
    pulses.push_back(hadamard_pulse(cfg));
    for (int j = 1; j < cfg.n_qubits; ++j) pulses.push_back(cnot_pulse(j, cfg));
    return PulseSequence::from_pulses(std::move(pulses));
}

Pulse corrected_pulse(int j, const ChainConfig& cfg, const ChainGeometry& geom) {
    Pulse p = cnot_pulse(j, cfg);
    const double d3 = cube(geom.spacing_d);
    const double chi2 = geom.chi * geom.chi;
    const double k = static_cast<double>(cfg.suppression_k);

    double field = 0.0;
    double below = 0.0;
    for (int l = 0; l < cfg.n_qubits; ++l) {
        if (l == j) continue;
        const double dj = static_cast<double>(j - l);
        const double kernel = std::pow(1.0 + chi2 * dj * dj, -1.5);
        field += ladder_sz(l, j) * kernel;
        if (l < j) below += kernel;
    }
    p.nu += 2.0 * cfg.coupling / d3 * field;
    p.rabi += 2.0 * std::abs(cfg.coupling) / (d3 * std::sqrt(4.0 * k * k - 1.0)) * below;
    p.duration = kPi / p.rabi;
    return p;
}

PulseSequence entanglement_protocol(const ChainConfig& cfg, const ChainGeometry& geom) {
    cfg.validate();
    if (cfg.n_qubits < 2)
        throw std::invalid_argument("entanglement_protocol: need at least 2 qubits");
    std::vector<Pulse> pulses;
    pulses.reserve(static_cast<std::size_t>(cfg.n_qubits));
    pulses.push_back(hadamard_pulse(cfg));
    for (int j = 1; j < cfg.n_qubits; ++j) pulses.push_back(corrected_pulse(j, cfg, geom));
    return PulseSequence::from_pulses(std::move(pulses));
}

double protocol_duration_sum(int n_qubits) {
    double total = 0.0;
    double h3 = 0.0;
    for (int j = 1; j < n_qubits; ++j) {
        h3 += 1.0 / (static_cast<double>(j) * j * j);
        total += 1.0 / h3;
    }
    return total;
}

LmaxResult max_chain_length(double t2_us, const ChainConfig& cfg) {
    cfg.validate();
    if (t2_us <= 0.0) throw std::invalid_argument("max_chain_length: T2 must be > 0");
    const double k = static_cast<double>(cfg.suppression_k);
    LmaxResult res;
    res.rhs = std::abs(cfg.coupling) * t2_us /
              (kPi * cube(cfg.spacing) * std::sqrt(4.0 * k * k - 1.0));

    // grow the exact duration sum until it crosses rhs
    res.l_max = 1;
    double sum = 0.0;
    double h3 = 0.0;
    for (int j = 1;; ++j) {
        h3 += 1.0 / (static_cast<double>(j) * j * j);
        sum += 1.0 / h3;
        if (sum > res.rhs) break;
        res.l_max = j + 1;
        if (res.l_max > 1000000) break;  // T2 effectively unbounded
    }
    res.lhs_exact = protocol_duration_sum(res.l_max);

    // closed-form estimate (L-1)/zeta(3) + 0.3399
    res.l_max_zeta = std::max(1, static_cast<int>(std::floor((res.rhs - 0.3399) * kZeta3)) + 1);
    res.lhs_zeta = static_cast<double>(res.l_max - 1) / kZeta3 + 0.3399;
    return res;
}

std::string pulse_schedule_csv(const PulseSequence& seq) {
    std::string out = "index,kind,target,nu_MHz,rabi_MHz,phase_rad,duration_us,t_start_us\n";
    char line[256];
    for (std::size_t n = 0; n < seq.pulses.size(); ++n) {
        const Pulse& p = seq.pulses[n];
        std::snprintf(line, sizeof(line), "%zu,%s,%d,%.16e,%.16e,%.16e,%.16e,%.16e\n", n,
                      p.kind == PulseKind::hadamard ? "hadamard" : "cnot", p.target,
                      rad_us_to_mhz(p.nu), rad_us_to_mhz(p.rabi), p.phase, p.duration,
                      seq.start_times[n]);
        out += line;
    }
    return out;
}

}  // namespace spinchain
