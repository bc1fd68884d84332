#include <doctest.h>

#include <cmath>

#include "spinchain/dynamics.hpp"
#include "spinchain/model.hpp"
#include "spinchain/protocol.hpp"

using namespace spinchain;

namespace {

ChainConfig electron_config(int n_qubits, double delta_omega_mhz = 141.0) {
    ChainConfig cfg;
    cfg.n_qubits = n_qubits;
    cfg.omega0 = mhz_to_rad_us(500.0);
    cfg.delta_omega = mhz_to_rad_us(delta_omega_mhz);
    cfg.coupling = mhz_to_rad_us(-52.0);
    cfg.spacing = 2.2;
    cfg.suppression_k = 1;
    return cfg;
}

// excited ladder state before pulse j: bits 0..j-1 set
std::uint64_t ladder_state(int j) { return (1ull << j) - 1; }

}  // namespace

TEST_CASE("hadamard pulse frequency") {
    SUBCASE("single qubit: bare Larmor frequency") {
        const Pulse p = hadamard_pulse(electron_config(1));
        CHECK(p.nu == doctest::Approx(mhz_to_rad_us(500.0)).epsilon(1e-14));
    }
    SUBCASE("two qubits: one dipole term") {
        ChainConfig cfg = electron_config(2);
        const Pulse p = hadamard_pulse(cfg);
        const double a3 = cfg.spacing * cfg.spacing * cfg.spacing;
        CHECK(p.nu == doctest::Approx(cfg.omega0 + cfg.coupling / (2.0 * a3)).epsilon(1e-14));
    }
    SUBCASE("generic L: matches the E_1 - E_0 energy gap") {
        for (int l : {3, 5, 9}) {
            ChainConfig cfg = electron_config(l);
            const SpinSystem sys = SpinSystem::ideal_chain(cfg);
            const Pulse p = hadamard_pulse(cfg);
            CHECK(p.nu ==
                  doctest::Approx(state_energy(1, sys) - state_energy(0, sys)).epsilon(1e-12));
        }
    }
}

TEST_CASE("pulse area invariants") {
    ChainConfig cfg = electron_config(8);
    const Pulse h = hadamard_pulse(cfg);
    CHECK(h.rabi * h.duration == doctest::Approx(kPi / 2.0).epsilon(1e-12));
    CHECK(h.phase == 0.0);
    for (int j = 1; j < 8; ++j) {
        const Pulse p = cnot_pulse(j, cfg);
        CHECK(p.rabi * p.duration == doctest::Approx(kPi).epsilon(1e-12));
        CHECK(p.phase == 0.0);
        CHECK(p.target == j);
    }
}

TEST_CASE("cnot frequencies match the printed casework") {
    const int l = 9;
    ChainConfig cfg = electron_config(l);
    const double a3 = cfg.spacing * cfg.spacing * cfg.spacing;

    double sum1 = 0.0;
    for (int m = 3; m < l; ++m) sum1 += 1.0 / std::pow(static_cast<double>(m - 1), 3.0);
    const Pulse p1 = cnot_pulse(1, cfg);
    CHECK(p1.nu == doctest::Approx(cfg.omega0 + cfg.delta_omega +
                                   cfg.coupling / (2.0 * a3) * sum1)
                       .epsilon(1e-13));

    double sum2 = 0.0;
    for (int m = 5; m < l; ++m) sum2 += 1.0 / std::pow(static_cast<double>(m - 2), 3.0);
    const Pulse p2 = cnot_pulse(2, cfg);
    CHECK(p2.nu == doctest::Approx(cfg.omega0 + 2.0 * cfg.delta_omega +
                                   cfg.coupling / (2.0 * a3) * sum2)
                       .epsilon(1e-13));
}

TEST_CASE("first pi pulse Rabi frequency is 2.82 MHz for the electron chain") {
    const Pulse p = cnot_pulse(1, electron_config(9));
    CHECK(rad_us_to_mhz(p.rabi) == doctest::Approx(52.0 / (10.648 * std::sqrt(3.0))).epsilon(1e-12));
    CHECK(rad_us_to_mhz(p.rabi) == doctest::Approx(2.82).epsilon(0.005));
    CHECK_THROWS_AS(cnot_pulse(0, electron_config(9)), std::invalid_argument);
    CHECK_THROWS_AS(cnot_pulse(9, electron_config(9)), std::invalid_argument);
}

TEST_CASE("cnot frequency equals the exact excited-ladder energy gap") {
    for (int l : {4, 8, 12}) {
        ChainConfig cfg = electron_config(l);
        const SpinSystem sys = SpinSystem::ideal_chain(cfg);
        for (int j = 1; j < l; ++j) {
            const std::uint64_t p_prime = ladder_state(j);
            const std::uint64_t q_prime = p_prime | (1ull << j);
            const double gap = state_energy(q_prime, sys) - state_energy(p_prime, sys);
            const Pulse p = cnot_pulse(j, cfg);
            CHECK(p.nu == doctest::Approx(gap).epsilon(1e-12));
        }
    }
}

TEST_CASE("ground-state detuning matches the cubic sum identity") {
    for (int l : {5, 12}) {
        ChainConfig cfg = electron_config(l);
        const SpinSystem sys = SpinSystem::ideal_chain(cfg);
        const double a3 = cfg.spacing * cfg.spacing * cfg.spacing;
        for (int j = 1; j < l; ++j) {
            const Pulse p = cnot_pulse(j, cfg);
            const double gap = state_energy(1ull << j, sys) - state_energy(0, sys);
            double sum = 0.0;
            for (int m = 1; m <= j; ++m) sum += 1.0 / std::pow(static_cast<double>(m), 3.0);
            const double expected = cfg.coupling / a3 * sum;
            CHECK(gap - p.nu == doctest::Approx(expected).epsilon(1e-10));
            // the synthesized Rabi frequency satisfies the 2piK relation against it
            const double k = static_cast<double>(cfg.suppression_k);
            CHECK(p.rabi == doctest::Approx(std::abs(expected) / std::sqrt(4.0 * k * k - 1.0))
                                .epsilon(1e-12));
        }
    }
}

TEST_CASE("protocol sequencing") {
    for (int l : {2, 9}) {
        const PulseSequence seq = entanglement_protocol(electron_config(l));
        CHECK(seq.size() == static_cast<std::size_t>(l));
        CHECK(seq.pulses[0].kind == PulseKind::hadamard);
        CHECK(seq.start_times[0] == 0.0);
        double t = 0.0;
        for (std::size_t n = 0; n < seq.size(); ++n) {
            CHECK(seq.start_times[n] == doctest::Approx(t).epsilon(1e-14));
            t += seq.pulses[n].duration;
        }
        CHECK(seq.total_time == doctest::Approx(t).epsilon(1e-14));
    }
    ChainConfig one = electron_config(1);
    CHECK_THROWS_AS(entanglement_protocol(one), std::invalid_argument);
}

TEST_CASE("corrected pulse reduces to the plain pulse as chains separate") {
    ChainConfig cfg = electron_config(7);
    SUBCASE("infinite separation is bit-identical") {
        const ChainGeometry geom = ChainGeometry::make(cfg, std::numeric_limits<double>::infinity());
        for (int j = 1; j < 7; ++j) {
            const Pulse plain = cnot_pulse(j, cfg);
            const Pulse corr = corrected_pulse(j, cfg, geom);
            CHECK(corr.nu == plain.nu);
            CHECK(corr.rabi == plain.rabi);
            CHECK(corr.duration == plain.duration);
        }
    }
    SUBCASE("corrections vanish like 1/D^3") {
        const Pulse plain = cnot_pulse(3, cfg);
        double previous = 1e300;
        for (double d : {50.0, 100.0, 200.0}) {
            const Pulse corr = corrected_pulse(3, cfg, ChainGeometry::make(cfg, d));
            const double diff = std::abs(corr.rabi - plain.rabi);
            CHECK(diff < previous / 7.5);  // each doubling shrinks by ~8
            previous = diff;
        }
    }
    SUBCASE("added kernel raises the Rabi frequency") {
        const ChainGeometry geom = ChainGeometry::make(cfg, 6.0 * cfg.spacing);
        for (int j = 1; j < 7; ++j) {
            CHECK(corrected_pulse(j, cfg, geom).rabi > cnot_pulse(j, cfg).rabi);
        }
    }
    SUBCASE("pi area preserved after correction") {
        const ChainGeometry geom = ChainGeometry::make(cfg, 10.0);
        const Pulse corr = corrected_pulse(2, cfg, geom);
        CHECK(corr.rabi * corr.duration == doctest::Approx(kPi).epsilon(1e-12));
    }
}

TEST_CASE("corrected pulse matches the chain-array energy gap up to the aligned-spin term") {
    // three chains with every chain in the same ladder pattern: the corrected
    // frequency accounts for all neighbor-chain fields except the two spins at
    // the same site index, which contribute exactly 2 (J/D^3)(1/2).
    ChainConfig cfg = electron_config(4);
    const double spacing_d = 9.0;
    const ChainGeometry geom = ChainGeometry::make(cfg, spacing_d);
    const SpinSystem array = SpinSystem::chain_array(cfg, 3, spacing_d);
    const int l = cfg.n_qubits;
    for (int j = 1; j < l; ++j) {
        std::uint64_t pattern = 0;
        for (int r = 0; r < 3; ++r) pattern |= ladder_state(j) << (r * l);
        const std::uint64_t flipped = pattern | (1ull << (l + j));  // flip j in the middle chain
        const double gap = state_energy(flipped, array) - state_energy(pattern, array);
        const Pulse corr = corrected_pulse(j, cfg, geom);
        const double aligned_term = cfg.coupling / (spacing_d * spacing_d * spacing_d);
        CHECK(gap - corr.nu == doctest::Approx(aligned_term).epsilon(1e-9));
        // the uncorrected pulse misses exactly the neighbor-chain field sum
        const Pulse plain = cnot_pulse(j, cfg);
        double field = 0.0;
        const double chi2 = geom.chi * geom.chi;
        for (int l = 0; l < cfg.n_qubits; ++l) {
            if (l == j) continue;
            const double dj = static_cast<double>(j - l);
            field += (l < j ? -0.5 : 0.5) * std::pow(1.0 + chi2 * dj * dj, -1.5);
        }
        CHECK(corr.nu - plain.nu ==
              doctest::Approx(2.0 * cfg.coupling / (spacing_d * spacing_d * spacing_d) * field)
                  .epsilon(1e-12));
    }
}

TEST_CASE("chain length budget for the electron parameters") {
    ChainConfig cfg = electron_config(9);
    const LmaxResult res = max_chain_length(20.0, cfg);
    CHECK(res.rhs == doctest::Approx(112.78).epsilon(0.005));
    CHECK(res.l_max == 136);
    CHECK(res.l_max_zeta == 136);
    // closed-form estimate tracks the exact sum to better than 0.5% there
    CHECK(std::abs(res.lhs_zeta - res.lhs_exact) / res.lhs_exact < 0.005);

    SUBCASE("rhs scales as 1/A^3") {
        ChainConfig wide = cfg;
        wide.spacing = 2.0 * cfg.spacing;
        CHECK(max_chain_length(20.0, wide).rhs == doctest::Approx(res.rhs / 8.0).epsilon(1e-12));
    }
    SUBCASE("tiny budget yields a single qubit") {
        CHECK(max_chain_length(1e-4, cfg).l_max == 1);
    }
}

TEST_CASE("schedule CSV has the pinned columns") {
    const PulseSequence seq = entanglement_protocol(electron_config(3));
    const std::string csv = pulse_schedule_csv(seq);
    CHECK(csv.rfind("index,kind,target,nu_MHz,rabi_MHz,phase_rad,duration_us,t_start_us\n", 0) == 0);
    CHECK(csv.find("hadamard") != std::string::npos);
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 4);  // header + 3 pulses
}
