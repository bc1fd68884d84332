#include <doctest.h>

#include <cmath>
#include <complex>

#include "spinchain/model.hpp"
#include "spinchain/rng.hpp"

using namespace spinchain;

namespace {

// Independent energy oracle: spells out the spin values of each site from a
// textual bit expansion and accumulates the two sums directly, without any
// shared helper from the library.
double energy_oracle(std::uint64_t p, const SpinSystem& sys) {
    const int n = sys.n_spins();
    std::vector<double> spin(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        const bool excited = (p / (1ull << l)) % 2 == 1;
        spin[static_cast<std::size_t>(l)] = excited ? -0.5 : 0.5;
    }
    double e = 0.0;
    for (int l = 0; l < n; ++l) e -= sys.larmor(l) * spin[static_cast<std::size_t>(l)];
    for (int l = 0; l < n; ++l) {
        for (int k = l + 1; k < n; ++k) {
            const double dx = sys.x_nm(k) - sys.x_nm(l);
            const double dy = sys.y_nm(k) - sys.y_nm(l);
            const double r = std::sqrt(dx * dx + dy * dy);
            e -= sys.coupling_at_1nm() / (r * r * r) * spin[static_cast<std::size_t>(l)] *
                 spin[static_cast<std::size_t>(k)];
        }
    }
    return e;
}

ChainConfig test_config(int n_qubits) {
    ChainConfig cfg;
    cfg.n_qubits = n_qubits;
    cfg.omega0 = mhz_to_rad_us(500.0);
    cfg.delta_omega = mhz_to_rad_us(141.0);
    cfg.coupling = mhz_to_rad_us(-52.0);
    cfg.spacing = 2.2;
    cfg.suppression_k = 1;
    return cfg;
}

}  // namespace

TEST_CASE("sz follows the bit convention") {
    CHECK(sz(0, 0, 4) == 0.5);
    CHECK(sz(0, 3, 4) == 0.5);
    CHECK(sz(0b1111, 0, 4) == -0.5);
    CHECK(sz(0b1111, 3, 4) == -0.5);
    CHECK(sz(0b001, 0, 3) == -0.5);
    CHECK(sz(0b001, 1, 3) == 0.5);
    CHECK_THROWS_AS(sz(0, 4, 4), std::out_of_range);
    CHECK_THROWS_AS(sz(16, 0, 4), std::out_of_range);
}

TEST_CASE("single-spin energy is the Zeeman term") {
    ChainConfig cfg = test_config(1);
    const SpinSystem sys = SpinSystem::ideal_chain(cfg);
    CHECK(state_energy(0, sys) == doctest::Approx(-cfg.omega0 / 2.0).epsilon(1e-14));
    CHECK(state_energy(1, sys) == doctest::Approx(cfg.omega0 / 2.0).epsilon(1e-14));
}

TEST_CASE("two-spin ground energy matches the closed form") {
    ChainConfig cfg = test_config(2);
    const SpinSystem sys = SpinSystem::ideal_chain(cfg);
    const double a3 = cfg.spacing * cfg.spacing * cfg.spacing;
    const double expected = -(cfg.omega0 + (cfg.omega0 + cfg.delta_omega)) / 2.0 -
                            cfg.coupling / (4.0 * a3);
    CHECK(state_energy(0, sys) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("state energies match the independent oracle up to L = 10") {
    for (int l : {3, 6, 10}) {
        ChainConfig cfg = test_config(l);
        const SpinSystem sys = SpinSystem::ideal_chain(cfg);
        RngStream rng(7u + static_cast<unsigned>(l));
        for (int trial = 0; trial < 40; ++trial) {
            const auto p = rng.next_u64() % (1ull << l);
            const double got = state_energy(p, sys);
            const double want = energy_oracle(p, sys);
            CHECK(got == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("complement symmetry: Ising part even, Zeeman part odd") {
    ChainConfig cfg = test_config(7);
    const SpinSystem sys = SpinSystem::ideal_chain(cfg);
    const std::uint64_t mask = (1ull << 7) - 1;
    RngStream rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const std::uint64_t p = rng.next_u64() & mask;
        const std::uint64_t pbar = ~p & mask;
        double zeeman = 0.0;
        for (int l = 0; l < 7; ++l) zeeman -= sys.larmor(l) * sz_bit(p, l);
        const double ising = state_energy(p, sys) - zeeman;
        CHECK(state_energy(pbar, sys) == doctest::Approx(-zeeman + ising).epsilon(1e-12));
    }
}

TEST_CASE("ideal chain reproduces 1/(k-l)^3 couplings") {
    ChainConfig cfg = test_config(9);
    const SpinSystem sys = SpinSystem::ideal_chain(cfg);
    const double a3 = cfg.spacing * cfg.spacing * cfg.spacing;
    for (int l = 0; l < 9; ++l) {
        CHECK(sys.larmor(l) == doctest::Approx(cfg.omega0 + l * cfg.delta_omega).epsilon(1e-14));
        for (int k = l + 1; k < 9; ++k) {
            const double d = static_cast<double>(k - l);
            CHECK(sys.coupling(l, k) ==
                  doctest::Approx(cfg.coupling / (a3 * d * d * d)).epsilon(1e-12));
        }
    }
    // nearest neighbor exactly J/A^3
    CHECK(sys.coupling(0, 1) == cfg.coupling / a3);
    CHECK(sys.coupling(7, 8) == cfg.coupling / a3);
}

TEST_CASE("chain array geometry gives the inter-chain kernel") {
    ChainConfig cfg = test_config(5);
    const double spacing_d = 7.0;
    const SpinSystem sys = SpinSystem::chain_array(cfg, 2, spacing_d);
    const double chi = cfg.spacing / spacing_d;
    const double d3 = spacing_d * spacing_d * spacing_d;
    for (int j = 0; j < 5; ++j) {
        for (int l = 0; l < 5; ++l) {
            const double dj = static_cast<double>(j - l);
            const double expected = cfg.coupling / d3 * std::pow(1.0 + chi * chi * dj * dj, -1.5);
            CHECK(sys.coupling(j, 5 + l) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("electron dipole coupling is about 52 MHz at 1 nm") {
    const double mu = kElectronGFactor * kBohrMagnetonErgPerGauss;
    const double j = coupling_constant(mu, kPi / 2.0);
    CHECK(j < 0.0);
    CHECK(rad_us_to_mhz(std::abs(j)) == doctest::Approx(52.0).epsilon(0.01));
    // magic angle zero and the theta = 0 ratio
    const double magic = std::acos(std::sqrt(1.0 / 3.0));
    CHECK(std::abs(coupling_constant(mu, magic)) < 1e-6 * std::abs(j));
    CHECK(coupling_constant(mu, 0.0) == doctest::Approx(-2.0 * j).epsilon(1e-12));
}

TEST_CASE("magnetization of the named states") {
    for (int l : {2, 5, 6}) {
        CHECK(magnetization(QuantumState::ground(l)) == doctest::Approx(1.0));
        CHECK(magnetization(QuantumState::basis_state(l, (1ull << l) - 1)) == doctest::Approx(-1.0));
        Eigen::VectorXcd both = Eigen::VectorXcd::Zero(1l << l);
        both[0] = 1.0 / std::sqrt(2.0);
        both[(1l << l) - 1] = 1.0 / std::sqrt(2.0);
        CHECK(magnetization(QuantumState(both)) == doctest::Approx(0.0));
    }
}

TEST_CASE("magnetization is linear in basis weights and bounded") {
    RngStream rng(11);
    const int l = 6;
    const Eigen::Index dim = 1l << l;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXcd amps(dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            amps[i] = std::complex<double>(rng.next_gaussian(), rng.next_gaussian());
        amps.normalize();
        const QuantumState state(amps);
        double weighted = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i)
            weighted += std::norm(amps[i]) * basis_magnetization(static_cast<std::uint64_t>(i), l);
        CHECK(magnetization(state) == doctest::Approx(weighted).epsilon(1e-12));
        CHECK(magnetization(state) <= 1.0 + 1e-12);
        CHECK(magnetization(state) >= -1.0 - 1e-12);
        CHECK(error_probability(state) <= 1.0 + 1e-12);
        CHECK(error_probability(state) >= 0.0);
    }
}

TEST_CASE("error probability of the named states") {
    Eigen::VectorXcd perfect = Eigen::VectorXcd::Zero(64);
    perfect[0] = 1.0 / std::sqrt(2.0);
    perfect[63] = std::complex<double>(0.0, 1.0) / std::sqrt(2.0);
    CHECK(error_probability(QuantumState(perfect)) == doctest::Approx(0.0));
    CHECK(error_probability(QuantumState::ground(6)) == doctest::Approx(1.0));
    Eigen::VectorXcd stalled = Eigen::VectorXcd::Zero(64);
    stalled[0] = 1.0 / std::sqrt(2.0);
    stalled[0b000111] = 1.0 / std::sqrt(2.0);
    CHECK(error_probability(QuantumState(stalled)) == doctest::Approx(0.5));
}

TEST_CASE("displaced system shifts position, larmor, and couplings together") {
    ChainConfig cfg = test_config(6);
    const SpinSystem base = SpinSystem::ideal_chain(cfg);
    const double v = 0.05;
    const SpinSystem moved = base.displaced(3, v, v * cfg.delta_omega);
    CHECK(moved.larmor(3) == doctest::Approx(base.larmor(3) + v * cfg.delta_omega));
    CHECK(moved.x_nm(3) == doctest::Approx((3.0 + v) * cfg.spacing));
    const double a3 = cfg.spacing * cfg.spacing * cfg.spacing;
    CHECK(moved.coupling(2, 3) ==
          doctest::Approx(cfg.coupling / (a3 * std::pow(1.0 + v, 3.0))).epsilon(1e-12));
    CHECK(moved.coupling(3, 4) ==
          doctest::Approx(cfg.coupling / (a3 * std::pow(1.0 - v, 3.0))).epsilon(1e-12));
    CHECK(moved.coupling(0, 1) == base.coupling(0, 1));
}

TEST_CASE("state dimension must be a power of two") {
    Eigen::VectorXcd odd = Eigen::VectorXcd::Zero(6);
    odd[0] = 1.0;
    CHECK_THROWS_AS(QuantumState{odd}, std::invalid_argument);
}

TEST_CASE("config validation") {
    ChainConfig cfg = test_config(4);
    CHECK_NOTHROW(cfg.validate());
    cfg.delta_omega = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = test_config(0);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = test_config(4);
    cfg.spacing = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    // weak gradient triggers a warning, not an error
    cfg = test_config(4);
    cfg.delta_omega = mhz_to_rad_us(10.0);
    CHECK_FALSE(cfg.validity_warnings().empty());
    CHECK(test_config(4).validity_warnings().empty());
}
