#include "spinchain/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spinchain {

void ChainConfig::validate() const {
    if (n_qubits < 1) throw std::invalid_argument("ChainConfig: n_qubits must be >= 1");
    if (delta_omega == 0.0) throw std::invalid_argument("ChainConfig: delta_omega must be nonzero");
    if (spacing <= 0.0) throw std::invalid_argument("ChainConfig: spacing must be > 0");
    if (suppression_k < 1) throw std::invalid_argument("ChainConfig: suppression_k must be >= 1");
    if (omega_hadamard < 0.0) throw std::invalid_argument("ChainConfig: omega_hadamard must be >= 0");
}

std::vector<std::string> ChainConfig::validity_warnings() const {
    std::vector<std::string> warnings;
    const double neighbor = std::abs(coupling) / (spacing * spacing * spacing);
    if (neighbor > 0.0 && std::abs(delta_omega) < 10.0 * neighbor) {
        std::ostringstream os;
        os << "|delta_omega| / (|J|/A^3) = " << std::abs(delta_omega) / neighbor
           << " < 10; the two-level pulse treatment assumes |delta_omega| >> |J|/A^3";
        warnings.push_back(os.str());
    }
    return warnings;
}

double ChainConfig::hadamard_rabi() const {
    if (omega_hadamard > 0.0) return omega_hadamard;
    const double k = static_cast<double>(suppression_k);
    const double a3 = spacing * spacing * spacing;
    // alpha * |delta_omega|, i.e. the same Rabi scale as the first pi pulse
    return std::abs(coupling) / (std::sqrt(4.0 * k * k - 1.0) * a3);
}

SpinSystem::SpinSystem(std::vector<Site> sites, double coupling_at_1nm, double spacing_nm)
    : sites_(std::move(sites)), coupling_1nm_(coupling_at_1nm), spacing_nm_(spacing_nm) {
    if (sites_.empty()) throw std::invalid_argument("SpinSystem: no sites");
    if (spacing_nm_ <= 0.0) throw std::invalid_argument("SpinSystem: spacing must be > 0");
    rebuild_couplings();
}

void SpinSystem::rebuild_couplings() {
    const std::size_t n = sites_.size();
    couplings_.assign(n * n, 0.0);
    const double a3 = spacing_nm_ * spacing_nm_ * spacing_nm_;
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t k = l + 1; k < n; ++k) {
            const double dx = sites_[k].x - sites_[l].x;
            const double dy = sites_[k].y - sites_[l].y;
            const double r2 = dx * dx + dy * dy;
            if (r2 <= 0.0) throw std::invalid_argument("SpinSystem: coincident sites");
            const double r3 = r2 * std::sqrt(r2);  // distance^3 in spacing units
            const double j = coupling_1nm_ / (a3 * r3);
            couplings_[l * n + k] = j;
            couplings_[k * n + l] = j;
        }
    }
}

SpinSystem SpinSystem::ideal_chain(const ChainConfig& cfg) {
    cfg.validate();
    std::vector<Site> sites(static_cast<std::size_t>(cfg.n_qubits));
    for (int l = 0; l < cfg.n_qubits; ++l) {
        sites[static_cast<std::size_t>(l)] = {static_cast<double>(l), 0.0,
                                              cfg.omega0 + static_cast<double>(l) * cfg.delta_omega};
    }
    return SpinSystem(std::move(sites), cfg.coupling, cfg.spacing);
}

SpinSystem SpinSystem::chain_array(const ChainConfig& cfg, int n_chains, double chain_spacing_nm) {
    cfg.validate();
    if (n_chains < 1) throw std::invalid_argument("SpinSystem: n_chains must be >= 1");
    if (chain_spacing_nm <= 0.0) throw std::invalid_argument("SpinSystem: chain spacing must be > 0");
    const double dy = chain_spacing_nm / cfg.spacing;
    std::vector<Site> sites;
    sites.reserve(static_cast<std::size_t>(n_chains) * static_cast<std::size_t>(cfg.n_qubits));
    for (int r = 0; r < n_chains; ++r) {
        for (int l = 0; l < cfg.n_qubits; ++l) {
            sites.push_back({static_cast<double>(l), static_cast<double>(r) * dy,
                             cfg.omega0 + static_cast<double>(l) * cfg.delta_omega});
        }
    }
    return SpinSystem(std::move(sites), cfg.coupling, cfg.spacing);
}

SpinSystem SpinSystem::displaced(int site, double step, double larmor_shift) const {
    if (site < 0 || site >= n_spins()) throw std::out_of_range("SpinSystem::displaced: bad site");
    SpinSystem out = *this;
    out.sites_[static_cast<std::size_t>(site)].x += step;
    out.sites_[static_cast<std::size_t>(site)].larmor += larmor_shift;
    out.rebuild_couplings();
    return out;
}

SpinSystem SpinSystem::with_larmor_offset(double offset) const {
    SpinSystem out = *this;
    for (auto& s : out.sites_) s.larmor += offset;
    return out;
}

QuantumState::QuantumState(Eigen::VectorXcd amplitudes) : amps_(std::move(amplitudes)) {
    const auto d = amps_.size();
    if (d < 2 || (d & (d - 1)) != 0) throw std::invalid_argument("QuantumState: dimension is not 2^N");
    n_spins_ = 0;
    for (auto m = d; m > 1; m >>= 1) ++n_spins_;
    const double norm2 = amps_.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-10)
        throw std::invalid_argument("QuantumState: amplitudes are not normalized");
}

QuantumState QuantumState::ground(int n_spins) { return basis_state(n_spins, 0); }

QuantumState QuantumState::basis_state(int n_spins, std::uint64_t index) {
    if (n_spins < 1 || n_spins > 62) throw std::invalid_argument("QuantumState: bad qubit count");
    const auto dim = Eigen::Index{1} << n_spins;
    if (index >= static_cast<std::uint64_t>(dim)) throw std::out_of_range("QuantumState: bad basis index");
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(dim);
    amps[static_cast<Eigen::Index>(index)] = 1.0;
    return QuantumState(std::move(amps));
}

double sz(std::uint64_t p, int l, int n_spins) {
    if (l < 0 || l >= n_spins) throw std::out_of_range("sz: spin index out of range");
    if (n_spins < 64 && p >= (std::uint64_t{1} << n_spins)) throw std::out_of_range("sz: basis index out of range");
    return sz_bit(p, l);
}

double state_energy(std::uint64_t p, const SpinSystem& sys) {
    const int n = sys.n_spins();
    if (n < 64 && p >= (std::uint64_t{1} << n)) throw std::out_of_range("state_energy: basis index out of range");
    double zeeman = 0.0;
    for (int l = 0; l < n; ++l) zeeman += sys.larmor(l) * sz_bit(p, l);
    double ising = 0.0;
    for (int l = 0; l < n; ++l)
        for (int k = l + 1; k < n; ++k) ising += sys.coupling(l, k) * sz_bit(p, l) * sz_bit(p, k);
    return -zeeman - ising;
}

double coupling_constant(double mu_erg_per_gauss, double theta_rad) {
    const double c = std::cos(theta_rad);
    const double nm3 = 1e-21;  // (1 nm)^3 in cm^3
    const double rad_per_sec = mu_erg_per_gauss * mu_erg_per_gauss * (3.0 * c * c - 1.0) / (kHbarErgSec * nm3);
    return rad_per_sec * 1e-6;  // rad/us
}

double magnetization(const QuantumState& state) {
    const int n = state.n_spins();
    const auto& a = state.amplitudes();
    double m = 0.0;
    for (Eigen::Index p = 0; p < a.size(); ++p) {
        const double w = std::norm(a[p]);
        if (w == 0.0) continue;
        m += w * basis_magnetization(static_cast<std::uint64_t>(p), n);
    }
    return m;
}

double error_probability(const QuantumState& state) {
    const auto& a = state.amplitudes();
    const double p0 = std::norm(a[0]);
    const double p1 = std::norm(a[a.size() - 1]);
    return std::abs(0.5 - p0) + std::abs(0.5 - p1);
}

double physical_magnetization(double m, double mu_erg_per_gauss, int n_chains, int n_qubits) {
    return 0.5 * m * mu_erg_per_gauss * static_cast<double>(n_chains) * static_cast<double>(n_qubits);
}

}  // namespace spinchain
