#include "spinchain/estimators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace spinchain {

namespace {

double cube(double x) { return x * x * x; }

// partial cubic harmonic sum sum_{m=1}^{k} m^-3
double h3(int k) {
    double s = 0.0;
    for (int m = k; m >= 1; --m) s += 1.0 / cube(static_cast<double>(m));
    return s;
}

double suppression_root(int k) {
    const double kk = static_cast<double>(k);
    return std::sqrt(4.0 * kk * kk - 1.0);
}

}  // namespace

double alpha(const ChainConfig& cfg) {
    cfg.validate();
    return std::abs(cfg.coupling) /
           (suppression_root(cfg.suppression_k) * cube(cfg.spacing) * std::abs(cfg.delta_omega));
}

double alpha_k(int k, const ChainConfig& cfg) {
    if (k < 0 || k >= cfg.n_qubits) throw std::invalid_argument("alpha_k: site out of range");
    const double a = alpha(cfg);
    return k == 0 ? a : a * h3(k);
}

double delta_omega_for_alpha(double target_alpha, const ChainConfig& cfg) {
    if (target_alpha <= 0.0) throw std::invalid_argument("delta_omega_for_alpha: alpha must be > 0");
    return std::abs(cfg.coupling) /
           (suppression_root(cfg.suppression_k) * cube(cfg.spacing) * target_alpha);
}

NrCoefficients nr_coefficients(double a) {
    NrCoefficients c;
    c.p0 = 0.8236 * std::pow(a, 1.988);
    c.p1 = 0.8615 * std::pow(a, 1.987);
    c.m0 = 1.341 * std::pow(a, 2.044);
    c.m1 = 0.60786 * std::pow(a, 1.9795);
    return c;
}

double p_nr(int n_qubits, double a) {
    if (n_qubits <= 2) throw std::invalid_argument("p_nr: fitted scaling requires L > 2");
    const NrCoefficients c = nr_coefficients(a);
    return -c.p0 + c.p1 * static_cast<double>(n_qubits);
}

double m_nr(int n_qubits, double a) {
    if (n_qubits <= 2) throw std::invalid_argument("m_nr: fitted scaling requires L > 2");
    const NrCoefficients c = nr_coefficients(a);
    return c.m0 - c.m1 * static_cast<double>(n_qubits);
}

MpMap mp_map(double a) {
    const NrCoefficients c = nr_coefficients(a);
    MpMap g;
    g.g0 = c.m0 - c.p0 / c.p1 * c.m1;
    g.g1 = -c.m1 / c.p1;
    return g;
}

InterchainError p_int_bound(int n_qubits, double chi, int suppression_k, int j) {
    if (n_qubits < 2) throw std::invalid_argument("p_int_bound: need L >= 2");
    if (chi < 0.0 || chi >= 1.0) throw std::invalid_argument("p_int_bound: requires 0 <= chi < 1");
    if (j < 0) j = n_qubits - 1;
    if (j < 1 || j >= n_qubits) throw std::invalid_argument("p_int_bound: pulse index out of range");

    const double chi2 = chi * chi;
    double field = 0.0;  // sum over the neighbor-chain sites, ladder pattern for pulse j
    double below = 0.0;
    for (int l = 0; l < n_qubits; ++l) {
        if (l == j) continue;
        const double dj = static_cast<double>(j - l);
        const double kernel = std::pow(1.0 + chi2 * dj * dj, -1.5);
        field += (l < j ? -0.5 : 0.5) * kernel;
        if (l < j) below += 1.0 / cube(dj);
    }

    InterchainError out;
    out.amplitude =
        2.0 * suppression_root(suppression_k) * cube(chi) * std::abs(field) / below;
    out.p_int = out.amplitude * out.amplitude;
    out.sqrt_bound = 0.51 * static_cast<double>(n_qubits - 1) * cube(chi);
    return out;
}

DisplacementErrors displacement_errors(double v, int k, const ChainConfig& cfg) {
    if (k < 0 || k >= cfg.n_qubits) throw std::invalid_argument("displacement_errors: site out of range");
    const double root = suppression_root(cfg.suppression_k);
    const double a_k = alpha_k(k, cfg);
    const double a_0 = alpha(cfg);

    DisplacementErrors e;
    {
        const double u = v / a_k;
        const double one = 1.0 + u * u;
        const double s = std::sin(0.5 * kPi * std::sqrt(one));
        e.p_d = 0.5 * (1.0 - s * s / one);

        const double wm = root - u;  // displacement in +x
        const double onem = 1.0 + wm * wm;
        const double sm = std::sin(0.5 * kPi * std::sqrt(onem));
        e.p_d_prime_plus = sm * sm / (2.0 * onem);

        const double wp = root + u;  // displacement in -x
        const double onep = 1.0 + wp * wp;
        const double sp = std::sin(0.5 * kPi * std::sqrt(onep));
        e.p_d_prime_minus = sp * sp / (2.0 * onep);
    }
    {
        const double u0 = v / a_0;
        const double one = 1.0 + u0 * u0;
        const double s = std::sin(0.25 * kPi * std::sqrt(one));
        e.eta = s * s / one;
        e.p_d_dprime = 1.0 - 2.0 * e.eta;
    }
    return e;
}

CrosstalkErrors displacement_crosstalk(double v, int j, int k, const ChainConfig& cfg) {
    if (j == k) throw std::invalid_argument("displacement_crosstalk: need j != k");
    if (j < 1 || j >= cfg.n_qubits || k < 0 || k >= cfg.n_qubits)
        throw std::invalid_argument("displacement_crosstalk: site out of range");
    const double root = suppression_root(cfg.suppression_k);
    const double djk = static_cast<double>(j - k);
    const double d4 = djk * djk * djk * djk;
    const double kk = static_cast<double>(cfg.suppression_k);

    CrosstalkErrors c;
    c.delta_jk = 1.5 * std::abs(cfg.coupling) / cube(cfg.spacing) * std::abs(v) / d4;
    c.beta_jk = 1.5 * std::abs(v) * root / d4 / h3(j);
    c.p_jk = 9.0 * (4.0 * kk * kk - 1.0) * v * v / (8.0 * d4 * d4 * kZeta3 * kZeta3);
    c.p_prime_jk = kPi * kPi * (4.0 * kk * kk - 1.0) / (128.0 * kk * kk * kk * kk) *
                   c.beta_jk * c.beta_jk;
    return c;
}

double m_displacement_ensemble(double xi, double v, const ChainConfig& cfg) {
    if (xi < 0.0 || xi > 1.0) throw std::invalid_argument("m_displacement_ensemble: xi in [0,1]");
    if (xi == 0.0) return 0.0;
    double sum = 0.0;
    for (int k = 1; k < cfg.n_qubits; ++k) {
        const DisplacementErrors e = displacement_errors(v, k, cfg);
        sum += e.p_d - 0.5 * (e.p_d_prime_plus + e.p_d_prime_minus);
    }
    sum += displacement_errors(v, 0, cfg).p_d_dprime;
    // per-qubit displacement probability xi: each displaced qubit k makes its
    // chain contribute P_d,k - P'_d,k (or P_d'' for k = 0) to the chain-mean
    // magnetization, so the rare-displacement expectation carries a factor xi
    // per site rather than xi/L
    return xi * sum;
}

double m_total_displacement(double xi, double v, const ChainConfig& cfg) {
    return m_nr(cfg.n_qubits, alpha(cfg)) + m_displacement_ensemble(xi, v, cfg);
}

OscillationErrors oscillation_errors(double v_bar, const ChainConfig& cfg) {
    if (v_bar < 0.0) throw std::invalid_argument("oscillation_errors: v_bar must be >= 0");
    const double kk = static_cast<double>(cfg.suppression_k);
    const double ground_factor = kPi * kPi * (4.0 * kk * kk - 1.0) / (128.0 * kk * kk * kk * kk);
    const int L = cfg.n_qubits;

    OscillationErrors osc;
    const double r0 = v_bar / alpha(cfg);
    osc.p_osc_hadamard = (1.0 - kPi / 4.0) * r0 * r0;
    osc.p_osc_prime.resize(static_cast<std::size_t>(L), 0.0);
    osc.p_osc_dprime.resize(static_cast<std::size_t>(L), 0.0);
    double total = osc.p_osc_hadamard;
    double m = osc.p_osc_hadamard;
    for (int k = 1; k < L; ++k) {
        const double r = v_bar / alpha_k(k, cfg);
        const double prime = ground_factor * r * r;
        const double dprime = 0.5 * r * r;
        osc.p_osc_prime[static_cast<std::size_t>(k)] = prime;
        osc.p_osc_dprime[static_cast<std::size_t>(k)] = dprime;
        total += prime + dprime;
        m += (1.0 + static_cast<double>(L - 2 * k) / static_cast<double>(L)) * (dprime - prime);
    }
    osc.p_osc_total = total;
    osc.m_osc = m;
    osc.p_total = p_nr(L, alpha(cfg)) + total;
    return osc;
}

double m_oscillation(double v_bar, const ChainConfig& cfg) {
    return oscillation_errors(v_bar, cfg).m_osc;
}

std::string error_budget_json(const ErrorBudget& b) {
    nlohmann::json j;
    j["alpha"] = b.alpha;
    j["P_nr"] = b.p_nr;
    j["M_nr"] = b.m_nr;
    j["displaced_site"] = b.displaced_site;
    j["P_d"] = b.displacement.p_d;
    j["P_d_prime_plus"] = b.displacement.p_d_prime_plus;
    j["P_d_prime_minus"] = b.displacement.p_d_prime_minus;
    j["P_d_dprime"] = b.displacement.p_d_dprime;
    j["eta"] = b.displacement.eta;
    j["M_d_mean"] = b.m_d_mean;
    j["M_total"] = b.m_total;
    j["P_total_displaced"] = b.p_total_displaced;
    j["P_int"] = b.p_int;
    j["sqrt_P_int_bound"] = b.sqrt_p_int_bound;
    j["P_osc_total"] = b.p_osc_total;
    j["P_total_osc"] = b.p_total_osc;
    j["M_osc"] = b.m_osc;
    j["M_total_osc"] = b.m_total_osc;
    j["alpha_opt"] = b.alpha_opt;
    j["warnings"] = b.warnings;
    return j.dump();
}

double alpha_opt(double v_bar, int n_qubits, int suppression_k) {
    if (v_bar == 0.0) return 0.0;
    if (n_qubits <= 2) throw std::invalid_argument("alpha_opt: requires L > 2");
    const double kk = static_cast<double>(suppression_k);
    const double l = static_cast<double>(n_qubits);
    const double ground_factor = kPi * kPi * (4.0 * kk * kk - 1.0) / (128.0 * kk * kk * kk * kk);
    const double first = std::pow(v_bar * v_bar / (-0.82 + 0.86 * l), 0.25);
    const double second = std::pow(
        1.0 - kPi / 4.0 + (0.5 + ground_factor) * ((l - 1.0) / (kZeta3 * kZeta3) + 0.6), 0.25);
    return first * second;
}

ErrorBudget error_budget(const ChainConfig& cfg, double xi, double v, double v_bar,
                         int displaced_site, double chi) {
    cfg.validate();
    ErrorBudget b;
    b.alpha = alpha(cfg);
    if (cfg.n_qubits > 2) {
        b.p_nr = p_nr(cfg.n_qubits, b.alpha);
        b.m_nr = m_nr(cfg.n_qubits, b.alpha);
    } else {
        b.warnings.push_back("L <= 2: the fitted nonresonant scaling laws need L > 2; "
                             "P_nr/M_nr columns left at zero");
    }
    if (chi > 0.0 && cfg.n_qubits >= 2) {
        const InterchainError inter = p_int_bound(cfg.n_qubits, chi, cfg.suppression_k);
        b.p_int = inter.p_int;
        b.sqrt_p_int_bound = inter.sqrt_bound;
    }
    b.displaced_site = displaced_site >= 0 ? displaced_site : cfg.n_qubits / 2;
    b.displacement = displacement_errors(v, b.displaced_site, cfg);
    b.p_total_displaced = b.p_nr + b.displacement.p_d + b.displacement.p_d_prime_minus;
    b.m_d_mean = m_displacement_ensemble(xi, v, cfg);
    b.m_total = b.m_nr + b.m_d_mean;
    if (cfg.n_qubits > 2) {
        const OscillationErrors osc = oscillation_errors(v_bar, cfg);
        b.p_osc_total = osc.p_osc_total;
        b.p_total_osc = osc.p_total;
        b.m_osc = osc.m_osc;
        b.m_total_osc = b.m_nr + osc.m_osc;
        b.alpha_opt = alpha_opt(v_bar, cfg.n_qubits, cfg.suppression_k);
    }

    if (b.alpha > 0.1) b.warnings.push_back("alpha > 0.1: outside the alpha << 1 validity range");
    if (chi > 0.0 && cfg.n_qubits * chi * chi * chi > 0.1)
        b.warnings.push_back("L chi^3 not << 1: inter-chain corrections are large");
    if (v_bar > 0.0 && v_bar / b.alpha > 0.3)
        b.warnings.push_back("(v_bar/alpha)^2 not << 1: fluctuation formulas near validity edge");
    if (v != 0.0 && b.displaced_site >= 1) {
        const CrosstalkErrors c = displacement_crosstalk(
            v, b.displaced_site == cfg.n_qubits - 1 ? b.displaced_site - 1 : b.displaced_site + 1,
            b.displaced_site, cfg);
        if (std::abs(c.beta_jk) > 0.3)
            b.warnings.push_back("beta_jk not << 1: crosstalk formulas near validity edge");
    }
    return b;
}

}  // namespace spinchain

namespace spinchain { }