#include "spinchain/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "spinchain/errors.hpp"

namespace spinchain {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

cplx polar1(double angle) { return {std::cos(angle), std::sin(angle)}; }

void check_normalized(const Eigen::VectorXcd& a, const char* who) {
    if (std::abs(a.squaredNorm() - 1.0) > 1e-10)
        throw std::invalid_argument(std::string(who) + ": input state is not normalized");
}

// sin(x)/y evaluated as sin(lambda tau / 2) / lambda with the lambda -> 0 limit
double sin_over(double lambda, double tau) {
    const double x = 0.5 * lambda * tau;
    if (std::abs(x) < 1e-8) return 0.5 * tau * (1.0 - x * x / 6.0);
    return std::sin(x) / lambda;
}

}  // namespace

EnergyTable::EnergyTable(const SpinSystem& sys) : n_spins_(sys.n_spins()) {
    const int n = n_spins_;
    larmor_.resize(static_cast<std::size_t>(n));
    couplings_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        larmor_[static_cast<std::size_t>(l)] = sys.larmor(l);
        for (int k = 0; k < n; ++k)
            couplings_[static_cast<std::size_t>(l) * static_cast<std::size_t>(n) +
                       static_cast<std::size_t>(k)] = l == k ? 0.0 : sys.coupling(l, k);
    }
    const std::size_t dim = std::size_t{1} << n;
    base_.resize(dim);
    for (std::uint64_t p = 0; p < dim; ++p) {
        double zeeman = 0.0;
        for (int l = 0; l < n; ++l) zeeman += larmor_[static_cast<std::size_t>(l)] * sz_bit(p, l);
        double ising = 0.0;
        for (int l = 0; l < n; ++l) {
            const double sl = sz_bit(p, l);
            for (int k = l + 1; k < n; ++k)
                ising += couplings_[static_cast<std::size_t>(l) * static_cast<std::size_t>(n) +
                                    static_cast<std::size_t>(k)] *
                         sl * sz_bit(p, k);
        }
        base_[p] = -zeeman - ising;
    }
}

double EnergyTable::flip_gap(std::uint64_t p, int j, double larmor_offset) const {
    const int n = n_spins_;
    double field = 0.0;
    for (int l = 0; l < n; ++l) {
        if (l == j) continue;
        field += couplings_[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
                            static_cast<std::size_t>(l)] *
                 sz_bit(p, l);
    }
    return larmor_[static_cast<std::size_t>(j)] + larmor_offset + field;
}

Eigen::MatrixXcd rotating_frame_matrix(const Pulse& pulse, const SpinSystem& sys,
                                       double larmor_offset) {
    const int n = sys.n_spins();
    if (n > kMaxExactSpins)
        throw resource_limit_error("rotating_frame_matrix: refusing more than 14 spins");
    const EnergyTable table(sys);
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    const cplx drive = -0.5 * pulse.rabi * polar1(-pulse.phase);
    for (std::uint64_t p = 0; p < static_cast<std::uint64_t>(dim); ++p) {
        h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) =
            table.energy(p, larmor_offset) -
            pulse.nu * static_cast<double>(std::popcount(p));
        for (int l = 0; l < n; ++l) {
            if ((p >> static_cast<unsigned>(l)) & 1u) continue;
            const std::uint64_t q = p | (std::uint64_t{1} << static_cast<unsigned>(l));
            h(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = drive;
            h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = std::conj(drive);
        }
    }
    return h;
}

Propagator::Propagator(const SpinSystem& sys) : sys_(sys), energies_(sys) {}

QuantumState Propagator::apply_exact(const QuantumState& state, const Pulse& pulse,
                                     double t_start, double larmor_offset) const {
    const int n = sys_.n_spins();
    if (n > kMaxExactSpins)
        throw resource_limit_error("apply_pulse_exact: refusing more than 14 spins (matrix 16384^2)");
    if (state.n_spins() != n) throw std::invalid_argument("apply_pulse_exact: state/system mismatch");
    check_normalized(state.amplitudes(), "apply_pulse_exact");

    const Eigen::Index dim = state.dim();
    const double tau = pulse.duration;

    // into the rotating frame at the pulse start
    Eigen::VectorXcd b(dim);
    for (Eigen::Index p = 0; p < dim; ++p) {
        const double ones = static_cast<double>(std::popcount(static_cast<std::uint64_t>(p)));
        b[p] = state.amplitudes()[p] * polar1(pulse.nu * ones * t_start);
    }

    const bool real_drive = std::abs(std::sin(pulse.phase)) < 1e-15;
    if (real_drive) {
        // phase 0 (or pi): the rotating-frame matrix is real symmetric
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        const double drive = -0.5 * pulse.rabi * std::cos(pulse.phase);
        for (std::uint64_t p = 0; p < static_cast<std::uint64_t>(dim); ++p) {
            h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) =
                energies_.energy(p, larmor_offset) -
                pulse.nu * static_cast<double>(std::popcount(p));
            for (int l = 0; l < n; ++l) {
                if ((p >> static_cast<unsigned>(l)) & 1u) continue;
                const std::uint64_t q = p | (std::uint64_t{1} << static_cast<unsigned>(l));
                h(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = drive;
                h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = drive;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        const Eigen::MatrixXd& v = es.eigenvectors();
        Eigen::VectorXd wr = v.transpose() * b.real().matrix().eval();
        Eigen::VectorXd wi = v.transpose() * b.imag().matrix().eval();
        Eigen::VectorXcd w(dim);
        for (Eigen::Index k = 0; k < dim; ++k)
            w[k] = cplx(wr[k], wi[k]) * polar1(-es.eigenvalues()[k] * tau);
        wr = v * w.real().matrix().eval();
        wi = v * w.imag().matrix().eval();
        for (Eigen::Index p = 0; p < dim; ++p) b[p] = cplx(wr[p], wi[p]);
    } else {
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
        const cplx drive = -0.5 * pulse.rabi * polar1(-pulse.phase);
        for (std::uint64_t p = 0; p < static_cast<std::uint64_t>(dim); ++p) {
            h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) =
                energies_.energy(p, larmor_offset) -
                pulse.nu * static_cast<double>(std::popcount(p));
            for (int l = 0; l < n; ++l) {
                if ((p >> static_cast<unsigned>(l)) & 1u) continue;
                const std::uint64_t q = p | (std::uint64_t{1} << static_cast<unsigned>(l));
                h(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = drive;
                h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = std::conj(drive);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
        Eigen::VectorXcd w = es.eigenvectors().adjoint() * b;
        for (Eigen::Index k = 0; k < dim; ++k) w[k] *= polar1(-es.eigenvalues()[k] * tau);
        b = es.eigenvectors() * w;
    }

    // back to the Schroedinger picture at the pulse end
    for (Eigen::Index p = 0; p < dim; ++p) {
        const double ones = static_cast<double>(std::popcount(static_cast<std::uint64_t>(p)));
        b[p] *= polar1(-pulse.nu * ones * (t_start + tau));
    }
    return QuantumState(std::move(b));
}

QuantumState Propagator::apply_two_level(const QuantumState& state, const Pulse& pulse,
                                         double t_start, double larmor_offset) const {
    const int n = sys_.n_spins();
    if (n > kMaxTwoLevelSpins)
        throw resource_limit_error("apply_pulse_two_level: refusing more than 20 spins");
    if (state.n_spins() != n)
        throw std::invalid_argument("apply_pulse_two_level: state/system mismatch");
    check_normalized(state.amplitudes(), "apply_pulse_two_level");
    if (pulse.target < 0 || pulse.target >= n)
        throw std::invalid_argument("apply_pulse_two_level: pulse target out of range");

    const Eigen::Index dim = state.dim();
    const double tau = pulse.duration;
    const int j = pulse.target;
    const std::uint64_t jbit = std::uint64_t{1} << static_cast<unsigned>(j);
    const cplx drive_phase = polar1(pulse.nu * t_start + pulse.phase);

    Eigen::VectorXcd out(dim);
    for (std::uint64_t p = 0; p < static_cast<std::uint64_t>(dim); ++p) {
        if (p & jbit) continue;  // handle each pair once, from its bit-j = 0 member
        const std::uint64_t q = p | jbit;
        const double gap = energies_.flip_gap(p, j, larmor_offset);
        const double delta = gap - pulse.nu;
        const double lambda = std::hypot(delta, pulse.rabi);
        const double half = 0.5 * lambda * tau;
        const double c = std::cos(half);
        const double s_ol = sin_over(lambda, tau);  // sin(half)/lambda

        const double ep = energies_.energy(p, larmor_offset);
        const double eq = ep + gap;
        const cplx free_p = polar1(-ep * tau);
        const cplx free_q = polar1(-eq * tau);
        const cplx half_det = polar1(-0.5 * delta * tau);

        const cplx upp = (c + kI * delta * s_ol) * half_det * free_p;
        const cplx upq = kI * pulse.rabi * s_ol * half_det * drive_phase * free_p;
        const cplx uqp = kI * pulse.rabi * s_ol * std::conj(half_det) * std::conj(drive_phase) * free_q;
        const cplx uqq = (c - kI * delta * s_ol) * std::conj(half_det) * free_q;

        const cplx ap = state.amplitudes()[static_cast<Eigen::Index>(p)];
        const cplx aq = state.amplitudes()[static_cast<Eigen::Index>(q)];
        out[static_cast<Eigen::Index>(p)] = upp * ap + upq * aq;
        out[static_cast<Eigen::Index>(q)] = uqp * ap + uqq * aq;
    }
    return QuantumState(std::move(out));
}

QuantumState apply_pulse_exact(const QuantumState& state, const Pulse& pulse,
                               const SpinSystem& sys, double t_start) {
    return Propagator(sys).apply_exact(state, pulse, t_start);
}

QuantumState apply_pulse_two_level(const QuantumState& state, const Pulse& pulse,
                                   const SpinSystem& sys, double t_start) {
    return Propagator(sys).apply_two_level(state, pulse, t_start);
}

namespace {

RunResult finish_run(Eigen::VectorXcd amps, const SpinSystem& sys, double total_time,
                     int n_leading, std::vector<double> ladder) {
    if (std::abs(amps.squaredNorm() - 1.0) > 1e-8)
        throw std::logic_error("run result lost normalization");
    RunResult res;
    res.p = std::abs(0.5 - std::norm(amps[0])) + std::abs(0.5 - std::norm(amps[amps.size() - 1]));
    res.m = 0.0;
    for (Eigen::Index p = 0; p < amps.size(); ++p) {
        const double w = std::norm(amps[p]);
        if (w > 0.0) res.m += w * basis_magnetization(static_cast<std::uint64_t>(p), sys.n_spins());
    }
    res.total_time = total_time;
    res.ladder_probabilities = std::move(ladder);

    const Eigen::Index dim = amps.size();
    const double e0 = state_energy(0, sys);
    const double etop = state_energy(static_cast<std::uint64_t>(dim - 1), sys);
    const cplx top = amps[dim - 1];
    const cplx bottom = amps[0];
    if (std::abs(top) > 0.0 && std::abs(bottom) > 0.0) {
        const double raw = std::arg(top) - std::arg(bottom) + (etop - e0) * total_time;
        res.phase = std::remainder(raw, kTwoPi);
    }

    std::vector<std::uint64_t> order(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
        const double pa = std::norm(amps[static_cast<Eigen::Index>(a)]);
        const double pb = std::norm(amps[static_cast<Eigen::Index>(b)]);
        if (pa != pb) return pa > pb;
        return a < b;
    });
    const int keep = std::min<int>(n_leading, static_cast<int>(dim));
    for (int i = 0; i < keep; ++i)
        res.leading_states.emplace_back(order[static_cast<std::size_t>(i)],
                                        std::norm(amps[static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)])]));
    res.amplitudes = std::move(amps);
    return res;
}

}  // namespace

RunResult run_protocol(const SpinSystem& sys, const PulseSequence& seq, const RunOptions& opts) {
    const int n = sys.n_spins();
    if (opts.method == Method::exact && n > kMaxExactSpins)
        throw resource_limit_error("run_protocol: exact method refuses more than 14 spins (matrix 16384^2)");
    if (opts.method == Method::two_level && n > kMaxTwoLevelSpins)
        throw resource_limit_error("run_protocol: two-level method refuses more than 20 spins");
    if (!opts.pulse_offsets.empty() && opts.pulse_offsets.size() != seq.size())
        throw std::invalid_argument("run_protocol: pulse_offsets size mismatch");

    QuantumState state = opts.initial ? *opts.initial : QuantumState::ground(n);
    if (state.n_spins() != n) throw std::invalid_argument("run_protocol: initial state mismatch");

    Propagator prop(sys);
    std::vector<double> ladder;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double offset = opts.pulse_offsets.empty() ? 0.0 : opts.pulse_offsets[i];
        const double t0 = seq.start_times[i];
        state = opts.method == Method::exact
                    ? prop.apply_exact(state, seq.pulses[i], t0, offset)
                    : prop.apply_two_level(state, seq.pulses[i], t0, offset);
        if (opts.track_ladder) {
            const std::uint64_t expect = (std::uint64_t{1} << (i + 1)) - 1;
            if (expect < static_cast<std::uint64_t>(state.dim()))
                ladder.push_back(std::norm(state.amplitudes()[static_cast<Eigen::Index>(expect)]));
        }
    }
    return finish_run(state.amplitudes(), sys, seq.total_time, opts.n_leading, std::move(ladder));
}

RunResult run_protocol(const SpinSystem& sys, const PulseSequence& seq, Method method) {
    RunOptions opts;
    opts.method = method;
    return run_protocol(sys, seq, opts);
}

RunResult run_protocol_dephased(const SpinSystem& sys, const PulseSequence& seq,
                                const RunOptions& opts, int n_samples) {
    if (n_samples < 1) throw std::invalid_argument("run_protocol_dephased: need n_samples >= 1");
    const int n = sys.n_spins();
    if (n > kMaxExactSpins && opts.method == Method::exact)
        throw resource_limit_error("run_protocol_dephased: exact method refuses more than 14 spins");
    if (n < 2 || seq.size() < 2 || n_samples == 1) return run_protocol(sys, seq, opts);
    if (!opts.pulse_offsets.empty() && opts.pulse_offsets.size() != seq.size())
        throw std::invalid_argument("run_protocol_dephased: pulse_offsets size mismatch");

    double beat = 0.0;
    for (int l = 0; l + 1 < n; ++l)
        beat = std::max(beat, std::abs(sys.larmor(l + 1) - sys.larmor(l)));
    if (beat <= 0.0) return run_protocol(sys, seq, opts);
    const double period = kTwoPi / beat;

    const auto gap_of = [&](int s) {
        return period * static_cast<double>(s) / static_cast<double>(n_samples);
    };
    const int total_samples = n_samples;

    if (opts.method == Method::two_level) {
        // cheap path: just run each sample
        const Propagator prop(sys);
        const Eigen::Index dim = Eigen::Index{1} << n;
        const EnergyTable table(sys);
        Eigen::VectorXd populations = Eigen::VectorXd::Zero(dim);
        for (int s = 0; s < total_samples; ++s) {
            const double gap = gap_of(s);
            QuantumState state = opts.initial ? *opts.initial : QuantumState::ground(n);
            double t = 0.0;
            for (std::size_t i = 0; i < seq.size(); ++i) {
                if (i > 0 && gap > 0.0) {
                    Eigen::VectorXcd idle = state.amplitudes();
                    for (Eigen::Index p = 0; p < dim; ++p)
                        idle[p] *= polar1(-table.energy(static_cast<std::uint64_t>(p), 0.0) * gap);
                    state = QuantumState(std::move(idle));
                    t += gap;
                }
                const double offset = opts.pulse_offsets.empty() ? 0.0 : opts.pulse_offsets[i];
                state = prop.apply_two_level(state, seq.pulses[i], t, offset);
                t += seq.pulses[i].duration;
            }
            for (Eigen::Index p = 0; p < dim; ++p)
                populations[p] += std::norm(state.amplitudes()[p]);
        }
        populations /= static_cast<double>(total_samples);
        Eigen::VectorXcd mean_amps(populations.size());
        for (Eigen::Index p = 0; p < populations.size(); ++p)
            mean_amps[p] = std::sqrt(populations[p]);
        RunResult res = finish_run(std::move(mean_amps), sys, seq.total_time, opts.n_leading, {});
        res.phase = 0.0;
        return res;
    }

    // exact path: the pulse Hamiltonians do not depend on the inserted gaps,
    // so all timing samples share one eigendecomposition per pulse
    const EnergyTable table(sys);
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd states(dim, total_samples);
    {
        const QuantumState init = opts.initial ? *opts.initial : QuantumState::ground(n);
        for (int s = 0; s < total_samples; ++s) states.col(s) = init.amplitudes();
    }
    std::vector<double> t_now(static_cast<std::size_t>(total_samples), 0.0);
    std::vector<double> gaps(static_cast<std::size_t>(total_samples));
    for (int s = 0; s < total_samples; ++s) gaps[static_cast<std::size_t>(s)] = gap_of(s);
    std::vector<double> ladder_acc;
    if (opts.track_ladder) ladder_acc.assign(seq.size(), 0.0);

    Eigen::MatrixXd h(dim, dim);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const Pulse& pulse = seq.pulses[i];
        if (std::abs(std::sin(pulse.phase)) > 1e-15)
            throw std::invalid_argument("run_protocol_dephased: nonzero pulse phases unsupported");
        const double offset = opts.pulse_offsets.empty() ? 0.0 : opts.pulse_offsets[i];
        const double tau = pulse.duration;

        if (i > 0) {
            for (int s = 1; s < total_samples; ++s) {
                const double gap = gaps[static_cast<std::size_t>(s)];
                for (Eigen::Index p = 0; p < dim; ++p)
                    states(p, s) *= polar1(-table.energy(static_cast<std::uint64_t>(p), 0.0) * gap);
                t_now[static_cast<std::size_t>(s)] += gap;
            }
        }
        // frame in
        for (int s = 0; s < total_samples; ++s) {
            const double t0 = t_now[static_cast<std::size_t>(s)];
            for (Eigen::Index p = 0; p < dim; ++p) {
                const double ones = static_cast<double>(std::popcount(static_cast<std::uint64_t>(p)));
                states(p, s) *= polar1(pulse.nu * ones * t0);
            }
        }
        h.setZero();
        const double drive = -0.5 * pulse.rabi * std::cos(pulse.phase);
        for (std::uint64_t p = 0; p < static_cast<std::uint64_t>(dim); ++p) {
            h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) =
                table.energy(p, offset) - pulse.nu * static_cast<double>(std::popcount(p));
            for (int l = 0; l < n; ++l) {
                if ((p >> static_cast<unsigned>(l)) & 1u) continue;
                const std::uint64_t q = p | (std::uint64_t{1} << static_cast<unsigned>(l));
                h(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = drive;
                h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = drive;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        const Eigen::MatrixXd& v = es.eigenvectors();
        Eigen::MatrixXd wr = v.transpose() * states.real().matrix().eval();
        Eigen::MatrixXd wi = v.transpose() * states.imag().matrix().eval();
        for (Eigen::Index k = 0; k < dim; ++k) {
            const cplx rot = polar1(-es.eigenvalues()[k] * tau);
            for (int s = 0; s < total_samples; ++s) {
                const cplx w = cplx(wr(k, s), wi(k, s)) * rot;
                wr(k, s) = w.real();
                wi(k, s) = w.imag();
            }
        }
        const Eigen::MatrixXd or_ = v * wr;
        const Eigen::MatrixXd oi_ = v * wi;
        for (int s = 0; s < total_samples; ++s) {
            const double t1 = t_now[static_cast<std::size_t>(s)] + tau;
            for (Eigen::Index p = 0; p < dim; ++p) {
                const double ones = static_cast<double>(std::popcount(static_cast<std::uint64_t>(p)));
                states(p, s) = cplx(or_(p, s), oi_(p, s)) * polar1(-pulse.nu * ones * t1);
            }
            t_now[static_cast<std::size_t>(s)] = t1;
        }
        if (opts.track_ladder) {
            const std::uint64_t expect = (std::uint64_t{1} << (i + 1)) - 1;
            if (expect < static_cast<std::uint64_t>(dim)) {
                double acc = 0.0;
                for (int s = 0; s < total_samples; ++s)
                    acc += std::norm(states(static_cast<Eigen::Index>(expect), s));
                ladder_acc[i] = acc / static_cast<double>(total_samples);
            }
        }
    }

    Eigen::VectorXcd mean_amps(dim);
    for (Eigen::Index p = 0; p < dim; ++p) {
        double acc = 0.0;
        for (int s = 0; s < total_samples; ++s) acc += std::norm(states(p, s));
        mean_amps[p] = std::sqrt(acc / static_cast<double>(total_samples));
    }
    RunResult res = finish_run(std::move(mean_amps), sys, seq.total_time, opts.n_leading,
                               std::move(ladder_acc));
    res.phase = 0.0;  // relative phase is not meaningful for averaged populations
    return res;
}

RunResult ode_oracle(const SpinSystem& sys, const PulseSequence& seq, double target_error) {
    const int n = sys.n_spins();
    if (n > kMaxOracleSpins)
        throw resource_limit_error("ode_oracle: refusing more than 8 spins");
    const Eigen::Index dim = Eigen::Index{1} << n;
    const EnergyTable table(sys);

    // conservative step: resolve both the fastest drive period and the full
    // spectral width of H so the RK4 truncation stays below target_error
    double numax = 0.0;
    for (const Pulse& p : seq.pulses) numax = std::max(numax, std::abs(p.nu));
    double emax = 0.0;
    for (std::uint64_t p = 0; p < static_cast<std::uint64_t>(dim); ++p)
        emax = std::max(emax, std::abs(table.energy(p, 0.0)));
    double rabimax = 0.0;
    for (const Pulse& p : seq.pulses) rabimax = std::max(rabimax, p.rabi);
    const double hnorm = emax + 0.5 * rabimax * n + numax;
    double step = seq.total_time > 0.0 && hnorm > 0.0
                      ? std::pow(120.0 * target_error / (seq.total_time * std::pow(hnorm, 5)), 0.25)
                      : 1.0;
    if (numax > 0.0) step = std::min(step, kTwoPi / numax / 200.0);

    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(dim);
    a[0] = 1.0;

    Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (std::size_t ip = 0; ip < seq.size(); ++ip) {
        const Pulse& pulse = seq.pulses[ip];
        const double t0 = seq.start_times[ip];
        const auto deriv = [&](double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& dx) {
            const cplx drive = -0.5 * pulse.rabi * polar1(-(pulse.nu * t + pulse.phase));
            for (Eigen::Index p = 0; p < dim; ++p)
                dx[p] = table.energy(static_cast<std::uint64_t>(p), 0.0) * x[p];
            for (std::uint64_t p = 0; p < static_cast<std::uint64_t>(dim); ++p) {
                for (int l = 0; l < n; ++l) {
                    if ((p >> static_cast<unsigned>(l)) & 1u) continue;
                    const std::uint64_t q = p | (std::uint64_t{1} << static_cast<unsigned>(l));
                    dx[static_cast<Eigen::Index>(q)] += drive * x[static_cast<Eigen::Index>(p)];
                    dx[static_cast<Eigen::Index>(p)] += std::conj(drive) * x[static_cast<Eigen::Index>(q)];
                }
            }
            dx *= -kI;
        };

        const auto n_steps = static_cast<long>(std::ceil(pulse.duration / step));
        const double h = pulse.duration / static_cast<double>(n_steps);
        double t = t0;
        for (long s = 0; s < n_steps; ++s) {
            deriv(t, a, k1);
            tmp = a + 0.5 * h * k1;
            deriv(t + 0.5 * h, tmp, k2);
            tmp = a + 0.5 * h * k2;
            deriv(t + 0.5 * h, tmp, k3);
            tmp = a + h * k3;
            deriv(t + h, tmp, k4);
            a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = t0 + static_cast<double>(s + 1) * h;
        }
    }
    return finish_run(std::move(a), sys, seq.total_time, 4, {});
}

std::string run_result_json(const RunResult& result) {
    nlohmann::json j;
    j["P"] = result.p;
    j["M"] = result.m;
    j["phase_rad"] = result.phase;
    j["total_time_us"] = result.total_time;
    nlohmann::json leading = nlohmann::json::array();
    for (const auto& [index, prob] : result.leading_states)
        leading.push_back({index, prob});
    j["leading_states"] = leading;
    return j.dump();
}

}  // namespace spinchain
