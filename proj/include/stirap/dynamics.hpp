// dynamics.hpp: single-node transfer experiment, reference-state dephasing
// fidelity, the perturbative estimate F ~ 1 - gamma * int |x|^2, and the
// O(a) bound on 1 - F.

#pragma once

#include "stirap/frames.hpp"
#include "stirap/integrator.hpp"
#include "stirap/model.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace stirap {

// min(0.01/Delta, 0.01/g) in the rotating frame, a twentieth of a drive period in the lab frame.
inline double default_base_step(const SystemParams& p) {
    if (p.frame == Frame::Lab && p.noise != NoiseModel::SuperadiabaticProjector)
        return 2.0 * std::numbers::pi / p.epsilon / 20.0;
    return std::min(0.01 / p.delta, 0.01 / p.g);
}

inline IntegratorConfig resolved(IntegratorConfig cfg, const SystemParams& p) {
    if (!cfg.base_step) cfg.base_step = default_base_step(p);
    return cfg;
}

inline double effective_gamma(const SystemParams& p) {
    return p.noise == NoiseModel::None ? 0.0 : p.gamma;
}

// Phases of U0(t) = exp(-i H0 t) with H0 = diag(0, omega_c, epsilon), the static
// part of the lab Hamiltonian.
inline Vec<3> lab_free_phases(const SystemParams& p, double t) {
    const cplx rot = std::polar(1.0, -p.epsilon * t);
    return {1.0, rot, rot};
}

// Lab Hamiltonian in the interaction picture of its static part,
//   H_I(t) = U0^dag (H_lab(t) - H0) U0,
// an exact change of frame (counter-rotating terms retained). Populations and
// L = |e><e| are unchanged by it; the fast free rotation at epsilon drops out.
inline Mat<3> lab_interaction_hamiltonian(const SystemParams& p, double t) {
    Mat<3> h = hamiltonian_lab(p, t).m;
    h.diagonal().setZero();
    const Vec<3> u = lab_free_phases(p, t);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) h(j, k) *= std::conj(u(j)) * u(k);
    return h;
}

// Hamiltonian and dephasing operator of one node in the frame it is integrated in:
// superadiabatic index basis for SuperadiabaticProjector; otherwise the bare basis,
// taken in the interaction picture of H0 when the frame is Lab.
inline Generators<3, 1> node_generators(const SystemParams& p, double t) {
    Generators<3, 1> g;
    switch (p.noise) {
        case NoiseModel::SuperadiabaticProjector:
            g.hamiltonian = superadiabatic_hamiltonian(p, t).m;
            g.dephasing[0] = lindblad_operator(p, t).m;
            break;
        case NoiseModel::LabExcitedProjector:
        case NoiseModel::None:
            g.hamiltonian = p.frame == Frame::Lab ? lab_interaction_hamiltonian(p, t) : hamiltonian_rwa(p, t).m;
            g.dephasing[0](idx(BasisLabel::E), idx(BasisLabel::E)) = 1.0;
            break;
    }
    return g;
}

// Memoizes the last few generator evaluations. A step-doubling attempt asks for
// five distinct times twelve times over.
template <class Gen>
class GeneratorCache {
public:
    template <class Fn>
    const Gen& get(double t, Fn&& make) {
        for (int i = 0; i < kSlots; ++i)
            if (valid_[i] && times_[i] == t) return values_[i];
        next_ = (next_ + 1) % kSlots;
        times_[next_] = t;
        values_[next_] = make(t);
        valid_[next_] = true;
        return values_[next_];
    }

private:
    static constexpr int kSlots = 6;
    std::array<double, kSlots> times_{};
    std::array<Gen, kSlots> values_{};
    std::array<bool, kSlots> valid_{};
    int next_ = 0;
};

// rhs of one node's master equation with memoized generators.
struct NodeRhs {
    SystemParams params;
    double rate;
    mutable GeneratorCache<Generators<3, 1>> cache;

    Mat<3> operator()(double t, const Mat<3>& rho) const {
        const auto& g = cache.get(t, [&](double s) { return node_generators(params, s); });
        return master_rhs<3, 1>(g, {rate}, rho);
    }
};

inline Basis integration_basis(const SystemParams& p) {
    return p.noise == NoiseModel::SuperadiabaticProjector ? Basis::SuperadiabaticIndex : Basis::Bare;
}

// Ds rho Ds^dag renormalized to unit trace. Ds is unitary only to first order in x,
// so the raw conjugate carries an O(|x|^2) trace error away from the endpoints.
template <int N>
Mat<N> untransform(const Mat<N>& transform, const Mat<N>& rho_tilde) {
    Mat<N> rho = transform * rho_tilde * transform.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return rho / rho.trace().real();
}

// Maps an integrated state back to the bare basis of the node's own frame.
inline Mat<3> to_bare_frame(const SystemParams& p, double t, const Mat<3>& rho) {
    if (p.noise == NoiseModel::SuperadiabaticProjector)
        return untransform<3>(superadiabatic_transform(p, t).m, rho);
    if (p.frame == Frame::Lab) {
        const Vec<3> u = lab_free_phases(p, t);
        return u.asDiagonal() * rho * u.conjugate().asDiagonal();
    }
    return rho;
}

inline void validate_run(const SystemParams& p) {
    p.validate();
    if (!p.strong_drive()) throw ConfigError("delta", "protocol runs require delta/g >= 10");
}

// Evolves rho(0) = |1><1| over [0, T]. Returned states and populations are in the bare basis.
inline Trajectory<3> run_single_transfer(const SystemParams& params, const IntegratorConfig& cfg_in) {
    validate_run(params);
    const SystemParams p = params.normalized();
    const IntegratorConfig cfg = resolved(cfg_in, p);
    const double T = p.duration();

    Vec<3> one = Vec<3>::Zero();
    one(idx(BasisLabel::One)) = 1.0;
    Mat<3> rho0 = projector<3>(one);

    const bool super = p.noise == NoiseModel::SuperadiabaticProjector;
    if (super) {
        const Mat<3> Ds0 = superadiabatic_transform(p, 0.0).m;
        rho0 = Ds0.adjoint() * rho0 * Ds0;
    }

    const NodeRhs rhs{p, effective_gamma(p), {}};
    Trajectory<3> traj = integrate<3>(rhs, DensityOperator<3>{{rho0, integration_basis(p)}}, T, cfg);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        traj.states[i].op = {to_bare_frame(p, traj.times[i], traj.states[i].op.m), Basis::Bare};
        traj.populations[i] = traj.states[i].populations();
    }
    return traj;
}

struct DephasingFidelity {
    double fidelity;
    Trajectory<4> trajectory;  // in the integration frame, basis {0, 1, e, r}
};

// Starts from (|E_00(0)> + |r>)/sqrt2 with |r> uncoupled, and compares rho(T) with
// the gamma = 0 evolution of the same state in the same frame.
inline DephasingFidelity dephasing_fidelity_reference(const SystemParams& params, const IntegratorConfig& cfg_in) {
    validate_run(params);
    const SystemParams p = params.normalized();
    const IntegratorConfig cfg = resolved(cfg_in, p);
    const double T = p.duration();
    constexpr int r = idx(BasisLabel::Ref);

    const Mat<3> Ds0 = superadiabatic_transform(p, 0.0).m;
    Vec<4> psi = Vec<4>::Zero();
    psi.head<3>() = Ds0.col(idx(BasisLabel::Zero));
    psi(r) = 1.0;
    psi /= psi.norm();
    Mat<4> rho0 = projector<4>(psi);

    if (p.noise == NoiseModel::SuperadiabaticProjector) {
        Mat<4> Ds4 = Mat<4>::Identity();
        Ds4.topLeftCorner<3, 3>() = Ds0;
        rho0 = Ds4.adjoint() * rho0 * Ds4;
    }

    auto gen = [&](double t) {
        const auto g3 = node_generators(p, t);
        Generators<4, 1> g;
        g.hamiltonian.topLeftCorner<3, 3>() = g3.hamiltonian;
        g.dephasing[0].topLeftCorner<3, 3>() = g3.dephasing[0];
        return g;
    };
    const DensityOperator<4> start{{rho0, integration_basis(p)}};
    Trajectory<4> noisy = evolve_master_equation<4, 1>(gen, std::array<double, 1>{effective_gamma(p)}, start, T, cfg);
    const Trajectory<4> ideal = evolve_master_equation<4, 1>(gen, std::array<double, 1>{0.0}, start, T, cfg);

    const double F = (ideal.final_state().op.m * noisy.final_state().op.m).trace().real();
    return {F, std::move(noisy)};
}

// Composite Simpson on [lo, hi], doubling the panel count until the relative change is below rel_tol.
template <class Fn>
double simpson_adaptive(Fn&& f, double lo, double hi, double rel_tol = 1e-8, int max_doublings = 24) {
    int n = 64;
    auto simpson = [&](int panels) {
        const double h = (hi - lo) / panels;
        double acc = f(lo) + f(hi);
        for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
        return acc * h / 3.0;
    };
    double prev = simpson(n);
    for (int k = 0; k < max_doublings; ++k) {
        n *= 2;
        const double cur = simpson(n);
        if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

struct PerturbativeFidelity {
    double fidelity_estimate;  // 1 - gamma * integral
    double integral;           // int_0^T |x(t)|^2 dt
};

inline PerturbativeFidelity perturbative_fidelity(const SystemParams& params) {
    params.validate();
    const SystemParams p = params.normalized();
    const double integral =
        simpson_adaptive([&](double t) { return std::norm(coefficients_xyz(p, t).x); }, 0.0, p.duration());
    // back to units of 1/g for the caller's time scale
    const double scaled = integral / params.g;
    return {1.0 - params.gamma * scaled, scaled};
}

// Window constants of the O(a) estimate: |x_t| is only appreciable while
// Delta cos^2(at) < c g, i.e. within n/a * sqrt(g/Delta) of the end of the ramp.
struct WindowConstants {
    double c = 5.0;
    double n = std::numbers::pi / 2.0;
};

struct FidelityBound {
    double bound;        // (25 sqrt5 / 216) gamma (n/a) sqrt(g/Delta) a^2 Delta / g^3
    double coefficient;  // bound / a
};

inline FidelityBound fidelity_bound(const SystemParams& p, double n = WindowConstants{}.n) {
    if (!(n > 0.0)) throw DomainError("window constant n must be > 0");
    const double pre = 25.0 * std::sqrt(5.0) / 216.0;
    const double b =
        pre * p.gamma * (n / p.ramp) * std::sqrt(p.g / p.delta) * (p.ramp * p.ramp * p.delta / (p.g * p.g * p.g));
    return {b, b / p.ramp};
}

}  // namespace stirap
