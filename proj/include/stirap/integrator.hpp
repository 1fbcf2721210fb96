// integrator.hpp: fixed-order RK4 integration of the dephasing master equation
//
//   d rho/dt = -i[H(t), rho] - sum_j (gamma_j / 2) [L_j(t), [L_j(t), rho]]
//
// with step-doubling error control. Each base step is covered by sub-steps of
// size base_step / 2^k; a sub-step is accepted when the max-norm difference
// between one full RK4 step and two half steps is within tolerance, otherwise k
// is raised (up to max_halvings). The refinement level persists across base
// steps and relaxes again once the error estimate is comfortably small.

#pragma once

#include "stirap/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace stirap {

struct IntegratorConfig {
    std::optional<double> base_step;  // unset: chosen per experiment from the rates
    double tolerance = 1e-9;
    int max_halvings = 16;
    int record_stride = 100;

    void validate() const {
        if (base_step && !(*base_step > 0.0)) throw ConfigError("integrator.base_step", "must be > 0");
        if (!(tolerance > 0.0)) throw ConfigError("integrator.tolerance", "must be > 0");
        if (max_halvings < 0 || max_halvings > 40)
            throw ConfigError("integrator.max_halvings", "must be in [0, 40]");
        if (record_stride < 1) throw ConfigError("integrator.record_stride", "must be >= 1");
    }
};

template <int N>
struct DensityOperator {
    Operator<N> op;

    static DensityOperator pure(const Vec<N>& psi, Basis basis = Basis::Bare) {
        return {{projector<N>(psi), basis}};
    }

    double trace() const { return op.m.trace().real(); }
    double purity() const { return (op.m * op.m).trace().real(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Mat<N>> es(op.m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    RealVec<N> populations() const { return op.m.diagonal().real(); }

    // Checks the invariants with the given tolerances; returns an empty string when valid.
    std::string defect(double herm_tol = 1e-10, double trace_tol = 1e-10, double neg_tol = 1e-8) const {
        if (!op.finite()) return "non-finite entries";
        if (hermiticity_defect<N>(op.m) > herm_tol) return "not Hermitian";
        if (std::abs(trace() - 1.0) > trace_tol) return "trace != 1";
        if (min_eigenvalue() < -neg_tol) return "negative eigenvalue";
        return {};
    }
};

struct IntegratorDiagnostics {
    double base_step = 0.0;
    double min_step = 0.0;
    std::int64_t accepted_steps = 0;
    std::int64_t rejected_steps = 0;
    std::int64_t unconverged_steps = 0;  // accepted at max_halvings with error above tolerance
    double max_trace_drift = 0.0;
    double max_hermiticity_drift = 0.0;
};

template <int N>
struct Trajectory {
    std::vector<double> times;
    std::vector<DensityOperator<N>> states;
    std::vector<RealVec<N>> populations;
    IntegratorDiagnostics diagnostics;

    std::size_t size() const { return times.size(); }
    const DensityOperator<N>& final_state() const { return states.back(); }
    const RealVec<N>& final_populations() const { return populations.back(); }
};

// Instantaneous generators of the master equation. Each dephasing channel j
// carries its own operator L_j; rates are passed to the integrator separately.
template <int N, int Channels = 1>
struct Generators {
    Mat<N> hamiltonian = Mat<N>::Zero();
    std::array<Mat<N>, Channels> dephasing{};
};

// Right-hand side of the master equation for Hermitian rho. Uses
// rho H = (H rho)^dag and [L,[L,rho]] = C + C^dag with C = L (L rho - (L rho)^dag).
template <int N, int K>
Mat<N> master_rhs(const Generators<N, K>& gen, const std::array<double, K>& rates, const Mat<N>& rho) {
    const Mat<N> a = gen.hamiltonian * rho;
    Mat<N> out = -kImag * (a - a.adjoint());
    for (int j = 0; j < K; ++j) {
        if (rates[j] == 0.0) continue;
        const Mat<N>& L = gen.dephasing[j];
        const Mat<N> b = L * rho;
        const Mat<N> inner = b - b.adjoint();
        const Mat<N> c = L * inner;
        out.noalias() -= (0.5 * rates[j]) * (c + c.adjoint());
    }
    return out;
}

// Adapts a generator callable t -> Generators<N, K> into an rhs callable (t, rho) -> Mat<N>.
template <int N, int K, class GenFn>
auto generator_rhs(GenFn gen, std::array<double, K> rates) {
    return [gen = std::move(gen), rates](double t, const Mat<N>& rho) -> Mat<N> {
        return master_rhs<N, K>(gen(t), rates, rho);
    };
}

namespace detail {

template <int N, class RhsFn>
Mat<N> rk4_step(RhsFn& rhs, const Mat<N>& rho, double t, double h) {
    const Mat<N> k1 = rhs(t, rho);
    const Mat<N> k2 = rhs(t + 0.5 * h, rho + (0.5 * h) * k1);
    const Mat<N> k3 = rhs(t + 0.5 * h, rho + (0.5 * h) * k2);
    const Mat<N> k4 = rhs(t + h, rho + h * k3);
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

// Integrates rho0 over [0, t_end] with rhs(t, rho) -> d rho/dt. The rhs must map
// Hermitian matrices to Hermitian matrices and preserve the trace. States are
// recorded at t = 0, every record_stride base steps, and at t_end.
template <int N, class RhsFn>
Trajectory<N> integrate(RhsFn&& rhs, const DensityOperator<N>& rho0, double t_end, const IntegratorConfig& cfg) {
    cfg.validate();
    if (!cfg.base_step) throw ConfigError("integrator.base_step", "must be resolved before integrating");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be finite and > 0");
    if (auto why = rho0.defect(1e-10, 1e-10, 1e-8); !why.empty())
        throw DomainError("initial state is not a density operator: " + why);

    const double H = *cfg.base_step;
    const auto n_base = static_cast<std::int64_t>(std::ceil(t_end / H - 1e-9));
    const std::int64_t full = std::int64_t{1} << cfg.max_halvings;

    Trajectory<N> traj;
    traj.diagnostics.base_step = H;
    traj.diagnostics.min_step = H;

    Mat<N> rho = rho0.op.m;
    const Basis basis = rho0.op.basis;

    auto record = [&](double t) {
        DensityOperator<N> d{{rho, basis}};
        const double drift = std::abs(d.trace() - 1.0);
        if (drift > 1e-6) throw IntegrationError(t, "trace drift " + std::to_string(drift));
        if (d.min_eigenvalue() < -1e-6) throw IntegrationError(t, "density operator lost positivity");
        traj.times.push_back(t);
        traj.populations.push_back(d.populations());
        traj.states.push_back(std::move(d));
    };
    record(0.0);

    int level = 0;
    for (std::int64_t b = 0; b < n_base; ++b) {
        const double t0 = b * H;
        const double t1 = (b + 1 == n_base) ? t_end : (b + 1) * H;
        const double span = t1 - t0;

        std::int64_t pos = 0;
        while (pos < full) {
            const std::int64_t units = full >> level;
            const double ta = t0 + span * (static_cast<double>(pos) / full);
            const double tb = (pos + units == full) ? t1 : t0 + span * (static_cast<double>(pos + units) / full);
            const double h = tb - ta;
            const double tm = ta + 0.5 * h;

            const Mat<N> one = detail::rk4_step<N>(rhs, rho, ta, h);
            const Mat<N> mid = detail::rk4_step<N>(rhs, rho, ta, tm - ta);
            const Mat<N> two = detail::rk4_step<N>(rhs, mid, tm, tb - tm);
            const double err = max_abs<N>(two - one);

            if (!std::isfinite(err)) throw IntegrationError(ta, "non-finite state");
            if (err > cfg.tolerance && level < cfg.max_halvings) {
                ++level;
                ++traj.diagnostics.rejected_steps;
                continue;
            }
            if (err > cfg.tolerance) ++traj.diagnostics.unconverged_steps;

            const double herm = hermiticity_defect<N>(two);
            rho = 0.5 * (two + two.adjoint());
            const double drift = std::abs(rho.trace().real() - 1.0);
            traj.diagnostics.max_hermiticity_drift = std::max(traj.diagnostics.max_hermiticity_drift, herm);
            traj.diagnostics.max_trace_drift = std::max(traj.diagnostics.max_trace_drift, drift);
            traj.diagnostics.min_step = std::min(traj.diagnostics.min_step, h);
            ++traj.diagnostics.accepted_steps;
            pos += units;

            // RK4 local error scales as h^5: one level coarser costs a factor 32.
            if (level > 0 && err < cfg.tolerance / 64.0 && pos % (2 * units) == 0) --level;
        }

        if ((b + 1) % cfg.record_stride == 0 || b + 1 == n_base) record(t1);
    }
    return traj;
}

// Multi-channel form: gen(t) returns Generators<N, K>; rates[j] is gamma for channel j.
template <int N, int K, class GenFn>
Trajectory<N> evolve_master_equation(GenFn&& gen, const std::array<double, K>& rates,
                                     const DensityOperator<N>& rho0, double t_end,
                                     const IntegratorConfig& cfg) {
    for (double r : rates)
        if (!(r >= 0.0)) throw ConfigError("gamma", "must be >= 0");
    auto rhs = generator_rhs<N, K>(std::ref(gen), rates);
    return integrate<N>(rhs, rho0, t_end, cfg);
}

// Single-channel form: separate callables for H(t) and L(t), both returning Mat<N>.
template <int N, class HFn, class LFn>
Trajectory<N> evolve_master_equation(HFn&& h_of_t, LFn&& l_of_t, double gamma, const DensityOperator<N>& rho0,
                                     double t_end, const IntegratorConfig& cfg) {
    auto gen = [&](double t) {
        Generators<N, 1> g;
        g.hamiltonian = h_of_t(t);
        g.dephasing[0] = l_of_t(t);
        return g;
    };
    return evolve_master_equation<N, 1>(gen, std::array<double, 1>{gamma}, rho0, t_end, cfg);
}

}  // namespace stirap
