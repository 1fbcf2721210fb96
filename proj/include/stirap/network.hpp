// network.hpp: two-node entanglement generation in the single-excitation sector.
//
// Joint basis, one excitation shared by nodes L and R (|m> = |M>|vac> is the idle node):
//   0: |0>_L|m>_R   1: |1>_L|m>_R   2: |e>_L|m>_R
//   3: |m>_L|0>_R   4: |m>_L|1>_R   5: |m>_L|e>_R
// The loss-extended space appends 6: |m>_L|m>_R (photon never arrived).

#pragma once

#include "stirap/dynamics.hpp"
#include "stirap/frames.hpp"
#include "stirap/integrator.hpp"
#include "stirap/model.hpp"

#include <cmath>
#include <numbers>

namespace stirap {

namespace joint {
inline constexpr int kDim = 6;
inline constexpr int kLossDim = 7;
inline constexpr int kLeft = 0;   // offset of node L's block
inline constexpr int kRight = 3;  // offset of node R's block
inline constexpr int kVacuum = 6;

constexpr int index(int node_offset, BasisLabel b) { return node_offset + idx(b); }
}  // namespace joint

struct LossModel {
    double p_loss = 0.0;

    void validate() const {
        if (!(p_loss >= 0.0 && p_loss <= 1.0)) throw DomainError("p_loss must lie in [0, 1]");
    }
};

// (|1>_L|m>_R + |m>_L|1>_R)/sqrt2
inline Vec<6> joint_initial_vector() {
    Vec<6> v = Vec<6>::Zero();
    v(joint::index(joint::kLeft, BasisLabel::One)) = std::numbers::sqrt2 / 2.0;
    v(joint::index(joint::kRight, BasisLabel::One)) = std::numbers::sqrt2 / 2.0;
    return v;
}

inline DensityOperator<6> joint_initial_state() { return DensityOperator<6>::pure(joint_initial_vector()); }

// (|0>_L|m>_R + |m>_L|0>_R)/sqrt2
inline Vec<6> bell_vector() {
    Vec<6> v = Vec<6>::Zero();
    v(joint::index(joint::kLeft, BasisLabel::Zero)) = std::numbers::sqrt2 / 2.0;
    v(joint::index(joint::kRight, BasisLabel::Zero)) = std::numbers::sqrt2 / 2.0;
    return v;
}

inline Vec<7> bell_vector_with_vacuum() {
    Vec<7> v = Vec<7>::Zero();
    v.head<6>() = bell_vector();
    return v;
}

// Permutation exchanging the two node blocks.
inline Mat<6> swap_nodes() {
    Mat<6> s = Mat<6>::Zero();
    s.block<3, 3>(joint::kLeft, joint::kRight).setIdentity();
    s.block<3, 3>(joint::kRight, joint::kLeft).setIdentity();
    return s;
}

struct JointGenerators {
    Operator<6> hamiltonian;
    Operator<6> dephasing_left;
    Operator<6> dephasing_right;
};

namespace detail {

inline void check_pair(const SystemParams& l, const SystemParams& r) {
    if (l.noise != r.noise) throw ConfigError("noise", "both nodes must use the same noise model");
}

inline Mat<6> block_sum(const Mat<3>& left, const Mat<3>& right) {
    Mat<6> m = Mat<6>::Zero();
    m.block<3, 3>(joint::kLeft, joint::kLeft) = left;
    m.block<3, 3>(joint::kRight, joint::kRight) = right;
    return m;
}

inline Generators<6, 2> joint_raw(const SystemParams& l, const SystemParams& r, double t) {
    const auto gl = node_generators(l, t);
    const auto gr = node_generators(r, t);
    Generators<6, 2> g;
    g.hamiltonian = block_sum(gl.hamiltonian, gr.hamiltonian);
    g.dephasing[0].block<3, 3>(joint::kLeft, joint::kLeft) = gl.dephasing[0];
    g.dephasing[1].block<3, 3>(joint::kRight, joint::kRight) = gr.dephasing[0];
    return g;
}

// Joint rhs evaluated block by block. H and each L_j are confined to node blocks,
// so with X = rho_LR:
//   LL, RR: the single-node rhs of each block
//   LR:     (-i H_L - gamma_L/2 L_L^2) X + X (i H_R - gamma_R/2 L_R^2)
// and rho_RL = rho_LR^dag.
struct JointRhs {
    SystemParams left, right;
    std::array<double, 2> rates;
    bool mirrored = false;  // identical nodes: evaluate the generators once
    mutable GeneratorCache<Generators<3, 1>> cache_left, cache_right;

    Mat<6> operator()(double t, const Mat<6>& rho) const {
        const auto& gl = cache_left.get(t, [&](double s) { return node_generators(left, s); });
        const auto& gr =
            mirrored ? gl : cache_right.get(t, [&](double s) { return node_generators(right, s); });
        constexpr int L = joint::kLeft, R = joint::kRight;
        Mat<6> out;
        out.block<3, 3>(L, L) = master_rhs<3, 1>(gl, {rates[0]}, rho.block<3, 3>(L, L));
        out.block<3, 3>(R, R) = master_rhs<3, 1>(gr, {rates[1]}, rho.block<3, 3>(R, R));
        const Mat<3> ml = -kImag * gl.hamiltonian - (0.5 * rates[0]) * (gl.dephasing[0] * gl.dephasing[0]);
        const Mat<3> mr = kImag * gr.hamiltonian - (0.5 * rates[1]) * (gr.dephasing[0] * gr.dephasing[0]);
        const Mat<3> x = rho.block<3, 3>(L, R);
        const Mat<3> lr = ml * x + x * mr;
        out.block<3, 3>(L, R) = lr;
        out.block<3, 3>(R, L) = lr.adjoint();
        return out;
    }
};

}  // namespace detail

// Block-diagonal joint Hamiltonian and the two node-local dephasing operators.
// Time is in units of 1/g for normalized params (pass params through normalized() first).
inline JointGenerators joint_generators(const SystemParams& left, const SystemParams& right, double t) {
    detail::check_pair(left, right);
    const auto g = detail::joint_raw(left, right, t);
    const Basis b = integration_basis(left);
    return {{g.hamiltonian, b}, {g.dephasing[0], b}, {g.dephasing[1], b}};
}

inline Mat<6> joint_superadiabatic_transform(const SystemParams& l, const SystemParams& r, double t) {
    return detail::block_sum(superadiabatic_transform(l, t).m, superadiabatic_transform(r, t).m);
}

// Evolves an arbitrary joint initial state (given in the bare basis) over [0, T].
// Both nodes must share the ramp rate so the protocol windows coincide.
inline Trajectory<6> run_joint(const SystemParams& left_in, const SystemParams& right_in, const IntegratorConfig& cfg_in,
                               const DensityOperator<6>& rho_bare) {
    detail::check_pair(left_in, right_in);
    validate_run(left_in);
    validate_run(right_in);
    if (left_in.g != right_in.g) throw ConfigError("g", "both nodes must be expressed in the same unit g");
    const SystemParams l = left_in.normalized();
    const SystemParams r = right_in.normalized();
    if (l.ramp != r.ramp) throw ConfigError("ramp", "both nodes must share the ramp rate");

    IntegratorConfig cfg = cfg_in;
    if (!cfg.base_step) cfg.base_step = std::min(default_base_step(l), default_base_step(r));
    const double T = l.duration();

    const bool super = l.noise == NoiseModel::SuperadiabaticProjector;
    Mat<6> rho0 = rho_bare.op.m;
    if (super) {
        const Mat<6> Ds0 = joint_superadiabatic_transform(l, r, 0.0);
        rho0 = Ds0.adjoint() * rho0 * Ds0;
    }

    const bool mirrored = l.delta == r.delta && l.gamma == r.gamma && l.epsilon == r.epsilon && l.frame == r.frame;
    const detail::JointRhs rhs{l, r, {effective_gamma(l), effective_gamma(r)}, mirrored, {}, {}};
    Trajectory<6> traj = integrate<6>(rhs, DensityOperator<6>{{rho0, integration_basis(l)}}, T, cfg);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        Mat<6> rho = traj.states[i].op.m;
        if (super) {
            rho = untransform<6>(joint_superadiabatic_transform(l, r, t), rho);
        } else {
            Vec<6> u = Vec<6>::Ones();
            if (l.frame == Frame::Lab) u.segment<3>(joint::kLeft) = lab_free_phases(l, t);
            if (r.frame == Frame::Lab) u.segment<3>(joint::kRight) = lab_free_phases(r, t);
            rho = u.asDiagonal() * rho * u.conjugate().asDiagonal();
        }
        traj.states[i].op = {rho, Basis::Bare};
        traj.populations[i] = traj.states[i].populations();
    }
    return traj;
}

inline double bell_fidelity(const DensityOperator<6>& rho) {
    const Vec<6> b = bell_vector();
    return (b.adjoint() * rho.op.m * b)(0, 0).real();
}

struct EntanglementRun {
    Trajectory<6> trajectory;  // bare basis
    double bell_fidelity;
};

inline EntanglementRun run_entanglement_generation(const SystemParams& left, const SystemParams& right,
                                                   const IntegratorConfig& cfg) {
    auto traj = run_joint(left, right, cfg, joint_initial_state());
    const double F = bell_fidelity(traj.final_state());
    return {std::move(traj), F};
}

// Embeds a joint state into the loss-extended space with zero weight on |mm>.
inline DensityOperator<7> with_vacuum_sector(const DensityOperator<6>& rho) {
    DensityOperator<7> out;
    out.op.basis = rho.op.basis;
    out.op.m.topLeftCorner<6, 6>() = rho.op.m;
    return out;
}

// rho_LR = (1 - p) rho + p |mm><mm|
inline DensityOperator<7> apply_photon_loss(const DensityOperator<7>& rho, const LossModel& loss) {
    loss.validate();
    DensityOperator<7> out = rho;
    out.op.m *= (1.0 - loss.p_loss);
    out.op.m(joint::kVacuum, joint::kVacuum) += loss.p_loss;
    return out;
}

inline double bell_fidelity(const DensityOperator<7>& rho) {
    const Vec<7> b = bell_vector_with_vacuum();
    return (b.adjoint() * rho.op.m * b)(0, 0).real();
}

// Two-round parity-projection distillation on ancillas, at formula level: two
// copies of rho_LR herald a perfect Bell pair with probability (1 - p)^2 / 2.
struct DistillationOutcome {
    double success_probability;
    double heralded_fidelity;
};

inline double distillation_success(const LossModel& loss) {
    loss.validate();
    const double keep = 1.0 - loss.p_loss;
    return keep * keep / 2.0;
}

inline DistillationOutcome distill(const LossModel& loss) { return {distillation_success(loss), 1.0}; }

}  // namespace stirap
