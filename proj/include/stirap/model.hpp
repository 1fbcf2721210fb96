// model.hpp: protocol parameters, basis labels, drive envelope, and the
// single-node lambda-system Hamiltonian in the rotating (RWA) and lab frames.
//
// Single-excitation basis of one node, canonical order:
//   Zero = |G>|vac>,  One = |M> a^dag |vac>,  E = |E>|vac>,  Ref = |r> (uncoupled).

#pragma once

#include "stirap/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stirap {

enum class BasisLabel : int { Zero = 0, One = 1, E = 2, Ref = 3 };

constexpr int idx(BasisLabel b) { return static_cast<int>(b); }

enum class Frame { RotatingRWA, Lab };

// SuperadiabaticProjector: L = |phi(t)><phi(t)| in the superadiabatic frame.
// LabExcitedProjector: L = |e><e| on the bare state, no frame transform.
enum class NoiseModel { SuperadiabaticProjector, LabExcitedProjector, None };

struct SystemParams {
    double g = 1.0;
    double delta = 50.0;
    double ramp = 0.01;
    double gamma = 0.1;
    double epsilon = 1000.0;  // only read in the lab frame; omega = omega_c = epsilon
    Frame frame = Frame::RotatingRWA;
    NoiseModel noise = NoiseModel::SuperadiabaticProjector;

    double duration() const { return std::numbers::pi / (2.0 * ramp); }

    // Protocol run modes assume g/delta << 1.
    bool strong_drive() const { return delta / g >= 10.0; }

    // Rescales every rate by g so that g == 1.
    SystemParams normalized() const {
        SystemParams p = *this;
        p.delta /= g;
        p.ramp /= g;
        p.gamma /= g;
        p.epsilon /= g;
        p.g = 1.0;
        return p;
    }

    void validate() const {
        auto bad = [](double v) { return !std::isfinite(v); };
        if (bad(g) || g <= 0.0) throw ConfigError("g", "must be a finite rate > 0");
        if (bad(delta) || delta <= 0.0) throw ConfigError("delta", "must be a finite rate > 0");
        if (bad(ramp) || ramp <= 0.0) throw ConfigError("ramp", "must be a finite rate > 0");
        if (bad(gamma) || gamma < 0.0) throw ConfigError("gamma", "must be a finite rate >= 0");
        if (frame == Frame::Lab && (bad(epsilon) || epsilon <= 0.0))
            throw ConfigError("epsilon", "must be > 0 in the lab frame");
        if (noise == NoiseModel::SuperadiabaticProjector && frame != Frame::RotatingRWA)
            throw ConfigError("frame", "superadiabatic noise model requires the rotating frame");
    }
};

namespace detail {

// Maps t into [0, T]; a few ulps of overshoot from accumulated step times are clamped.
inline double checked_time(const SystemParams& p, double t) {
    const double T = p.duration();
    const double slack = 1e-12 * T;
    if (!(t >= -slack && t <= T + slack))
        throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(T) + "]");
    return std::clamp(t, 0.0, T);
}

// cos(a t) with the endpoint noise flushed to zero.
inline double ramp_cos(const SystemParams& p, double t) {
    const double c = std::cos(p.ramp * t);
    return std::abs(c) < 1e-15 ? 0.0 : c;
}

}  // namespace detail

// Delta_t = Delta cos^2(a t) on [0, pi/(2a)].
inline double drive_envelope(const SystemParams& p, double t) {
    t = detail::checked_time(p, t);
    const double c = detail::ramp_cos(p, t);
    return p.delta * c * c;
}

// Rotating frame with RWA, diagonal rescaled to zero:
//   H = g(|1><e| + |e><1|) + (Delta_t / 2)(|e><0| + |0><e|)
inline Operator<3> hamiltonian_rwa(const SystemParams& p, double t) {
    const double half_drive = 0.5 * drive_envelope(p, t);
    Operator<3> h;
    constexpr int z = idx(BasisLabel::Zero), o = idx(BasisLabel::One), e = idx(BasisLabel::E);
    h.m(o, e) = h.m(e, o) = p.g;
    h.m(z, e) = h.m(e, z) = half_drive;
    return h;
}

// Lab frame, resonant (omega = omega_c = epsilon):
//   H = diag(0, omega_c, epsilon) + g(|1><e| + h.c.) + Delta_t cos(omega t)(|e><0| + h.c.)
inline Operator<3> hamiltonian_lab(const SystemParams& p, double t) {
    if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon))
        throw ConfigError("epsilon", "must be > 0 in the lab frame");
    const double drive = drive_envelope(p, t) * std::cos(p.epsilon * t);
    Operator<3> h;
    constexpr int z = idx(BasisLabel::Zero), o = idx(BasisLabel::One), e = idx(BasisLabel::E);
    h.m(o, o) = p.epsilon;
    h.m(e, e) = p.epsilon;
    h.m(o, e) = h.m(e, o) = p.g;
    h.m(z, e) = h.m(e, z) = drive;
    return h;
}

}  // namespace stirap
