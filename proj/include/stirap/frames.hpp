// frames.hpp: closed-form adiabatic eigensystem, the non-adiabatic correction
// w = -i D^dag dD/dt, and the first-order superadiabatic basis.
//
// Index-basis convention: column k of D (and of Ds) is the eigenvector carrying
// label k, with labels in the canonical order (0, 1, e). So D = sum_k |E_k><k|
// has columns (|E_0>, |E_1>, |E_e>).
//
// All formulas go through y = Delta_t / N and z = 2g / N, N = sqrt(4g^2 + Delta_t^2),
// which stay regular at t = T where Delta_t -> 0.

#pragma once

#include "stirap/model.hpp"
#include "stirap/types.hpp"

#include <cmath>
#include <numbers>

namespace stirap {

struct Coefficients {
    cplx x;    // purely imaginary; sqrt(2) x is the excited amplitude of |E_00>
    double y;  // Delta_t / N
    double z;  // 2g / N
};

struct Eigenvalues {
    double zero;     // dark state, identically 0
    double excited;  // -N/2
    double one;      // +N/2

    // Values laid out by canonical label (0, 1, e).
    RealVec<3> by_label() const { return {zero, one, excited}; }
};

struct FrameData {
    double t = 0.0;
    Eigenvalues eigenvalues{};
    Operator<3> D;   // columns |E_k>, maps index basis -> bare
    Operator<3> w;   // correction in the adiabatic index basis
    Operator<3> Ds;  // columns |E_kk>, first order only, maps superadiabatic index -> bare
    Coefficients xyz{};
};

namespace detail {

struct RampTerms {
    double c, s, drive, norm;  // cos(at), sin(at), Delta cos^2(at), sqrt(4g^2 + drive^2)
};

inline RampTerms ramp_terms(const SystemParams& p, double t) {
    t = checked_time(p, t);
    RampTerms r{};
    r.c = ramp_cos(p, t);
    r.s = std::sin(p.ramp * t);
    r.drive = p.delta * r.c * r.c;
    r.norm = std::sqrt(4.0 * p.g * p.g + r.drive * r.drive);
    return r;
}

}  // namespace detail

inline Coefficients coefficients_xyz(const SystemParams& p, double t) {
    const auto r = detail::ramp_terms(p, t);
    const double n3 = r.norm * r.norm * r.norm;
    Coefficients k;
    k.x = kImag * (4.0 * std::numbers::sqrt2 * p.g * p.ramp * p.delta * r.c * r.s / n3);
    k.y = r.drive / r.norm;
    k.z = 2.0 * p.g / r.norm;
    return k;
}

inline Eigenvalues adiabatic_eigenvalues(const SystemParams& p, double t) {
    const double half = 0.5 * detail::ramp_terms(p, t).norm;
    return {0.0, -half, half};
}

struct AdiabaticEigensystem {
    Eigenvalues eigenvalues;
    Operator<3> D;
};

inline AdiabaticEigensystem adiabatic_eigensystem(const SystemParams& p, double t) {
    const auto k = coefficients_xyz(p, t);
    constexpr int z0 = idx(BasisLabel::Zero), o = idx(BasisLabel::One), e = idx(BasisLabel::E);
    const double r = std::numbers::sqrt2 / 2.0;

    Operator<3> D{Mat<3>::Zero(), Basis::Bare};
    // |E_0> = -z|0> + y|1>
    D.m(z0, z0) = -k.z;
    D.m(o, z0) = k.y;
    // |E_1> = (y|0> + z|1> + |e>)/sqrt2
    D.m(z0, o) = r * k.y;
    D.m(o, o) = r * k.z;
    D.m(e, o) = r;
    // |E_e> = (y|0> + z|1> - |e>)/sqrt2
    D.m(z0, e) = r * k.y;
    D.m(o, e) = r * k.z;
    D.m(e, e) = -r;
    return {adiabatic_eigenvalues(p, t), D};
}

// w = -[2 sqrt2 i g a Delta cos sin / N^2] (|0><1| + |0><e| - |1><0| - |e><0|)
inline Operator<3> correction_w(const SystemParams& p, double t) {
    const auto r = detail::ramp_terms(p, t);
    const cplx kappa =
        -kImag * (2.0 * std::numbers::sqrt2 * p.g * p.ramp * p.delta * r.c * r.s / (r.norm * r.norm));
    constexpr int z0 = idx(BasisLabel::Zero), o = idx(BasisLabel::One), e = idx(BasisLabel::E);
    Operator<3> w{Mat<3>::Zero(), Basis::AdiabaticIndex};
    w.m(z0, o) = kappa;
    w.m(z0, e) = kappa;
    w.m(o, z0) = -kappa;
    w.m(e, z0) = -kappa;
    return w;
}

inline Operator<3> superadiabatic_transform(const SystemParams& p, double t) {
    const auto k = coefficients_xyz(p, t);
    const double r = std::numbers::sqrt2 / 2.0;
    constexpr int z0 = idx(BasisLabel::Zero), o = idx(BasisLabel::One), e = idx(BasisLabel::E);
    const cplx x = k.x;

    Operator<3> Ds{Mat<3>::Zero(), Basis::Bare};
    // |E_00> = -z|0> + y|1> - sqrt2 x|e>
    Ds.m(z0, z0) = -k.z;
    Ds.m(o, z0) = k.y;
    Ds.m(e, z0) = -std::numbers::sqrt2 * x;
    // |E_11> = (y/sqrt2 + xz)|0> + (z/sqrt2 - xy)|1> + |e>/sqrt2
    Ds.m(z0, o) = r * k.y + x * k.z;
    Ds.m(o, o) = r * k.z - x * k.y;
    Ds.m(e, o) = r;
    // |E_ee> = (y/sqrt2 - xz)|0> + (z/sqrt2 + xy)|1> - |e>/sqrt2
    Ds.m(z0, e) = r * k.y - x * k.z;
    Ds.m(o, e) = r * k.z + x * k.y;
    Ds.m(e, e) = -r;
    return Ds;
}

// |phi> = sqrt2 x|0> + |1>/sqrt2 - |e>/sqrt2, truncated at first order in x
// (norm^2 = 1 + 2|x|^2; deliberately not renormalized).
inline Vec<3> lindblad_vector_phi(const SystemParams& p, double t) {
    const auto k = coefficients_xyz(p, t);
    const double r = std::numbers::sqrt2 / 2.0;
    Vec<3> phi;
    phi(idx(BasisLabel::Zero)) = std::numbers::sqrt2 * k.x;
    phi(idx(BasisLabel::One)) = r;
    phi(idx(BasisLabel::E)) = -r;
    return phi;
}

inline Operator<3> lindblad_operator(const SystemParams& p, double t) {
    return {projector<3>(lindblad_vector_phi(p, t)), Basis::SuperadiabaticIndex};
}

// Superadiabatic-frame Hamiltonian diag(E_0, E_1, E_e) in label order.
inline Operator<3> superadiabatic_hamiltonian(const SystemParams& p, double t) {
    Operator<3> h{Mat<3>::Zero(), Basis::SuperadiabaticIndex};
    h.m.diagonal() = adiabatic_eigenvalues(p, t).by_label().cast<cplx>();
    return h;
}

inline FrameData frame_data(const SystemParams& p, double t) {
    FrameData f;
    f.t = t;
    auto es = adiabatic_eigensystem(p, t);
    f.eigenvalues = es.eigenvalues;
    f.D = es.D;
    f.w = correction_w(p, t);
    f.Ds = superadiabatic_transform(p, t);
    f.xyz = coefficients_xyz(p, t);
    return f;
}

// P_e(t) = 2|x_t|^2
inline double excited_population_formula(const SystemParams& p, double t) {
    return 2.0 * std::norm(coefficients_xyz(p, t).x);
}

struct ExcitedPeak {
    double t_star_formula;  // (1/a) arccos sqrt(2g / (sqrt5 Delta)); NaN if the argument exceeds 1
    double p_max_formula;   // (25 sqrt5 / 108) a^2 Delta / g^3
    double t_star_numeric;
    double p_max_numeric;
    bool approximation_unreliable;  // g/Delta > 0.1
};

inline ExcitedPeak max_excited_population(const SystemParams& p) {
    const double sqrt5 = std::sqrt(5.0);
    ExcitedPeak out{};
    out.approximation_unreliable = p.g / p.delta > 0.1;
    out.p_max_formula = 25.0 * sqrt5 / 108.0 * p.ramp * p.ramp * p.delta / (p.g * p.g * p.g);
    const double arg = std::sqrt(2.0 * p.g / (sqrt5 * p.delta));
    out.t_star_formula = arg <= 1.0 ? std::acos(arg) / p.ramp : std::nan("");

    const double T = p.duration();
    auto f = [&](double t) { return excited_population_formula(p, t); };

    constexpr int grid = 1000;
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i <= grid; ++i) {
        const double v = f(T * i / grid);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double t_grid = T * best / grid;

    double lo = 0.8 * out.t_star_formula;
    double hi = std::min(T, 1.2 * out.t_star_formula);
    if (!(std::isfinite(out.t_star_formula) && t_grid > lo && t_grid < hi)) {
        lo = T * std::max(best - 1, 0) / grid;
        hi = T * std::min(best + 1, grid) / grid;
    }

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > 1e-10) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    out.t_star_numeric = 0.5 * (lo + hi);
    out.p_max_numeric = f(out.t_star_numeric);
    if (best_val > out.p_max_numeric) {
        out.t_star_numeric = t_grid;
        out.p_max_numeric = best_val;
    }
    return out;
}

}  // namespace stirap
