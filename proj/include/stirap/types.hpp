// types.hpp: matrix aliases, basis tags, and the error types shared by every module.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace stirap {

using cplx = std::complex<double>;

template <int N>
using Mat = Eigen::Matrix<cplx, N, N>;

template <int N>
using Vec = Eigen::Matrix<cplx, N, 1>;

template <int N>
using RealVec = Eigen::Matrix<double, N, 1>;

inline constexpr cplx kImag{0.0, 1.0};

// Which basis an operator's entries refer to. Bare covers both the rotating and
// the lab frame (they share the |0>,|1>,|e> labels); the index bases are the
// time-independent labels that D(t) and Ds(t) map onto their eigenvectors.
enum class Basis { Bare, AdiabaticIndex, SuperadiabaticIndex };

inline const char* to_string(Basis b) {
    switch (b) {
        case Basis::Bare: return "bare";
        case Basis::AdiabaticIndex: return "adiabatic";
        case Basis::SuperadiabaticIndex: return "superadiabatic";
    }
    return "?";
}

template <int N>
struct Operator {
    Mat<N> m = Mat<N>::Zero();
    Basis basis = Basis::Bare;

    static constexpr int dim = N;

    bool finite() const { return m.allFinite(); }
};

// Time argument outside [0, T] or a probability outside [0, 1].
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Invalid or inconsistent configuration. `key` names the offending field.
struct ConfigError : std::invalid_argument {
    std::string key;
    ConfigError(std::string k, const std::string& what)
        : std::invalid_argument(k + ": " + what), key(std::move(k)) {}
};

// Numerical breakdown of the master-equation integration at time `time`.
struct IntegrationError : std::runtime_error {
    double time;
    IntegrationError(double t, const std::string& what)
        : std::runtime_error(what + " at t=" + std::to_string(t)), time(t) {}
};

template <int N>
double max_abs(const Mat<N>& a) {
    return a.cwiseAbs().maxCoeff();
}

template <int N>
double hermiticity_defect(const Mat<N>& a) {
    return max_abs<N>(a - a.adjoint());
}

template <int N>
Mat<N> projector(const Vec<N>& v) {
    return v * v.adjoint();
}

}  // namespace stirap
