#include "stirap/dynamics.hpp"
#include "stirap/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace stirap;

namespace {

constexpr int kZero = idx(BasisLabel::Zero);
constexpr int kOne = idx(BasisLabel::One);
constexpr int kE = idx(BasisLabel::E);

SystemParams fast(NoiseModel noise = NoiseModel::SuperadiabaticProjector) {
    SystemParams p;
    p.ramp = 0.05;
    p.noise = noise;
    if (noise == NoiseModel::LabExcitedProjector) p.frame = Frame::Lab;
    return p;
}

double max_pe(const Trajectory<3>& traj) {
    double m = 0.0;
    for (const auto& pop : traj.populations) m = std::max(m, pop(kE));
    return m;
}

}  // namespace

TEST(DefaultStep, RotatingAndLabFrames) {
    SystemParams p;
    EXPECT_DOUBLE_EQ(default_base_step(p), 0.01 / 50.0);
    p.delta = 0.5;
    EXPECT_DOUBLE_EQ(default_base_step(p), 0.01);
    p = fast(NoiseModel::LabExcitedProjector);
    EXPECT_DOUBLE_EQ(default_base_step(p), 2 * std::numbers::pi / 1000.0 / 20.0);
}

TEST(SingleTransfer, TrajectoryInvariants) {
    for (auto noise : {NoiseModel::SuperadiabaticProjector, NoiseModel::LabExcitedProjector, NoiseModel::None}) {
        const auto p = fast(noise);
        const auto traj = run_single_transfer(p, {});
        ASSERT_GE(traj.size(), 2u);
        EXPECT_EQ(traj.times.front(), 0.0);
        EXPECT_LE(traj.times.back(), p.duration());
        EXPECT_NEAR(traj.times.back(), p.duration(), 1e-12);
        for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
        for (std::size_t i = 0; i < traj.size(); ++i) {
            EXPECT_NEAR(traj.populations[i].sum(), 1.0, 1e-8);
            EXPECT_TRUE(traj.states[i].defect(1e-10, 1e-10, 1e-8).empty()) << traj.states[i].defect();
            EXPECT_EQ(traj.states[i].op.basis, Basis::Bare);
        }
        EXPECT_LE(traj.diagnostics.max_trace_drift, 1e-8);
        EXPECT_LE(traj.diagnostics.max_hermiticity_drift, 1e-8);
    }
}

TEST(SingleTransfer, StartsInOne) {
    const auto traj = run_single_transfer(fast(), {});
    EXPECT_NEAR(traj.populations.front()(kOne), 1.0, 1e-12);
    EXPECT_NEAR(traj.populations.front()(kZero), 0.0, 1e-12);
}

TEST(SingleTransfer, NoiselessRunConservesPurity) {
    auto p = fast(NoiseModel::None);
    p.gamma = 0.0;
    for (const auto& s : run_single_transfer(p, {}).states) EXPECT_NEAR(s.purity(), 1.0, 1e-9);
}

// Counter-rotating terms oscillate at 2 epsilon; RK4 damps them slightly, so lab-frame
// purity needs a tighter step tolerance than the default to stay within 1e-9.
TEST(SingleTransfer, NoiselessLabRunConservesPurity) {
    auto p = fast(NoiseModel::LabExcitedProjector);
    p.gamma = 0.0;
    IntegratorConfig cfg;
    cfg.tolerance = 1e-11;
    for (const auto& s : run_single_transfer(p, cfg).states) EXPECT_NEAR(s.purity(), 1.0, 1e-9);
}

TEST(SingleTransfer, NoiseNoneIgnoresGamma) {
    auto p = fast(NoiseModel::None);
    p.gamma = 0.7;
    auto q = p;
    q.gamma = 0.0;
    EXPECT_EQ(run_single_transfer(p, {}).final_populations()(kZero),
              run_single_transfer(q, {}).final_populations()(kZero));
}

// At gamma = 0 the run from bare |1> ends with P0 = y(0)^2, the overlap of |1> with the dark state.
TEST(SingleTransfer, AdiabaticLimitReachesDarkStateOverlap) {
    SystemParams p;
    p.ramp = 0.001;
    p.gamma = 0.0;
    const auto traj = run_single_transfer(p, {});
    const double y0 = coefficients_xyz(p, 0.0).y;
    EXPECT_NEAR(traj.final_populations()(kZero), y0 * y0, 1e-5);
    EXPECT_NEAR(traj.final_populations()(kZero), 2500.0 / 2504.0, 1e-5);
}

// Started in the dark state, the excited population follows 2|x|^2 and stays below twice its peak.
TEST(SingleTransfer, ExcitedPopulationFromDarkStateBelowTwiceClosedFormPeak) {
    for (double a : {0.002, 0.005, 0.01}) {
        SystemParams p;
        p.ramp = a;
        p.gamma = 0.0;
        const IntegratorConfig cfg = resolved({}, p);
        Mat<3> rho0 = Mat<3>::Zero();
        rho0(kZero, kZero) = 1.0;  // |E_00(0)> in the superadiabatic index basis
        const NodeRhs rhs{p, 0.0, {}};
        const auto traj = integrate<3>(rhs, DensityOperator<3>{{rho0, Basis::SuperadiabaticIndex}}, p.duration(), cfg);
        double peak = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i)
            peak = std::max(peak, to_bare_frame(p, traj.times[i], traj.states[i].op.m)(kE, kE).real());
        EXPECT_LT(peak, 2.0 * max_excited_population(p).p_max_formula) << "a=" << a;
    }
}

// From bare |1> the bright-state admixture z(0)/sqrt2 beats against the nonadiabatic
// amplitude sqrt2 |x|, so Pe is bounded by (z(0) + sqrt2 max|x|)^2 instead.
TEST(SingleTransfer, ExcitedPopulationFromBareStateBoundedByInterference) {
    for (double a : {0.005, 0.01}) {
        SystemParams p;
        p.ramp = a;
        p.gamma = 0.0;
        const double z0 = coefficients_xyz(p, 0.0).z;
        const double x_max = std::sqrt(max_excited_population(p).p_max_numeric / 2.0);
        const double bound = std::pow(z0 + std::numbers::sqrt2 * x_max, 2);
        EXPECT_LT(max_pe(run_single_transfer(p, {})), bound) << "a=" << a;
    }
}

TEST(SingleTransfer, SuperadiabaticAndLabAgree) {
    SystemParams super;
    SystemParams lab;
    lab.noise = NoiseModel::LabExcitedProjector;
    lab.frame = Frame::Lab;
    const double p_super = run_single_transfer(super, {}).final_populations()(kZero);
    const double p_lab = run_single_transfer(lab, {}).final_populations()(kZero);
    EXPECT_LT(std::abs(p_super - p_lab), 0.01);
    EXPECT_NEAR(p_lab, 0.994907080, 1e-6);
}

TEST(SingleTransfer, IndependentOfCouplingUnit) {
    SystemParams p = fast();
    SystemParams q = p;
    q.g = 3.0;
    q.delta *= 3.0;
    q.ramp *= 3.0;
    q.gamma *= 3.0;
    q.epsilon *= 3.0;
    const auto a = run_single_transfer(p, {});
    const auto b = run_single_transfer(q, {});
    EXPECT_LE((a.final_populations() - b.final_populations()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SingleTransfer, RejectsWeakDriveAndBadParams) {
    SystemParams p;
    p.delta = 5.0;
    EXPECT_THROW(run_single_transfer(p, {}), ConfigError);
    p = {};
    p.ramp = 0.0;
    EXPECT_THROW(run_single_transfer(p, {}), ConfigError);
}

TEST(DephasingFidelity, NoiselessIsOne) {
    auto p = fast();
    p.gamma = 0.0;
    EXPECT_NEAR(dephasing_fidelity_reference(p, {}).fidelity, 1.0, 1e-8);
}

TEST(DephasingFidelity, DecreasesWithGammaAndTracksPerturbativeEstimate) {
    SystemParams p;
    double prev = 2.0;
    for (double gamma : {0.0, 0.05, 0.1, 0.2}) {
        p.gamma = gamma;
        const double F = dephasing_fidelity_reference(p, {}).fidelity;
        EXPECT_LT(F, prev + 1e-12) << "gamma=" << gamma;
        prev = F;
        if (gamma > 0.0 && gamma <= 0.1) {
            const double estimate = 1.0 - perturbative_fidelity(p).fidelity_estimate;
            const double ratio = (1.0 - F) / estimate;
            EXPECT_GT(ratio, 0.5) << "gamma=" << gamma;
            EXPECT_LT(ratio, 2.0) << "gamma=" << gamma;
        }
    }
}

TEST(PerturbativeFidelity, QuadratureOracle) {
    const SystemParams p;
    const auto pf = perturbative_fidelity(p);
    EXPECT_NEAR(pf.integral, 0.0171445924876047, 1e-12);
    EXPECT_NEAR(pf.fidelity_estimate, 1.0 - 0.1 * 0.0171445924876047, 1e-12);

    const int n = 1000000;
    const double T = p.duration(), h = T / n;
    double mid = 0.0;
    for (int i = 0; i < n; ++i) mid += std::norm(coefficients_xyz(p, (i + 0.5) * h).x);
    mid *= h;
    EXPECT_NEAR(pf.integral / mid, 1.0, 1e-6);
}

TEST(PerturbativeFidelity, StructureInGamma) {
    SystemParams p;
    p.gamma = 0.0;
    EXPECT_EQ(perturbative_fidelity(p).fidelity_estimate, 1.0);
    p.gamma = 0.1;
    const double f1 = perturbative_fidelity(p).fidelity_estimate;
    p.gamma = 0.2;
    const double f2 = perturbative_fidelity(p).fidelity_estimate;
    EXPECT_NEAR(f2 - 1.0, 2.0 * (f1 - 1.0), 1e-12);
}

TEST(PerturbativeFidelity, IntegralInUnitsOfInverseCoupling) {
    SystemParams p;
    SystemParams q = p;
    q.g = 2.0;
    q.delta *= 2.0;
    q.ramp *= 2.0;
    q.gamma *= 2.0;
    EXPECT_NEAR(perturbative_fidelity(q).integral, perturbative_fidelity(p).integral / 2.0, 1e-14);
    EXPECT_NEAR(perturbative_fidelity(q).fidelity_estimate, perturbative_fidelity(p).fidelity_estimate, 1e-14);
}

TEST(SimpsonAdaptive, IntegratesPolynomialsAndSmoothFunctions) {
    EXPECT_NEAR(simpson_adaptive([](double x) { return x * x * x; }, 0.0, 2.0), 4.0, 1e-14);
    EXPECT_NEAR(simpson_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0, 1e-8);
}

TEST(FidelityBound, LinearInRampAndGamma) {
    SystemParams p;
    const double b = fidelity_bound(p).bound;
    SystemParams q = p;
    q.ramp *= 2.0;
    EXPECT_NEAR(fidelity_bound(q).bound / b, 2.0, 1e-14);
    q = p;
    q.gamma *= 3.0;
    EXPECT_NEAR(fidelity_bound(q).bound / b, 3.0, 1e-14);
    EXPECT_NEAR(fidelity_bound(p).coefficient, b / p.ramp, 1e-15);
    EXPECT_THROW(fidelity_bound(p, 0.0), DomainError);
}

TEST(FidelityBound, ClosedFormValueAndDominance) {
    const SystemParams p;
    const double pre = 25.0 * std::sqrt(5.0) / 216.0;
    const double b1 = fidelity_bound(p, 1.0).bound;
    EXPECT_NEAR(b1, pre * 0.1 * (1.0 / 0.01) * std::sqrt(1.0 / 50.0) * (1e-4 * 50.0), 1e-15);
    const double spent = p.gamma * perturbative_fidelity(p).integral;
    EXPECT_GE(fidelity_bound(p, WindowConstants{}.n).bound, spent);
    EXPECT_NEAR(fidelity_bound(p, WindowConstants{}.n).bound, 0.00287, 1e-5);
}

TEST(TrajectoryCsv, HeaderAndPrecision) {
    const auto traj = run_single_transfer(fast(NoiseModel::None), {});
    std::ostringstream os;
    io::write_csv(os, io::trajectory_table(traj));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,P0,P1,Pe");
    std::getline(is, line);
    EXPECT_EQ(line, "0,0,1,0");
    std::size_t rows = 1;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, traj.size());
    EXPECT_EQ(io::num(0.123456789012345), "0.123456789012");
    EXPECT_EQ(io::num(2500.0 / 2504.0), "0.998402555911");
}
