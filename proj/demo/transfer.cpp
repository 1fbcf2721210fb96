// Single-node transfer at the default parameters, printed every ~10/g.

#include "stirap/dynamics.hpp"

#include <cstdio>

int main() {
    stirap::SystemParams p;  // delta = 50 g, a = 0.01 g, gamma = 0.1 g
    stirap::IntegratorConfig cfg;
    cfg.record_stride = 50000;

    const auto traj = stirap::run_single_transfer(p, cfg);
    std::printf("%10s %12s %12s %12s\n", "t", "P0", "P1", "Pe");
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& pop = traj.populations[i];
        std::printf("%10.3f %12.8f %12.8f %12.8f\n", traj.times[i], pop(0), pop(1), pop(2));
    }
    const auto peak = stirap::max_excited_population(p);
    std::printf("closed-form max Pe %.4e at t = %.2f (numeric %.4e at %.2f)\n", peak.p_max_formula,
                peak.t_star_formula, peak.p_max_numeric, peak.t_star_numeric);
}
