// Bell fidelity of an ideal transfer after photon loss, and the heralding
// probability of the two-round distillation that follows.

#include "stirap/network.hpp"

#include <cstdio>

int main() {
    const auto ideal = stirap::with_vacuum_sector(stirap::DensityOperator<6>::pure(stirap::bell_vector()));
    std::printf("%8s %12s %12s\n", "p_loss", "F_bell", "P_success");
    for (double p : {0.0, 0.1, 0.2, 0.5, 0.9, 1.0}) {
        const stirap::LossModel loss{p};
        const auto rho = stirap::apply_photon_loss(ideal, loss);
        std::printf("%8.2f %12.6f %12.6f\n", p, stirap::bell_fidelity(rho), stirap::distillation_success(loss));
    }
}
