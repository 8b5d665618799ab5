#pragma once

#include <vector>

#include "syncstab/config.hpp"

namespace syncstab {

struct SteadyState {
    std::vector<double> u_pu;        // converter terminal voltage amplitudes
    std::vector<double> delta0_rad;  // converter terminal voltage angles (slack at 0)
    bool converged = false;
    int iterations = 0;
    double max_mismatch_pu = 0.0;
    bool flat = false;
};

struct PowerFlowSettings {
    double tolerance_pu = 1e-8;
    int max_iterations = 50;
    double band_lo = 0.5;
    double band_hi = 1.5;
};

/// Lossless Newton-Raphson with converters as PQ buses and the slack at 1.0/0.
/// Flat-voltage mode returns U = 1, delta = 0 without solving.
/// Throws PF_DIVERGED or PF_VOLTAGE_OUT_OF_BAND.
SteadyState solve_steady_state(const SystemSpec& spec, const std::vector<double>& p_pu,
                               const std::vector<double>& q_pu, const PowerFlowSettings& settings = {});

/// Nodal (P, Q) injections at converter nodes for the given full-network solution.
/// Exposed for mismatch checks; angles/voltages indexed like spec.nodes.
void nodal_injections(const SystemSpec& spec, const std::vector<double>& v, const std::vector<double>& theta,
                      std::vector<double>& p_out, std::vector<double>& q_out);

}  // namespace syncstab
