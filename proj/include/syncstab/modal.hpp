#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "syncstab/frequency_response.hpp"
#include "syncstab/network.hpp"
#include "syncstab/stability.hpp"

namespace syncstab {

class Analyzer;

/// Decomposition of the critical eigenvalue into per-converter weights:
///   Re lambda1 = -sum eta_i P_i,  Im lambda1 = omega_r1 sum eta_i Q_i.
struct ModalWeights {
    Eigen::VectorXcd phi;      // phi^H phi = 1
    Eigen::VectorXcd phi_b1;   // B^-1/2 phi
    Eigen::VectorXd eta;       // |phi_b1_i|^2 / U_i^2 >= 0
    double omega_r1 = 0.0;     // omega0 / omega_c1
    double omega_c1 = 0.0;
    std::complex<double> lambda1;
    // Diagnostic alternative: phi^T phi = 1 and eta_i = phi_b1_i^2 / U_i^2 (complex).
    Eigen::VectorXcd eta_complex;
};

/// Matches the tracked critical eigenpair at omega_c1; throws EIGPAIR_MISMATCH
/// when no eigenvalue lies within 1e-6 of `tracked_lambda`.
ModalWeights modal_weights(const ReducedNetwork& net, const OperatingPoint& op, double omega0, double omega_c1,
                           const Eigen::VectorXcd& tracked_phi, std::complex<double> tracked_lambda);

struct Sensitivities {
    Eigen::VectorXd eta;
    Eigen::VectorXd dd_dp;  // -eta
    Eigen::VectorXd dd_dq;  // 0: first-order partial only
    Eigen::Index dominant = 0;  // argmax |eta|, lowest index on ties
};

Sensitivities sensitivities(const ModalWeights& w);

struct FiniteDifference {
    double predicted = 0.0;
    double measured = 0.0;
    double rel_err = 0.0;
};

/// (D_net1(P_i + delta) - D_net1(P)) / delta with voltages frozen at the base
/// steady state and the crossing re-solved; predicted = -eta_i.
FiniteDifference finite_difference_check(const Analyzer& an, const std::vector<double>& p,
                                         const std::vector<double>& q, Eigen::Index i, double delta_p = 1e-4);

/// Same harness for a reactive-power step; predicted is 0.
FiniteDifference finite_difference_check_q(const Analyzer& an, const std::vector<double>& p,
                                           const std::vector<double>& q, Eigen::Index i, double delta_q = 1e-4);

struct AdjustmentResult {
    double d_net1_before = 0.0;
    double d_net1_after = 0.0;
    double omega_c1_before = 0.0;
    double omega_c1_after = 0.0;
    double margin_before = 0.0;
    double margin_after = 0.0;
    Verdict verdict_before = Verdict::NoCrossing;
    Verdict verdict_after = Verdict::NoCrossing;
    int positive_inertia_before = 0;
    int positive_inertia_after = 0;
    std::vector<double> per_converter_delta_p;
    bool improvement = false;  // d_net1_after > d_net1_before
    bool voltage_resolved = false;
};

/// Number of converters with P_i > 0.
int positive_inertia(const std::vector<double>& p) noexcept;

/// Runs the pipeline at both points, each at its own critical frequency.
/// Voltages are frozen at the "before" steady state unless resolve_voltage.
AdjustmentResult adjustment_compare(const Analyzer& an, const std::vector<double>& p_before,
                                    const std::vector<double>& p_after, const std::vector<double>& q,
                                    bool resolve_voltage = false);

}  // namespace syncstab
