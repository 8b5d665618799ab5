#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "syncstab/frequency_response.hpp"
#include "syncstab/powerflow.hpp"

namespace syncstab {

/// Damping margins within +-kMarginalBand are reported Marginal.
inline constexpr double kMarginalBand = 1e-3;

enum class Verdict { Stable, Unstable, Marginal, NoCrossing };

std::string_view to_string(Verdict v) noexcept;

struct Crossing {
    double omega_rad_s = 0.0;
    double f_hz = 0.0;
    double d_con = 0.0;
    double d_net = 0.0;
    double net_damping = 0.0;  // d_con + d_net
    std::complex<double> lambda;
    Eigen::VectorXcd phi;      // tracked unit eigenvector of the symmetric form
};

struct SubsystemResult {
    Eigen::Index index = 0;
    std::vector<Crossing> crossings;  // ascending frequency
};

struct CriticalCrossing {
    Eigen::Index subsystem = 0;
    double omega_c1 = 0.0;
    double f_c1 = 0.0;
    double d_net1 = 0.0;
    double d_con_at_c1 = 0.0;
    double margin = 0.0;
    std::complex<double> lambda1;
    Eigen::VectorXcd phi;
};

struct StabilityReport {
    std::vector<SubsystemResult> per_subsystem;
    std::optional<CriticalCrossing> critical;
    Verdict verdict = Verdict::NoCrossing;
    SteadyState steady_state;
    std::vector<std::string> notes;
};

/// Inputs needed to re-evaluate the curves at arbitrary frequencies.
struct ResponseModel {
    ConverterSide con;
    const ReducedNetwork* net = nullptr;
    OperatingPoint op;

    [[nodiscard]] Eigenpairs network_eigenpairs(double omega) const;
};

/// Zeros of K_con + K_net_i, bracketed on the grid and refined by bisection
/// until the bracket is no wider than root_tol_hz.
std::vector<Crossing> find_crossings(const ResponseModel& model, const SubsystemCurves& curves, Eigen::Index i,
                                     double root_tol_hz);

Verdict classify(double margin) noexcept;

StabilityReport assess(const ResponseModel& model, const SubsystemCurves& curves, double root_tol_hz,
                       const SteadyState& steady = {});

}  // namespace syncstab
