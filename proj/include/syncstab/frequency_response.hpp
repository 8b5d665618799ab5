#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "syncstab/config.hpp"
#include "syncstab/network.hpp"

namespace syncstab {

/// Converter injections and terminal voltages, all in converter order.
struct OperatingPoint {
    Eigen::VectorXd p_pu;
    Eigen::VectorXd q_pu;
    Eigen::VectorXd u_pu;  // > 0

    [[nodiscard]] Eigen::Index size() const noexcept { return p_pu.size(); }
    [[nodiscard]] Eigen::VectorXd p_tilde() const;  // P_i / U_i^2
    [[nodiscard]] Eigen::VectorXd q_tilde() const;  // Q_i / U_i^2

    /// Checks lengths and positivity; throws INVALID_ARGUMENT.
    static OperatingPoint make(const std::vector<double>& p, const std::vector<double>& q,
                               const std::vector<double>& u);
};

/// Frequency function of the PLL-synchronized converter side, shared by all converters.
struct ConverterSide {
    double omega0 = 0.0;
    PllGains pll;
    double u = 1.0;

    /// Gamma(jw); throws DEGENERATE_FREQ for w <= 0.
    [[nodiscard]] std::complex<double> gamma(double omega) const;
};

/// Gamma(jw) = omega0 (jw / G_pll(jw) + u) / (jw u), G_pll(s) = kp + ki / s.
std::complex<double> gamma(double omega, double u, const PllGains& pll, double omega0);

/// -B^-1 P~ + j (omega0/omega) B^-1 Q~.
Eigen::MatrixXcd build_gnet(double omega, double omega0, const ReducedNetwork& net, const OperatingPoint& op);

/// -B^-1/2 P~ B^-1/2 + j (omega0/omega) B^-1/2 Q~ B^-1/2; complex symmetric.
Eigen::MatrixXcd build_gnet_sym(double omega, double omega0, const ReducedNetwork& net, const OperatingPoint& op);

/// Eigenpairs of a square complex matrix; columns of `vectors` have unit 2-norm.
struct Eigenpairs {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
};

Eigenpairs eigenpairs(const Eigen::MatrixXcd& m);

/// |v^H w| for unit vectors.
double overlap(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w);

/// Index of the eigenvector with the largest overlap with `ref`; ties go to smaller Re(lambda).
Eigen::Index best_match(const Eigenpairs& ep, const Eigen::VectorXcd& ref);

struct BranchJump {
    Eigen::Index grid_index;  // point k, matched against k-1
    Eigen::Index branch;
    double overlap;
};

struct SubsystemCurves {
    Eigen::VectorXd omega_rad_s;  // ascending
    Eigen::VectorXd d_con;
    Eigen::VectorXd k_con;
    Eigen::MatrixXd d_net;                 // n x m, row i is branch i
    Eigen::MatrixXd k_net;                 // n x m
    std::vector<Eigen::MatrixXcd> eigvecs;  // per grid point, column i tracks branch i
    std::vector<BranchJump> jumps;

    static constexpr double kJumpThreshold = 0.7;

    [[nodiscard]] Eigen::Index branches() const noexcept { return d_net.rows(); }
    [[nodiscard]] Eigen::Index points() const noexcept { return omega_rad_s.size(); }
};

/// Uniform grid in Hz over [fmin, fmax] converted to rad/s.
std::vector<double> make_grid(double fmin_hz, double fmax_hz, int points);

/// Branches are ordered by ascending Re(lambda) at the first grid point and then
/// carried by greedy eigenvector matching.
SubsystemCurves trace_curves(const ConverterSide& con, const ReducedNetwork& net, const OperatingPoint& op,
                             const std::vector<double>& omega_grid);

/// `f_hz,D_con,K_con,D_net_1..,K_net_1..`, 12 significant digits.
void write_curves_csv(std::ostream& os, const SubsystemCurves& curves);

}  // namespace syncstab
