#pragma once

// Reduced-order linear model of PLL-synchronized converters on a lossless
// inductive network. Independent of the frequency-domain criterion; used to
// arbitrate its verdicts.

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "syncstab/config.hpp"
#include "syncstab/frequency_response.hpp"
#include "syncstab/network.hpp"
#include "syncstab/stability.hpp"

namespace syncstab {

/// Sign of the network angle feedback:
///   Negative: d_delta = +M_P d_omega / omega0 + M_Q d_theta  (characteristic det(Gamma I + G_net) = 0)
///   Positive: d_delta = -M_P d_omega / omega0 - M_Q d_theta
/// with M_P = B^-1 P~, M_Q = B^-1 Q~.
enum class FeedbackSign { Negative, Positive };

/// States [d_theta_1..n, x_1..n]; x is the PLL integrator.
struct StateSpace {
    Eigen::MatrixXd a_matrix;   // 2n x 2n
    Eigen::VectorXd e_input;    // response to a unit slack-angle offset in u_q
    Eigen::MatrixXd omega_out;  // d_omega = omega_out z + omega_feed d
    Eigen::VectorXd omega_feed;
    Eigen::MatrixXd delta_out;  // d_delta = delta_out z + delta_feed d
    Eigen::VectorXd delta_feed;
    Eigen::VectorXd p_tilde;
    std::vector<std::string> labels;

    [[nodiscard]] Eigen::Index converters() const noexcept { return a_matrix.rows() / 2; }
};

/// Per-converter gains; throws ALGEBRAIC_LOOP_SINGULAR when the loop matrix
/// condition exceeds 1e12.
StateSpace assemble_state_space(const ReducedNetwork& net, const OperatingPoint& op, const std::vector<PllGains>& pll,
                                double omega0, FeedbackSign sign = FeedbackSign::Negative);

/// Common gains for every converter.
StateSpace assemble_state_space(const ReducedNetwork& net, const OperatingPoint& op, const PllGains& pll,
                                double omega0, FeedbackSign sign = FeedbackSign::Negative);

struct Mode {
    double sigma = 0.0;   // 1/s
    double f_hz = 0.0;    // |Im| / 2pi
    double damping_ratio = 0.0;
};

struct ModeSet {
    Eigen::VectorXcd eigenvalues;  // sorted by descending real part, then imaginary part
    std::optional<Mode> dominant;  // oscillatory (|Im| > 2pi 0.5 rad/s) with largest real part
};

/// Dominant is empty (NO_OSC_MODE) when no eigenvalue is oscillatory.
ModeSet modes(const StateSpace& ss);

/// `re,im,f_hz,damping_ratio` for every eigenvalue.
void write_modes_csv(std::ostream& os, const ModeSet& ms);

/// Rectangular pulse on the slack angle, added to every converter's u_q.
struct Disturbance {
    double start_s = 0.1;
    double width_s = 0.02;
    double amplitude_rad = 0.1;

    [[nodiscard]] double at(double t) const noexcept;
};

struct TimeSeries {
    std::vector<double> t_s;
    Eigen::MatrixXd theta;  // rows = samples, cols = converters
    Eigen::MatrixXd omega;
    Eigen::MatrixXd dp;     // (P_i / U_i^2) d_delta_i
};

/// Trapezoidal integration; every `decimate`-th step is stored.
TimeSeries simulate(const StateSpace& ss, const Disturbance& dist, double dt_s, double duration_s, int decimate = 1);

void write_timeseries_csv(std::ostream& os, const TimeSeries& ts);

/// Growth rate (1/s) of the dominant oscillation: least-squares slope of log peak
/// magnitudes over the final third of `signal`. Empty with fewer than 3 peaks.
std::optional<double> growth_rate(const std::vector<double>& t_s, const std::vector<double>& signal);

/// Frequency (Hz) of the largest Goertzel power on [fmin, fmax] in steps of df.
double spectral_peak_hz(const std::vector<double>& signal, double sample_dt_s, double fmin_hz, double fmax_hz,
                        double df_hz);

enum class Agreement { Agree, Disagree, Skipped };

std::string_view to_string(Agreement a) noexcept;

struct CrosscheckRecord {
    Agreement status = Agreement::Skipped;
    double freq_deviation_hz = 0.0;  // |f_c1 - f_dominant| when both exist
    std::string reason;
};

/// Stable <=> dominant sigma < 0; skipped for NoCrossing, margins inside the
/// marginal band and missing oscillatory modes.
CrosscheckRecord crosscheck(const StabilityReport& report, const ModeSet& ms);

}  // namespace syncstab
