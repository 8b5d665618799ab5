#include "syncstab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "syncstab/kernels/kernels.hpp"
#include "syncstab/numfmt.hpp"

namespace syncstab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOscMinRad = kTwoPi * 0.5;
}  // namespace

StateSpace assemble_state_space(const ReducedNetwork& net, const OperatingPoint& op, const std::vector<PllGains>& pll,
                                double omega0, FeedbackSign sign) {
    const Eigen::Index n = op.size();
    if (static_cast<Eigen::Index>(pll.size()) != n || net.size() != n)
        throw Error(ErrorCode::InvalidArgument, "state-space inputs differ in size");
    const double s = sign == FeedbackSign::Negative ? 1.0 : -1.0;

    Eigen::VectorXd kp(n), ki(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        kp(i) = pll[static_cast<std::size_t>(i)].kp;
        ki(i) = pll[static_cast<std::size_t>(i)].ki;
    }
    const Eigen::VectorXd& u = op.u_pu;
    const Eigen::MatrixXd i_n = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd mp = s * (net.b_inv * op.p_tilde().asDiagonal());
    const Eigen::MatrixXd mq = s * (net.b_inv * op.q_tilde().asDiagonal());
    const Eigen::VectorXd kpu = kp.cwiseProduct(u);
    const Eigen::VectorXd kiu = ki.cwiseProduct(u);

    // L d_omega = Kp U (M_Q - I) d_theta + x + Kp U 1 d
    const Eigen::MatrixXd loop = i_n - kpu.asDiagonal() * mp / omega0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(loop);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n - 1);
    if (!(smin > 0.0) || smax / smin > 1e12)
        throw Error(ErrorCode::AlgebraicLoopSingular, "algebraic loop matrix condition exceeds 1e12");
    const auto lu = loop.partialPivLu();
    const Eigen::MatrixXd w_theta = lu.solve(kpu.asDiagonal() * (mq - i_n));
    const Eigen::MatrixXd w_x = lu.inverse();
    const Eigen::VectorXd w_d = lu.solve(kpu);

    StateSpace ss;
    ss.a_matrix.resize(2 * n, 2 * n);
    ss.a_matrix.topLeftCorner(n, n) = w_theta;
    ss.a_matrix.topRightCorner(n, n) = w_x;
    // x' = Ki U (M_P d_omega / omega0 + (M_Q - I) d_theta + 1 d)
    ss.a_matrix.bottomLeftCorner(n, n) = kiu.asDiagonal() * (mp * w_theta / omega0 + (mq - i_n));
    ss.a_matrix.bottomRightCorner(n, n) = kiu.asDiagonal() * (mp * w_x / omega0);
    ss.e_input.resize(2 * n);
    ss.e_input.head(n) = w_d;
    ss.e_input.tail(n) = kiu.asDiagonal() * (mp * w_d / omega0 + Eigen::VectorXd::Ones(n));

    ss.omega_out.resize(n, 2 * n);
    ss.omega_out << w_theta, w_x;
    ss.omega_feed = w_d;
    ss.delta_out = mp * ss.omega_out / omega0;
    ss.delta_out.leftCols(n) += mq;
    ss.delta_feed = mp * w_d / omega0;
    ss.p_tilde = op.p_tilde();

    for (Eigen::Index i = 1; i <= n; ++i) ss.labels.push_back("theta_" + std::to_string(i));
    for (Eigen::Index i = 1; i <= n; ++i) ss.labels.push_back("x_" + std::to_string(i));
    if (!ss.a_matrix.allFinite()) throw Error(ErrorCode::AlgebraicLoopSingular, "state matrix is not finite");
    return ss;
}

StateSpace assemble_state_space(const ReducedNetwork& net, const OperatingPoint& op, const PllGains& pll,
                                double omega0, FeedbackSign sign) {
    return assemble_state_space(net, op, std::vector<PllGains>(static_cast<std::size_t>(op.size()), pll), omega0, sign);
}

ModeSet modes(const StateSpace& ss) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(ss.a_matrix, false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "state matrix eigendecomposition failed");
    ModeSet out;
    out.eigenvalues = es.eigenvalues();
    std::sort(out.eigenvalues.data(), out.eigenvalues.data() + out.eigenvalues.size(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  if (a.real() != b.real()) return a.real() > b.real();
                  return a.imag() > b.imag();
              });
    for (Eigen::Index k = 0; k < out.eigenvalues.size(); ++k) {
        const std::complex<double> ev = out.eigenvalues(k);
        if (std::abs(ev.imag()) <= kOscMinRad) continue;
        if (!out.dominant || ev.real() > out.dominant->sigma) {
            const double mag = std::abs(ev);
            out.dominant = Mode{ev.real(), std::abs(ev.imag()) / kTwoPi, mag > 0.0 ? -ev.real() / mag : 0.0};
        }
    }
    return out;
}

void write_modes_csv(std::ostream& os, const ModeSet& ms) {
    os << "re,im,f_hz,damping_ratio\n";
    for (Eigen::Index k = 0; k < ms.eigenvalues.size(); ++k) {
        const std::complex<double> ev = ms.eigenvalues(k);
        const double mag = std::abs(ev);
        os << fmt12(ev.real()) << ',' << fmt12(ev.imag()) << ',' << fmt12(std::abs(ev.imag()) / kTwoPi) << ','
           << fmt12(mag > 0.0 ? -ev.real() / mag : 0.0) << '\n';
    }
}

double Disturbance::at(double t) const noexcept {
    return (t >= start_s && t < start_s + width_s) ? amplitude_rad : 0.0;
}

TimeSeries simulate(const StateSpace& ss, const Disturbance& dist, double dt_s, double duration_s, int decimate) {
    if (!(dt_s > 0.0) || !(duration_s > dt_s)) throw Error(ErrorCode::InvalidArgument, "need dt > 0 and duration > dt");
    if (decimate < 1) throw Error(ErrorCode::InvalidArgument, "decimation factor must be >= 1");
    const Eigen::Index n = ss.converters();
    const Eigen::Index dim = 2 * n;
    const auto steps = static_cast<long>(std::llround(duration_s / dt_s));

    const Eigen::MatrixXd i_d = Eigen::MatrixXd::Identity(dim, dim);
    const auto lhs = (i_d - 0.5 * dt_s * ss.a_matrix).partialPivLu();
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor step = lhs.solve(i_d + 0.5 * dt_s * ss.a_matrix);
    const Eigen::VectorXd drive = lhs.solve(0.5 * dt_s * ss.e_input);

    const auto stored = static_cast<Eigen::Index>(steps / decimate + 1);
    TimeSeries ts;
    ts.t_s.reserve(static_cast<std::size_t>(stored));
    ts.theta.resize(stored, n);
    ts.omega.resize(stored, n);
    ts.dp.resize(stored, n);

    Eigen::VectorXd z = Eigen::VectorXd::Zero(dim), next(dim);
    const std::span<const double> a_span(step.data(), static_cast<std::size_t>(dim * dim));
    Eigen::Index row = 0;
    auto record = [&](double t, double d) {
        ts.t_s.push_back(t);
        ts.theta.row(row) = z.head(n).transpose();
        ts.omega.row(row) = (ss.omega_out * z + ss.omega_feed * d).transpose();
        ts.dp.row(row) = ss.p_tilde.cwiseProduct(ss.delta_out * z + ss.delta_feed * d).transpose();
        ++row;
    };

    double d_prev = dist.at(0.0);
    record(0.0, d_prev);
    for (long k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt_s;
        const double d = dist.at(t);
        kernels::matvec(a_span, static_cast<std::size_t>(dim), static_cast<std::size_t>(dim),
                        {z.data(), static_cast<std::size_t>(dim)}, {next.data(), static_cast<std::size_t>(dim)});
        if (d_prev != 0.0 || d != 0.0) next += drive * (d_prev + d);
        z.swap(next);
        d_prev = d;
        if (k % decimate == 0 && row < stored) record(t, d);
    }
    ts.theta.conservativeResize(row, n);
    ts.omega.conservativeResize(row, n);
    ts.dp.conservativeResize(row, n);
    return ts;
}

void write_timeseries_csv(std::ostream& os, const TimeSeries& ts) {
    const Eigen::Index n = ts.theta.cols();
    os << "t_s";
    for (const char* name : {"theta_", "omega_", "dp_"})
        for (Eigen::Index i = 1; i <= n; ++i) os << ',' << name << i;
    os << '\n';
    for (Eigen::Index r = 0; r < ts.theta.rows(); ++r) {
        os << fmt12(ts.t_s[static_cast<std::size_t>(r)]);
        for (const Eigen::MatrixXd* m : {&ts.theta, &ts.omega, &ts.dp})
            for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt12((*m)(r, i));
        os << '\n';
    }
}

std::optional<double> growth_rate(const std::vector<double>& t_s, const std::vector<double>& signal) {
    const std::size_t n = std::min(t_s.size(), signal.size());
    if (n < 5) return std::nullopt;
    const std::size_t begin = n - n / 3;
    std::vector<double> tx, ly;
    for (std::size_t k = std::max<std::size_t>(begin, 1); k + 1 < n; ++k) {
        const double a = std::abs(signal[k]);
        if (a > 0.0 && a >= std::abs(signal[k - 1]) && a > std::abs(signal[k + 1])) {
            tx.push_back(t_s[k]);
            ly.push_back(std::log(a));
        }
    }
    if (tx.size() < 3) return std::nullopt;
    const double m = static_cast<double>(tx.size());
    double st = 0, sy = 0;
    for (std::size_t k = 0; k < tx.size(); ++k) {
        st += tx[k];
        sy += ly[k];
    }
    const double tm = st / m, ym = sy / m;
    double num = 0, den = 0;
    for (std::size_t k = 0; k < tx.size(); ++k) {
        num += (tx[k] - tm) * (ly[k] - ym);
        den += (tx[k] - tm) * (tx[k] - tm);
    }
    if (!(den > 0.0)) return std::nullopt;
    return num / den;
}

double spectral_peak_hz(const std::vector<double>& signal, double sample_dt_s, double fmin_hz, double fmax_hz,
                        double df_hz) {
    if (signal.empty() || !(sample_dt_s > 0.0) || !(df_hz > 0.0) || !(fmax_hz >= fmin_hz))
        throw Error(ErrorCode::InvalidArgument, "invalid spectral scan");
    double mean = 0.0;
    for (double v : signal) mean += v;
    mean /= static_cast<double>(signal.size());
    std::vector<double> centred(signal.size());
    for (std::size_t k = 0; k < signal.size(); ++k) centred[k] = signal[k] - mean;

    const auto bins = static_cast<std::size_t>(std::floor((fmax_hz - fmin_hz) / df_hz + 1e-9)) + 1;
    std::vector<double> cps(bins), power(bins);
    for (std::size_t b = 0; b < bins; ++b) cps[b] = (fmin_hz + df_hz * static_cast<double>(b)) * sample_dt_s;
    kernels::goertzel_power(centred, cps, power);
    const auto best = static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
    return fmin_hz + df_hz * static_cast<double>(best);
}

std::string_view to_string(Agreement a) noexcept {
    switch (a) {
        case Agreement::Agree: return "AGREE";
        case Agreement::Disagree: return "DISAGREE";
        case Agreement::Skipped: return "SKIPPED";
    }
    return "SKIPPED";
}

CrosscheckRecord crosscheck(const StabilityReport& report, const ModeSet& ms) {
    CrosscheckRecord r;
    if (report.verdict == Verdict::NoCrossing || !report.critical) {
        r.reason = "no crossing";
        return r;
    }
    if (!ms.dominant) {
        r.reason = "NO_OSC_MODE";
        return r;
    }
    r.freq_deviation_hz = std::abs(report.critical->f_c1 - ms.dominant->f_hz);
    if (report.verdict == Verdict::Marginal) {
        r.reason = "margin inside marginal band";
        return r;
    }
    const bool stable_criterion = report.verdict == Verdict::Stable;
    const bool stable_oracle = ms.dominant->sigma < 0.0;
    r.status = stable_criterion == stable_oracle ? Agreement::Agree : Agreement::Disagree;
    return r;
}

}  // namespace syncstab
