#include "syncstab/modal.hpp"

#include <cmath>
#include <limits>

#include "syncstab/analysis.hpp"
#include "syncstab/numfmt.hpp"

namespace syncstab {

ModalWeights modal_weights(const ReducedNetwork& net, const OperatingPoint& op, double omega0, double omega_c1,
                           const Eigen::VectorXcd& tracked_phi, std::complex<double> tracked_lambda) {
    const Eigenpairs ep = eigenpairs(build_gnet_sym(omega_c1, omega0, net, op));
    const Eigen::Index j = best_match(ep, tracked_phi);
    if (!(std::abs(ep.values(j) - tracked_lambda) <= 1e-6))
        throw Error(ErrorCode::EigpairMismatch, "no eigenvalue within 1e-6 of the tracked critical value at " +
                                                    fmt12(omega_c1) + " rad/s");

    ModalWeights w;
    w.omega_c1 = omega_c1;
    w.omega_r1 = omega0 / omega_c1;
    w.lambda1 = ep.values(j);
    w.phi = ep.vectors.col(j);
    const std::complex<double> d = tracked_phi.dot(w.phi);
    if (std::abs(d) > 0.0) w.phi *= std::conj(d) / std::abs(d);
    w.phi_b1 = net.b_inv_sqrt * w.phi;
    const Eigen::VectorXd u2 = op.u_pu.cwiseAbs2();
    w.eta = w.phi_b1.cwiseAbs2().cwiseQuotient(u2);

    const std::complex<double> tt = (w.phi.transpose() * w.phi)(0, 0);
    if (std::abs(tt) > 1e-14) {
        const Eigen::VectorXcd phi_t = w.phi / std::sqrt(tt);
        const Eigen::VectorXcd b1 = net.b_inv_sqrt * phi_t;
        w.eta_complex = b1.array().square() / u2.array().cast<std::complex<double>>();
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        w.eta_complex = Eigen::VectorXcd::Constant(op.size(), {nan, nan});
    }
    return w;
}

Sensitivities sensitivities(const ModalWeights& w) {
    Sensitivities s;
    s.eta = w.eta;
    s.dd_dp = -w.eta;
    s.dd_dq = Eigen::VectorXd::Zero(w.eta.size());
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < w.eta.size(); ++i)
        if (std::abs(w.eta(i)) > std::abs(w.eta(best))) best = i;
    s.dominant = best;
    return s;
}

namespace {

double critical_d_net1(const PipelineResult& r) {
    if (!r.report.critical)
        throw Error(ErrorCode::InvalidArgument, "no critical crossing; D_net1 is undefined");
    return r.report.critical->d_net1;
}

FiniteDifference fd(const Analyzer& an, const std::vector<double>& p, const std::vector<double>& q,
                    std::vector<double> p2, std::vector<double> q2, double delta, double predicted) {
    if (!(delta != 0.0) || !std::isfinite(delta)) throw Error(ErrorCode::InvalidArgument, "step must be nonzero");
    const SteadyState base = an.steady_state(p, q);
    const double d0 = critical_d_net1(an.run_frozen(p, q, base));
    const double d1 = critical_d_net1(an.run_frozen(p2, q2, base));
    FiniteDifference out;
    out.predicted = predicted;
    out.measured = (d1 - d0) / delta;
    const double scale = std::abs(predicted);
    out.rel_err = scale > 0.0 ? std::abs(out.measured - predicted) / scale : std::abs(out.measured);
    return out;
}

}  // namespace

FiniteDifference finite_difference_check(const Analyzer& an, const std::vector<double>& p,
                                         const std::vector<double>& q, Eigen::Index i, double delta_p) {
    if (i < 0 || static_cast<std::size_t>(i) >= p.size()) throw Error(ErrorCode::InvalidArgument, "converter index out of range");
    const PipelineResult base = an.run(p, q);
    if (!base.sensitivities) throw Error(ErrorCode::InvalidArgument, "no critical crossing; D_net1 is undefined");
    std::vector<double> p2 = p;
    p2[static_cast<std::size_t>(i)] += delta_p;
    return fd(an, p, q, p2, q, delta_p, base.sensitivities->dd_dp(i));
}

FiniteDifference finite_difference_check_q(const Analyzer& an, const std::vector<double>& p,
                                           const std::vector<double>& q, Eigen::Index i, double delta_q) {
    if (i < 0 || static_cast<std::size_t>(i) >= q.size()) throw Error(ErrorCode::InvalidArgument, "converter index out of range");
    std::vector<double> q2 = q;
    q2[static_cast<std::size_t>(i)] += delta_q;
    return fd(an, p, q, p, q2, delta_q, 0.0);
}

int positive_inertia(const std::vector<double>& p) noexcept {
    int k = 0;
    for (double v : p) k += v > 0.0 ? 1 : 0;
    return k;
}

AdjustmentResult adjustment_compare(const Analyzer& an, const std::vector<double>& p_before,
                                    const std::vector<double>& p_after, const std::vector<double>& q,
                                    bool resolve_voltage) {
    if (p_before.size() != p_after.size())
        throw Error(ErrorCode::InvalidArgument, "operating points differ in length");
    const SteadyState base = an.steady_state(p_before, q);
    const PipelineResult before = an.run_frozen(p_before, q, base);
    const PipelineResult after = resolve_voltage ? an.run(p_after, q) : an.run_frozen(p_after, q, base);

    AdjustmentResult r;
    r.voltage_resolved = resolve_voltage && !an.flat_voltage();
    r.d_net1_before = critical_d_net1(before);
    r.d_net1_after = critical_d_net1(after);
    r.omega_c1_before = before.report.critical->omega_c1;
    r.omega_c1_after = after.report.critical->omega_c1;
    r.margin_before = before.report.critical->margin;
    r.margin_after = after.report.critical->margin;
    r.verdict_before = before.report.verdict;
    r.verdict_after = after.report.verdict;
    r.positive_inertia_before = positive_inertia(p_before);
    r.positive_inertia_after = positive_inertia(p_after);
    r.per_converter_delta_p.resize(p_before.size());
    for (std::size_t i = 0; i < p_before.size(); ++i) r.per_converter_delta_p[i] = p_after[i] - p_before[i];
    r.improvement = r.d_net1_after > r.d_net1_before;
    return r;
}

}  // namespace syncstab
