#include "syncstab/powerflow.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include <Eigen/Dense>

#include "syncstab/network.hpp"
#include "syncstab/numfmt.hpp"

namespace syncstab {

namespace {

// Imaginary part of the bus admittance of a purely inductive network: B = -L.
Eigen::MatrixXd bus_susceptance(const SystemSpec& spec) {
    return -assemble_laplacian(spec).matrix;
}

}  // namespace

void nodal_injections(const SystemSpec& spec, const std::vector<double>& v, const std::vector<double>& theta,
                      std::vector<double>& p_out, std::vector<double>& q_out) {
    const Eigen::MatrixXd b = bus_susceptance(spec);
    const auto n = b.rows();
    p_out.assign(static_cast<std::size_t>(n), 0.0);
    q_out.assign(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 0.0, q = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double th = theta[static_cast<std::size_t>(i)] - theta[static_cast<std::size_t>(j)];
            p += v[static_cast<std::size_t>(j)] * b(i, j) * std::sin(th);
            q -= v[static_cast<std::size_t>(j)] * b(i, j) * std::cos(th);
        }
        p_out[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] * p;
        q_out[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] * q;
    }
}

SteadyState solve_steady_state(const SystemSpec& spec, const std::vector<double>& p_pu,
                               const std::vector<double>& q_pu, const PowerFlowSettings& settings) {
    const std::size_t nconv = spec.converters.size();
    if (p_pu.size() != nconv || q_pu.size() != nconv)
        throw Error(ErrorCode::InvalidArgument, "operating point length does not match converter count");

    SteadyState out;
    if (spec.options.flat_voltage) {
        out.u_pu.assign(nconv, 1.0);
        out.delta0_rad.assign(nconv, 0.0);
        out.converged = true;
        out.flat = true;
        return out;
    }

    const std::size_t nn = spec.nodes.size();
    std::unordered_map<std::string, std::size_t> node_idx;
    for (std::size_t i = 0; i < nn; ++i) node_idx.emplace(spec.nodes[i], i);
    const std::size_t slack = node_idx.at(spec.slack_node);

    std::vector<double> p_sched(nn, 0.0), q_sched(nn, 0.0);
    std::vector<std::size_t> conv_node(nconv);
    for (std::size_t c = 0; c < nconv; ++c) {
        conv_node[c] = node_idx.at(spec.converters[c].node);
        p_sched[conv_node[c]] = p_pu[c];
        q_sched[conv_node[c]] = q_pu[c];
    }

    // Unknown ordering: [theta of non-slack nodes, V of non-slack nodes].
    std::vector<std::size_t> pq;
    for (std::size_t i = 0; i < nn; ++i)
        if (i != slack) pq.push_back(i);
    const auto m = static_cast<Eigen::Index>(pq.size());

    const Eigen::MatrixXd b = bus_susceptance(spec);
    std::vector<double> v(nn, 1.0), th(nn, 0.0), p_calc, q_calc;

    auto mismatch = [&](Eigen::VectorXd& f) {
        nodal_injections(spec, v, th, p_calc, q_calc);
        f.resize(2 * m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const auto i = pq[static_cast<std::size_t>(k)];
            f(k) = p_calc[i] - p_sched[i];
            f(m + k) = q_calc[i] - q_sched[i];
        }
        return f.cwiseAbs().maxCoeff();
    };

    Eigen::VectorXd f;
    double worst = m > 0 ? mismatch(f) : 0.0;
    int iter = 0;
    while (worst > settings.tolerance_pu && iter < settings.max_iterations) {
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * m, 2 * m);
        for (Eigen::Index r = 0; r < m; ++r) {
            const auto i = pq[static_cast<std::size_t>(r)];
            for (Eigen::Index c = 0; c < m; ++c) {
                const auto k = pq[static_cast<std::size_t>(c)];
                if (i == k) continue;
                const double t = th[i] - th[k];
                const double bik = b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
                jac(r, c) = -v[i] * v[k] * bik * std::cos(t);
                jac(r, m + c) = v[i] * bik * std::sin(t);
                jac(m + r, c) = -v[i] * v[k] * bik * std::sin(t);
                jac(m + r, m + c) = -v[i] * bik * std::cos(t);
            }
            double sc = 0.0, ss = 0.0;
            for (std::size_t j = 0; j < nn; ++j) {
                if (j == i) continue;
                const double t = th[i] - th[j];
                const double bij = b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                sc += v[j] * bij * std::cos(t);
                ss += v[j] * bij * std::sin(t);
            }
            const double bii = b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
            jac(r, r) = v[i] * sc;
            jac(r, m + r) = ss;
            jac(m + r, r) = v[i] * ss;
            jac(m + r, m + r) = -2.0 * v[i] * bii - sc;
        }
        const Eigen::VectorXd dx = jac.partialPivLu().solve(f);
        if (!dx.allFinite()) break;
        for (Eigen::Index k = 0; k < m; ++k) {
            const auto i = pq[static_cast<std::size_t>(k)];
            th[i] -= dx(k);
            v[i] -= dx(m + k);
        }
        ++iter;
        worst = mismatch(f);
        if (!std::isfinite(worst)) break;
    }

    out.iterations = iter;
    out.max_mismatch_pu = worst;
    out.converged = std::isfinite(worst) && worst <= settings.tolerance_pu;
    if (!out.converged)
        throw Error(ErrorCode::PfDiverged, "power flow did not converge in " + std::to_string(settings.max_iterations) +
                                               " iterations (mismatch " + fmt12(worst) + " p.u.)");

    out.u_pu.resize(nconv);
    out.delta0_rad.resize(nconv);
    for (std::size_t c = 0; c < nconv; ++c) {
        out.u_pu[c] = v[conv_node[c]];
        out.delta0_rad[c] = th[conv_node[c]];
        if (!(out.u_pu[c] > settings.band_lo && out.u_pu[c] < settings.band_hi))
            throw Error(ErrorCode::PfVoltageOutOfBand, "converter '" + spec.converters[c].name + "' voltage " +
                                                           fmt12(out.u_pu[c]) + " p.u. outside (0.5, 1.5)");
    }
    return out;
}

}  // namespace syncstab
