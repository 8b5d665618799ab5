#include "syncstab/stability.hpp"

#include <cmath>
#include <numbers>

namespace syncstab {

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::Unstable: return "Unstable";
        case Verdict::Marginal: return "Marginal";
        case Verdict::NoCrossing: return "NoCrossing";
    }
    return "NoCrossing";
}

Eigenpairs ResponseModel::network_eigenpairs(double omega) const {
    return eigenpairs(build_gnet_sym(omega, con.omega0, *net, op));
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Probe {
    double k_sum;
    std::complex<double> lambda;
    std::complex<double> gamma;
    Eigen::VectorXcd phi;
};

Probe probe(const ResponseModel& model, double omega, const Eigen::VectorXcd& ref) {
    const Eigenpairs ep = model.network_eigenpairs(omega);
    const Eigen::Index j = best_match(ep, ref);
    Probe p;
    p.lambda = ep.values(j);
    p.gamma = model.con.gamma(omega);
    p.phi = ep.vectors.col(j);
    const std::complex<double> d = ref.dot(p.phi);
    if (std::abs(d) > 0.0) p.phi *= std::conj(d) / std::abs(d);
    p.k_sum = p.gamma.imag() + p.lambda.imag();
    return p;
}

}  // namespace

std::vector<Crossing> find_crossings(const ResponseModel& model, const SubsystemCurves& curves, Eigen::Index i,
                                     double root_tol_hz) {
    std::vector<Crossing> out;
    const Eigen::Index m = curves.points();
    for (Eigen::Index k = 0; k + 1 < m; ++k) {
        const double ga = curves.k_con(k) + curves.k_net(i, k);
        const double gb = curves.k_con(k + 1) + curves.k_net(i, k + 1);
        double wa = curves.omega_rad_s(k);
        double wb = curves.omega_rad_s(k + 1);
        Eigen::VectorXcd ref = curves.eigvecs[static_cast<std::size_t>(k)].col(i);

        double w_root = 0.0;
        if (ga == 0.0) {
            // An exact grid zero is counted once, from the bracket on its right.
            if (k > 0) continue;
            w_root = wa;
        } else if (gb == 0.0) {
            w_root = wb;
        } else if ((ga < 0.0) != (gb < 0.0)) {
            double fa = ga;
            while ((wb - wa) / kTwoPi > root_tol_hz) {
                const double wm = 0.5 * (wa + wb);
                if (!(wm > wa && wm < wb)) break;
                Probe pm = probe(model, wm, ref);
                if (pm.k_sum == 0.0) {
                    wa = wb = wm;
                    break;
                }
                if ((pm.k_sum < 0.0) == (fa < 0.0)) {
                    wa = wm;
                    fa = pm.k_sum;
                } else {
                    wb = wm;
                }
                ref = std::move(pm.phi);
            }
            w_root = 0.5 * (wa + wb);
        } else {
            continue;
        }
        Probe hit = probe(model, w_root, ref);
        const double w = w_root;
        Crossing c;
        c.omega_rad_s = w;
        c.f_hz = w / kTwoPi;
        c.d_con = hit.gamma.real();
        c.d_net = hit.lambda.real();
        c.net_damping = c.d_con + c.d_net;
        c.lambda = hit.lambda;
        c.phi = std::move(hit.phi);
        out.push_back(std::move(c));
    }
    return out;
}

Verdict classify(double margin) noexcept {
    if (margin > kMarginalBand) return Verdict::Stable;
    if (margin < -kMarginalBand) return Verdict::Unstable;
    return Verdict::Marginal;
}

StabilityReport assess(const ResponseModel& model, const SubsystemCurves& curves, double root_tol_hz,
                       const SteadyState& steady) {
    StabilityReport r;
    r.steady_state = steady;
    for (Eigen::Index i = 0; i < curves.branches(); ++i) {
        SubsystemResult s;
        s.index = i;
        s.crossings = find_crossings(model, curves, i, root_tol_hz);
        for (const Crossing& c : s.crossings) {
            if (!r.critical || c.net_damping < r.critical->margin) {
                CriticalCrossing cc;
                cc.subsystem = i;
                cc.omega_c1 = c.omega_rad_s;
                cc.f_c1 = c.f_hz;
                cc.d_net1 = c.d_net;
                cc.d_con_at_c1 = c.d_con;
                cc.margin = c.net_damping;
                cc.lambda1 = c.lambda;
                cc.phi = c.phi;
                r.critical = std::move(cc);
            }
        }
        r.per_subsystem.push_back(std::move(s));
    }
    if (!r.critical) {
        r.verdict = Verdict::NoCrossing;
        r.notes.emplace_back("NO_CROSSING: no spring-coefficient zero in the scan band; stable by criterion only");
    } else {
        r.verdict = classify(r.critical->margin);
    }
    if (!curves.jumps.empty())
        r.notes.push_back("BRANCH_JUMP: " + std::to_string(curves.jumps.size()) +
                          " tracked step(s) below eigenvector overlap 0.7");
    return r;
}

}  // namespace syncstab
