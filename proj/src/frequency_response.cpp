#include "syncstab/frequency_response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "syncstab/kernels/kernels.hpp"
#include "syncstab/numfmt.hpp"

namespace syncstab {

using cd = std::complex<double>;

Eigen::VectorXd OperatingPoint::p_tilde() const { return p_pu.cwiseQuotient(u_pu.cwiseAbs2()); }
Eigen::VectorXd OperatingPoint::q_tilde() const { return q_pu.cwiseQuotient(u_pu.cwiseAbs2()); }

OperatingPoint OperatingPoint::make(const std::vector<double>& p, const std::vector<double>& q,
                                    const std::vector<double>& u) {
    if (p.size() != q.size() || p.size() != u.size())
        throw Error(ErrorCode::InvalidArgument, "operating point vectors differ in length");
    OperatingPoint op;
    const auto n = static_cast<Eigen::Index>(p.size());
    op.p_pu = Eigen::Map<const Eigen::VectorXd>(p.data(), n);
    op.q_pu = Eigen::Map<const Eigen::VectorXd>(q.data(), n);
    op.u_pu = Eigen::Map<const Eigen::VectorXd>(u.data(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(op.u_pu(i) > 0.0) || !std::isfinite(op.u_pu(i)))
            throw Error(ErrorCode::InvalidArgument, "terminal voltage must be positive");
        if (!std::isfinite(op.p_pu(i)) || !std::isfinite(op.q_pu(i)))
            throw Error(ErrorCode::InvalidArgument, "injections must be finite");
    }
    return op;
}

cd gamma(double omega, double u, const PllGains& pll, double omega0) {
    if (!(omega > 0.0)) throw Error(ErrorCode::DegenerateFreq, "frequency must be positive");
    if (!(u > 0.0)) throw Error(ErrorCode::InvalidArgument, "voltage must be positive");
    const cd jw(0.0, omega);
    const cd g_pll = pll.kp + pll.ki / jw;
    return omega0 * (jw / g_pll + u) / (jw * u);
}

cd ConverterSide::gamma(double omega) const { return syncstab::gamma(omega, u, pll, omega0); }

Eigen::MatrixXcd build_gnet(double omega, double omega0, const ReducedNetwork& net, const OperatingPoint& op) {
    if (!(omega > 0.0)) throw Error(ErrorCode::DegenerateFreq, "frequency must be positive");
    const double wr = omega0 / omega;
    const Eigen::MatrixXd re = -(net.b_inv * op.p_tilde().asDiagonal());
    const Eigen::MatrixXd im = wr * (net.b_inv * op.q_tilde().asDiagonal());
    Eigen::MatrixXcd g(re.rows(), re.cols());
    g.real() = re;
    g.imag() = im;
    return g;
}

Eigen::MatrixXcd build_gnet_sym(double omega, double omega0, const ReducedNetwork& net, const OperatingPoint& op) {
    if (!(omega > 0.0)) throw Error(ErrorCode::DegenerateFreq, "frequency must be positive");
    const double wr = omega0 / omega;
    const Eigen::MatrixXd& s = net.b_inv_sqrt;
    Eigen::MatrixXd re = -(s * op.p_tilde().asDiagonal() * s);
    Eigen::MatrixXd im = wr * (s * op.q_tilde().asDiagonal() * s);
    // Exact symmetry, independent of summation order.
    re = (0.5 * (re + re.transpose())).eval();
    im = (0.5 * (im + im.transpose())).eval();
    Eigen::MatrixXcd g(re.rows(), re.cols());
    g.real() = re;
    g.imag() = im;
    return g;
}

Eigenpairs eigenpairs(const Eigen::MatrixXcd& m) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, true);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "eigendecomposition failed");
    Eigenpairs out{es.eigenvalues(), es.eigenvectors()};
    for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) out.vectors.col(c).normalize();
    return out;
}

double overlap(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w) { return std::abs(v.dot(w)); }

Eigen::Index best_match(const Eigenpairs& ep, const Eigen::VectorXcd& ref) {
    Eigen::Index best = 0;
    double best_ov = -1.0;
    for (Eigen::Index c = 0; c < ep.values.size(); ++c) {
        const double ov = overlap(ref, ep.vectors.col(c));
        if (ov > best_ov || (ov == best_ov && ep.values(c).real() < ep.values(best).real())) {
            best = c;
            best_ov = ov;
        }
    }
    return best;
}

std::vector<double> make_grid(double fmin_hz, double fmax_hz, int points) {
    if (points < 2 || !(fmin_hz > 0.0) || !(fmax_hz > fmin_hz))
        throw Error(ErrorCode::InvalidArgument, "scan grid needs >= 2 points over a positive ascending range");
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double step = (fmax_hz - fmin_hz) / (points - 1);
    for (int k = 0; k < points; ++k)
        grid[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * (fmin_hz + step * k);
    return grid;
}

namespace {

// Rotates v so that <ref, v> is real and nonnegative.
void align_phase(const Eigen::VectorXcd& ref, Eigen::Ref<Eigen::VectorXcd> v) {
    const cd d = ref.dot(v);
    if (std::abs(d) > 0.0) v *= std::conj(d) / std::abs(d);
}

// Fixes the arbitrary phase of a fresh eigenvector: largest-modulus entry real positive.
void canonical_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    const cd a = v(k);
    if (std::abs(a) > 0.0) v *= std::conj(a) / std::abs(a);
}

}  // namespace

SubsystemCurves trace_curves(const ConverterSide& con, const ReducedNetwork& net, const OperatingPoint& op,
                             const std::vector<double>& omega_grid) {
    const auto m = static_cast<Eigen::Index>(omega_grid.size());
    const Eigen::Index n = op.size();
    if (m < 2) throw Error(ErrorCode::InvalidArgument, "frequency grid needs at least 2 points");
    for (Eigen::Index k = 0; k < m; ++k) {
        const double w = omega_grid[static_cast<std::size_t>(k)];
        if (!(w > 0.0)) throw Error(ErrorCode::DegenerateFreq, "frequency must be positive");
        if (k > 0 && !(w > omega_grid[static_cast<std::size_t>(k - 1)]))
            throw Error(ErrorCode::InvalidArgument, "frequency grid must be strictly ascending");
    }
    if (!(con.u > 0.0)) throw Error(ErrorCode::InvalidArgument, "voltage must be positive");

    SubsystemCurves c;
    c.omega_rad_s = Eigen::Map<const Eigen::VectorXd>(omega_grid.data(), m);
    c.d_con.resize(m);
    c.k_con.resize(m);
    kernels::converter_response(omega_grid, {con.omega0, con.pll.kp, con.pll.ki, con.u},
                                {c.d_con.data(), static_cast<std::size_t>(m)},
                                {c.k_con.data(), static_cast<std::size_t>(m)});

    // Point-wise decompositions first, matching afterwards.
    std::vector<Eigenpairs> raw(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k)
        raw[static_cast<std::size_t>(k)] =
            eigenpairs(build_gnet_sym(omega_grid[static_cast<std::size_t>(k)], con.omega0, net, op));

    c.d_net.resize(n, m);
    c.k_net.resize(n, m);
    c.eigvecs.resize(static_cast<std::size_t>(m));

    {
        const Eigenpairs& ep = raw.front();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return std::pair(ep.values(a).real(), ep.values(a).imag()) <
                   std::pair(ep.values(b).real(), ep.values(b).imag());
        });
        Eigen::MatrixXcd v(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index src = order[static_cast<std::size_t>(i)];
            v.col(i) = ep.vectors.col(src);
            canonical_phase(v.col(i));
            c.d_net(i, 0) = ep.values(src).real();
            c.k_net(i, 0) = ep.values(src).imag();
        }
        c.eigvecs[0] = std::move(v);
    }

    struct Candidate {
        double ov;
        double re;
        Eigen::Index branch;
        Eigen::Index col;
    };
    std::vector<Candidate> cand;
    cand.reserve(static_cast<std::size_t>(n * n));
    for (Eigen::Index k = 1; k < m; ++k) {
        const Eigenpairs& ep = raw[static_cast<std::size_t>(k)];
        const Eigen::MatrixXcd& prev = c.eigvecs[static_cast<std::size_t>(k - 1)];
        const Eigen::MatrixXd ov = (prev.adjoint() * ep.vectors).cwiseAbs();

        cand.clear();
        for (Eigen::Index b = 0; b < n; ++b)
            for (Eigen::Index col = 0; col < n; ++col) cand.push_back({ov(b, col), ep.values(col).real(), b, col});
        std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
            return std::tie(b.ov, a.re, a.branch, a.col) < std::tie(a.ov, b.re, b.branch, b.col);
        });

        std::vector<bool> branch_done(static_cast<std::size_t>(n), false), col_used(static_cast<std::size_t>(n), false);
        Eigen::MatrixXcd v(n, n);
        Eigen::Index assigned = 0;
        for (const auto& cd_ : cand) {
            if (assigned == n) break;
            if (branch_done[static_cast<std::size_t>(cd_.branch)] || col_used[static_cast<std::size_t>(cd_.col)]) continue;
            branch_done[static_cast<std::size_t>(cd_.branch)] = true;
            col_used[static_cast<std::size_t>(cd_.col)] = true;
            ++assigned;
            v.col(cd_.branch) = ep.vectors.col(cd_.col);
            align_phase(prev.col(cd_.branch), v.col(cd_.branch));
            c.d_net(cd_.branch, k) = ep.values(cd_.col).real();
            c.k_net(cd_.branch, k) = ep.values(cd_.col).imag();
            if (cd_.ov < SubsystemCurves::kJumpThreshold) c.jumps.push_back({k, cd_.branch, cd_.ov});
        }
        c.eigvecs[static_cast<std::size_t>(k)] = std::move(v);
    }
    std::sort(c.jumps.begin(), c.jumps.end(), [](const BranchJump& a, const BranchJump& b) {
        return std::tie(a.grid_index, a.branch) < std::tie(b.grid_index, b.branch);
    });
    return c;
}

void write_curves_csv(std::ostream& os, const SubsystemCurves& curves) {
    const Eigen::Index n = curves.branches();
    os << "f_hz,D_con,K_con";
    for (Eigen::Index i = 1; i <= n; ++i) os << ",D_net_" << i;
    for (Eigen::Index i = 1; i <= n; ++i) os << ",K_net_" << i;
    os << '\n';
    for (Eigen::Index k = 0; k < curves.points(); ++k) {
        os << fmt12(curves.omega_rad_s(k) / (2.0 * std::numbers::pi)) << ',' << fmt12(curves.d_con(k)) << ','
           << fmt12(curves.k_con(k));
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt12(curves.d_net(i, k));
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt12(curves.k_net(i, k));
        os << '\n';
    }
}

}  // namespace syncstab
