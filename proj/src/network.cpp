#include "syncstab/network.hpp"

#include <algorithm>
#include <unordered_map>

namespace syncstab {

NodeLaplacian assemble_laplacian(const SystemSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.nodes.size());
    std::unordered_map<std::string, Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) idx.emplace(spec.nodes[static_cast<std::size_t>(i)], i);

    NodeLaplacian out{Eigen::MatrixXd::Zero(n, n), spec.nodes};
    for (const auto& b : spec.branches) {
        const auto f = idx.at(b.from);
        const auto t = idx.at(b.to);
        const double y = 1.0 / b.inductance_pu;
        out.matrix(f, f) += y;
        out.matrix(t, t) += y;
        out.matrix(f, t) -= y;
        out.matrix(t, f) -= y;
    }
    return out;
}

ReducedNetwork make_reduced_network(const Eigen::MatrixXd& b_matrix) {
    const Eigen::MatrixXd sym = 0.5 * (b_matrix + b_matrix.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "eigendecomposition of B failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    if (!(ev.minCoeff() > 1e-10 * std::max(largest, 1.0)))
        throw Error(ErrorCode::NotPositiveDefinite, "reduced susceptance matrix has a non-positive eigenvalue");

    const Eigen::MatrixXd& v = es.eigenvectors();
    ReducedNetwork out;
    out.b_matrix = sym;
    out.b_inv = v * ev.cwiseInverse().asDiagonal() * v.transpose();
    out.b_inv_sqrt = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
    out.b_sqrt = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
    out.b_inv = 0.5 * (out.b_inv + out.b_inv.transpose()).eval();
    out.b_inv_sqrt = 0.5 * (out.b_inv_sqrt + out.b_inv_sqrt.transpose()).eval();
    out.b_sqrt = 0.5 * (out.b_sqrt + out.b_sqrt.transpose()).eval();
    return out;
}

ReducedNetwork kron_reduce(const NodeLaplacian& full, const std::string& slack,
                           const std::vector<std::string>& keep) {
    std::unordered_map<std::string, Eigen::Index> idx;
    for (std::size_t i = 0; i < full.node_order.size(); ++i) idx.emplace(full.node_order[i], static_cast<Eigen::Index>(i));

    auto slack_it = idx.find(slack);
    if (slack_it == idx.end()) throw Error(ErrorCode::InvalidArgument, "slack node '" + slack + "' not in Laplacian");

    std::vector<Eigen::Index> kept, interior;
    std::vector<bool> is_kept(full.node_order.size(), false);
    for (const auto& k : keep) {
        auto it = idx.find(k);
        if (it == idx.end()) throw Error(ErrorCode::InvalidArgument, "kept node '" + k + "' not in Laplacian");
        if (it->second == slack_it->second) throw Error(ErrorCode::InvalidArgument, "slack node cannot be kept");
        kept.push_back(it->second);
        is_kept[static_cast<std::size_t>(it->second)] = true;
    }
    for (std::size_t i = 0; i < full.node_order.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        if (!is_kept[i] && ii != slack_it->second) interior.push_back(ii);
    }

    // Grounding the slack is simply dropping its row and column.
    const Eigen::MatrixXd& g = full.matrix;
    Eigen::MatrixXd b = g(kept, kept);
    if (!interior.empty()) {
        const Eigen::MatrixXd b_ii = g(interior, interior);
        const Eigen::MatrixXd b_ki = g(kept, interior);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b_ii, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
        if (!(lo > 0.0) || hi / lo > 1e12)
            throw Error(ErrorCode::SingularInterior, "interior block is numerically singular (condition > 1e12)");
        b -= b_ki * b_ii.ldlt().solve(b_ki.transpose());
    }

    ReducedNetwork out = make_reduced_network(b);
    for (std::size_t i = 0; i < keep.size(); ++i) out.converter_index.emplace(keep[i], static_cast<int>(i));
    return out;
}

ReducedNetwork reduce_network(const SystemSpec& spec) {
    std::vector<std::string> keep;
    keep.reserve(spec.converters.size());
    for (const auto& c : spec.converters) keep.push_back(c.node);
    ReducedNetwork out = kron_reduce(assemble_laplacian(spec), spec.slack_node, keep);
    out.converter_index.clear();
    for (std::size_t i = 0; i < spec.converters.size(); ++i)
        out.converter_index.emplace(spec.converters[i].name, static_cast<int>(i));
    return out;
}

}  // namespace syncstab
