#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "syncstab/config.hpp"

namespace syncstab {

/// Weighted graph Laplacian over all declared nodes, rows in declaration order.
struct NodeLaplacian {
    Eigen::MatrixXd matrix;
    std::vector<std::string> node_order;
};

/// Grounded, Kron-reduced susceptance matrix on the converter nodes.
struct ReducedNetwork {
    Eigen::MatrixXd b_matrix;    // symmetric positive definite, converter order
    Eigen::MatrixXd b_inv;       // B^-1
    Eigen::MatrixXd b_inv_sqrt;  // B^-1/2 (symmetric)
    Eigen::MatrixXd b_sqrt;      // B^1/2 (symmetric)
    std::map<std::string, int> converter_index;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(b_matrix.rows()); }
};

/// Off-diagonals -1/L per branch (parallel branches add), positive diagonals, zero row sums.
NodeLaplacian assemble_laplacian(const SystemSpec& spec);

/// Grounds `slack` then eliminates every node not in `keep`.
/// Throws SINGULAR_INTERIOR (interior condition > 1e12) or NOT_POSITIVE_DEFINITE.
ReducedNetwork kron_reduce(const NodeLaplacian& full, const std::string& slack,
                           const std::vector<std::string>& keep);

/// assemble_laplacian + kron_reduce over the system's converter nodes, named by converter.
ReducedNetwork reduce_network(const SystemSpec& spec);

/// Builds the square-root factors for an already reduced symmetric matrix.
ReducedNetwork make_reduced_network(const Eigen::MatrixXd& b_matrix);

}  // namespace syncstab
