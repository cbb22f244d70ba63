#pragma once

#include "romkit/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace romkit {

enum BoundaryTag : std::uint8_t
{
  kBase = 1 << 0,
  kTop = 1 << 1,
  kLeft = 1 << 2,
  kRight = 1 << 3,
};

// Structured triangulation of the unit square: n x n cells, each cut along the
// bottom-left to top-right diagonal. Nodes are numbered row by row from the
// bottom-left corner; the square is split into B x B blocks numbered the same way.
struct Mesh
{
  int n = 0;
  int blocks_per_side = 0;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<int> triangle_block;            // 0-based block of each triangle
  std::vector<std::uint8_t> boundary_tags;    // per node, OR of BoundaryTag

  int num_blocks() const { return blocks_per_side * blocks_per_side; }
  int node_index(int row, int col) const { return row * (n + 1) + col; }
};

// Free (non-Dirichlet) degrees of freedom. The top edge is the Dirichlet boundary.
struct DofMap
{
  std::vector<int> free;       // global node index of each free dof, ascending
  std::vector<int> node_to_dof; // -1 for constrained nodes

  Eigen::Index n_free() const { return static_cast<Eigen::Index>(free.size()); }
};

Mesh build_mesh(int n, int blocks_per_side);

DofMap make_dofmap(const Mesh& mesh);

double signed_area(const Mesh& mesh, int triangle);

// P1 element stiffness  K_ij = |T| grad(phi_i) . grad(phi_j).
Eigen::Matrix3d local_stiffness(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                const Eigen::Vector2d& c);

// Stiffness of  sum_b kappa_b \int_{Omega_b} grad w . grad v  on the free dofs.
SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs,
                                const std::vector<double>& block_coefficients);

// Same, before Dirichlet elimination (all nodes).
SparseMatrix assemble_stiffness_all_nodes(const Mesh& mesh,
                                          const std::vector<double>& block_coefficients);

struct ThermalBlockOperators
{
  std::vector<SparseMatrix> stiffness;  // A_q, one per block
  std::vector<Vector> loads;            // f_1: unit flux through the base edge
};

ThermalBlockOperators assemble_thermal_block_operators(const Mesh& mesh, const DofMap& dofs);

// X = sum_q weights_q A_q. Every weight must be positive.
SparseMatrix assemble_inner_product(const std::vector<SparseMatrix>& blocks,
                                    const std::vector<double>& weights);

} // namespace romkit
