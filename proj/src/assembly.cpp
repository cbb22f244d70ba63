#include "romkit/assembly.hpp"

#include "romkit/error.hpp"

#include <string>

namespace romkit {

Mesh build_mesh(int n, int blocks_per_side)
{
  if (n < 1 || blocks_per_side < 1)
    throw ConfigError("mesh needs n >= 1 and B >= 1 (got n = " + std::to_string(n) +
                      ", B = " + std::to_string(blocks_per_side) + ")");
  if (n % blocks_per_side != 0)
    throw ConfigError("B must divide n (got B = " + std::to_string(blocks_per_side) +
                      ", n = " + std::to_string(n) + ")");

  Mesh mesh;
  mesh.n = n;
  mesh.blocks_per_side = blocks_per_side;
  const double h = 1.0 / n;

  mesh.nodes.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  mesh.boundary_tags.reserve(mesh.nodes.capacity());
  for (int row = 0; row <= n; ++row) {
    for (int col = 0; col <= n; ++col) {
      // exact endpoints so boundary nodes sit exactly on the edges
      const double x = col == n ? 1.0 : col * h;
      const double y = row == n ? 1.0 : row * h;
      mesh.nodes.emplace_back(x, y);
      std::uint8_t tag = 0;
      if (row == 0)
        tag |= kBase;
      if (row == n)
        tag |= kTop;
      if (col == 0)
        tag |= kLeft;
      if (col == n)
        tag |= kRight;
      mesh.boundary_tags.push_back(tag);
    }
  }

  const int cells_per_block = n / blocks_per_side;
  mesh.triangles.reserve(static_cast<std::size_t>(2 * n * n));
  mesh.triangle_block.reserve(mesh.triangles.capacity());
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const int a = mesh.node_index(row, col);
      const int b = mesh.node_index(row, col + 1);
      const int c = mesh.node_index(row + 1, col + 1);
      const int d = mesh.node_index(row + 1, col);
      const int block = (row / cells_per_block) * blocks_per_side + col / cells_per_block;
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
      mesh.triangle_block.push_back(block);
      mesh.triangle_block.push_back(block);
    }
  }
  return mesh;
}

DofMap make_dofmap(const Mesh& mesh)
{
  DofMap dofs;
  dofs.node_to_dof.assign(mesh.nodes.size(), -1);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (mesh.boundary_tags[i] & kTop)
      continue;
    dofs.node_to_dof[i] = static_cast<int>(dofs.free.size());
    dofs.free.push_back(static_cast<int>(i));
  }
  return dofs;
}

double signed_area(const Mesh& mesh, int triangle)
{
  const auto& t = mesh.triangles[static_cast<std::size_t>(triangle)];
  const Eigen::Vector2d e1 = mesh.nodes[t[1]] - mesh.nodes[t[0]];
  const Eigen::Vector2d e2 = mesh.nodes[t[2]] - mesh.nodes[t[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Eigen::Matrix3d local_stiffness(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                const Eigen::Vector2d& c)
{
  const double twice_area = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  // grad(phi_i) = rot90(opposite edge) / (2|T|)
  Eigen::Matrix<double, 2, 3> g;
  g.col(0) << b.y() - c.y(), c.x() - b.x();
  g.col(1) << c.y() - a.y(), a.x() - c.x();
  g.col(2) << a.y() - b.y(), b.x() - a.x();
  g /= twice_area;

  Eigen::Matrix3d k;
  const double area = 0.5 * twice_area;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      k(i, j) = area * (g(0, i) * g(0, j) + g(1, i) * g(1, j));
  return k;
}

namespace {

SparseMatrix assemble(const Mesh& mesh, const std::vector<int>& node_to_row, Eigen::Index size,
                      const std::vector<double>& kappa)
{
  if (static_cast<int>(kappa.size()) != mesh.num_blocks())
    throw ConfigError("expected " + std::to_string(mesh.num_blocks()) + " block coefficients, got " +
                      std::to_string(kappa.size()));

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double coefficient = kappa[static_cast<std::size_t>(mesh.triangle_block[t])];
    if (coefficient == 0.0)
      continue;
    const auto& tri = mesh.triangles[t];
    const Eigen::Matrix3d k =
        coefficient * local_stiffness(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
    for (int i = 0; i < 3; ++i) {
      const int row = node_to_row[static_cast<std::size_t>(tri[i])];
      if (row < 0)
        continue;
      for (int j = 0; j < 3; ++j) {
        const int col = node_to_row[static_cast<std::size_t>(tri[j])];
        if (col >= 0)
          triplets.emplace_back(row, col, k(i, j));
      }
    }
  }
  SparseMatrix a(size, size);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

} // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs,
                                const std::vector<double>& block_coefficients)
{
  return assemble(mesh, dofs.node_to_dof, dofs.n_free(), block_coefficients);
}

SparseMatrix assemble_stiffness_all_nodes(const Mesh& mesh,
                                          const std::vector<double>& block_coefficients)
{
  std::vector<int> identity(mesh.nodes.size());
  for (std::size_t i = 0; i < identity.size(); ++i)
    identity[i] = static_cast<int>(i);
  return assemble(mesh, identity, static_cast<Eigen::Index>(identity.size()), block_coefficients);
}

ThermalBlockOperators assemble_thermal_block_operators(const Mesh& mesh, const DofMap& dofs)
{
  ThermalBlockOperators ops;
  const int blocks = mesh.num_blocks();
  ops.stiffness.resize(static_cast<std::size_t>(blocks));
  for (int q = 0; q < blocks; ++q) {
    std::vector<double> indicator(static_cast<std::size_t>(blocks), 0.0);
    indicator[static_cast<std::size_t>(q)] = 1.0;
    ops.stiffness[static_cast<std::size_t>(q)] = assemble_stiffness(mesh, dofs, indicator);
  }

  // \int_{base} v ds: each base edge of length h puts h/2 on both endpoints.
  Vector load = Vector::Zero(dofs.n_free());
  for (int col = 0; col < mesh.n; ++col) {
    const int left = mesh.node_index(0, col);
    const int right = mesh.node_index(0, col + 1);
    const double length = mesh.nodes[right].x() - mesh.nodes[left].x();
    for (int node : {left, right}) {
      const int dof = dofs.node_to_dof[static_cast<std::size_t>(node)];
      if (dof >= 0)
        load[dof] += 0.5 * length;
    }
  }
  ops.loads.push_back(std::move(load));
  return ops;
}

SparseMatrix assemble_inner_product(const std::vector<SparseMatrix>& blocks,
                                    const std::vector<double>& weights)
{
  if (blocks.empty() || blocks.size() != weights.size())
    throw ConfigError("inner product needs one positive weight per operator block");
  for (std::size_t q = 0; q < weights.size(); ++q)
    if (!(weights[q] > 0.0))
      throw ConfigError("invalid reference parameter: weight " + std::to_string(q) + " = " +
                        std::to_string(weights[q]) + " is not positive");
  SparseMatrix x = weights[0] * blocks[0];
  for (std::size_t q = 1; q < blocks.size(); ++q)
    x += weights[q] * blocks[q];
  x.makeCompressed();
  return x;
}

} // namespace romkit
