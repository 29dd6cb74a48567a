#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

namespace svx {
namespace {

using test::copper;
using test::single_box;

TEST(VoxGrid, SingleVoxelCounts) {
  const auto grid = VoxelGrid::build(single_box({1, 1, 1}, 1.0, copper()));
  const NodeIndex nodes(grid);
  EXPECT_EQ(grid.voxel_count(), 1);
  EXPECT_EQ(node_count(nodes), 6);
  EXPECT_EQ(unknown_count(grid, nodes), 11);
  for (Index n = 0; n < 6; ++n) EXPECT_TRUE(nodes.is_boundary(n));
}

TEST(VoxGrid, TwoVoxelBarSharesOneFace) {
  const auto grid = VoxelGrid::build(single_box({2, 1, 1}, 1.0, copper()));
  const NodeIndex nodes(grid);
  EXPECT_EQ(grid.voxel_count(), 2);
  EXPECT_EQ(node_count(nodes), 11);
  EXPECT_EQ(unknown_count(grid, nodes), 21);
  const Index shared = nodes.node(0, Face::XPlus);
  EXPECT_EQ(shared, nodes.node(1, Face::XMinus));
  EXPECT_FALSE(nodes.is_boundary(shared));
}

TEST(VoxGrid, GroundPlaneVoxelCount) {
  // 5 x 0.2 x 10 um at 0.05 um.
  const auto grid = VoxelGrid::build(single_box({100, 4, 200}, 5e-8, test::niobium()));
  EXPECT_EQ(grid.voxel_count(), 80000);
}

TEST(VoxGrid, UnknownCountIsFiveKPlusM) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto grid = VoxelGrid::build(test::random_geometry({4, 3, 3}, 1e-6, 0.5, rng));
    const NodeIndex nodes(grid);
    EXPECT_EQ(unknown_count(grid, nodes), 5 * grid.voxel_count() + nodes.node_count());
  }
}

TEST(VoxGrid, RejectsBadGeometry) {
  auto g = single_box({2, 2, 2}, 1.0, copper());
  g.boxes[0].hi = {2, 1, 1};
  EXPECT_THROW((void)VoxelGrid::build(g), GeometryError);

  g = single_box({2, 2, 2}, 1.0, copper());
  g.materials.push_back(test::niobium());
  g.boxes.push_back({{0, 0, 0}, {0, 0, 0}, 1});
  EXPECT_THROW((void)VoxelGrid::build(g), GeometryError);

  g = single_box({2, 2, 2}, -1.0, copper());
  EXPECT_THROW((void)VoxelGrid::build(g), GeometryError);

  g = single_box({2, 2, 2}, 1.0, copper());
  g.boxes.clear();
  EXPECT_THROW((void)VoxelGrid::build(g), GeometryError);
}

TEST(VoxGrid, OverlapWithSameMaterialIsAllowed) {
  auto g = single_box({3, 1, 1}, 1.0, copper());
  g.boxes.push_back({{1, 0, 0}, {2, 0, 0}, 0});
  EXPECT_EQ(VoxelGrid::build(g).voxel_count(), 3);
}

double entry(const SparseMatrix& A, Index r, Index c) { return A.coeff(r, c); }

TEST(Incidence, SingleVoxelColumns) {
  const auto grid = VoxelGrid::build(single_box({1, 1, 1}, 1.0, copper()));
  const NodeIndex nodes(grid);
  const auto inc = build_incidence(grid, nodes);
  const auto& A = inc.matrix;
  ASSERT_EQ(A.rows(), 6);
  ASSERT_EQ(A.cols(), 5);
  auto at = [&](Basis b, Face f) { return entry(A, nodes.node(0, f), static_cast<Index>(b)); };

  EXPECT_EQ(at(Basis::X, Face::XPlus), 1.0);
  EXPECT_EQ(at(Basis::X, Face::XMinus), -1.0);
  for (Face f : {Face::YMinus, Face::YPlus, Face::ZMinus, Face::ZPlus}) EXPECT_EQ(at(Basis::X, f), 0.0);

  for (Face f : {Face::XMinus, Face::XPlus}) EXPECT_EQ(at(Basis::TwoD, f), 0.5);
  for (Face f : {Face::YMinus, Face::YPlus}) EXPECT_EQ(at(Basis::TwoD, f), -0.5);
  for (Face f : {Face::ZMinus, Face::ZPlus}) EXPECT_EQ(at(Basis::TwoD, f), 0.0);

  for (Face f : {Face::XMinus, Face::XPlus, Face::YMinus, Face::YPlus}) EXPECT_EQ(at(Basis::ThreeD, f), 0.5);
  for (Face f : {Face::ZMinus, Face::ZPlus}) EXPECT_EQ(at(Basis::ThreeD, f), -1.0);
}

TEST(Incidence, ColumnsSumToZero) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const auto grid = VoxelGrid::build(test::random_geometry({4, 4, 3}, 1e-6, 0.6, rng));
    const NodeIndex nodes(grid);
    const auto inc = build_incidence(grid, nodes);
    const Eigen::VectorXd sums = Eigen::RowVectorXd::Ones(inc.matrix.rows()) * inc.matrix;
    EXPECT_EQ(sums.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(inc.matrix.cols(), 5 * grid.voxel_count());
  }
}

TEST(Incidence, FaceFluxIsDxIndependent) {
  const auto a = VoxelGrid::build(single_box({2, 2, 1}, 1.0, copper()));
  const auto b = VoxelGrid::build(single_box({2, 2, 1}, 3.7e-7, copper()));
  const auto Aa = build_incidence(a, NodeIndex(a)).matrix;
  const auto Ab = build_incidence(b, NodeIndex(b)).matrix;
  EXPECT_EQ((Eigen::MatrixXd(Aa) - Eigen::MatrixXd(Ab)).norm(), 0.0);
}

TEST(Nodes, StableUnderBoxPermutation) {
  std::mt19937_64 rng(9);
  auto g = test::random_geometry({5, 4, 3}, 1e-6, 0.5, rng);
  const auto ref_grid = VoxelGrid::build(g);
  const NodeIndex ref(ref_grid);
  for (int t = 0; t < 4; ++t) {
    std::shuffle(g.boxes.begin(), g.boxes.end(), rng);
    const auto grid = VoxelGrid::build(g);
    const NodeIndex nodes(grid);
    ASSERT_EQ(nodes.node_count(), ref.node_count());
    for (Index n = 0; n < nodes.node_count(); ++n) EXPECT_EQ(nodes.key(n), ref.key(n));
    for (Index v = 0; v < grid.voxel_count(); ++v) EXPECT_EQ(nodes.nodes_of(v), ref.nodes_of(v));
  }
}

TEST(Nodes, KeysAreSortedAndUnique) {
  std::mt19937_64 rng(2);
  const auto grid = VoxelGrid::build(test::random_geometry({4, 4, 4}, 1e-6, 0.7, rng));
  const NodeIndex nodes(grid);
  for (Index n = 1; n < nodes.node_count(); ++n) EXPECT_LT(nodes.key(n - 1), nodes.key(n));
}

TEST(Ports, TerminalSelection) {
  const auto grid = VoxelGrid::build(single_box({3, 2, 2}, 1.0, copper()));
  const NodeIndex nodes(grid);
  const auto port = test::end_to_end_port(grid, nodes);
  EXPECT_EQ(port.plus.size(), 4u);
  EXPECT_EQ(port.minus.size(), 4u);
  EXPECT_NO_THROW(validate_port(port, nodes));

  PortSpec overlap = port;
  overlap.minus = overlap.plus;
  EXPECT_THROW(validate_port(overlap, nodes), GeometryError);

  PortSpec empty = port;
  empty.plus.clear();
  EXPECT_THROW(validate_port(empty, nodes), GeometryError);

  // An interior face cannot be a terminal.
  PortSpec interior = port;
  interior.plus = {nodes.node(0, Face::XPlus)};
  EXPECT_THROW(validate_port(interior, nodes), GeometryError);
}

TEST(Ports, EliminationSplitsRows) {
  const auto grid = VoxelGrid::build(single_box({3, 1, 1}, 1.0, copper()));
  const NodeIndex nodes(grid);
  const auto inc = build_incidence(grid, nodes);
  const auto port = test::end_to_end_port(grid, nodes);
  std::vector<Index> term = port.plus;
  term.insert(term.end(), port.minus.begin(), port.minus.end());
  const auto red = eliminate_nodes(inc, term);
  EXPECT_EQ(red.free.rows() + red.terminal.rows(), inc.matrix.rows());
  EXPECT_EQ(red.terminal.rows(), 2);
  for (Index n = 0; n < nodes.node_count(); ++n) {
    const Index r = red.node_to_row[n];
    const SparseMatrix& part = r >= 0 ? red.free : red.terminal;
    const Index row = r >= 0 ? r : -1 - r;
    for (Index c = 0; c < inc.matrix.cols(); ++c) EXPECT_EQ(part.coeff(row, c), inc.matrix.coeff(n, c));
  }
}

}  // namespace
}  // namespace svx
