#pragma once

#include <array>
#include <utility>
#include <vector>

#include "ccx/model.hpp"

namespace ccx {

struct Mesh1D {
  std::vector<double> nodes;
  int anchor_index = 0;
  double stretch = 0.0;  // scale = reference width / stretch
  double dense_left = 0.0, dense_right = 0.0;
  // First-order upwinding of the drift is used for nodes inside these intervals.
  std::vector<std::pair<double, double>> upwind_regions;

  int size() const { return static_cast<int>(nodes.size()); }
  double anchor() const { return nodes[anchor_index]; }
  double max_spacing() const;
  bool upwind_at(int j) const;
  std::vector<double> trapezoid_weights() const;
};

struct FxMeshSpec {
  double max_multiple = 8.0;
  double stretch = 20.0;
  double dense_left = 0.95, dense_right = 1.02;  // relative to spot
};

struct RateMeshSpec {
  double min = -0.5, max = 0.8;
  double stretch = 100.0;
  std::vector<std::pair<double, double>> upwind_regions{{-0.5, -0.1}, {0.2, 0.8}};
};

Mesh1D build_fx_mesh(double spot, int m, const FxMeshSpec& spec = {});
Mesh1D build_rate_mesh(double r0, int m, const RateMeshSpec& spec = {});
// Generic sinh-stretched mesh with a uniform dense interval around the anchor (left == right gives a pure sinh map).
// scale is the sinh width c: spacing grows like c cosh(xi) outside the dense interval.
Mesh1D build_stretched_mesh(double lo, double hi, double anchor, double scale, double dense_left, double dense_right, int m);
Mesh1D build_uniform_mesh(double lo, double hi, int m, double anchor);

// Tensor-product mesh; flat index = ((i0 * n1) + i1) * n2 + i2, the last direction varies fastest.
class MeshND {
 public:
  MeshND() = default;
  explicit MeshND(std::vector<Mesh1D> axes);

  int dim() const { return static_cast<int>(axes_.size()); }
  const Mesh1D& axis(int p) const { return axes_.at(p); }
  int size(int p) const { return axes_[p].size(); }
  long stride(int p) const { return strides_[p]; }
  long total() const { return total_; }
  long anchor_flat() const;
  long flat(const std::array<int, 3>& idx) const;
  std::array<int, 3> unflatten(long n) const;
  bool on_boundary(long n) const;
  const std::vector<double>& weights() const { return weights_; }
  void coordinates(long n, double* out) const;

 private:
  std::vector<Mesh1D> axes_;
  std::array<long, 3> strides_{0, 0, 0};
  long total_ = 1;
  std::vector<double> weights_;
};

struct GridConfig {
  int m1 = 60;
  FxMeshSpec fx;
  RateMeshSpec rate;
};

Mesh1D mesh_for_factor(const FactorSystem& sys, int factor, int m, const GridConfig& cfg);
MeshND mesh_for_indexset(const FactorSystem& sys, const IndexList& u, const GridConfig& cfg);

}  // namespace ccx
