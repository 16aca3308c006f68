#include "ccx/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ccx/error.hpp"

namespace ccx {

double Mesh1D::max_spacing() const {
  double h = 0.0;
  for (size_t j = 1; j < nodes.size(); ++j) h = std::max(h, nodes[j] - nodes[j - 1]);
  return h;
}

bool Mesh1D::upwind_at(int j) const {
  const double x = nodes[j];
  for (const auto& [a, b] : upwind_regions)
    if (x >= a && x <= b) return true;
  return false;
}

std::vector<double> Mesh1D::trapezoid_weights() const {
  const int m = size();
  std::vector<double> w(m, 0.0);
  if (m == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int j = 0; j + 1 < m; ++j) {
    double h = nodes[j + 1] - nodes[j];
    w[j] += h / 2;
    w[j + 1] += h / 2;
  }
  return w;
}

Mesh1D build_stretched_mesh(double lo, double hi, double anchor, double scale, double L, double R, int m) {
  if (m < 10) throw InvalidArgument("mesh needs at least 10 points (got " + std::to_string(m) + ")");
  if (!(lo < L && L <= R && R < hi)) throw InvalidArgument("mesh: need lo < dense_left <= dense_right < hi");
  if (!(anchor > lo && anchor < hi)) throw InvalidArgument("mesh: anchor outside the domain");
  if (!(scale > 0.0)) throw InvalidArgument("mesh: sinh scale must be positive");
  const double c = scale;
  const double xi_min = std::asinh((lo - L) / c);
  const double xi_int = (R - L) / c;
  const double xi_max = xi_int + std::asinh((hi - R) / c);
  auto phi = [&](double xi) {
    if (xi < 0.0) return L + c * std::sinh(xi);
    if (xi <= xi_int) return L + c * xi;
    return R + c * std::sinh(xi - xi_int);
  };
  double xi_a;
  if (anchor < L) xi_a = std::asinh((anchor - L) / c);
  else if (anchor <= R) xi_a = (anchor - L) / c;
  else xi_a = xi_int + std::asinh((anchor - R) / c);

  const double d = (xi_max - xi_min) / (m - 1);
  int k = static_cast<int>(std::lround((xi_a - xi_min) / d));
  k = std::clamp(k, 1, m - 2);
  // uniform in xi on each side of the anchor so the anchor and both ends are nodes
  const double d_lo = (xi_a - xi_min) / k, d_hi = (xi_max - xi_a) / (m - 1 - k);

  Mesh1D mesh;
  mesh.dense_left = L;
  mesh.dense_right = R;
  mesh.nodes.resize(m);
  for (int j = 0; j < m; ++j) mesh.nodes[j] = j <= k ? phi(xi_min + j * d_lo) : phi(xi_a + (j - k) * d_hi);
  mesh.nodes[k] = anchor;
  mesh.nodes.front() = lo;
  mesh.nodes.back() = hi;
  mesh.anchor_index = k;
  for (int j = 1; j < m; ++j)
    if (!(mesh.nodes[j] > mesh.nodes[j - 1])) throw NumericalError("mesh construction produced non-increasing nodes");
  return mesh;
}

Mesh1D build_fx_mesh(double spot, int m, const FxMeshSpec& spec) {
  if (!(spot > 0.0)) throw InvalidArgument("FX mesh: spot must be positive");
  // FX width is the spot level, as in the Heston-type constructions this stretch comes from
  Mesh1D mesh = build_stretched_mesh(0.0, spec.max_multiple * spot, spot, spot / spec.stretch, spec.dense_left * spot,
                                     spec.dense_right * spot, m);
  mesh.stretch = spec.stretch;
  return mesh;
}

Mesh1D build_rate_mesh(double r0, int m, const RateMeshSpec& spec) {
  Mesh1D mesh = build_stretched_mesh(spec.min, spec.max, r0, (spec.max - spec.min) / spec.stretch, r0, r0, m);
  mesh.stretch = spec.stretch;
  mesh.upwind_regions = spec.upwind_regions;
  return mesh;
}

Mesh1D build_uniform_mesh(double lo, double hi, int m, double anchor) {
  if (m < 3 || !(hi > lo)) throw InvalidArgument("uniform mesh: need m >= 3 and hi > lo");
  Mesh1D mesh;
  mesh.nodes.resize(m);
  const double h = (hi - lo) / (m - 1);
  for (int j = 0; j < m; ++j) mesh.nodes[j] = lo + j * h;
  mesh.nodes.back() = hi;
  int k = static_cast<int>(std::lround((anchor - lo) / h));
  mesh.anchor_index = std::clamp(k, 0, m - 1);
  mesh.dense_left = lo;
  mesh.dense_right = hi;
  return mesh;
}

MeshND::MeshND(std::vector<Mesh1D> axes) : axes_(std::move(axes)) {
  if (axes_.size() > 3) throw InvalidArgument("meshes of dimension > 3 are not supported");
  const int d = dim();
  total_ = 1;
  for (int p = d - 1; p >= 0; --p) {
    strides_[p] = total_;
    total_ *= axes_[p].size();
  }
  weights_.assign(total_, 1.0);
  for (int p = 0; p < d; ++p) {
    auto w = axes_[p].trapezoid_weights();
    for (long n = 0; n < total_; ++n) weights_[n] *= w[(n / strides_[p]) % axes_[p].size()];
  }
}

long MeshND::anchor_flat() const {
  long n = 0;
  for (int p = 0; p < dim(); ++p) n += axes_[p].anchor_index * strides_[p];
  return n;
}

long MeshND::flat(const std::array<int, 3>& idx) const {
  long n = 0;
  for (int p = 0; p < dim(); ++p) n += idx[p] * strides_[p];
  return n;
}

std::array<int, 3> MeshND::unflatten(long n) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int p = 0; p < dim(); ++p) idx[p] = static_cast<int>((n / strides_[p]) % axes_[p].size());
  return idx;
}

bool MeshND::on_boundary(long n) const {
  for (int p = 0; p < dim(); ++p) {
    int i = static_cast<int>((n / strides_[p]) % axes_[p].size());
    if (i == 0 || i == axes_[p].size() - 1) return true;
  }
  return false;
}

void MeshND::coordinates(long n, double* out) const {
  for (int p = 0; p < dim(); ++p) out[p] = axes_[p].nodes[(n / strides_[p]) % axes_[p].size()];
}

Mesh1D mesh_for_factor(const FactorSystem& sys, int factor, int m, const GridConfig& cfg) {
  const double a = sys.initial_state()[factor];
  if (sys.factor(factor).role == FactorRole::Fx) return build_fx_mesh(a, m, cfg.fx);
  return build_rate_mesh(a, m, cfg.rate);
}

MeshND mesh_for_indexset(const FactorSystem& sys, const IndexList& u, const GridConfig& cfg) {
  std::vector<Mesh1D> axes;
  for (size_t k = 0; k < u.size(); ++k)
    axes.push_back(mesh_for_factor(sys, u[k], k == 0 ? cfg.m1 : cfg.m1 / 2, cfg));
  return MeshND(std::move(axes));
}

}  // namespace ccx
