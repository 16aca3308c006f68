#include "ccx/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccx/error.hpp"

namespace ccx {

void SolverConfig::validate() const {
  const double lo = 0.5 + std::sqrt(3.0) / 6.0;
  if (theta < lo - 1e-12 || theta > 1.0) {
    std::ostringstream os;
    os << "ADI theta must lie in [" << lo << ", 1] (got " << theta << ")";
    throw InvalidArgument(os.str());
  }
  if (steps < 1) throw InvalidArgument("number of time steps must be positive");
}

double ValueSurface::interpolate(const double* x) const { return interpolate_nodal(*mesh, values.data(), x); }

double interpolate_nodal(const MeshND& m, const double* values, const double* x) {
  const MeshND* mesh = &m;
  const int d = mesh->dim();
  if (d == 0) return values[0];
  std::array<int, 3> lo{0, 0, 0};
  std::array<double, 3> w{0, 0, 0};
  for (int p = 0; p < d; ++p) {
    const auto& nodes = mesh->axis(p).nodes;
    double xp = std::clamp(x[p], nodes.front(), nodes.back());
    int j = static_cast<int>(std::upper_bound(nodes.begin(), nodes.end(), xp) - nodes.begin()) - 1;
    j = std::clamp(j, 0, static_cast<int>(nodes.size()) - 2);
    lo[p] = j;
    w[p] = (xp - nodes[j]) / (nodes[j + 1] - nodes[j]);
  }
  double v = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double wt = 1.0;
    std::array<int, 3> idx{0, 0, 0};
    for (int p = 0; p < d; ++p) {
      int bit = (corner >> p) & 1;
      idx[p] = lo[p] + bit;
      wt *= bit ? w[p] : 1.0 - w[p];
    }
    if (wt != 0.0) v += wt * values[mesh->flat(idx)];
  }
  return v;
}

double DensitySurface::mass() const {
  const auto& w = mesh->weights();
  double m = 0.0;
  for (size_t i = 0; i < values.size(); ++i) m += w[i] * values[i];
  return m;
}

double DensitySurface::min_value() const { return *std::min_element(values.begin(), values.end()); }

void StepWorkspace::ensure(long n, int count) {
  if (static_cast<int>(v.size()) < count) v.resize(count);
  for (auto& b : v)
    if (static_cast<long>(b.size()) != n) b.assign(n, 0.0);
}

void hv_backward_step(const DiscreteOperator& A, const DiscreteOperator& B, double dt, double theta, const double* U,
                      double* out, StepWorkspace& ws) {
  const long n = A.size();
  const int k = A.dim();
  ws.ensure(n, 7);
  auto& AU = ws.v[0];
  auto& y0 = ws.v[1];
  auto& cur = ws.v[2];
  auto& rhs = ws.v[3];
  auto& yk = ws.v[4];
  auto& byk = ws.v[5];
  auto& tmp = ws.v[6];
  const double c = theta * dt;

  A.apply(U, AU.data());
  for (long i = 0; i < n; ++i) y0[i] = U[i] + dt * AU[i];
  cur = y0;
  for (int j = 1; j <= k; ++j) {
    A.apply_block(j, U, tmp.data());
    for (long i = 0; i < n; ++i) rhs[i] = cur[i] - c * tmp[i];
    B.solve_block(j, c, rhs.data(), cur.data());
  }
  yk = cur;
  B.apply(yk.data(), byk.data());
  for (long i = 0; i < n; ++i) cur[i] = y0[i] + 0.5 * dt * (byk[i] - AU[i]);
  for (int j = 1; j <= k; ++j) {
    B.apply_block(j, yk.data(), tmp.data());
    for (long i = 0; i < n; ++i) rhs[i] = cur[i] - c * tmp[i];
    B.solve_block(j, c, rhs.data(), cur.data());
  }
  std::copy(cur.begin(), cur.end(), out);
}

void adjoint_forward_step(const DiscreteOperator& A, const DiscreteOperator& B, double dt, double theta,
                          const double* P, double* out, StepWorkspace& ws) {
  const long n = A.size();
  const int k = A.dim();
  // buffers: z_1..z_k (Y' chain), yt_1..yt_k (Y~' chain), two temporaries
  ws.ensure(n, 2 * std::max(k, 1) + 3);
  auto z = [&](int j) -> std::vector<double>& { return ws.v[j - 1]; };
  auto yt = [&](int j) -> std::vector<double>& { return ws.v[std::max(k, 1) + j - 1]; };
  auto& tmp = ws.v[2 * std::max(k, 1)];
  auto& acc = ws.v[2 * std::max(k, 1) + 1];
  auto& z1buf = ws.v[2 * std::max(k, 1) + 2];
  const double c = theta * dt;

  // Y'_0 = M_k^T P, Y'_1 = M_{k-1}^T Y'_0, ...
  const double* z1;
  if (k == 0) {
    std::copy(P, P + n, z1buf.begin());
    z1 = z1buf.data();
  } else {
    B.solve_block_transpose(k, c, P, z(k).data());
    for (int j = k - 1; j >= 1; --j) B.solve_block_transpose(j, c, z(j + 1).data(), z(j).data());
    z1 = z(1).data();
  }

  // Y~'_0 = P + dt (1/2 B^T z_1 - theta sum_j B_j^T z_j)
  B.apply_transpose(z1, acc.data());
  for (long i = 0; i < n; ++i) acc[i] *= 0.5;
  for (int j = 1; j <= k; ++j) {
    B.apply_block_transpose(j, z(j).data(), tmp.data());
    for (long i = 0; i < n; ++i) acc[i] -= theta * tmp[i];
  }
  for (long i = 0; i < n; ++i) acc[i] = P[i] + dt * acc[i];

  const double* yfin;
  if (k == 0) {
    yfin = acc.data();
  } else {
    B.solve_block_transpose(k, c, acc.data(), yt(k).data());
    for (int j = k - 1; j >= 1; --j) B.solve_block_transpose(j, c, yt(j + 1).data(), yt(j).data());
    yfin = yt(1).data();
  }

  // P_n = Y~'_k + dt (A^T (Y~'_k - z_1) + 1/2 A^T z_1 - theta sum_j A_j^T (yt_j - z_j))
  for (long i = 0; i < n; ++i) tmp[i] = yfin[i] - 0.5 * z1[i];
  A.apply_transpose(tmp.data(), out);
  for (int j = 1; j <= k; ++j) {
    for (long i = 0; i < n; ++i) tmp[i] = yt(j)[i] - z(j)[i];
    A.apply_block_transpose(j, tmp.data(), acc.data());
    for (long i = 0; i < n; ++i) out[i] -= theta * acc[i];
  }
  for (long i = 0; i < n; ++i) out[i] = yfin[i] + dt * out[i];
}

DensitySurface dirac_initial(const MeshND& mesh) {
  DensitySurface P;
  P.mesh = &mesh;
  P.t = 0.0;
  P.values.assign(mesh.total(), 0.0);
  const long a = mesh.anchor_flat();
  P.values[a] = 1.0 / mesh.weights()[a];
  return P;
}

std::vector<double> uniform_time_grid(double T, int N) {
  if (N < 1 || !(T > 0.0)) throw InvalidArgument("time grid needs T > 0 and N >= 1");
  std::vector<double> g(N + 1);
  for (int k = 0; k <= N; ++k) g[k] = T * k / N;
  return g;
}

int grid_index(const std::vector<double>& grid, double t) {
  const double T = grid.back();
  const double h = T / (grid.size() - 1);
  int k = static_cast<int>(std::lround(t / h));
  if (k < 0 || k >= static_cast<int>(grid.size()) || std::abs(grid[k] - t) > 1e-9 * std::max(1.0, T)) {
    std::ostringstream os;
    os << "time " << t << " is not on the solver time grid (step " << h << ")";
    throw InvalidArgument(os.str());
  }
  return k;
}

std::vector<ValueSurface> solve_backward(const Dynamics& dyn, const MeshND& mesh, const std::vector<double>& payoff,
                                         double T, const std::vector<double>& snapshot_times,
                                         const SolverConfig& cfg, bool discount, OperatorKind kind) {
  cfg.validate();
  if (static_cast<long>(payoff.size()) != mesh.total()) throw InvalidArgument("payoff size does not match mesh");
  const auto grid = uniform_time_grid(T, cfg.steps);
  const double dt = T / cfg.steps;
  std::vector<int> want;
  for (double t : snapshot_times) want.push_back(grid_index(grid, t));
  std::vector<ValueSurface> out(want.size());
  auto capture = [&](int k, const std::vector<double>& U) {
    for (size_t i = 0; i < want.size(); ++i)
      if (want[i] == k) out[i] = ValueSurface{&mesh, grid[k], U};
  };

  std::vector<double> U = payoff, next(mesh.total());
  capture(cfg.steps, U);
  StepWorkspace ws;
  DiscreteOperator opA = assemble(dyn, mesh, grid[cfg.steps], discount, kind);
  for (int k = cfg.steps; k >= 1; --k) {
    DiscreteOperator opB = assemble(dyn, mesh, grid[k - 1], discount, kind);
    hv_backward_step(opA, opB, dt, cfg.theta, U.data(), next.data(), ws);
    U.swap(next);
    capture(k - 1, U);
    opA = std::move(opB);
  }
  return out;
}

void solve_forward(const Dynamics& dyn, const MeshND& mesh, std::vector<double> mass, double T, const SolverConfig& cfg,
                   const MassObserver& observer, OperatorKind kind) {
  cfg.validate();
  if (static_cast<long>(mass.size()) != mesh.total()) throw InvalidArgument("initial mass size does not match mesh");
  const auto grid = uniform_time_grid(T, cfg.steps);
  const double dt = T / cfg.steps;
  std::vector<double> next(mesh.total());
  StepWorkspace ws;
  if (observer) observer(0, 0.0, mass);
  DiscreteOperator opB = assemble(dyn, mesh, grid[0], false, kind);
  for (int k = 1; k <= cfg.steps; ++k) {
    DiscreteOperator opA = assemble(dyn, mesh, grid[k], false, kind);
    adjoint_forward_step(opA, opB, dt, cfg.theta, mass.data(), next.data(), ws);
    mass.swap(next);
    if (observer) observer(k, grid[k], mass);
    opB = std::move(opA);
  }
}

DensitySurface density_from_mass(const MeshND& mesh, const std::vector<double>& mass, double t) {
  DensitySurface P;
  P.mesh = &mesh;
  P.t = t;
  P.values.resize(mass.size());
  const auto& w = mesh.weights();
  for (size_t i = 0; i < mass.size(); ++i) P.values[i] = mass[i] / w[i];
  return P;
}

double quadrature(const DensitySurface& P, const std::vector<double>& values, const std::function<double(double)>& psi) {
  if (values.size() != P.values.size()) throw InvalidArgument("quadrature: mesh mismatch");
  const auto& w = P.mesh->weights();
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i)
    if (P.values[i] != 0.0) s += w[i] * P.values[i] * psi(values[i]);
  return s;
}

}  // namespace ccx
