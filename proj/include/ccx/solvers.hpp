#pragma once

#include <functional>
#include <vector>

#include "ccx/operators.hpp"

namespace ccx {

struct SolverConfig {
  double theta = 0.8;
  int steps = 500;

  void validate() const;
};

// Multilinear interpolation of nodal values on a tensor mesh, clamped to the mesh box.
double interpolate_nodal(const MeshND& mesh, const double* values, const double* x);

struct ValueSurface {
  const MeshND* mesh = nullptr;
  double t = 0.0;
  std::vector<double> values;

  double at_anchor() const { return values[mesh->anchor_flat()]; }
  // Multilinear interpolation, clamped to the mesh box.
  double interpolate(const double* x) const;
};

struct DensitySurface {
  const MeshND* mesh = nullptr;
  double t = 0.0;
  std::vector<double> values;  // density, i.e. probability mass divided by the quadrature weight

  double mass() const;
  double min_value() const;
};

// Scratch space for the ADI steps; reused across steps to avoid reallocation.
struct StepWorkspace {
  std::vector<std::vector<double>> v;
  void ensure(long n, int count);
};

// Backward step in tau: A = operator at the explicit (later calendar) time, B at the implicit time.
void hv_backward_step(const DiscreteOperator& A, const DiscreteOperator& B, double dt, double theta, const double* U,
                      double* out, StepWorkspace& ws);
// Exact transpose of hv_backward_step with the same operators.
void adjoint_forward_step(const DiscreteOperator& A, const DiscreteOperator& B, double dt, double theta,
                          const double* P, double* out, StepWorkspace& ws);

DensitySurface dirac_initial(const MeshND& mesh);

// Uniform time grid on [0, T] with N steps; snapshot times are matched to grid points.
std::vector<double> uniform_time_grid(double T, int N);
int grid_index(const std::vector<double>& grid, double t);

// Solves backward from payoff at T; returns surfaces at the requested times (ascending order of request).
std::vector<ValueSurface> solve_backward(const Dynamics& dyn, const MeshND& mesh, const std::vector<double>& payoff,
                                         double T, const std::vector<double>& snapshot_times,
                                         const SolverConfig& cfg, bool discount,
                                         OperatorKind kind = OperatorKind::Backward);

// Steps a probability-mass vector (density times weights) forward from 0 to T on the grid of N steps;
// observer(k, t_k, mass) is called at every grid time including t=0.
using MassObserver = std::function<void(int, double, const std::vector<double>&)>;
void solve_forward(const Dynamics& dyn, const MeshND& mesh, std::vector<double> mass, double T, const SolverConfig& cfg,
                   const MassObserver& observer, OperatorKind kind = OperatorKind::Forward);

DensitySurface density_from_mass(const MeshND& mesh, const std::vector<double>& mass, double t);

// Trapezoid quadrature of density times psi(values).
double quadrature(const DensitySurface& P, const std::vector<double>& values, const std::function<double(double)>& psi);

}  // namespace ccx
