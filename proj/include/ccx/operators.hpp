#pragma once

#include <array>
#include <functional>
#include <vector>

#include "ccx/grid.hpp"
#include "ccx/model.hpp"

namespace ccx {

// Node-wise coefficients of L = sum mu_p d_p + 1/2 sum rho_pq s_p s_q d_pq - r on a mesh.
struct Coefficients {
  std::array<std::vector<double>, 3> drift, vol;
  std::vector<double> rate;  // discount rate; empty when not discounting
};

class Dynamics {
 public:
  virtual ~Dynamics() = default;
  virtual int dim() const = 0;
  virtual double correlation(int p, int q) const = 0;
  virtual void evaluate(double t, const MeshND& mesh, bool discount, Coefficients& out) const = 0;
};

// Sub-model X^u of a factor system: coordinates in u from the mesh, the rest frozen on the anchor path.
class ProjectedDynamics : public Dynamics {
 public:
  // cell > 0 averages the time-only coefficients over [t - cell/2, t + cell/2]; pass the time step.
  ProjectedDynamics(const FactorSystem& sys, IndexList u, double cell = 0.0);
  int dim() const override { return static_cast<int>(u_.size()); }
  double correlation(int p, int q) const override;
  void evaluate(double t, const MeshND& mesh, bool discount, Coefficients& out) const override;
  const IndexList& factors() const { return u_; }

 private:
  const FactorSystem* sys_;
  IndexList u_;
  double cell_ = 0.0;
};

// Coefficients from a pointwise callback; used for analytic test problems.
class FunctionDynamics : public Dynamics {
 public:
  // f(t, x, mu, sigma) fills drift and vol for all directions and returns the discount rate.
  using Fn = std::function<double(double, const double*, double*, double*)>;
  FunctionDynamics(int dim, std::vector<double> correlation, Fn f);
  int dim() const override { return dim_; }
  double correlation(int p, int q) const override { return rho_[p * dim_ + q]; }
  void evaluate(double t, const MeshND& mesh, bool discount, Coefficients& out) const override;

 private:
  int dim_;
  std::vector<double> rho_;
  Fn f_;
};

enum class OperatorKind { Backward, Forward };

// F = F0 + F1 + F2 + F3: tridiagonal directional blocks plus the mixed-derivative block F0.
class DiscreteOperator {
 public:
  DiscreteOperator() = default;

  const MeshND& mesh() const { return *mesh_; }
  double time() const { return time_; }
  OperatorKind kind() const { return kind_; }
  int dim() const { return dim_; }
  long size() const { return n_; }

  void apply(const double* u, double* out) const;
  void apply_transpose(const double* u, double* out) const;
  // out (+)= F_p u, p = 0 selects the mixed block, 1..dim the directional blocks.
  void apply_block(int p, const double* u, double* out, bool accumulate = false) const;
  void apply_block_transpose(int p, const double* u, double* out, bool accumulate = false) const;
  // Solves (I - c F_p) x = rhs (or its transpose) line by line, p in 1..dim.
  void solve_block(int p, double c, const double* rhs, double* x) const;
  void solve_block_transpose(int p, double c, const double* rhs, double* x) const;

  // Dense entry lookup for tests (slow).
  double entry(int block, long row, long col) const;
  double scalar_rate() const { return scalar_rate_; }

 private:
  friend DiscreteOperator assemble(const Dynamics&, const MeshND&, double, bool, OperatorKind);
  struct Band {
    std::vector<double> lo, di, up;
  };
  struct Mixed {
    int p, q;
    std::vector<double> coef;
  };
  template <class F>
  void for_each_line(int p, F&& f) const;

  const MeshND* mesh_ = nullptr;
  double time_ = 0.0;
  OperatorKind kind_ = OperatorKind::Backward;
  int dim_ = 0;
  long n_ = 1;
  std::array<Band, 3> band_;
  std::vector<Mixed> mixed_;
  std::array<std::vector<std::array<double, 3>>, 3> beta_;  // central first-derivative weights per axis
  double scalar_rate_ = 0.0;                               // dimension-0 problems: F = -r
  std::vector<char> boundary_;                             // forward kind only
};

DiscreteOperator assemble(const Dynamics& model, const MeshND& mesh, double t, bool discount,
                          OperatorKind kind = OperatorKind::Backward);

}  // namespace ccx
