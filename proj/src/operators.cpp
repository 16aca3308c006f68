#include "ccx/operators.hpp"

#include <cmath>
#include <sstream>

#include "ccx/error.hpp"

namespace ccx {

ProjectedDynamics::ProjectedDynamics(const FactorSystem& sys, IndexList u, double cell)
    : sys_(&sys), u_(std::move(u)), cell_(cell) {
  if (u_.size() > 3) throw InvalidArgument("sub-model dimension > 3");
  for (int f : u_)
    if (f < 0 || f >= sys.dimension()) throw InvalidArgument("sub-model factor out of range");
}

double ProjectedDynamics::correlation(int p, int q) const { return sys_->correlation()(u_[p], u_[q]); }

void ProjectedDynamics::evaluate(double t, const MeshND& mesh, bool discount, Coefficients& out) const {
  const int k = dim();
  const long n = mesh.total();
  const TimeSlice s = cell_ > 0.0 ? sys_->slice_average(t, cell_) : sys_->slice(t);
  std::vector<double> x = s.anchor;
  std::vector<double> coord(3);
  for (int p = 0; p < k; ++p) {
    out.drift[p].resize(n);
    out.vol[p].resize(n);
  }
  if (discount) out.rate.resize(n);
  else out.rate.clear();
  const int dom = sys_->domestic_index();
  for (long i = 0; i < n; ++i) {
    mesh.coordinates(i, coord.data());
    for (int p = 0; p < k; ++p) x[u_[p]] = coord[p];
    for (int p = 0; p < k; ++p) {
      out.drift[p][i] = sys_->drift(u_[p], x.data(), s);
      out.vol[p][i] = sys_->vol(u_[p], x.data(), s);
    }
    if (discount) out.rate[i] = x[dom];
  }
}

FunctionDynamics::FunctionDynamics(int dim, std::vector<double> correlation, Fn f)
    : dim_(dim), rho_(std::move(correlation)), f_(std::move(f)) {
  if (static_cast<int>(rho_.size()) != dim * dim) throw InvalidArgument("correlation size mismatch");
}

void FunctionDynamics::evaluate(double t, const MeshND& mesh, bool discount, Coefficients& out) const {
  const long n = mesh.total();
  for (int p = 0; p < dim_; ++p) {
    out.drift[p].resize(n);
    out.vol[p].resize(n);
  }
  if (discount) out.rate.resize(n);
  else out.rate.clear();
  double x[3], mu[3], sig[3];
  for (long i = 0; i < n; ++i) {
    mesh.coordinates(i, x);
    double r = f_(t, x, mu, sig);
    for (int p = 0; p < dim_; ++p) {
      out.drift[p][i] = mu[p];
      out.vol[p][i] = sig[p];
    }
    if (discount) out.rate[i] = r;
  }
}

DiscreteOperator assemble(const Dynamics& model, const MeshND& mesh, double t, bool discount, OperatorKind kind) {
  const int d = mesh.dim();
  if (d > 3) throw InvalidArgument("operator dimension > 3");
  if (model.dim() != d) throw InvalidArgument("dynamics and mesh dimensions differ");
  DiscreteOperator op;
  op.mesh_ = &mesh;
  op.time_ = t;
  op.kind_ = kind;
  op.dim_ = d;
  op.n_ = mesh.total();
  const long n = op.n_;

  Coefficients c;
  model.evaluate(t, mesh, discount, c);
  if (d == 0) {
    op.scalar_rate_ = discount ? c.rate[0] : 0.0;
    return op;
  }

  for (int p = 0; p < d; ++p) {
    const auto& x = mesh.axis(p).nodes;
    const int m = mesh.size(p);
    op.beta_[p].assign(m, {0.0, 0.0, 0.0});
    for (int j = 1; j + 1 < m; ++j) {
      double hm = x[j] - x[j - 1], hp = x[j + 1] - x[j];
      op.beta_[p][j] = {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
    }
  }

  const bool fwd = kind == OperatorKind::Forward;
  std::vector<char> boundary;
  if (fwd) {
    boundary.resize(n);
    for (long i = 0; i < n; ++i) boundary[i] = mesh.on_boundary(i);
  }

  for (int p = 0; p < d; ++p) {
    auto& b = op.band_[p];
    b.lo.assign(n, 0.0);
    b.di.assign(n, 0.0);
    b.up.assign(n, 0.0);
    const Mesh1D& ax = mesh.axis(p);
    const auto& x = ax.nodes;
    const int m = ax.size();
    const long s = mesh.stride(p);
    std::vector<char> upwind(m);
    for (int j = 0; j < m; ++j) upwind[j] = ax.upwind_at(j);
    for (long i = 0; i < n; ++i) {
      const int j = static_cast<int>((i / s) % m);
      const double mu = c.drift[p][i];
      const double half_var = 0.5 * c.vol[p][i] * c.vol[p][i];
      double lo = 0.0, di = 0.0, up = 0.0;
      if (j == 0) {
        double h = x[1] - x[0];
        di = -mu / h;
        up = mu / h;
      } else if (j == m - 1) {
        double h = x[j] - x[j - 1];
        lo = -mu / h;
        di = mu / h;
      } else {
        double hm = x[j] - x[j - 1], hp = x[j + 1] - x[j];
        if (upwind[j]) {
          if (mu > 0) {
            di -= mu / hp;
            up += mu / hp;
          } else {
            lo -= mu / hm;
            di += mu / hm;
          }
        } else {
          const auto& be = op.beta_[p][j];
          lo += mu * be[0];
          di += mu * be[1];
          up += mu * be[2];
        }
        lo += half_var * 2 / (hm * (hm + hp));
        di -= half_var * 2 / (hm * hp);
        up += half_var * 2 / (hp * (hm + hp));
      }
      if (discount) di -= c.rate[i] / d;
      if (fwd) {
        if (boundary[i]) {
          lo = di = up = 0.0;
        } else {
          if (boundary[i - s]) lo = 0.0;
          if (boundary[i + s]) up = 0.0;
        }
      }
      b.lo[i] = lo;
      b.di[i] = di;
      b.up[i] = up;
    }
  }

  for (int p = 0; p < d; ++p) {
    for (int q = p + 1; q < d; ++q) {
      const double rho = model.correlation(p, q);
      DiscreteOperator::Mixed mx{p, q, std::vector<double>(n, 0.0)};
      if (rho != 0.0) {
        const int mp = mesh.size(p), mq = mesh.size(q);
        const long sp = mesh.stride(p), sq = mesh.stride(q);
        for (long i = 0; i < n; ++i) {
          int jp = static_cast<int>((i / sp) % mp), jq = static_cast<int>((i / sq) % mq);
          if (jp == 0 || jp == mp - 1 || jq == 0 || jq == mq - 1) continue;
          if (fwd && boundary[i]) continue;
          mx.coef[i] = rho * c.vol[p][i] * c.vol[q][i];
        }
      }
      op.mixed_.push_back(std::move(mx));
    }
  }
  op.boundary_ = std::move(boundary);
  return op;
}

template <class F>
void DiscreteOperator::for_each_line(int p, F&& f) const {
  const long s = mesh_->stride(p);
  const int m = mesh_->size(p);
  const long outer = n_ / (s * m);
  for (long o = 0; o < outer; ++o)
    for (long in = 0; in < s; ++in) f(o * s * m + in, s, m);
}

void DiscreteOperator::apply_block(int blk, const double* u, double* out, bool acc) const {
  if (!acc) std::fill(out, out + n_, 0.0);
  if (dim_ == 0) {
    if (blk == 0) out[0] += -scalar_rate_ * u[0];
    return;
  }
  if (blk == 0) {
    const bool fwd = kind_ == OperatorKind::Forward;
    for (const auto& mx : mixed_) {
      const long sp = mesh_->stride(mx.p), sq = mesh_->stride(mx.q);
      const int mp = mesh_->size(mx.p), mq = mesh_->size(mx.q);
      for (long i = 0; i < n_; ++i) {
        const double cf = mx.coef[i];
        if (cf == 0.0) continue;
        const auto& bp = beta_[mx.p][(i / sp) % mp];
        const auto& bq = beta_[mx.q][(i / sq) % mq];
        double acc_v = 0.0;
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b) {
            long nb = i + a * sp + b * sq;
            if (fwd && boundary_[nb]) continue;
            acc_v += bp[a + 1] * bq[b + 1] * u[nb];
          }
        out[i] += cf * acc_v;
      }
    }
    return;
  }
  const int p = blk - 1;
  const auto& b = band_[p];
  for_each_line(p, [&](long n0, long s, int m) {
    for (int j = 0; j < m; ++j) {
      long i = n0 + j * s;
      double v = b.di[i] * u[i];
      if (j > 0) v += b.lo[i] * u[i - s];
      if (j + 1 < m) v += b.up[i] * u[i + s];
      out[i] += v;
    }
  });
}

void DiscreteOperator::apply_block_transpose(int blk, const double* u, double* out, bool acc) const {
  if (!acc) std::fill(out, out + n_, 0.0);
  if (dim_ == 0) {
    if (blk == 0) out[0] += -scalar_rate_ * u[0];
    return;
  }
  if (blk == 0) {
    const bool fwd = kind_ == OperatorKind::Forward;
    for (const auto& mx : mixed_) {
      const long sp = mesh_->stride(mx.p), sq = mesh_->stride(mx.q);
      const int mp = mesh_->size(mx.p), mq = mesh_->size(mx.q);
      for (long i = 0; i < n_; ++i) {
        const double cf = mx.coef[i];
        if (cf == 0.0) continue;
        const auto& bp = beta_[mx.p][(i / sp) % mp];
        const auto& bq = beta_[mx.q][(i / sq) % mq];
        const double w = cf * u[i];
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b) {
            long nb = i + a * sp + b * sq;
            if (fwd && boundary_[nb]) continue;
            out[nb] += bp[a + 1] * bq[b + 1] * w;
          }
      }
    }
    return;
  }
  const int p = blk - 1;
  const auto& b = band_[p];
  for_each_line(p, [&](long n0, long s, int m) {
    for (int j = 0; j < m; ++j) {
      long i = n0 + j * s;
      double v = b.di[i] * u[i];
      if (j > 0) v += b.up[i - s] * u[i - s];
      if (j + 1 < m) v += b.lo[i + s] * u[i + s];
      out[i] += v;
    }
  });
}

void DiscreteOperator::apply(const double* u, double* out) const {
  apply_block(0, u, out, false);
  for (int p = 1; p <= dim_; ++p) apply_block(p, u, out, true);
}

void DiscreteOperator::apply_transpose(const double* u, double* out) const {
  apply_block_transpose(0, u, out, false);
  for (int p = 1; p <= dim_; ++p) apply_block_transpose(p, u, out, true);
}

namespace {

// Thomas algorithm on a strided line; a: sub, b: diag, c: super (a[0], c[m-1] unused).
void thomas(int m, const double* a, const double* b, const double* c, const double* rhs, double* x, double* work) {
  double piv = b[0];
  if (piv == 0.0) throw NumericalError("tridiagonal solve: zero pivot at row 0");
  x[0] = rhs[0] / piv;
  for (int j = 1; j < m; ++j) {
    work[j] = c[j - 1] / piv;
    piv = b[j] - a[j] * work[j];
    if (piv == 0.0 || !std::isfinite(piv)) {
      std::ostringstream os;
      os << "tridiagonal solve: singular implicit matrix at row " << j;
      throw NumericalError(os.str());
    }
    x[j] = (rhs[j] - a[j] * x[j - 1]) / piv;
  }
  for (int j = m - 2; j >= 0; --j) x[j] -= work[j + 1] * x[j + 1];
}

}  // namespace

void DiscreteOperator::solve_block(int blk, double c, const double* rhs, double* x) const {
  if (blk < 1 || blk > dim_) throw InvalidArgument("solve_block: block index out of range");
  const int p = blk - 1;
  const auto& bd = band_[p];
  const int m = mesh_->size(p);
  std::vector<double> a(m), b(m), cc(m), r(m), y(m), w(m);
  for_each_line(p, [&](long n0, long s, int) {
    for (int j = 0; j < m; ++j) {
      long i = n0 + j * s;
      a[j] = -c * bd.lo[i];
      b[j] = 1.0 - c * bd.di[i];
      cc[j] = -c * bd.up[i];
      r[j] = rhs[i];
    }
    thomas(m, a.data(), b.data(), cc.data(), r.data(), y.data(), w.data());
    for (int j = 0; j < m; ++j) x[n0 + j * s] = y[j];
  });
}

void DiscreteOperator::solve_block_transpose(int blk, double c, const double* rhs, double* x) const {
  if (blk < 1 || blk > dim_) throw InvalidArgument("solve_block_transpose: block index out of range");
  const int p = blk - 1;
  const auto& bd = band_[p];
  const int m = mesh_->size(p);
  std::vector<double> a(m), b(m), cc(m), r(m), y(m), w(m);
  for_each_line(p, [&](long n0, long s, int) {
    for (int j = 0; j < m; ++j) {
      long i = n0 + j * s;
      a[j] = j > 0 ? -c * bd.up[i - s] : 0.0;
      b[j] = 1.0 - c * bd.di[i];
      cc[j] = j + 1 < m ? -c * bd.lo[i + s] : 0.0;
      r[j] = rhs[i];
    }
    thomas(m, a.data(), b.data(), cc.data(), r.data(), y.data(), w.data());
    for (int j = 0; j < m; ++j) x[n0 + j * s] = y[j];
  });
}

double DiscreteOperator::entry(int blk, long row, long col) const {
  std::vector<double> e(n_, 0.0), out(n_);
  e[col] = 1.0;
  apply_block(blk, e.data(), out.data());
  return out[row];
}

}  // namespace ccx
