#include "ccx/curves.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccx/csv.hpp"
#include "ccx/error.hpp"

namespace ccx {

namespace {

double sign(double x) { return (x > 0) - (x < 0); }

std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& v) {
  const size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  std::vector<double> h(n - 1), del(n - 1);
  for (size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    del[k] = (v[k + 1] - v[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = del[0];
    return d;
  }
  for (size_t k = 1; k + 1 < n; ++k) {
    if (del[k - 1] * del[k] <= 0.0) continue;
    double w1 = 2 * h[k] + h[k - 1];
    double w2 = h[k] + 2 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sign(s) != sign(d0)) return 0.0;
    if (sign(d0) != sign(d1) && std::abs(s) > 3 * std::abs(d0)) return 3 * d0;
    return s;
  };
  d[0] = end_slope(h[0], h[1], del[0], del[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  return d;
}

}  // namespace

YieldCurve build_yield_curve(const std::vector<std::pair<double, double>>& tenor_points) {
  if (tenor_points.empty()) throw InvalidArgument("yield curve: no tenor points");
  YieldCurve c;
  double prev = 0.0;
  for (const auto& [t, df] : tenor_points) {
    if (!(t > prev)) {
      std::ostringstream os;
      os << "yield curve: tenors must be positive and strictly increasing (got " << t << " after " << prev << ")";
      throw InvalidArgument(os.str());
    }
    if (!(df > 0.0)) {
      std::ostringstream os;
      os << "yield curve: non-positive discount factor " << df << " at tenor " << t;
      throw InvalidArgument(os.str());
    }
    prev = t;
    c.tenors_.push_back(t);
    c.dfs_.push_back(df);
  }
  c.knots_.push_back(0.0);
  c.values_.push_back(-std::log(c.dfs_[0]) / c.tenors_[0]);
  for (size_t i = 0; i < c.tenors_.size(); ++i) {
    c.knots_.push_back(c.tenors_[i]);
    c.values_.push_back(-std::log(c.dfs_[i]) / c.tenors_[i]);
  }
  c.slopes_ = pchip_slopes(c.knots_, c.values_);
  return c;
}

YieldCurve::Local YieldCurve::locate(double t) const {
  const double T = knots_.back();
  if (t < 0.0 || t > T * (1 + 1e-12)) {
    std::ostringstream os;
    os << "yield curve evaluated at t=" << t << " outside [0, " << T << "]";
    throw InvalidArgument(os.str());
  }
  t = std::min(t, T);
  size_t k = std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin();
  k = std::min(k == 0 ? 0 : k - 1, knots_.size() - 2);
  double h = knots_[k + 1] - knots_[k];
  return {h, (t - knots_[k]) / h, values_[k], slopes_[k], slopes_[k + 1], values_[k + 1]};
}

double YieldCurve::yield(double t) const {
  auto L = locate(t);
  double s = L.s, s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * L.y0 + (s3 - 2 * s2 + s) * L.h * L.d0 + (-2 * s3 + 3 * s2) * L.dy +
         (s3 - s2) * L.h * L.d1;
}

double YieldCurve::yield_derivative(double t) const {
  auto L = locate(t);
  double s = L.s, s2 = s * s;
  return ((6 * s2 - 6 * s) * L.y0 + (-6 * s2 + 6 * s) * L.dy) / L.h + (3 * s2 - 4 * s + 1) * L.d0 +
         (3 * s2 - 2 * s) * L.d1;
}

double YieldCurve::yield_second_derivative(double t) const {
  auto L = locate(t);
  double s = L.s;
  return ((12 * s - 6) * L.y0 + (-12 * s + 6) * L.dy) / (L.h * L.h) +
         ((6 * s - 4) * L.d0 + (6 * s - 2) * L.d1) / L.h;
}

double YieldCurve::discount(double t) const { return std::exp(-yield(t) * t); }

double YieldCurve::forward(double t) const { return yield(t) + t * yield_derivative(t); }

double YieldCurve::forward_derivative(double t) const {
  return 2 * yield_derivative(t) + t * yield_second_derivative(t);
}

YieldCurve load_yield_curve(const std::string& csv_path) {
  auto table = read_csv(csv_path);
  int ct = table.column("tenor_years"), cd = table.column("discount_factor");
  if (ct < 0 || cd < 0)
    throw ConfigError(csv_path + ": expected header tenor_years,discount_factor");
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : table.rows) pts.emplace_back(r[ct], r[cd]);
  try {
    return build_yield_curve(pts);
  } catch (const InvalidArgument& e) {
    throw ConfigError(csv_path + ": " + e.what());
  }
}

void HullWhiteParams::validate() const {
  if (!(lambda > 0.0)) throw InvalidArgument("Hull-White lambda must be positive");
  if (!(eta >= 0.0)) throw InvalidArgument("Hull-White eta must be nonnegative");
}

ThetaFunction::ThetaFunction(YieldCurve curve, HullWhiteParams hw) : curve_(std::move(curve)), hw_(hw) {
  hw_.validate();
}

double ThetaFunction::operator()(double t) const {
  const double l = hw_.lambda, e = hw_.eta;
  return curve_.forward_derivative(t) / l + curve_.forward(t) +
         e * e / (2 * l * l) * (1 - std::exp(-2 * l * t));
}

ThetaFunction theta_from_curve(const YieldCurve& curve, const HullWhiteParams& hw) {
  return ThetaFunction(curve, hw);
}

PiecewiseVol::PiecewiseVol(std::vector<double> breakpoints, std::vector<double> levels)
    : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
  if (levels_.empty() || breakpoints_.size() != levels_.size() + 1 || breakpoints_[0] != 0.0)
    throw InvalidArgument("piecewise vol: need breakpoints 0=T0<...<TN and N levels");
  for (size_t i = 1; i < breakpoints_.size(); ++i)
    if (!(breakpoints_[i] > breakpoints_[i - 1]))
      throw InvalidArgument("piecewise vol: breakpoints must increase");
  for (double s : levels_)
    if (!(s > 0.0)) throw InvalidArgument("piecewise vol: levels must be positive");
}

PiecewiseVol PiecewiseVol::constant(double sigma) { return PiecewiseVol({0.0, 1.0}, {sigma}); }

double PiecewiseVol::operator()(double t) const {
  auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), t);
  if (it == breakpoints_.end()) return levels_.back();
  return levels_[it - breakpoints_.begin() - 1];
}

double PiecewiseVol::implied_vol(double T) const {
  if (!(T > 0.0)) throw InvalidArgument("implied vol needs T > 0");
  double var = 0.0, prev = 0.0;
  for (size_t i = 0; i < levels_.size() && prev < T; ++i) {
    double end = std::min(breakpoints_[i + 1], T);
    var += levels_[i] * levels_[i] * (end - prev);
    prev = end;
  }
  if (prev < T) var += levels_.back() * levels_.back() * (T - prev);
  return std::sqrt(var / T);
}

PiecewiseVol bootstrap_piecewise_vol(const std::vector<std::pair<double, double>>& quotes) {
  if (quotes.empty()) throw InvalidArgument("vol bootstrap: no quotes");
  std::vector<double> bps{0.0}, levels;
  double prev_T = 0.0, prev_var = 0.0;
  for (size_t i = 0; i < quotes.size(); ++i) {
    auto [T, vol] = quotes[i];
    if (!(T > prev_T)) throw InvalidArgument("vol bootstrap: maturities must increase");
    if (!(vol > 0.0)) throw InvalidArgument("vol bootstrap: quotes must be positive");
    double var = vol * vol * T;
    double inc = var - prev_var;
    if (!(inc > 0.0)) {
      std::ostringstream os;
      os << "vol bootstrap: cumulative variance decreases at knot " << i + 1 << " (T=" << T
         << ", quote " << vol << "); interval level would be imaginary";
      throw InvalidArgument(os.str());
    }
    levels.push_back(std::sqrt(inc / (T - prev_T)));
    bps.push_back(T);
    prev_T = T;
    prev_var = var;
  }
  return PiecewiseVol(std::move(bps), std::move(levels));
}

PiecewiseVol load_vol_quotes(const std::string& csv_path) {
  auto table = read_csv(csv_path);
  int cm = table.column("maturity_years"), cv = table.column("atm_vol");
  if (cm < 0 || cv < 0) throw ConfigError(csv_path + ": expected header maturity_years,atm_vol");
  std::vector<std::pair<double, double>> q;
  for (const auto& r : table.rows) q.emplace_back(r[cm], r[cv]);
  try {
    return bootstrap_piecewise_vol(q);
  } catch (const InvalidArgument& e) {
    throw ConfigError(csv_path + ": " + e.what());
  }
}

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidArgument("correlation matrix must be square");
}

CorrelationMatrix CorrelationMatrix::identity(int d) {
  return CorrelationMatrix(Eigen::MatrixXd::Identity(d, d));
}

double CorrelationMatrix::min_eigenvalue() const {
  if (m_.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CorrelationMatrix CorrelationMatrix::submatrix(const std::vector<int>& idx) const {
  const int k = static_cast<int>(idx.size());
  Eigen::MatrixXd s(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) s(a, b) = m_(idx[a], idx[b]);
  return CorrelationMatrix(std::move(s));
}

CorrelationMatrix regularize_correlation(const Eigen::MatrixXd& raw) {
  if (raw.rows() != raw.cols()) throw InvalidArgument("correlation: matrix not square");
  const int d = static_cast<int>(raw.rows());
  for (int i = 0; i < d; ++i) {
    if (std::abs(raw(i, i) - 1.0) > 1e-12) throw InvalidArgument("correlation: diagonal entries must be 1");
    for (int j = 0; j < i; ++j)
      if (std::abs(raw(i, j) - raw(j, i)) > 1e-12) {
        std::ostringstream os;
        os << "correlation: matrix not symmetric at (" << i + 1 << "," << j + 1 << ")";
        throw InvalidArgument(os.str());
      }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(raw);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  Eigen::VectorXd s = m.diagonal().cwiseSqrt().cwiseInverse();
  m = s.asDiagonal() * m * s.asDiagonal();
  m = 0.5 * (m + m.transpose());
  m.diagonal().setOnes();
  return CorrelationMatrix(std::move(m));
}

Eigen::MatrixXd load_correlation(const std::string& csv_path) {
  auto rows = read_numeric_matrix(csv_path);
  const int d = static_cast<int>(rows.size());
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(rows[i].size()) != d)
      throw ConfigError(csv_path + ": row " + std::to_string(i + 1) + " does not have " + std::to_string(d) + " entries");
    for (int j = 0; j < d; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace ccx
