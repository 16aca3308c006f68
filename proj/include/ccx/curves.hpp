#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace ccx {

// Continuously compounded zero curve y(t) = -log P(0,t) / t, monotone cubic in t.
class YieldCurve {
 public:
  YieldCurve() = default;

  double horizon() const { return knots_.back(); }
  const std::vector<double>& tenors() const { return tenors_; }
  const std::vector<double>& discount_factors() const { return dfs_; }

  double yield(double t) const;
  double yield_derivative(double t) const;
  double yield_second_derivative(double t) const;
  double discount(double t) const;
  // Instantaneous forward f(0,t) = d/dt (t y(t)) and its time derivative.
  double forward(double t) const;
  double forward_derivative(double t) const;

 private:
  friend YieldCurve build_yield_curve(const std::vector<std::pair<double, double>>&);

  struct Local {
    double h, s, y0, d0, d1, dy;
  };
  Local locate(double t) const;

  std::vector<double> tenors_, dfs_;
  std::vector<double> knots_, values_, slopes_;
};

YieldCurve build_yield_curve(const std::vector<std::pair<double, double>>& tenor_points);
YieldCurve load_yield_curve(const std::string& csv_path);

struct HullWhiteParams {
  double lambda = 0.01;
  double eta = 0.0;
  double r0 = 0.0;

  void validate() const;
};

class ThetaFunction {
 public:
  ThetaFunction() = default;
  ThetaFunction(YieldCurve curve, HullWhiteParams hw);

  double operator()(double t) const;
  double horizon() const { return curve_.horizon(); }
  const YieldCurve& curve() const { return curve_; }
  const HullWhiteParams& params() const { return hw_; }

 private:
  YieldCurve curve_;
  HullWhiteParams hw_;
};

ThetaFunction theta_from_curve(const YieldCurve& curve, const HullWhiteParams& hw);

// Left-continuous step function: sigma_i on (T_{i-1}, T_i], flat beyond the last knot.
class PiecewiseVol {
 public:
  PiecewiseVol() = default;
  PiecewiseVol(std::vector<double> breakpoints, std::vector<double> levels);
  static PiecewiseVol constant(double sigma);

  double operator()(double t) const;
  double implied_vol(double T) const;
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& levels() const { return levels_; }

 private:
  std::vector<double> breakpoints_;  // T_0 = 0 < T_1 < ... < T_N
  std::vector<double> levels_;       // size N
};

PiecewiseVol bootstrap_piecewise_vol(const std::vector<std::pair<double, double>>& quotes);
PiecewiseVol load_vol_quotes(const std::string& csv_path);

class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  explicit CorrelationMatrix(Eigen::MatrixXd m);
  static CorrelationMatrix identity(int d);

  int size() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double min_eigenvalue() const;
  CorrelationMatrix submatrix(const std::vector<int>& idx) const;

 private:
  Eigen::MatrixXd m_;
};

CorrelationMatrix regularize_correlation(const Eigen::MatrixXd& raw);
Eigen::MatrixXd load_correlation(const std::string& csv_path);

}  // namespace ccx
