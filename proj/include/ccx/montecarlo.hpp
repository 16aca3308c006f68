#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccx/anova.hpp"
#include "ccx/instruments.hpp"
#include "ccx/model.hpp"
#include "ccx/profile.hpp"

namespace ccx {

// Symmetric square root of a correlation matrix (eigen decomposition, negative eigenvalues rejected).
Eigen::MatrixXd correlation_sqrt(const CorrelationMatrix& rho);

// Correlated standard normals for one path of one noise stream. The generator depends only on
// (seed, path, stream), so a path is identical whatever the batching or thread count.
class NoiseStream {
 public:
  NoiseStream(const Eigen::MatrixXd& sqrt_rho, std::uint64_t seed, long path, std::uint64_t stream = 0);
  // Fills z with d correlated standard normals.
  void next(double* z);

 private:
  const Eigen::MatrixXd* s_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  Eigen::VectorXd eps_;
};

// Paths observed at selected times of a uniform Euler grid. Coordinates outside `factors` follow the anchor.
struct PathSet {
  const FactorSystem* system = nullptr;
  std::uint64_t seed = 0, stream = 0;
  long paths = 0;
  int steps = 0;        // Euler steps over [0, horizon]
  double horizon = 0.0;
  IndexList factors;    // stochastic coordinates (all factors for full paths)
  IndexList stored;     // stored coordinates (system indices)
  std::vector<double> times;     // observation times, on the step grid
  std::vector<double> states;    // [path][time][stored]
  std::vector<double> discount;  // [path][time]: exp(-int_0^t R^d ds), trapezoid rule on the steps

  double dt() const { return horizon / steps; }
  int time_count() const { return static_cast<int>(times.size()); }
  double state(long path, int time, int factor) const;
  double discount_factor(long path, int time) const { return discount[path * times.size() + time]; }
};

struct SimulationConfig {
  long paths = 10000;
  int steps = 1000;
  double horizon = 5.0;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::vector<double> times;  // observation times; empty = every step
  IndexList store;            // stored factors; empty = all
  int threads = 0;
};

// Euler-Maruyama for the full system with correlated increments from the symmetric square root of rho.
PathSet simulate_paths(const FactorSystem& sys, const SimulationConfig& cfg);
// Sub-process X^u on the same increments as `full`: coordinates in u use coefficients at the state with the
// complement on the anchor path; the complement is the anchor path.
PathSet subprocess_paths(const PathSet& full, const IndexList& u, int threads = 0);

// Option value for instrument k at exposure date index `date` and full state x, in the model whose stochastic
// factors are u (all factors for full paths).
using OptionPricer = std::function<double(int k, int date, const double* x, const IndexList& u)>;

// Exposure estimate from stored paths, one date per path-set time; options through `options`.
ExposureProfile plain_exposure(const PathSet& paths, const Portfolio& portfolio, const OptionPricer& options = {});

// Least-squares regression of discounted option values on {1, F, Rd, Rf, F Rd, F Rf, Rd Rf} per time.
struct RegressionFit {
  int instrument = -1;
  FxOptionContract option;
  int fx = 0, rd = 1, rf = 2;               // system indices of the pair's factors
  std::vector<double> times;                // fit times (path-set times up to maturity)
  std::vector<std::array<double, 7>> beta;  // per time
  std::vector<char> ridge;                  // per time: rank-deficient design, ridge fallback used

  double price = 0.0;                       // value at t = 0

  // Fitted value at fit time index i for the full state x (the payoff at maturity).
  double value(int i, const double* x) const;
  int index_of(double t) const;  // -1 if t is not a fit time
};

struct RegressionResult {
  RegressionFit fit;
  std::vector<double> values;  // [path][time] over the fit times; payoff at maturity
  int ridge_count = 0;
};

// Backward induction along stored paths: discount by the path's domestic rate between consecutive times, regress
// on the state at the earlier time, replace by fitted values. The option maturity must be a path-set time.
RegressionResult regression_value(const PathSet& paths, const Portfolio& portfolio, int instrument);

// Terms of Phi_{r,s}: factors, signed coefficient, and the noise stream they are simulated on (0 = full paths).
struct SampledTerm {
  IndexList factors;
  double coefficient = 0.0;
  std::uint64_t stream = 0;
};

enum class SharedPaths { Global, PerTerm };

// Global: every term of the plan on the full-path noise, with its multiplicity. PerTerm: every kept surplus w
// gets its own noise stream shared by the terms of its expansion.
std::vector<SampledTerm> sampled_terms(const DecompositionPlan& plan, SharedPaths mode);

struct ExposureMcConfig {
  long paths = 10000;
  int steps = 1000;  // Euler steps over the last exposure date
  std::uint64_t seed = 1;
  int threads = 0;
  long batch = 1000;
};

struct CvEstimate {
  std::vector<double> times;
  std::vector<double> ee, epe, se_ee, se_epe;     // control-variate estimates
  std::vector<double> alpha_ee, alpha_epe;        // alpha-hat per date
  std::vector<double> var_plain_ee, var_plain_epe, var_cv_ee, var_cv_epe;  // per-path sample variances
  std::vector<double> ratio_ee, ratio_epe;        // var_cv / var_plain (nan where var_plain = 0)
  std::vector<double> approx_ratio_ee, approx_ratio_epe;  // 1 - corr(Phi, Phi_rs)
  std::vector<double> sampled_ee, sampled_epe;    // mean of Phi_rs (sampled decomposition)
  int degenerate = 0;                             // dates where alpha fell back to 1
  std::vector<std::string> warnings;

  ExposureProfile profile() const;
  // Variance-reduction factor over dates with var_plain > 0: sum var_plain / sum var_cv.
  double reduction_factor_ee() const;
  double reduction_factor_epe() const;
};

struct ExposureMcResult {
  ExposureProfile plain;
  CvEstimate cv;  // empty unless control variates were requested
  double seconds = 0.0;
};

// Streams paths in batches (nothing is stored) and returns the plain estimator.
ExposureMcResult plain_exposure(const Portfolio& portfolio, const std::vector<double>& dates,
                                const ExposureMcConfig& cfg, const OptionPricer& options = {});

// Plain and control-variate estimators on the same paths. reference holds V_{r,s} (EE and EPE) on `dates`.
ExposureMcResult control_variate_exposure(const Portfolio& portfolio, const std::vector<double>& dates,
                                          const ExposureMcConfig& cfg, const std::vector<SampledTerm>& terms,
                                          const ExposureProfile& reference, const OptionPricer& options = {});

// Cumulative default probability, piecewise linear in t and flat outside the table.
class DefaultCurve {
 public:
  DefaultCurve(std::vector<double> times, std::vector<double> cumulative);
  static DefaultCurve from_hazard(double hazard, double horizon, int points = 200);
  double operator()(double t) const;

 private:
  std::vector<double> t_, pd_;
};

// (1 - R) sum_i D(t_i) EPE(t_i) (PD(t_i) - PD(t_{i-1})).
double cva(const ExposureProfile& profile, const DefaultCurve& pd, double recovery,
           const std::function<double(double)>& discount);

}  // namespace ccx
