#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ccx/curves.hpp"

namespace ccx {

enum class FactorRole { Fx, DomesticRate, ForeignRate };

struct Factor {
  FactorRole role;
  std::string name;  // EURUSD, EUR, USD, ...
  std::string code;  // EU, RE, RU, ...
  int pair = -1;     // owning currency pair for FX and foreign-rate factors
};

struct RateMarket {
  std::string currency;
  HullWhiteParams hw;
  YieldCurve curve;
};

struct PairMarket {
  std::string name;
  double spot = 1.0;
  PiecewiseVol vol;
  RateMarket foreign;
};

// Raw market description; correlation ordered (F1, Rd, Rf1, F2, Rf2, ...) over all pairs.
struct MarketData {
  RateMarket domestic;
  std::vector<PairMarket> pairs;
  Eigen::MatrixXd correlation;
};

class FactorSystem;

// Deterministic trajectory of conditional means with all other coordinates frozen at the anchor.
class AnchorPath {
 public:
  AnchorPath() = default;
  explicit AnchorPath(const FactorSystem& sys);

  double value(int i, double t) const;
  void state(double t, std::span<double> out) const;
  double horizon() const { return horizon_; }

 private:
  double step_ = 1.0 / 365.0;
  double horizon_ = 0.0;
  std::vector<double> fx_spot_, fx_rate_;    // per factor (FX only)
  // Per rate factor: nodes on a daily grid merged with the curve and vol knots, values, and
  // one-sided time derivatives so cubic Hermite interpolation stays smooth between kinks.
  struct Table {
    std::vector<double> t, m, d_right, d_left;
  };
  std::vector<Table> table_;
};

// Time-only quantities used by coefficient evaluation at a fixed t.
struct TimeSlice {
  double t = 0.0;
  std::vector<double> theta;   // rate factors
  std::vector<double> sigma;   // FX factors: sigma_i(t)
  std::vector<double> quanto;  // foreign rates: eta * rho * sigma
  std::vector<double> anchor;  // xi(t)
};

class FactorSystem {
 public:
  // Builds the system for the given subset of pairs (indices into market.pairs).
  FactorSystem(const MarketData& market, const std::vector<int>& pair_selection);

  int dimension() const { return static_cast<int>(factors_.size()); }
  const Factor& factor(int i) const;
  int domestic_index() const { return 1; }
  int pair_count() const { return static_cast<int>(pair_fx_.size()); }
  int fx_index(int pair) const { return pair_fx_.at(pair); }
  int foreign_rate_index(int pair) const { return pair_rf_.at(pair); }
  int find_factor(const std::string& name_or_code) const;

  const CorrelationMatrix& correlation() const { return corr_; }
  const std::vector<double>& initial_state() const { return a_; }
  const AnchorPath& anchor() const { return *anchor_; }
  const HullWhiteParams& hull_white(int rate_factor) const;
  const ThetaFunction& theta(int rate_factor) const;
  const YieldCurve& curve(int rate_factor) const { return theta(rate_factor).curve(); }
  const PiecewiseVol& fx_vol(int fx_factor) const;
  double horizon() const { return horizon_; }

  // Factors whose values enter the drift or volatility of factor i (including i).
  std::vector<int> drivers(int i) const;

  TimeSlice slice(double t) const;
  // Time-only coefficients averaged over the cell [t - h/2, t + h/2] (clipped to [0, horizon]); sigma is the
  // root mean square. Used by time steppers so that jumps of theta and sigma at knots are integrated exactly.
  TimeSlice slice_average(double t, double h) const;
  double drift(int i, const double* x, const TimeSlice& s) const;
  double vol(int i, const double* x, const TimeSlice& s) const;
  double drift(int i, std::span<const double> x, double t) const;
  double vol(int i, std::span<const double> x, double t) const;
  double quanto(int i, double t) const;

 private:
  void check_index(int i) const;

  std::vector<Factor> factors_;
  std::vector<int> pair_fx_, pair_rf_;
  std::vector<HullWhiteParams> hw_;      // per factor (rates)
  std::vector<ThetaFunction> theta_;     // per factor (rates)
  std::vector<PiecewiseVol> vol_;        // per factor (FX)
  std::vector<int> fx_of_rate_;          // foreign rate -> its FX factor
  CorrelationMatrix corr_;
  std::vector<double> a_;
  double horizon_ = 0.0;
  std::shared_ptr<const AnchorPath> anchor_;
};

using IndexList = std::vector<int>;

// Full state with coordinates in u taken from x_u and the rest from xi(t).
std::vector<double> project_state(const FactorSystem& sys, const IndexList& u, std::span<const double> x_u, double t);

}  // namespace ccx
