#include "ccx/model.hpp"

#include <algorithm>
#include <cmath>

#include "ccx/error.hpp"

namespace ccx {

namespace {

std::string pair_code(const std::string& name) {
  if (name.size() >= 4) return std::string{name[0], name[3]};
  return name;
}

std::string rate_code(const std::string& ccy) { return "R" + ccy.substr(0, 1); }

}  // namespace

FactorSystem::FactorSystem(const MarketData& market, const std::vector<int>& pair_selection) {
  if (pair_selection.empty()) throw InvalidArgument("factor system needs at least one currency pair");
  const int full_d = 1 + 2 * static_cast<int>(market.pairs.size());
  if (market.correlation.rows() != full_d || market.correlation.cols() != full_d)
    throw ConfigError("correlation matrix must be " + std::to_string(full_d) + "x" + std::to_string(full_d));

  market.domestic.hw.validate();
  std::vector<int> corr_idx;
  auto add_rate = [&](FactorRole role, const RateMarket& rm, int pair) {
    factors_.push_back({role, rm.currency, rate_code(rm.currency), pair});
    hw_.push_back(rm.hw);
    theta_.push_back(theta_from_curve(rm.curve, rm.hw));
    vol_.emplace_back();
    a_.push_back(rm.hw.r0);
  };
  int p = 0;
  for (int sel : pair_selection) {
    if (sel < 0 || sel >= static_cast<int>(market.pairs.size()))
      throw InvalidArgument("pair selection out of range");
    const auto& pm = market.pairs[sel];
    if (!(pm.spot > 0.0)) throw ConfigError(pm.name + ": spot must be positive");
    pm.foreign.hw.validate();
    pair_fx_.push_back(static_cast<int>(factors_.size()));
    factors_.push_back({FactorRole::Fx, pm.name, pair_code(pm.name), p});
    hw_.emplace_back();
    theta_.emplace_back();
    vol_.push_back(pm.vol);
    a_.push_back(pm.spot);
    corr_idx.push_back(sel == 0 ? 0 : 1 + 2 * sel);
    if (p == 0) {
      add_rate(FactorRole::DomesticRate, market.domestic, -1);
      corr_idx.push_back(1);
    }
    pair_rf_.push_back(static_cast<int>(factors_.size()));
    add_rate(FactorRole::ForeignRate, pm.foreign, p);
    corr_idx.push_back(sel == 0 ? 2 : 2 + 2 * sel);
    ++p;
  }
  fx_of_rate_.assign(factors_.size(), -1);
  for (int q = 0; q < pair_count(); ++q) fx_of_rate_[pair_rf_[q]] = pair_fx_[q];

  corr_ = CorrelationMatrix(market.correlation).submatrix(corr_idx);
  horizon_ = 1e300;
  for (int i = 0; i < dimension(); ++i)
    if (factors_[i].role != FactorRole::Fx) horizon_ = std::min(horizon_, theta_[i].horizon());
  anchor_ = std::make_shared<AnchorPath>(*this);
}

void FactorSystem::check_index(int i) const {
  if (i < 0 || i >= dimension())
    throw InvalidArgument("factor index " + std::to_string(i) + " out of range");
}

const Factor& FactorSystem::factor(int i) const {
  check_index(i);
  return factors_[i];
}

int FactorSystem::find_factor(const std::string& key) const {
  for (int i = 0; i < dimension(); ++i)
    if (factors_[i].code == key) return i;
  for (int i = 0; i < dimension(); ++i)
    if (factors_[i].role == FactorRole::Fx && factors_[i].name == key) return i;
  for (int i = 0; i < dimension(); ++i)
    if (factors_[i].name == key) return i;
  return -1;
}

const HullWhiteParams& FactorSystem::hull_white(int i) const {
  check_index(i);
  if (factors_[i].role == FactorRole::Fx) throw InvalidArgument("factor is not a short rate");
  return hw_[i];
}

const ThetaFunction& FactorSystem::theta(int i) const {
  check_index(i);
  if (factors_[i].role == FactorRole::Fx) throw InvalidArgument("factor is not a short rate");
  return theta_[i];
}

const PiecewiseVol& FactorSystem::fx_vol(int i) const {
  check_index(i);
  if (factors_[i].role != FactorRole::Fx) throw InvalidArgument("factor is not an FX rate");
  return vol_[i];
}

std::vector<int> FactorSystem::drivers(int i) const {
  check_index(i);
  if (factors_[i].role == FactorRole::Fx) {
    std::vector<int> d{i, domestic_index(), pair_rf_[factors_[i].pair]};
    std::sort(d.begin(), d.end());
    return d;
  }
  return {i};
}

double FactorSystem::quanto(int i, double t) const {
  if (factors_[i].role != FactorRole::ForeignRate) return 0.0;
  int fx = fx_of_rate_[i];
  return hw_[i].eta * corr_(fx, i) * vol_[fx](t);
}

TimeSlice FactorSystem::slice(double t) const {
  if (t < 0.0) throw InvalidArgument("negative time");
  const int d = dimension();
  TimeSlice s;
  s.t = t;
  s.theta.assign(d, 0.0);
  s.sigma.assign(d, 0.0);
  s.quanto.assign(d, 0.0);
  s.anchor.assign(d, 0.0);
  for (int i = 0; i < d; ++i) {
    if (factors_[i].role == FactorRole::Fx) {
      s.sigma[i] = vol_[i](t);
    } else {
      s.theta[i] = theta_[i](t);
      s.quanto[i] = quanto(i, t);
    }
  }
  anchor_->state(t, s.anchor);
  return s;
}

namespace {

// Mean of f over [a, b], piecewise Simpson between the knots inside (a, b).
template <class F>
double piecewise_mean(F&& f, double a, double b, const std::vector<double>& knots) {
  std::vector<double> cuts{a};
  for (double k : knots)
    if (k > a && k < b) cuts.push_back(k);
  cuts.push_back(b);
  double sum = 0.0;
  for (size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double lo = cuts[j], hi = cuts[j + 1], w = hi - lo;
    // nudge inward so one-sided limits are used at the knots
    const double l = lo + 1e-9 * w, h = hi - 1e-9 * w;
    sum += w / 6.0 * (f(l) + 4.0 * f(0.5 * (lo + hi)) + f(h));
  }
  return sum / (b - a);
}

}  // namespace

TimeSlice FactorSystem::slice_average(double t, double h) const {
  const double a = std::max(0.0, t - 0.5 * h), b = std::min(horizon_, t + 0.5 * h);
  if (!(h > 0.0) || !(b > a)) return slice(t);
  TimeSlice s = slice(t);
  for (int i = 0; i < dimension(); ++i) {
    if (factors_[i].role == FactorRole::Fx) {
      const auto& v = vol_[i];
      s.sigma[i] = std::sqrt(piecewise_mean([&](double u) { return v(u) * v(u); }, a, b, v.breakpoints()));
    } else {
      const auto& th = theta_[i];
      std::vector<double> knots = th.curve().tenors();
      s.theta[i] = piecewise_mean([&](double u) { return th(u); }, a, b, knots);
      if (factors_[i].role == FactorRole::ForeignRate) {
        const auto& v = vol_[fx_of_rate_[i]];
        s.quanto[i] = piecewise_mean([&](double u) { return quanto(i, u); }, a, b, v.breakpoints());
      }
    }
  }
  return s;
}

double FactorSystem::drift(int i, const double* x, const TimeSlice& s) const {
  const Factor& f = factors_[i];
  switch (f.role) {
    case FactorRole::Fx:
      return (x[domestic_index()] - x[pair_rf_[f.pair]]) * x[i];
    case FactorRole::DomesticRate:
      return hw_[i].lambda * (s.theta[i] - x[i]);
    case FactorRole::ForeignRate:
      return hw_[i].lambda * (s.theta[i] - x[i]) - s.quanto[i];
  }
  return 0.0;
}

double FactorSystem::vol(int i, const double* x, const TimeSlice& s) const {
  if (factors_[i].role == FactorRole::Fx) return s.sigma[i] * x[i];
  return hw_[i].eta;
}

double FactorSystem::drift(int i, std::span<const double> x, double t) const {
  check_index(i);
  if (static_cast<int>(x.size()) != dimension()) throw InvalidArgument("state size mismatch");
  return drift(i, x.data(), slice(t));
}

double FactorSystem::vol(int i, std::span<const double> x, double t) const {
  check_index(i);
  if (static_cast<int>(x.size()) != dimension()) throw InvalidArgument("state size mismatch");
  return vol(i, x.data(), slice(t));
}

AnchorPath::AnchorPath(const FactorSystem& sys) {
  const int d = sys.dimension();
  horizon_ = sys.horizon();
  const auto& a = sys.initial_state();
  fx_spot_.assign(d, 0.0);
  fx_rate_.assign(d, 0.0);
  table_.assign(d, {});
  const int n = static_cast<int>(std::ceil(horizon_ / step_));
  for (int i = 0; i < d; ++i) {
    const Factor& f = sys.factor(i);
    if (f.role == FactorRole::Fx) {
      fx_spot_[i] = a[i];
      fx_rate_[i] = a[sys.domestic_index()] - a[sys.foreign_rate_index(f.pair)];
      continue;
    }
    const double lam = sys.hull_white(i).lambda;
    const ThetaFunction& th = sys.theta(i);
    auto g = [&](double s) { return lam * th(std::min(s, horizon_)) - sys.quanto(i, s); };
    // g jumps where the curve or the FX vol has a knot; those become table nodes
    std::vector<double> nodes;
    for (int k = 0; k <= n; ++k) nodes.push_back(std::min(k * step_, horizon_));
    for (double k : sys.curve(i).tenors()) nodes.push_back(k);
    if (f.role == FactorRole::ForeignRate)
      for (double k : sys.fx_vol(sys.fx_index(f.pair)).breakpoints()) nodes.push_back(k);
    std::sort(nodes.begin(), nodes.end());
    Table& tab = table_[i];
    for (double t : nodes)
      if (t >= 0.0 && t <= horizon_ && (tab.t.empty() || t - tab.t.back() > 1e-10)) tab.t.push_back(t);
    const size_t nn = tab.t.size();
    tab.m.assign(nn, a[i]);
    tab.d_right.assign(nn, 0.0);
    tab.d_left.assign(nn, 0.0);
    for (size_t k = 0; k + 1 < nn; ++k) {
      // Simpson for int_{t0}^{t1} exp(-lam (t1 - s)) g(s) ds, endpoints nudged to the interior limits
      double t0 = tab.t[k], t1 = tab.t[k + 1], w = t1 - t0, mid = 0.5 * (t0 + t1), eps = 1e-9 * w;
      double g0 = g(t0 + eps), g1 = g(t1 - eps);
      double integral = w / 6 * (std::exp(-lam * w) * g0 + 4 * std::exp(-lam * w / 2) * g(mid) + g1);
      tab.m[k + 1] = tab.m[k] * std::exp(-lam * w) + integral;
      tab.d_right[k] = g0 - lam * tab.m[k];
      tab.d_left[k + 1] = g1 - lam * tab.m[k + 1];
    }
  }
}

double AnchorPath::value(int i, double t) const {
  if (i < 0 || i >= static_cast<int>(table_.size())) throw InvalidArgument("anchor: factor out of range");
  if (t < 0.0 || t > horizon_ * (1 + 1e-12)) throw InvalidArgument("anchor: time outside horizon");
  const Table& tab = table_[i];
  if (tab.t.empty()) return fx_spot_[i] * std::exp(fx_rate_[i] * t);
  size_t k = std::upper_bound(tab.t.begin(), tab.t.end(), t) - tab.t.begin();
  k = std::clamp<size_t>(k, 1, tab.t.size() - 1) - 1;
  const double h = tab.t[k + 1] - tab.t[k], s = (t - tab.t[k]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * tab.m[k] + h10 * h * tab.d_right[k] + h01 * tab.m[k + 1] + h11 * h * tab.d_left[k + 1];
}

void AnchorPath::state(double t, std::span<double> out) const {
  for (size_t i = 0; i < out.size(); ++i) out[i] = value(static_cast<int>(i), t);
}

std::vector<double> project_state(const FactorSystem& sys, const IndexList& u, std::span<const double> x_u, double t) {
  if (x_u.size() != u.size()) throw InvalidArgument("project_state: |x_u| != |u|");
  std::vector<double> x(sys.dimension());
  sys.anchor().state(t, x);
  for (size_t k = 0; k < u.size(); ++k) {
    if (u[k] < 0 || u[k] >= sys.dimension()) throw InvalidArgument("project_state: index out of range");
    x[u[k]] = x_u[k];
  }
  return x;
}

}  // namespace ccx
