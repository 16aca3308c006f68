#include "ccx/instruments.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ccx/error.hpp"

namespace ccx {

namespace {
constexpr double kDateTol = 1e-10;
}

ZcbFormula::ZcbFormula(YieldCurve curve, HullWhiteParams hw) : curve_(std::move(curve)), hw_(hw) {
  hw_.validate();
}

double ZcbFormula::B(double t, double T) const {
  return (1.0 - std::exp(-hw_.lambda * (T - t))) / hw_.lambda;
}

double ZcbFormula::A(double t, double T) const {
  const double b = B(t, T), l = hw_.lambda, e = hw_.eta;
  return b * curve_.forward(t) - e * e / (4 * l) * b * b * (1.0 - std::exp(-2 * l * t));
}

double ZcbFormula::price(double r, double t, double T) const {
  if (t > T) throw InvalidArgument("zcb_price: t > T");
  if (t == T) return 1.0;
  return curve_.discount(T) / curve_.discount(t) * std::exp(A(t, T) - B(t, T) * r);
}

CcysContract make_ccys(int pair, double spot, double moneyness, double maturity, double notional_domestic, int coupons) {
  if (!(spot > 0.0)) throw InvalidArgument("ccys: spot must be positive");
  if (coupons < 1 || !(maturity > 0.0)) throw InvalidArgument("ccys: need positive maturity and coupon count");
  CcysContract c;
  c.pair = pair;
  c.moneyness = moneyness;
  c.maturity = maturity;
  c.notional_domestic = notional_domestic;
  c.notional_foreign = notional_domestic / spot;
  c.coupons = coupons;
  return c;
}

double atm_swap_rate(const YieldCurve& curve, const IrsContract& c) {
  double annuity = 0.0;
  for (int i = 1; i <= c.coupons; ++i) annuity += c.interval() * curve.discount(c.coupon_date(i));
  if (!(std::abs(annuity) > 0.0)) throw InvalidArgument("atm_swap_rate: degenerate annuity");
  return (curve.discount(0.0) - curve.discount(c.maturity)) / annuity;
}

double fx_option_payoff(const FxOptionContract& opt, double F_T) {
  return std::max(0.0, F_T - opt.strike) * opt.notional;
}

double ccys_value(const CcysContract& c, double F, double t, double P_dom_T0, double P_for_T0) {
  if (t >= c.maturity - kDateTol) return 0.0;
  if (t <= kDateTol) return P_dom_T0 * c.notional_domestic - c.moneyness * F * P_for_T0 * c.notional_foreign;
  return c.notional_domestic - c.moneyness * F * c.notional_foreign;
}

double irs_value(const IrsContract& c, const ZcbFormula& zcb, double r, double t) {
  if (t >= c.maturity - kDateTol) return 0.0;
  double fixed = 0.0;
  for (int i = 1; i <= c.coupons; ++i) {
    double Ti = c.coupon_date(i);
    if (Ti > t + kDateTol) fixed += zcb.price(r, t, Ti);
  }
  fixed *= c.fixed_rate * c.interval();
  double floating = 1.0;  // P(t,T0) with T0 = 0 at inception, par after payment dates
  return (fixed + zcb.price(r, t, c.maturity) - floating) * c.notional;
}

Portfolio::Portfolio(const FactorSystem& sys, std::vector<Instrument> instruments)
    : sys_(&sys),
      items_(std::move(instruments)),
      zcb_d_(sys.curve(sys.domestic_index()), sys.hull_white(sys.domestic_index())) {
  for (int p = 0; p < sys.pair_count(); ++p) {
    int rf = sys.foreign_rate_index(p);
    zcb_f_.emplace_back(sys.curve(rf), sys.hull_white(rf));
  }
  for (const auto& ins : items_) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (!std::is_same_v<T, IrsContract>) {
            if (c.pair < 0 || c.pair >= sys.pair_count())
              throw ConfigError("instrument refers to a currency pair outside the factor system");
          }
          if (!(c.maturity > 0.0)) throw ConfigError("instrument maturity must be positive");
          if (c.maturity > sys.horizon()) throw ConfigError("instrument maturity beyond the curve horizon");
          if constexpr (std::is_same_v<T, FxOptionContract>) {
            if (!(c.strike > 0.0)) throw ConfigError("option strike must be positive");
          }
        },
        ins);
  }
}

std::string Portfolio::label(int k) const {
  const auto& ins = items_.at(k);
  std::ostringstream os;
  if (auto c = std::get_if<CcysContract>(&ins))
    os << "CCYS " << sys_->factor(sys_->fx_index(c->pair)).name;
  else if (std::get_if<IrsContract>(&ins))
    os << "IRS " << sys_->factor(sys_->domestic_index()).name;
  else if (auto o = std::get_if<FxOptionContract>(&ins))
    os << "FX call " << sys_->factor(sys_->fx_index(o->pair)).name;
  return os.str();
}

double Portfolio::maturity(int k) const {
  return std::visit([](const auto& c) { return c.maturity; }, items_.at(k));
}

double Portfolio::weight(int k, double t) const { return t <= maturity(k) + kDateTol ? 1.0 : 0.0; }

double Portfolio::horizon() const {
  double h = 0.0;
  for (int k = 0; k < size(); ++k) h = std::max(h, maturity(k));
  return h;
}

bool Portfolio::has_options() const {
  for (int k = 0; k < size(); ++k)
    if (is_option(k)) return true;
  return false;
}

double Portfolio::total_notional() const {
  double n = 0.0;
  for (const auto& ins : items_) {
    if (auto c = std::get_if<CcysContract>(&ins)) n += c->notional_domestic;
    else if (auto s = std::get_if<IrsContract>(&ins)) n += s->notional;
    else if (auto o = std::get_if<FxOptionContract>(&ins)) n += o->notional;
  }
  return n;
}

std::vector<int> Portfolio::value_factors(int k) const {
  const auto& ins = items_.at(k);
  if (auto c = std::get_if<CcysContract>(&ins)) return {sys_->fx_index(c->pair)};
  if (std::get_if<IrsContract>(&ins)) return {sys_->domestic_index()};
  const auto& o = std::get<FxOptionContract>(ins);
  std::vector<int> v{sys_->fx_index(o.pair), sys_->domestic_index(), sys_->foreign_rate_index(o.pair)};
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<int> Portfolio::dependency_set(int k) const {
  std::set<int> s;
  std::vector<int> stack = value_factors(k);
  while (!stack.empty()) {
    int f = stack.back();
    stack.pop_back();
    if (!s.insert(f).second) continue;
    for (int g : sys_->drivers(f)) stack.push_back(g);
  }
  return {s.begin(), s.end()};
}

double Portfolio::closed_form_value(int k, const double* x, double t) const {
  const auto& ins = items_.at(k);
  if (auto c = std::get_if<CcysContract>(&ins)) {
    double F = x[sys_->fx_index(c->pair)];
    if (t <= kDateTol) {
      double pd = zcb_d_.price(x[sys_->domestic_index()], t, 0.0 + t);
      double pf = zcb_f_[c->pair].price(x[sys_->foreign_rate_index(c->pair)], t, 0.0 + t);
      return ccys_value(*c, F, t, pd, pf);
    }
    return ccys_value(*c, F, t);
  }
  if (auto s = std::get_if<IrsContract>(&ins)) return irs_value(*s, zcb_d_, x[sys_->domestic_index()], t);
  throw InvalidArgument("closed_form_value: instrument " + label(k) + " has no closed form");
}

double Portfolio::value(const double* x, double t, const OptionValueSource& options) const {
  double v = 0.0;
  for (int k = 0; k < size(); ++k) {
    double w = weight(k, t);
    if (w == 0.0) continue;
    if (is_option(k)) {
      if (!options) throw InvalidArgument("portfolio value: no option value source for " + label(k));
      v += w * options(k, x, t);
    } else {
      v += w * closed_form_value(k, x, t);
    }
  }
  return v;
}

Portfolio::Snapshot Portfolio::snapshot(double t) const {
  Snapshot s;
  s.t = t;
  s.weight.resize(size());
  s.irs_coef.resize(size());
  s.irs_exp.resize(size());
  for (int k = 0; k < size(); ++k) {
    s.weight[k] = weight(k, t);
    auto irs = std::get_if<IrsContract>(&items_[k]);
    if (!irs || t >= irs->maturity - kDateTol) continue;
    const double pt = zcb_d_.curve().discount(t);
    for (int i = 1; i <= irs->coupons; ++i) {
      double Ti = irs->coupon_date(i);
      if (Ti <= t + kDateTol) continue;
      double c = irs->fixed_rate * irs->interval() + (i == irs->coupons ? 1.0 : 0.0);
      s.irs_coef[k].push_back(c * zcb_d_.curve().discount(Ti) / pt * std::exp(zcb_d_.A(t, Ti)));
      s.irs_exp[k].push_back(zcb_d_.B(t, Ti));
    }
  }
  return s;
}

double Portfolio::instrument_value(const Snapshot& s, int k, const double* x) const {
  if (auto irs = std::get_if<IrsContract>(&items_[k])) {
    if (s.irs_coef[k].empty()) return 0.0;
    const double r = x[sys_->domestic_index()];
    double v = 0.0;
    for (size_t i = 0; i < s.irs_coef[k].size(); ++i) v += s.irs_coef[k][i] * std::exp(-s.irs_exp[k][i] * r);
    return (v - 1.0) * irs->notional;
  }
  return closed_form_value(k, x, s.t);
}

double Portfolio::value(const Snapshot& s, const double* x, const OptionValueSource& options) const {
  double v = 0.0;
  for (int k = 0; k < size(); ++k) {
    if (s.weight[k] == 0.0) continue;
    if (is_option(k)) {
      if (!options) throw InvalidArgument("portfolio value: no option value source for " + label(k));
      v += s.weight[k] * options(k, x, s.t);
    } else {
      v += s.weight[k] * instrument_value(s, k, x);
    }
  }
  return v;
}

}  // namespace ccx
