#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ccx/curves.hpp"
#include "ccx/model.hpp"

namespace ccx {

// Hull-White zero-coupon bond P(t,T) = P(0,T)/P(0,t) exp(A(t,T) - B(t,T) r).
class ZcbFormula {
 public:
  ZcbFormula(YieldCurve curve, HullWhiteParams hw);

  double B(double t, double T) const;
  double A(double t, double T) const;
  double price(double r, double t, double T) const;
  const YieldCurve& curve() const { return curve_; }

 private:
  YieldCurve curve_;
  HullWhiteParams hw_;
};

struct CcysContract {
  int pair = 0;
  double moneyness = 1.0;
  double maturity = 5.0;
  double notional_domestic = 100.0;
  double notional_foreign = 0.0;  // notional_domestic / F0
  int coupons = 100;

  double coupon_date(int i) const { return maturity * i / coupons; }
};

struct IrsContract {
  double fixed_rate = 0.0;
  double notional = 150.0;
  double maturity = 5.0;
  int coupons = 100;

  double interval() const { return maturity / coupons; }
  double coupon_date(int i) const { return maturity * i / coupons; }
};

struct FxOptionContract {
  int pair = 0;
  double strike = 1.0;
  double maturity = 4.0;
  double notional = 100.0;
};

using Instrument = std::variant<CcysContract, IrsContract, FxOptionContract>;

CcysContract make_ccys(int pair, double spot, double moneyness, double maturity, double notional_domestic, int coupons);
double atm_swap_rate(const YieldCurve& curve, const IrsContract& skeleton);
double fx_option_payoff(const FxOptionContract& opt, double F_T);

// Domestic value with floating legs at par on post-payment coupon dates.
double ccys_value(const CcysContract& c, double F, double t, double P_dom_T0 = 1.0, double P_for_T0 = 1.0);
double irs_value(const IrsContract& c, const ZcbFormula& zcb, double r, double t);

// Option value source: (instrument index, full state, t) -> value.
using OptionValueSource = std::function<double(int, const double*, double)>;

class Portfolio {
 public:
  Portfolio(const FactorSystem& sys, std::vector<Instrument> instruments);

  const FactorSystem& system() const { return *sys_; }
  int size() const { return static_cast<int>(items_.size()); }
  const Instrument& instrument(int k) const { return items_.at(k); }
  const std::vector<Instrument>& instruments() const { return items_; }
  std::string label(int k) const;

  double maturity(int k) const;
  double weight(int k, double t) const;
  double horizon() const;
  bool is_option(int k) const { return std::holds_alternative<FxOptionContract>(items_.at(k)); }
  bool has_options() const;
  double total_notional() const;

  // Factors entering the value function at exposure dates, and their closure under the SDE drivers.
  std::vector<int> value_factors(int k) const;
  std::vector<int> dependency_set(int k) const;

  // Closed-form value of a non-option instrument at full state x.
  double closed_form_value(int k, const double* x, double t) const;
  double value(const double* x, double t, const OptionValueSource& options = {}) const;

  const ZcbFormula& domestic_zcb() const { return zcb_d_; }

  // Time-t valuation data so that repeated evaluation over many states is cheap.
  struct Snapshot {
    double t = 0.0;
    std::vector<double> weight;
    std::vector<std::vector<double>> irs_coef, irs_exp;  // value = notional*(sum c_i e^{-b_i r} - 1)
  };
  Snapshot snapshot(double t) const;
  double value(const Snapshot& s, const double* x, const OptionValueSource& options = {}) const;
  double instrument_value(const Snapshot& s, int k, const double* x) const;

 private:
  const FactorSystem* sys_;
  std::vector<Instrument> items_;
  ZcbFormula zcb_d_;
  std::vector<ZcbFormula> zcb_f_;
};

}  // namespace ccx
