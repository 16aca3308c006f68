#include "ccx/market.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ccx/error.hpp"

namespace ccx {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

template <class T>
T field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
T field_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}

RateMarket read_rate(const json& j, const fs::path& dir, const std::string& where) {
  RateMarket r;
  r.currency = field<std::string>(j, "currency", where);
  r.hw.lambda = field<double>(j, "lambda", where);
  r.hw.eta = field<double>(j, "eta", where);
  r.hw.r0 = field<double>(j, "r0", where);
  try {
    r.hw.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  r.curve = load_yield_curve((dir / field<std::string>(j, "curve", where)).string());
  return r;
}

int pair_index(const MarketData& m, const std::string& name, const std::string& where) {
  for (size_t i = 0; i < m.pairs.size(); ++i)
    if (m.pairs[i].name == name) return static_cast<int>(i);
  throw ConfigError(where + ": unknown currency pair '" + name + "'");
}

}  // namespace

MarketData load_market(const std::string& model_file) {
  const json j = read_json(model_file);
  const fs::path dir = fs::path(model_file).parent_path();
  MarketData m;
  if (!j.contains("domestic")) throw ConfigError(model_file + ": missing field 'domestic'");
  m.domestic = read_rate(j["domestic"], dir, model_file + ": domestic");
  if (!j.contains("pairs") || !j["pairs"].is_array() || j["pairs"].empty())
    throw ConfigError(model_file + ": 'pairs' must be a non-empty array");
  for (size_t i = 0; i < j["pairs"].size(); ++i) {
    const auto& pj = j["pairs"][i];
    const std::string where = model_file + ": pairs[" + std::to_string(i) + "]";
    PairMarket p;
    p.name = field<std::string>(pj, "name", where);
    p.spot = field<double>(pj, "spot", where);
    if (!(p.spot > 0.0)) throw ConfigError(where + ": spot must be positive");
    p.vol = load_vol_quotes((dir / field<std::string>(pj, "vols", where)).string());
    if (!pj.contains("foreign")) throw ConfigError(where + ": missing field 'foreign'");
    p.foreign = read_rate(pj["foreign"], dir, where + ".foreign");
    m.pairs.push_back(std::move(p));
  }
  const std::string corr_path = (dir / field<std::string>(j, "correlation", model_file)).string();
  Eigen::MatrixXd raw = load_correlation(corr_path);
  const int d = 1 + 2 * static_cast<int>(m.pairs.size());
  if (raw.rows() != d) throw ConfigError(corr_path + ": expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
  try {
    auto reg = regularize_correlation(raw);
    double change = (reg.matrix() - raw).cwiseAbs().maxCoeff();
    if (change > 1e-8)
      std::cerr << "warning: correlation matrix regularised (max entry change " << change << ")\n";
    m.correlation = reg.matrix();
  } catch (const InvalidArgument& e) {
    throw ConfigError(corr_path + ": " + e.what());
  }
  return m;
}

Scenario load_scenario(const std::string& model_file, const std::string& portfolio_file) {
  Scenario sc;
  sc.market = load_market(model_file);
  const json j = read_json(portfolio_file);
  sc.name = field_or<std::string>(j, "name", fs::path(portfolio_file).stem().string(), portfolio_file);
  if (!j.contains("instruments") || !j["instruments"].is_array())
    throw ConfigError(portfolio_file + ": 'instruments' must be an array");

  std::vector<int> pairs;
  if (j.contains("pairs")) {
    for (const auto& pn : j["pairs"]) pairs.push_back(pair_index(sc.market, pn.get<std::string>(), portfolio_file + ": pairs"));
  } else {
    for (size_t i = 0; i < j["instruments"].size(); ++i) {
      const auto& ij = j["instruments"][i];
      if (ij.contains("pair"))
        pairs.push_back(pair_index(sc.market, field<std::string>(ij, "pair", portfolio_file), portfolio_file));
    }
    if (pairs.empty()) pairs.push_back(0);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  sc.system = std::make_unique<FactorSystem>(sc.market, pairs);
  const FactorSystem& sys = *sc.system;
  auto local_pair = [&](int market_pair) {
    return static_cast<int>(std::find(pairs.begin(), pairs.end(), market_pair) - pairs.begin());
  };

  std::vector<Instrument> items;
  for (size_t i = 0; i < j["instruments"].size(); ++i) {
    const auto& ij = j["instruments"][i];
    const std::string where = portfolio_file + ": instruments[" + std::to_string(i) + "]";
    const std::string type = field<std::string>(ij, "type", where);
    if (type == "ccys") {
      int mp = pair_index(sc.market, field<std::string>(ij, "pair", where), where);
      int p = local_pair(mp);
      items.push_back(make_ccys(p, sys.initial_state()[sys.fx_index(p)], field<double>(ij, "moneyness", where),
                                field<double>(ij, "maturity", where), field<double>(ij, "notional", where),
                                field_or<int>(ij, "coupons", 100, where)));
    } else if (type == "irs") {
      IrsContract c;
      c.maturity = field<double>(ij, "maturity", where);
      c.notional = field<double>(ij, "notional", where);
      c.coupons = field_or<int>(ij, "coupons", 100, where);
      if (c.coupons < 1) throw ConfigError(where + ": coupons must be positive");
      if (ij.contains("fixed_rate") && ij["fixed_rate"].is_number())
        c.fixed_rate = ij["fixed_rate"].get<double>();
      else
        c.fixed_rate = atm_swap_rate(sys.curve(sys.domestic_index()), c);
      items.push_back(c);
    } else if (type == "fx_call") {
      int p = local_pair(pair_index(sc.market, field<std::string>(ij, "pair", where), where));
      FxOptionContract o;
      o.pair = p;
      o.maturity = field<double>(ij, "maturity", where);
      o.notional = field<double>(ij, "notional", where);
      double spot = sys.initial_state()[sys.fx_index(p)];
      if (ij.contains("strike"))
        o.strike = field<double>(ij, "strike", where);
      else
        o.strike = field<double>(ij, "strike_relative", where) * spot;
      items.push_back(o);
    } else {
      throw ConfigError(where + ": unknown instrument type '" + type + "'");
    }
  }
  sc.portfolio = std::make_unique<Portfolio>(sys, std::move(items));
  return sc;
}

Scenario make_case(const std::string& data_dir, const std::string& case_name) {
  std::string c = case_name;
  std::transform(c.begin(), c.end(), c.begin(), ::toupper);
  if (c != "A" && c != "B" && c != "C" && c != "D")
    throw ConfigError("unknown case '" + case_name + "' (expected A, B, C or D)");
  const fs::path dir(data_dir);
  std::string file = "case_" + std::string(1, static_cast<char>(::tolower(c[0]))) + ".json";
  Scenario sc = load_scenario((dir / "model.json").string(), (dir / "portfolios" / file).string());
  sc.name = "Case " + c;
  return sc;
}

std::string default_data_dir() {
  if (const char* env = std::getenv("CCX_DATA_DIR")) return env;
  return CCX_DATA_DIR;
}

}  // namespace ccx
