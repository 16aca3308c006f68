#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ccx/instruments.hpp"
#include "ccx/model.hpp"

namespace ccx {

// Loads the model parameter file (JSON). Relative file references resolve against its directory.
MarketData load_market(const std::string& model_file);

struct Scenario {
  std::string name;
  MarketData market;
  std::unique_ptr<FactorSystem> system;
  std::unique_ptr<Portfolio> portfolio;
};

// Portfolio file (JSON) against a market; only pairs used by the portfolio enter the factor system
// unless the file lists "pairs" explicitly.
Scenario load_scenario(const std::string& model_file, const std::string& portfolio_file);

// Preset portfolios A-D on the bundled market in data_dir.
Scenario make_case(const std::string& data_dir, const std::string& case_name);

std::string default_data_dir();

}  // namespace ccx
