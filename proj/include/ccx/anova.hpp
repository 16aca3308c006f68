#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ccx/grid.hpp"
#include "ccx/instruments.hpp"
#include "ccx/profile.hpp"
#include "ccx/solvers.hpp"

namespace ccx {

// Sorted, duplicate-free factor indices.
using IndexSet = IndexList;
IndexSet make_index_set(std::vector<int> factors);

// Anchored-ANOVA correction Delta V_w for the non-base factors w (base factors are always included).
struct Surplus {
  IndexSet w;
  bool pruned = false;
  std::string reason;
};

struct PlanTerm {
  IndexList factors;  // base factors first (in base order), then the rest ascending
  long multiplicity = 0;
};

// V_{r,s} = sum over |w| <= s of Delta V_w, with Delta V_w = sum over v in w of (-1)^{|w|-|v|} V_{base+v}.
class DecompositionPlan {
 public:
  DecompositionPlan(int d, IndexList base, int s);

  int dimension() const { return d_; }
  int order() const { return s_; }
  const IndexList& base() const { return base_; }
  const IndexSet& others() const { return others_; }
  const std::vector<Surplus>& surpluses() const { return surpluses_; }
  std::vector<Surplus>& surpluses() { return surpluses_; }

  // Terms with nonzero multiplicity, from the surpluses that are not pruned; fixed order (size, then lexicographic).
  std::vector<PlanTerm> terms() const;
  // Signed expansion of one surplus into terms.
  std::vector<PlanTerm> expand(const IndexSet& w) const;
  IndexList term_factors(const IndexSet& w) const;

 private:
  int d_, s_;
  IndexList base_;
  IndexSet others_;
  std::vector<Surplus> surpluses_;
};

DecompositionPlan enumerate_plan(int d, const IndexList& base, int s);

// Marks surpluses of order >= 2 that vanish structurally: some factor of w neither is a value factor of
// the portfolio nor drives (through drift or volatility) a relevant factor inside base + w.
void prune_vanishing(DecompositionPlan& plan, const Portfolio& portfolio);

// "BSBSHW EU-EG-RE" style label: model letters per factor (FX first, then rates) and factor codes.
std::string term_name(const FactorSystem& sys, const IndexList& factors);
std::string explain_plan(const DecompositionPlan& plan, const FactorSystem& sys);

struct TermResult {
  IndexList factors;
  std::vector<double> times, ee, epe, ene, mass;
  double forward_seconds = 0.0, valuation_seconds = 0.0;
};

// Optional observer of per-term surfaces: (factors, date index, t, mesh, mass, portfolio values).
using SurfaceSink = std::function<void(const IndexList&, int, double, const MeshND&, const std::vector<double>&,
                                       const std::vector<double>&)>;

struct DecompositionConfig {
  GridConfig grid;
  SolverConfig solver;  // steps over the portfolio horizon; exposure dates must fall on the grid
  int threads = 0;      // 0 = hardware concurrency
};

// PDE values of the portfolio's FX options inside sub-models, on the axes the term meshes use. For a term u the
// option is valued in the sub-model of u restricted to its pair's factors (deterministic along the anchor when u
// holds none of them); for the full system the three factors of the pair are used.
class OptionSurfaceSet {
 public:
  OptionSurfaceSet(const FactorSystem& sys, const Portfolio& portfolio, const std::vector<IndexList>& terms,
                   const std::vector<double>& dates, const DecompositionConfig& cfg);
  ~OptionSurfaceSet();
  OptionSurfaceSet(OptionSurfaceSet&&) noexcept;

  // Value of option instrument k at dates[date] for the full state x, in the sub-model of u (multilinear
  // interpolation, clamped to the mesh). u must be one of the terms given at construction or the full system.
  double value(int k, const IndexList& u, int date, const double* x) const;
  double seconds() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Exposure moments of the sub-model with factors u stochastic and the rest on the anchor path.
TermResult evaluate_term(const FactorSystem& sys, const Portfolio& portfolio, const IndexList& u,
                         const std::vector<double>& dates, const DecompositionConfig& cfg,
                         const SurfaceSink& sink = {});

ExposureProfile assemble_profile(const std::vector<PlanTerm>& terms, const std::vector<TermResult>& results,
                                 const std::string& source);

struct DecompositionRun {
  std::vector<PlanTerm> terms;
  std::vector<TermResult> results;
  ExposureProfile profile;
  double option_seconds = 0.0;
  double wall_seconds = 0.0;
};

DecompositionRun run_decomposition(const FactorSystem& sys, const Portfolio& portfolio,
                                   const std::vector<PlanTerm>& terms, const std::vector<double>& dates,
                                   const DecompositionConfig& cfg, const SurfaceSink& sink = {});

}  // namespace ccx
