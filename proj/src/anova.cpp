#include "ccx/anova.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ccx/error.hpp"
#include "parallel.hpp"

namespace ccx {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

using detail::parallel_for;

std::vector<IndexSet> subsets_up_to(const IndexSet& pool, int s) {
  std::vector<IndexSet> out{{}};
  const int n = static_cast<int>(pool.size());
  for (int size = 1; size <= std::min(s, n); ++size) {
    std::vector<int> idx(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      IndexSet w;
      for (int i : idx) w.push_back(pool[i]);
      out.push_back(w);
      int i = size - 1;
      while (i >= 0 && idx[i] == n - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

bool is_subset(const IndexSet& a, const IndexSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

// Positions within u of the factors in f (keeping u's order).
std::vector<int> positions_in(const IndexList& u, const std::vector<int>& f) {
  std::vector<int> pos;
  for (int p = 0; p < static_cast<int>(u.size()); ++p)
    if (std::find(f.begin(), f.end(), u[p]) != f.end()) pos.push_back(p);
  return pos;
}

// Sub-mesh of a tensor mesh over selected axes, with the map from full nodes to sub nodes.
struct SubMesh {
  std::vector<int> pos;
  MeshND mesh;
  std::vector<long> index;
};

SubMesh make_submesh(const MeshND& full, const std::vector<int>& pos) {
  std::vector<Mesh1D> axes;
  for (int p : pos) axes.push_back(full.axis(p));
  SubMesh sm{pos, MeshND(axes), {}};
  sm.index.resize(full.total());
  for (long i = 0; i < full.total(); ++i) {
    auto idx = full.unflatten(i);
    long j = 0;
    for (size_t q = 0; q < pos.size(); ++q) j += idx[pos[q]] * sm.mesh.stride(static_cast<int>(q));
    sm.index[i] = j;
  }
  return sm;
}

// Key of an option valuation problem: instrument and the (factor, axis size) list of its sub-model.
using OptionKey = std::pair<int, std::vector<std::pair<int, int>>>;

struct OptionSurfaces {
  std::map<double, std::vector<double>> by_date;  // values on the sub-mesh
  double seconds = 0.0;
};

using OptionCache = std::map<OptionKey, OptionSurfaces>;

OptionKey option_key(const Portfolio& pf, int k, const IndexList& u, const MeshND& umesh) {
  auto pos = positions_in(u, pf.value_factors(k));
  OptionKey key{k, {}};
  for (int p : pos) key.second.emplace_back(u[p], umesh.size(p));
  return key;
}

double date_step(const std::vector<double>& dates, const SolverConfig& solver) { return dates.back() / solver.steps; }

OptionSurfaces solve_option(const FactorSystem& sys, const Portfolio& pf, const OptionKey& key,
                            const std::vector<double>& dates, const DecompositionConfig& cfg) {
  auto t0 = Clock::now();
  const auto& opt = std::get<FxOptionContract>(pf.instrument(key.first));
  IndexList v;
  std::vector<Mesh1D> axes;
  for (auto [f, m] : key.second) {
    v.push_back(f);
    axes.push_back(mesh_for_factor(sys, f, m, cfg.grid));
  }
  MeshND mesh(axes);
  const double dt = date_step(dates, cfg.solver);
  const int steps = static_cast<int>(std::lround(opt.maturity / dt));
  if (steps < 1 || std::abs(steps * dt - opt.maturity) > 1e-9 * std::max(1.0, opt.maturity))
    throw ConfigError("option maturity " + std::to_string(opt.maturity) + " is not on the PDE time grid");
  const int fx = sys.fx_index(opt.pair);
  std::vector<double> payoff(mesh.total());
  std::vector<double> x(sys.dimension()), c(3);
  for (long i = 0; i < mesh.total(); ++i) {
    sys.anchor().state(opt.maturity, x);
    mesh.coordinates(i, c.data());
    for (size_t p = 0; p < v.size(); ++p) x[v[p]] = c[p];
    payoff[i] = fx_option_payoff(opt, x[fx]);
  }
  std::vector<double> want;
  for (double t : dates)
    if (t <= opt.maturity + 1e-10) want.push_back(t);
  SolverConfig sc = cfg.solver;
  sc.steps = steps;
  ProjectedDynamics dyn(sys, v, opt.maturity / steps);
  auto surfaces = solve_backward(dyn, mesh, payoff, opt.maturity, want, sc, true);
  OptionSurfaces out;
  for (size_t i = 0; i < want.size(); ++i) out.by_date[want[i]] = std::move(surfaces[i].values);
  out.seconds = seconds_since(t0);
  return out;
}

TermResult evaluate_term_impl(const FactorSystem& sys, const Portfolio& pf, const IndexList& u,
                              const std::vector<double>& dates, const DecompositionConfig& cfg,
                              const OptionCache& options, const SurfaceSink& sink) {
  cfg.solver.validate();
  if (dates.empty()) throw InvalidArgument("no exposure dates");
  const MeshND mesh = mesh_for_indexset(sys, u, cfg.grid);
  const long n = mesh.total();
  const double T = dates.back();
  const auto grid = uniform_time_grid(T, cfg.solver.steps);
  std::map<int, int> step_to_date;
  for (int i = 0; i < static_cast<int>(dates.size()); ++i) step_to_date[grid_index(grid, dates[i])] = i;

  std::vector<SubMesh> subs(pf.size());
  std::vector<const OptionSurfaces*> opt_values(pf.size(), nullptr);
  for (int k = 0; k < pf.size(); ++k) {
    subs[k] = make_submesh(mesh, positions_in(u, pf.value_factors(k)));
    if (pf.is_option(k)) {
      auto it = options.find(option_key(pf, k, u, mesh));
      if (it == options.end()) throw InvalidArgument("option surfaces missing for " + term_name(sys, u));
      opt_values[k] = &it->second;
    }
  }

  TermResult res;
  res.factors = u;
  res.times = dates;
  const size_t nd = dates.size();
  res.ee.assign(nd, 0.0);
  res.epe.assign(nd, 0.0);
  res.ene.assign(nd, 0.0);
  res.mass.assign(nd, 0.0);

  std::vector<double> mass(n, 0.0), value(n), sub, x(sys.dimension()), c(3);
  mass[mesh.anchor_flat()] = 1.0;
  double valuation = 0.0;
  auto observe = [&](int step, double t, const std::vector<double>& q) {
    auto hit = step_to_date.find(step);
    if (hit == step_to_date.end()) return;
    auto t0 = Clock::now();
    const int di = hit->second;
    const auto snap = pf.snapshot(t);
    std::fill(value.begin(), value.end(), 0.0);
    for (int k = 0; k < pf.size(); ++k) {
      const double w = snap.weight[k];
      if (w == 0.0) continue;
      const SubMesh& sm = subs[k];
      const std::vector<double>* vals;
      if (opt_values[k]) {
        auto it = opt_values[k]->by_date.find(dates[di]);
        if (it == opt_values[k]->by_date.end()) throw InvalidArgument("option surface missing at an exposure date");
        vals = &it->second;
      } else {
        sub.resize(sm.mesh.total());
        for (long j = 0; j < sm.mesh.total(); ++j) {
          sys.anchor().state(t, x);
          sm.mesh.coordinates(j, c.data());
          for (size_t p = 0; p < sm.pos.size(); ++p) x[u[sm.pos[p]]] = c[p];
          sub[j] = pf.instrument_value(snap, k, x.data());
        }
        vals = &sub;
      }
      for (long i = 0; i < n; ++i) value[i] += w * (*vals)[sm.index[i]];
    }
    double ee = 0.0, epe = 0.0, ene = 0.0, m = 0.0;
    for (long i = 0; i < n; ++i) {
      const double qi = q[i], vi = value[i];
      if (qi == 0.0) continue;
      m += qi;
      ee += qi * vi;
      if (vi > 0.0) epe += qi * vi;
      else ene += qi * vi;
    }
    res.ee[di] = ee;
    res.epe[di] = epe;
    res.ene[di] = ene;
    res.mass[di] = m;
    if (sink) sink(u, di, t, mesh, q, value);
    valuation += seconds_since(t0);
  };

  auto t0 = Clock::now();
  ProjectedDynamics dyn(sys, u, T / cfg.solver.steps);
  solve_forward(dyn, mesh, mass, T, cfg.solver, observe);
  res.valuation_seconds = valuation;
  res.forward_seconds = seconds_since(t0) - valuation;
  return res;
}

OptionCache build_option_cache(const FactorSystem& sys, const Portfolio& pf, const std::vector<IndexList>& terms,
                               const std::vector<double>& dates, const DecompositionConfig& cfg, int threads) {
  std::set<OptionKey> keys;
  for (const auto& u : terms) {
    MeshND mesh = mesh_for_indexset(sys, u, cfg.grid);
    for (int k = 0; k < pf.size(); ++k)
      if (pf.is_option(k)) keys.insert(option_key(pf, k, u, mesh));
  }
  std::vector<OptionKey> list(keys.begin(), keys.end());
  std::vector<OptionSurfaces> solved(list.size());
  parallel_for(static_cast<int>(list.size()), threads,
               [&](int i) { solved[i] = solve_option(sys, pf, list[i], dates, cfg); });
  OptionCache cache;
  for (size_t i = 0; i < list.size(); ++i) cache[list[i]] = std::move(solved[i]);
  return cache;
}

bool is_full_system(const FactorSystem& sys, const IndexList& u) {
  return static_cast<int>(u.size()) == sys.dimension() && sys.dimension() > 3;
}

// Factor list used to value option k in the sub-model of u.
IndexList option_model(const FactorSystem& sys, const Portfolio& pf, int k, const IndexList& u) {
  if (!is_full_system(sys, u)) return u;
  auto vf = pf.value_factors(k);
  return IndexList(vf.begin(), vf.end());
}

}  // namespace

struct OptionSurfaceSet::Impl {
  struct Entry {
    IndexList factors;  // system indices, one per mesh axis
    std::unique_ptr<MeshND> mesh;
    std::vector<const std::vector<double>*> by_date;  // null past maturity
  };
  const FactorSystem* sys = nullptr;
  const Portfolio* pf = nullptr;
  OptionCache cache;
  std::map<IndexList, std::vector<Entry>> entries;  // per term, one entry per instrument (empty if not an option)
  double seconds = 0.0;
};

OptionSurfaceSet::OptionSurfaceSet(const FactorSystem& sys, const Portfolio& pf, const std::vector<IndexList>& terms,
                                   const std::vector<double>& dates, const DecompositionConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
  auto t0 = Clock::now();
  impl_->sys = &sys;
  impl_->pf = &pf;
  std::vector<IndexList> models;
  for (const auto& u : terms)
    for (int k = 0; k < pf.size(); ++k)
      if (pf.is_option(k)) models.push_back(option_model(sys, pf, k, u));
  impl_->cache = build_option_cache(sys, pf, models, dates, cfg, cfg.threads);
  for (const auto& u : terms) {
    auto& list = impl_->entries[u];
    if (!list.empty()) continue;
    list.resize(pf.size());
    for (int k = 0; k < pf.size(); ++k) {
      if (!pf.is_option(k)) continue;
      const IndexList model = option_model(sys, pf, k, u);
      const MeshND umesh = mesh_for_indexset(sys, model, cfg.grid);
      const OptionKey key = option_key(pf, k, model, umesh);
      const OptionSurfaces& surf = impl_->cache.at(key);
      Impl::Entry& e = list[k];
      std::vector<Mesh1D> axes;
      for (auto [f, m] : key.second) {
        e.factors.push_back(f);
        axes.push_back(mesh_for_factor(sys, f, m, cfg.grid));
      }
      e.mesh = std::make_unique<MeshND>(axes);
      for (double t : dates) {
        auto it = surf.by_date.find(t);
        e.by_date.push_back(it == surf.by_date.end() ? nullptr : &it->second);
      }
    }
  }
  impl_->seconds = seconds_since(t0);
}

OptionSurfaceSet::~OptionSurfaceSet() = default;
OptionSurfaceSet::OptionSurfaceSet(OptionSurfaceSet&&) noexcept = default;

double OptionSurfaceSet::seconds() const { return impl_->seconds; }

double OptionSurfaceSet::value(int k, const IndexList& u, int date, const double* x) const {
  auto it = impl_->entries.find(u);
  if (it == impl_->entries.end()) throw InvalidArgument("no option surfaces for " + term_name(*impl_->sys, u));
  const auto& e = it->second.at(k);
  if (!e.mesh) throw InvalidArgument("instrument is not an option");
  const auto* vals = e.by_date.at(date);
  if (!vals) return 0.0;
  double c[3];
  for (size_t p = 0; p < e.factors.size(); ++p) c[p] = x[e.factors[p]];
  return interpolate_nodal(*e.mesh, vals->data(), c);
}

IndexSet make_index_set(std::vector<int> f) {
  std::sort(f.begin(), f.end());
  if (std::adjacent_find(f.begin(), f.end()) != f.end()) throw InvalidArgument("index set has duplicate factors");
  return f;
}

DecompositionPlan::DecompositionPlan(int d, IndexList base, int s) : d_(d), s_(s), base_(std::move(base)) {
  if (d < 0 || s < 0) throw InvalidArgument("plan: dimension and order must be nonnegative");
  std::vector<char> seen(d, 0);
  for (int b : base_) {
    if (b < 0 || b >= d) throw InvalidArgument("plan: base factor out of range");
    if (seen[b]++) throw InvalidArgument("plan: duplicate base factor");
  }
  const int r = static_cast<int>(base_.size());
  if (r + s > d) {
    std::ostringstream os;
    os << "plan: r + s = " << r + s << " exceeds the dimension " << d;
    throw InvalidArgument(os.str());
  }
  for (int f = 0; f < d; ++f)
    if (!seen[f]) others_.push_back(f);
  for (auto& w : subsets_up_to(others_, s)) surpluses_.push_back({w, false, ""});
}

IndexList DecompositionPlan::term_factors(const IndexSet& w) const {
  IndexList f = base_;
  f.insert(f.end(), w.begin(), w.end());
  return f;
}

std::vector<PlanTerm> DecompositionPlan::expand(const IndexSet& w) const {
  std::vector<PlanTerm> out;
  for (auto& v : subsets_up_to(w, static_cast<int>(w.size()))) {
    long sign = ((w.size() - v.size()) % 2 == 0) ? 1 : -1;
    out.push_back({term_factors(v), sign});
  }
  return out;
}

std::vector<PlanTerm> DecompositionPlan::terms() const {
  // multiplicity of V_{base+v} = sum over kept w containing v of (-1)^{|w|-|v|}
  std::vector<PlanTerm> out;
  for (const auto& sv : surpluses_) {
    long m = 0;
    for (const auto& sw : surpluses_) {
      if (sw.pruned || !is_subset(sv.w, sw.w)) continue;
      m += ((sw.w.size() - sv.w.size()) % 2 == 0) ? 1 : -1;
    }
    if (m != 0) out.push_back({term_factors(sv.w), m});
  }
  return out;
}

DecompositionPlan enumerate_plan(int d, const IndexList& base, int s) { return DecompositionPlan(d, base, s); }

void prune_vanishing(DecompositionPlan& plan, const Portfolio& pf) {
  const FactorSystem& sys = pf.system();
  if (sys.dimension() != plan.dimension()) throw InvalidArgument("prune: plan and portfolio dimensions differ");
  std::set<int> value_factors;
  for (int k = 0; k < pf.size(); ++k)
    for (int f : pf.value_factors(k)) value_factors.insert(f);
  for (auto& sp : plan.surpluses()) {
    if (sp.w.size() < 2) continue;
    const IndexList u = plan.term_factors(sp.w);
    std::set<int> relevant;
    for (int f : u)
      if (value_factors.count(f)) relevant.insert(f);
    bool grew = true;
    while (grew) {
      grew = false;
      for (int f : u) {
        if (relevant.count(f)) continue;
        for (int g : relevant) {
          auto dr = sys.drivers(g);
          if (std::find(dr.begin(), dr.end(), f) != dr.end()) {
            relevant.insert(f);
            grew = true;
            break;
          }
        }
      }
    }
    for (int f : sp.w)
      if (!relevant.count(f)) {
        sp.pruned = true;
        sp.reason = sys.factor(f).code + " is not a value factor and drives none in " + term_name(sys, u);
        break;
      }
  }
}

std::string term_name(const FactorSystem& sys, const IndexList& factors) {
  if (factors.empty()) return "ANCHOR";
  IndexList fx, rates;
  for (int f : factors) (sys.factor(f).role == FactorRole::Fx ? fx : rates).push_back(f);
  std::string model, codes;
  for (const auto* group : {&fx, &rates})
    for (int f : *group) {
      model += sys.factor(f).role == FactorRole::Fx ? "BS" : "HW";
      codes += (codes.empty() ? "" : "-") + sys.factor(f).code;
    }
  return model + " " + codes;
}

std::string explain_plan(const DecompositionPlan& plan, const FactorSystem& sys) {
  std::ostringstream os;
  os << "# decomposition plan\n";
  os << "dimension " << plan.dimension() << ", order " << plan.order() << ", base";
  for (int b : plan.base()) os << ' ' << sys.factor(b).code;
  os << "\n\n";
  const int r = static_cast<int>(plan.base().size());
  for (int k = 0; k <= plan.order(); ++k) {
    int kept = 0, pruned = 0;
    for (const auto& sp : plan.surpluses())
      if (static_cast<int>(sp.w.size()) == k) (sp.pruned ? pruned : kept)++;
    os << "surpluses of dimension " << r + k << ": " << kept << " kept, " << pruned << " pruned\n";
    for (const auto& sp : plan.surpluses()) {
      if (static_cast<int>(sp.w.size()) != k) continue;
      os << "  " << (sp.pruned ? "pruned " : "kept   ") << term_name(sys, plan.term_factors(sp.w));
      if (sp.pruned) os << "  (" << sp.reason << ")";
      os << "\n";
    }
  }
  os << "\nterms to solve:\n";
  for (const auto& t : plan.terms())
    os << "  " << (t.multiplicity > 0 ? "+" : "") << t.multiplicity << "  " << term_name(sys, t.factors) << "  ("
       << t.factors.size() << "D)\n";
  return os.str();
}

TermResult evaluate_term(const FactorSystem& sys, const Portfolio& pf, const IndexList& u,
                         const std::vector<double>& dates, const DecompositionConfig& cfg, const SurfaceSink& sink) {
  auto cache = build_option_cache(sys, pf, {u}, dates, cfg, 1);
  return evaluate_term_impl(sys, pf, u, dates, cfg, cache, sink);
}

ExposureProfile assemble_profile(const std::vector<PlanTerm>& terms, const std::vector<TermResult>& results,
                                 const std::string& source) {
  if (terms.size() != results.size() || terms.empty()) throw InvalidArgument("assemble: term/result mismatch");
  ExposureProfile p;
  p.source = source;
  p.times = results[0].times;
  const size_t n = p.times.size();
  p.ee.assign(n, 0.0);
  p.epe.assign(n, 0.0);
  p.ene.assign(n, 0.0);
  for (size_t j = 0; j < terms.size(); ++j) {
    if (results[j].times != p.times) throw InvalidArgument("assemble: terms on different date grids");
    const double m = static_cast<double>(terms[j].multiplicity);
    for (size_t i = 0; i < n; ++i) {
      p.ee[i] += m * results[j].ee[i];
      p.epe[i] += m * results[j].epe[i];
    }
  }
  for (size_t i = 0; i < n; ++i) p.ene[i] = p.ee[i] - p.epe[i];
  return p;
}

DecompositionRun run_decomposition(const FactorSystem& sys, const Portfolio& pf, const std::vector<PlanTerm>& terms,
                                   const std::vector<double>& dates, const DecompositionConfig& cfg,
                                   const SurfaceSink& sink) {
  auto t0 = Clock::now();
  DecompositionRun run;
  run.terms = terms;
  std::vector<IndexList> sets;
  for (const auto& t : terms) sets.push_back(t.factors);
  auto t1 = Clock::now();
  OptionCache cache = build_option_cache(sys, pf, sets, dates, cfg, cfg.threads);
  run.option_seconds = seconds_since(t1);
  run.results.resize(terms.size());
  std::mutex sink_mu;
  SurfaceSink guarded;
  if (sink)
    guarded = [&](const IndexList& u, int i, double t, const MeshND& m, const std::vector<double>& q,
                  const std::vector<double>& v) {
      std::lock_guard<std::mutex> lock(sink_mu);
      sink(u, i, t, m, q, v);
    };
  // largest terms first so the slowest jobs start early
  std::vector<int> order(terms.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return terms[a].factors.size() > terms[b].factors.size(); });
  parallel_for(static_cast<int>(terms.size()), cfg.threads, [&](int j) {
    int i = order[j];
    run.results[i] = evaluate_term_impl(sys, pf, terms[i].factors, dates, cfg, cache, guarded);
  });
  run.profile = assemble_profile(terms, run.results, "pde");
  run.wall_seconds = seconds_since(t0);
  return run;
}

}  // namespace ccx
