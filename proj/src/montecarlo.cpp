#include "ccx/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ccx/error.hpp"
#include "parallel.hpp"

namespace ccx {

namespace {

using Clock = std::chrono::steady_clock;

// Per-step time-only data shared by all paths: coefficients averaged over the step and the anchor at its end.
struct StepTable {
  int steps = 0;
  double dt = 0.0, sqdt = 0.0;
  std::vector<TimeSlice> slices;             // step n covers [t_n, t_{n+1}]
  std::vector<std::vector<double>> anchor;   // xi(t_n), n = 0..steps
  std::vector<int> obs_of_step;              // observation index at step n, or -1
};

StepTable make_steps(const FactorSystem& sys, double horizon, int steps, const std::vector<double>& times) {
  if (steps < 1 || !(horizon > 0.0)) throw ConfigError("Monte Carlo needs a positive horizon and step count");
  StepTable tab;
  tab.steps = steps;
  tab.dt = horizon / steps;
  tab.sqdt = std::sqrt(tab.dt);
  tab.slices.reserve(steps);
  for (int n = 0; n < steps; ++n) tab.slices.push_back(sys.slice_average((n + 0.5) * tab.dt, tab.dt));
  tab.anchor.resize(steps + 1, std::vector<double>(sys.dimension()));
  for (int n = 0; n <= steps; ++n) sys.anchor().state(std::min(n * tab.dt, sys.horizon()), tab.anchor[n]);
  tab.obs_of_step.assign(steps + 1, -1);
  for (size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const long n = std::lround(t / tab.dt);
    if (n < 0 || n > steps || std::abs(n * tab.dt - t) > 1e-9 * std::max(1.0, horizon)) {
      std::ostringstream os;
      os << "observation time " << t << " is not on the Monte Carlo step grid (step " << tab.dt << ")";
      throw ConfigError(os.str());
    }
    if (i > 0 && !(t > times[i - 1])) throw ConfigError("observation times must be increasing");
    tab.obs_of_step[n] = static_cast<int>(i);
  }
  return tab;
}

// One Euler step of the coordinates in u (all coordinates when u is null); the complement is reset to the anchor.
void euler_step(const FactorSystem& sys, const StepTable& tab, int n, const IndexList* u, const double* z,
                std::vector<double>& x, std::vector<double>& mu, std::vector<double>& sig) {
  const TimeSlice& s = tab.slices[n];
  const int d = sys.dimension();
  if (!u) {
    for (int i = 0; i < d; ++i) {
      mu[i] = sys.drift(i, x.data(), s);
      sig[i] = sys.vol(i, x.data(), s);
    }
    for (int i = 0; i < d; ++i) x[i] += mu[i] * tab.dt + sig[i] * tab.sqdt * z[i];
    return;
  }
  const size_t k = u->size();
  for (size_t p = 0; p < k; ++p) {
    const int i = (*u)[p];
    mu[p] = sys.drift(i, x.data(), s);
    sig[p] = sys.vol(i, x.data(), s);
  }
  for (size_t p = 0; p < k; ++p) {
    const int i = (*u)[p];
    mu[p] = x[i] + mu[p] * tab.dt + sig[p] * tab.sqdt * z[i];
  }
  std::copy(tab.anchor[n + 1].begin(), tab.anchor[n + 1].end(), x.begin());
  for (size_t p = 0; p < k; ++p) x[(*u)[p]] = mu[p];
}

bool covers_all(const FactorSystem& sys, const IndexList& u) { return static_cast<int>(u.size()) == sys.dimension(); }

IndexList all_factors(const FactorSystem& sys) {
  IndexList a(sys.dimension());
  for (int i = 0; i < sys.dimension(); ++i) a[i] = i;
  return a;
}

// Simulates one track (full or sub-process) of one path and records the observations.
void simulate_track(const FactorSystem& sys, const StepTable& tab, const Eigen::MatrixXd& root, std::uint64_t seed,
                    long path, std::uint64_t stream, const IndexList* u, const IndexList& stored, double* states,
                    double* discount) {
  const int d = sys.dimension();
  const int dom = sys.domestic_index();
  NoiseStream noise(root, seed, path, stream);
  std::vector<double> x = tab.anchor[0], z(d), mu(d), sig(d);
  double integral = 0.0;
  auto record = [&](int n) {
    const int o = tab.obs_of_step[n];
    if (o < 0) return;
    for (size_t q = 0; q < stored.size(); ++q) states[o * stored.size() + q] = x[stored[q]];
    discount[o] = std::exp(-integral);
  };
  record(0);
  for (int n = 0; n < tab.steps; ++n) {
    noise.next(z.data());
    const double r0 = x[dom];
    euler_step(sys, tab, n, u, z.data(), x, mu, sig);
    integral += 0.5 * tab.dt * (r0 + x[dom]);
    record(n + 1);
  }
}

PathSet simulate_impl(const FactorSystem& sys, const SimulationConfig& cfg, const IndexList& factors) {
  if (cfg.paths < 1) throw ConfigError("Monte Carlo needs at least one path");
  std::vector<double> times = cfg.times;
  if (times.empty())
    for (int n = 0; n <= cfg.steps; ++n) times.push_back(cfg.horizon * n / cfg.steps);
  const StepTable tab = make_steps(sys, cfg.horizon, cfg.steps, times);
  PathSet ps;
  ps.system = &sys;
  ps.seed = cfg.seed;
  ps.stream = cfg.stream;
  ps.paths = cfg.paths;
  ps.steps = cfg.steps;
  ps.horizon = cfg.horizon;
  ps.factors = factors;
  ps.stored = cfg.store.empty() ? all_factors(sys) : cfg.store;
  for (int f : ps.stored)
    if (f < 0 || f >= sys.dimension()) throw InvalidArgument("stored factor out of range");
  ps.times = times;
  const size_t nt = times.size(), ns = ps.stored.size();
  ps.states.assign(cfg.paths * nt * ns, 0.0);
  ps.discount.assign(cfg.paths * nt, 0.0);
  const Eigen::MatrixXd root = correlation_sqrt(sys.correlation());
  const IndexList* u = covers_all(sys, factors) ? nullptr : &ps.factors;
  const long batch = 256;
  const long nb = (cfg.paths + batch - 1) / batch;
  detail::parallel_for(nb, cfg.threads, [&](long b) {
    for (long p = b * batch; p < std::min(cfg.paths, (b + 1) * batch); ++p)
      simulate_track(sys, tab, root, cfg.seed, p, cfg.stream, u, ps.stored, &ps.states[p * nt * ns],
                     &ps.discount[p * nt]);
  });
  return ps;
}

// Running mean and co-moments of a pair (x, y); merges are exact (pairwise update).
struct CoMoments {
  double n = 0, mx = 0, my = 0, cxx = 0, cyy = 0, cxy = 0;

  void add(double x, double y) {
    n += 1.0;
    const double dx = x - mx, dy = y - my;
    mx += dx / n;
    my += dy / n;
    cxx += dx * (x - mx);
    cyy += dy * (y - my);
    cxy += dx * (y - my);
  }
  void merge(const CoMoments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double N = n + o.n, dx = o.mx - mx, dy = o.my - my, f = n * o.n / N;
    mx += dx * o.n / N;
    my += dy * o.n / N;
    cxx += o.cxx + dx * dx * f;
    cyy += o.cyy + dy * dy * f;
    cxy += o.cxy + dx * dy * f;
    n = N;
  }
};

struct DateMoments {
  std::vector<CoMoments> ee, epe;
};

DateMoments stream_paths(const Portfolio& pf, const std::vector<double>& dates, const ExposureMcConfig& cfg,
                         const std::vector<SampledTerm>& terms, const OptionPricer& options) {
  const FactorSystem& sys = pf.system();
  if (dates.empty()) throw ConfigError("no exposure dates");
  if (cfg.paths < 2) throw ConfigError("Monte Carlo exposure needs at least two paths");
  if (pf.has_options() && !options) throw ConfigError("portfolio holds options but no option pricer was given");
  const StepTable tab = make_steps(sys, dates.back(), cfg.steps, dates);
  const Eigen::MatrixXd root = correlation_sqrt(sys.correlation());
  const int d = sys.dimension();
  const IndexList all = all_factors(sys);

  // distinct tracks; track 0 is the full path on stream 0
  std::vector<IndexList> track_factors{all};
  std::vector<std::uint64_t> track_stream{0};
  std::vector<std::pair<int, double>> term_track;  // (track, coefficient) per sampled term
  for (const auto& st : terms) {
    IndexList u = make_index_set(st.factors);
    int found = -1;
    for (size_t j = 0; j < track_factors.size(); ++j)
      if (track_factors[j] == u && track_stream[j] == st.stream) found = static_cast<int>(j);
    if (found < 0) {
      found = static_cast<int>(track_factors.size());
      track_factors.push_back(u);
      track_stream.push_back(st.stream);
    }
    term_track.emplace_back(found, st.coefficient);
  }
  const int ntr = static_cast<int>(track_factors.size());
  std::vector<std::uint64_t> streams;
  for (auto s : track_stream)
    if (std::find(streams.begin(), streams.end(), s) == streams.end()) streams.push_back(s);

  std::vector<Portfolio::Snapshot> snaps;
  for (double t : dates) snaps.push_back(pf.snapshot(t));
  const size_t nd = dates.size();

  const long batch = std::max<long>(1, cfg.batch);
  const long nb = (cfg.paths + batch - 1) / batch;
  std::vector<DateMoments> parts(nb);
  detail::parallel_for(nb, cfg.threads, [&](long b) {
    DateMoments& acc = parts[b];
    acc.ee.assign(nd, {});
    acc.epe.assign(nd, {});
    std::vector<std::vector<double>> x(ntr), z(streams.size(), std::vector<double>(d));
    std::vector<double> mu(d), sig(d), value(ntr);
    for (long p = b * batch; p < std::min(cfg.paths, (b + 1) * batch); ++p) {
      std::vector<NoiseStream> noise;
      for (auto s : streams) noise.emplace_back(root, cfg.seed, p, s);
      for (int j = 0; j < ntr; ++j) x[j] = tab.anchor[0];
      auto observe = [&](int n) {
        const int o = tab.obs_of_step[n];
        if (o < 0) return;
        for (int j = 0; j < ntr; ++j) {
          const auto& u = track_factors[j];
          OptionValueSource src;
          if (options) src = [&](int k, const double* xs, double) { return options(k, o, xs, u); };
          value[j] = pf.value(snaps[o], x[j].data(), src);
        }
        double rs_ee = 0.0, rs_epe = 0.0;
        for (const auto& [j, c] : term_track) {
          rs_ee += c * value[j];
          rs_epe += c * std::max(value[j], 0.0);
        }
        acc.ee[o].add(value[0], rs_ee);
        acc.epe[o].add(std::max(value[0], 0.0), rs_epe);
      };
      observe(0);
      for (int n = 0; n < tab.steps; ++n) {
        for (size_t s = 0; s < streams.size(); ++s) noise[s].next(z[s].data());
        for (int j = 0; j < ntr; ++j) {
          const size_t s = std::find(streams.begin(), streams.end(), track_stream[j]) - streams.begin();
          const bool full = covers_all(sys, track_factors[j]);
          euler_step(sys, tab, n, full ? nullptr : &track_factors[j], z[s].data(), x[j], mu, sig);
        }
        observe(n + 1);
      }
    }
  });
  DateMoments total;
  total.ee.assign(nd, {});
  total.epe.assign(nd, {});
  for (const auto& part : parts)
    for (size_t i = 0; i < nd; ++i) {
      total.ee[i].merge(part.ee[i]);
      total.epe[i].merge(part.epe[i]);
    }
  return total;
}

ExposureProfile plain_from(const DateMoments& m, const std::vector<double>& dates) {
  ExposureProfile p;
  p.source = "mc";
  p.times = dates;
  for (size_t i = 0; i < dates.size(); ++i) {
    const double n = m.ee[i].n;
    p.ee.push_back(m.ee[i].mx);
    p.epe.push_back(m.epe[i].mx);
    p.ene.push_back(m.ee[i].mx - m.epe[i].mx);
    p.se_ee.push_back(std::sqrt(std::max(0.0, m.ee[i].cxx / (n - 1)) / n));
    p.se_epe.push_back(std::sqrt(std::max(0.0, m.epe[i].cxx / (n - 1)) / n));
  }
  return p;
}

struct CvColumn {
  double estimate, alpha, var_plain, var_cv, ratio, approx, sampled;
  bool degenerate;
};

CvColumn cv_column(const CoMoments& m, double reference) {
  const double n = m.n;
  CvColumn c{};
  const double sigma2 = m.cyy / n + (m.my - reference) * (m.my - reference);
  const double rho = m.cxy / n;
  const double scale = std::max({1.0, std::abs(reference), std::abs(m.mx)});
  c.degenerate = sigma2 <= 1e-24 * scale * scale;
  c.alpha = c.degenerate ? 1.0 : rho / sigma2;
  c.estimate = m.mx - c.alpha * (m.my - reference);
  c.var_plain = m.cxx / (n - 1);
  c.var_cv = std::max(0.0, (m.cxx - 2 * c.alpha * m.cxy + c.alpha * c.alpha * m.cyy) / (n - 1));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  c.ratio = c.var_plain > 0.0 ? c.var_cv / c.var_plain : nan;
  c.approx = (m.cxx > 0.0 && m.cyy > 0.0) ? 1.0 - m.cxy / std::sqrt(m.cxx * m.cyy) : nan;
  c.sampled = m.my;
  return c;
}

double reduction_factor(const std::vector<double>& plain, const std::vector<double>& cv) {
  double a = 0.0, b = 0.0;
  for (size_t i = 0; i < plain.size(); ++i)
    if (plain[i] > 0.0) {
      a += plain[i];
      b += cv[i];
    }
  if (a == 0.0) return 1.0;
  return b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
}

}  // namespace

Eigen::MatrixXd correlation_sqrt(const CorrelationMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho.matrix());
  if (es.info() != Eigen::Success) throw NumericalError("correlation eigen decomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol) throw NumericalError("correlation matrix is not positive semidefinite");
    ev(i) = std::sqrt(std::max(0.0, ev(i)));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

NoiseStream::NoiseStream(const Eigen::MatrixXd& sqrt_rho, std::uint64_t seed, long path, std::uint64_t stream)
    : s_(&sqrt_rho), eps_(sqrt_rho.rows()) {
  const auto p = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

void NoiseStream::next(double* z) {
  for (int i = 0; i < eps_.size(); ++i) eps_(i) = normal_(engine_);
  Eigen::Map<Eigen::VectorXd>(z, eps_.size()).noalias() = (*s_) * eps_;
}

double PathSet::state(long path, int time, int factor) const {
  auto it = std::find(stored.begin(), stored.end(), factor);
  if (it == stored.end()) throw InvalidArgument("factor was not stored in the path set");
  const size_t q = it - stored.begin();
  return states[(path * times.size() + time) * stored.size() + q];
}

PathSet simulate_paths(const FactorSystem& sys, const SimulationConfig& cfg) {
  return simulate_impl(sys, cfg, all_factors(sys));
}

PathSet subprocess_paths(const PathSet& full, const IndexList& u, int threads) {
  if (!full.system) throw InvalidArgument("empty path set");
  const FactorSystem& sys = *full.system;
  IndexList uu = make_index_set(u);
  for (int f : uu)
    if (f < 0 || f >= sys.dimension()) throw InvalidArgument("sub-process factor out of range");
  SimulationConfig cfg;
  cfg.paths = full.paths;
  cfg.steps = full.steps;
  cfg.horizon = full.horizon;
  cfg.seed = full.seed;
  cfg.stream = full.stream;
  cfg.times = full.times;
  cfg.store = full.stored;
  cfg.threads = threads;
  return simulate_impl(sys, cfg, uu);
}

ExposureProfile plain_exposure(const PathSet& paths, const Portfolio& pf, const OptionPricer& options) {
  const FactorSystem& sys = pf.system();
  if (paths.system != &sys) throw InvalidArgument("path set and portfolio use different systems");
  if (static_cast<int>(paths.stored.size()) != sys.dimension())
    throw InvalidArgument("plain exposure needs path sets storing every factor");
  if (pf.has_options() && !options) throw ConfigError("portfolio holds options but no option pricer was given");
  const int nt = paths.time_count(), d = sys.dimension();
  ExposureProfile prof;
  prof.source = "mc";
  prof.times = paths.times;
  std::vector<double> x(d);
  for (int i = 0; i < nt; ++i) {
    const auto snap = pf.snapshot(paths.times[i]);
    CoMoments ee, epe;
    OptionValueSource src;
    if (options) src = [&](int k, const double* xs, double) { return options(k, i, xs, paths.factors); };
    for (long p = 0; p < paths.paths; ++p) {
      for (int q = 0; q < d; ++q) x[paths.stored[q]] = paths.states[(p * nt + i) * d + q];
      const double v = pf.value(snap, x.data(), src);
      ee.add(v, 0.0);
      epe.add(std::max(v, 0.0), 0.0);
    }
    const double n = ee.n;
    prof.ee.push_back(ee.mx);
    prof.epe.push_back(epe.mx);
    prof.ene.push_back(ee.mx - epe.mx);
    prof.se_ee.push_back(n > 1 ? std::sqrt(ee.cxx / (n - 1) / n) : 0.0);
    prof.se_epe.push_back(n > 1 ? std::sqrt(epe.cxx / (n - 1) / n) : 0.0);
  }
  return prof;
}

double RegressionFit::value(int i, const double* x) const {
  if (i < 0 || i >= static_cast<int>(times.size())) throw InvalidArgument("regression time index out of range");
  if (i + 1 == static_cast<int>(times.size())) return fx_option_payoff(option, x[fx]);
  const auto& b = beta[i];
  const double F = x[fx], a = x[rd], c = x[rf];
  return b[0] + b[1] * F + b[2] * a + b[3] * c + b[4] * F * a + b[5] * F * c + b[6] * a * c;
}

int RegressionFit::index_of(double t) const {
  for (size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, t)) return static_cast<int>(i);
  return -1;
}

RegressionResult regression_value(const PathSet& paths, const Portfolio& pf, int k) {
  const FactorSystem& sys = pf.system();
  if (paths.system != &sys) throw InvalidArgument("path set and portfolio use different systems");
  if (!pf.is_option(k)) throw InvalidArgument("regression: instrument " + pf.label(k) + " is not an option");
  const auto& opt = std::get<FxOptionContract>(pf.instrument(k));
  RegressionResult res;
  RegressionFit& fit = res.fit;
  fit.instrument = k;
  fit.option = opt;
  fit.fx = sys.fx_index(opt.pair);
  fit.rd = sys.domestic_index();
  fit.rf = sys.foreign_rate_index(opt.pair);
  int im = -1;
  for (int i = 0; i < paths.time_count(); ++i)
    if (std::abs(paths.times[i] - opt.maturity) <= 1e-9 * std::max(1.0, opt.maturity)) im = i;
  if (im < 0) throw ConfigError("regression: option maturity is not a path-set time");
  if (paths.times[0] != 0.0) throw ConfigError("regression: path-set times must start at 0");
  fit.times.assign(paths.times.begin(), paths.times.begin() + im + 1);
  fit.beta.assign(im, {});
  fit.ridge.assign(im, 0);
  const long N = paths.paths;
  const int nt = im + 1;
  res.values.assign(N * nt, 0.0);

  std::vector<double> Y(N);
  for (long p = 0; p < N; ++p) {
    Y[p] = fx_option_payoff(opt, paths.state(p, im, fit.fx));
    res.values[p * nt + im] = Y[p];
  }
  auto basis = [&](long p, int i, double* psi) {
    const double F = paths.state(p, i, fit.fx), a = paths.state(p, i, fit.rd), c = paths.state(p, i, fit.rf);
    psi[0] = F;
    psi[1] = a;
    psi[2] = c;
    psi[3] = F * a;
    psi[4] = F * c;
    psi[5] = a * c;
  };
  for (int i = im - 1; i >= 0; --i) {
    for (long p = 0; p < N; ++p) Y[p] *= paths.discount_factor(p, i + 1) / paths.discount_factor(p, i);
    // standardised design: centred columns scaled to unit variance, constant handled by the mean
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(6), sd = Eigen::VectorXd::Zero(6);
    double ymean = 0.0;
    double psi[6];
    for (long p = 0; p < N; ++p) {
      basis(p, i, psi);
      for (int j = 0; j < 6; ++j) mean(j) += psi[j];
      ymean += Y[p];
    }
    mean /= static_cast<double>(N);
    ymean /= static_cast<double>(N);
    for (long p = 0; p < N; ++p) {
      basis(p, i, psi);
      for (int j = 0; j < 6; ++j) sd(j) += (psi[j] - mean(j)) * (psi[j] - mean(j));
    }
    std::vector<char> active(6);
    int n_active = 0;
    for (int j = 0; j < 6; ++j) {
      sd(j) = std::sqrt(sd(j) / N);
      active[j] = sd(j) > 1e-12 * std::max(1.0, std::abs(mean(j)));
      n_active += active[j];
    }
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(6, 6);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(6);
    double zr[6];
    for (long p = 0; p < N; ++p) {
      basis(p, i, psi);
      for (int j = 0; j < 6; ++j) zr[j] = active[j] ? (psi[j] - mean(j)) / sd(j) : 0.0;
      for (int j = 0; j < 6; ++j) {
        h(j) += zr[j] * (Y[p] - ymean);
        for (int l = 0; l <= j; ++l) G(j, l) += zr[j] * zr[l];
      }
    }
    for (int j = 0; j < 6; ++j)
      for (int l = 0; l < j; ++l) G(l, j) = G(j, l);
    G /= static_cast<double>(N);
    h /= static_cast<double>(N);
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(6);
    if (n_active > 0) {
      // constant columns are dropped; the design is deficient when the active block is (nearly) collinear
      std::vector<int> idx;
      for (int j = 0; j < 6; ++j)
        if (active[j]) idx.push_back(j);
      Eigen::MatrixXd Ga(n_active, n_active);
      for (int a = 0; a < n_active; ++a)
        for (int c = 0; c < n_active; ++c) Ga(a, c) = G(idx[a], idx[c]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ga, Eigen::EigenvaluesOnly);
      const bool deficient = es.eigenvalues().minCoeff() <= 1e-10;
      if (deficient) {
        // inactive columns are zero rows of G; the ridge keeps the system solvable
        const double ridge = 1e-8;
        Eigen::MatrixXd A = G + ridge * Eigen::MatrixXd::Identity(6, 6);
        gamma = A.ldlt().solve(h);
        fit.ridge[i] = 1;
        ++res.ridge_count;
      } else {
        Eigen::VectorXd ha(n_active);
        for (int a = 0; a < n_active; ++a) ha(a) = h(idx[a]);
        Eigen::VectorXd ga = Ga.ldlt().solve(ha);
        for (int a = 0; a < n_active; ++a) gamma(idx[a]) = ga(a);
      }
    }
    auto& b = fit.beta[i];
    b.fill(0.0);
    b[0] = ymean;
    for (int j = 0; j < 6; ++j)
      if (active[j]) {
        b[j + 1] = gamma(j) / sd(j);
        b[0] -= b[j + 1] * mean(j);
      }
    for (long p = 0; p < N; ++p) {
      basis(p, i, psi);
      double v = b[0];
      for (int j = 0; j < 6; ++j) v += b[j + 1] * psi[j];
      Y[p] = v;
      res.values[p * nt + i] = v;
    }
  }
  fit.price = res.values[0];
  return res;
}

std::vector<SampledTerm> sampled_terms(const DecompositionPlan& plan, SharedPaths mode) {
  std::vector<SampledTerm> out;
  if (mode == SharedPaths::Global) {
    for (const auto& t : plan.terms()) out.push_back({t.factors, static_cast<double>(t.multiplicity), 0});
    return out;
  }
  std::uint64_t stream = 0;
  for (const auto& sp : plan.surpluses()) {
    if (sp.pruned) continue;
    ++stream;
    for (const auto& t : plan.expand(sp.w)) out.push_back({t.factors, static_cast<double>(t.multiplicity), stream});
  }
  return out;
}

ExposureProfile CvEstimate::profile() const {
  ExposureProfile p;
  p.source = "mc-cv";
  p.times = times;
  p.ee = ee;
  p.epe = epe;
  for (size_t i = 0; i < ee.size(); ++i) p.ene.push_back(ee[i] - epe[i]);
  p.se_ee = se_ee;
  p.se_epe = se_epe;
  return p;
}

double CvEstimate::reduction_factor_ee() const { return reduction_factor(var_plain_ee, var_cv_ee); }
double CvEstimate::reduction_factor_epe() const { return reduction_factor(var_plain_epe, var_cv_epe); }

ExposureMcResult plain_exposure(const Portfolio& pf, const std::vector<double>& dates, const ExposureMcConfig& cfg,
                                const OptionPricer& options) {
  auto t0 = Clock::now();
  ExposureMcResult res;
  res.plain = plain_from(stream_paths(pf, dates, cfg, {}, options), dates);
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

ExposureMcResult control_variate_exposure(const Portfolio& pf, const std::vector<double>& dates,
                                          const ExposureMcConfig& cfg, const std::vector<SampledTerm>& terms,
                                          const ExposureProfile& reference, const OptionPricer& options) {
  if (terms.empty()) throw ConfigError("control variate needs at least one sampled term");
  if (reference.times.size() != dates.size()) throw ConfigError("control variate: reference profile has other dates");
  for (size_t i = 0; i < dates.size(); ++i)
    if (std::abs(reference.times[i] - dates[i]) > 1e-9 * std::max(1.0, dates[i]))
      throw ConfigError("control variate: reference profile has other dates");
  auto t0 = Clock::now();
  const DateMoments m = stream_paths(pf, dates, cfg, terms, options);
  ExposureMcResult res;
  res.plain = plain_from(m, dates);
  CvEstimate& cv = res.cv;
  cv.times = dates;
  for (size_t i = 0; i < dates.size(); ++i) {
    const CvColumn e = cv_column(m.ee[i], reference.ee[i]);
    const CvColumn p = cv_column(m.epe[i], reference.epe[i]);
    const double n = m.ee[i].n;
    cv.ee.push_back(e.estimate);
    cv.epe.push_back(p.estimate);
    cv.se_ee.push_back(std::sqrt(e.var_cv / n));
    cv.se_epe.push_back(std::sqrt(p.var_cv / n));
    cv.alpha_ee.push_back(e.alpha);
    cv.alpha_epe.push_back(p.alpha);
    cv.var_plain_ee.push_back(e.var_plain);
    cv.var_plain_epe.push_back(p.var_plain);
    cv.var_cv_ee.push_back(e.var_cv);
    cv.var_cv_epe.push_back(p.var_cv);
    cv.ratio_ee.push_back(e.ratio);
    cv.ratio_epe.push_back(p.ratio);
    cv.approx_ratio_ee.push_back(e.approx);
    cv.approx_ratio_epe.push_back(p.approx);
    cv.sampled_ee.push_back(e.sampled);
    cv.sampled_epe.push_back(p.sampled);
    for (const auto* c : {&e, &p})
      if (c->degenerate && c->var_plain > 0.0) {
        ++cv.degenerate;
        std::ostringstream os;
        os << "control variate has zero variance at t = " << dates[i] << "; alpha set to 1";
        cv.warnings.push_back(os.str());
      }
  }
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

DefaultCurve::DefaultCurve(std::vector<double> times, std::vector<double> cumulative)
    : t_(std::move(times)), pd_(std::move(cumulative)) {
  if (t_.empty() || t_.size() != pd_.size()) throw InvalidArgument("default curve needs matching times and PDs");
  for (size_t i = 0; i < t_.size(); ++i) {
    if (pd_[i] < 0.0 || pd_[i] > 1.0) throw InvalidArgument("default probabilities must lie in [0, 1]");
    if (i > 0 && (!(t_[i] > t_[i - 1]) || pd_[i] < pd_[i - 1]))
      throw InvalidArgument("default curve must be increasing in time and nondecreasing in probability");
  }
}

DefaultCurve DefaultCurve::from_hazard(double hazard, double horizon, int points) {
  if (hazard < 0.0 || !(horizon > 0.0) || points < 1) throw InvalidArgument("invalid hazard-rate curve");
  std::vector<double> t, pd;
  for (int i = 0; i <= points; ++i) {
    t.push_back(horizon * i / points);
    pd.push_back(1.0 - std::exp(-hazard * t.back()));
  }
  return DefaultCurve(t, pd);
}

double DefaultCurve::operator()(double t) const {
  if (t <= t_.front()) return pd_.front();
  if (t >= t_.back()) return pd_.back();
  size_t j = std::upper_bound(t_.begin(), t_.end(), t) - t_.begin();
  const double w = (t - t_[j - 1]) / (t_[j] - t_[j - 1]);
  return pd_[j - 1] + w * (pd_[j] - pd_[j - 1]);
}

double cva(const ExposureProfile& profile, const DefaultCurve& pd, double recovery,
           const std::function<double(double)>& discount) {
  if (recovery < 0.0 || recovery > 1.0) throw InvalidArgument("recovery rate must lie in [0, 1]");
  if (profile.times.size() != profile.epe.size()) throw InvalidArgument("profile lengths differ");
  double sum = 0.0;
  for (size_t i = 1; i < profile.times.size(); ++i) {
    const double t = profile.times[i];
    sum += discount(t) * profile.epe[i] * (pd(t) - pd(profile.times[i - 1]));
  }
  return (1.0 - recovery) * sum;
}

}  // namespace ccx
