#include "ccx/ccx.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "ccx/error.hpp"
#include "ccx/metrics.hpp"
#include "ccx/runner.hpp"

struct ccx_config {
  ccx::RunConfig cfg;
};

struct ccx_run {
  ccx::RunConfig cfg;
  ccx::RunOutput out;
};

namespace {

thread_local std::string g_error;

template <class F>
ccx_status guarded(F&& f) {
  g_error.clear();
  try {
    f();
    return CCX_OK;
  } catch (const ccx::InvalidArgument& e) {
    g_error = e.what();
    return CCX_ERR_INVALID_ARGUMENT;
  } catch (const ccx::ConfigError& e) {
    g_error = e.what();
    return CCX_ERR_CONFIG;
  } catch (const ccx::NumericalError& e) {
    g_error = e.what();
    return CCX_ERR_NUMERICAL;
  } catch (const ccx::IoError& e) {
    g_error = e.what();
    return CCX_ERR_IO;
  } catch (const std::exception& e) {
    g_error = e.what();
    return CCX_ERR_INTERNAL;
  } catch (...) {
    g_error = "unknown error";
    return CCX_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw ccx::InvalidArgument(std::string(what) + " is null");
}

std::vector<double> span(const double* p, size_t n, const char* what) {
  need(p, what);
  return {p, p + n};
}

}  // namespace

extern "C" {

const char* ccx_version(void) { return "1.0.0"; }

const char* ccx_last_error(void) { return g_error.c_str(); }

ccx_status ccx_config_create(ccx_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ccx_config();
  });
}

void ccx_config_destroy(ccx_config* cfg) { delete cfg; }

ccx_status ccx_config_set(ccx_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
  });
}

ccx_status ccx_config_validate(const ccx_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    cfg->cfg.validate();
  });
}

ccx_status ccx_explain_plan(const ccx_config* cfg, char* buf, size_t capacity, size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    const std::string text = ccx::explain_run_plan(cfg->cfg);
    if (needed) *needed = text.size() + 1;
    if (!buf && capacity == 0 && needed) return;
    need(buf, "buffer");
    if (capacity < text.size() + 1) throw ccx::InvalidArgument("buffer too small for the plan text");
    std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

ccx_status ccx_run_execute(const ccx_config* cfg, ccx_run** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    auto run = std::make_unique<ccx_run>();
    run->cfg = cfg->cfg;
    run->out = ccx::execute_run(run->cfg);
    *out = run.release();
  });
}

void ccx_run_destroy(ccx_run* run) { delete run; }

ccx_status ccx_run_size(const ccx_run* run, size_t* n) {
  return guarded([&] {
    need(run, "run");
    need(n, "n");
    *n = run->out.profile.times.size();
  });
}

ccx_status ccx_run_column(const ccx_run* run, const char* name, double* out, size_t capacity) {
  return guarded([&] {
    need(run, "run");
    need(name, "name");
    need(out, "out");
    const auto& p = run->out.profile;
    const std::string c = name;
    const std::vector<double>* col = c == "t"        ? &p.times
                                     : c == "EE"     ? &p.ee
                                     : c == "EPE"    ? &p.epe
                                     : c == "ENE"    ? &p.ene
                                     : c == "SE_EE"  ? &p.se_ee
                                     : c == "SE_EPE" ? &p.se_epe
                                                     : nullptr;
    if (!col) throw ccx::InvalidArgument("unknown column '" + c + "'");
    if (col->empty() && !p.times.empty()) throw ccx::InvalidArgument("column '" + c + "' is not available for this run");
    if (capacity < col->size()) throw ccx::InvalidArgument("buffer too small for column '" + c + "'");
    std::copy(col->begin(), col->end(), out);
  });
}

ccx_status ccx_run_scalar(const ccx_run* run, const char* name, double* out) {
  return guarded([&] {
    need(run, "run");
    need(name, "name");
    need(out, "out");
    const std::string s = name;
    if (s == "notional_total") {
      *out = run->out.notional_total;
    } else if (s == "reduction_ee" || s == "reduction_epe") {
      if (!run->out.cv) throw ccx::InvalidArgument("'" + s + "' needs a control-variate run");
      *out = s == "reduction_ee" ? run->out.cv->reduction_factor_ee() : run->out.cv->reduction_factor_epe();
    } else if (s == "seconds") {
      *out = run->out.timings.empty() ? 0.0 : run->out.timings.back().seconds;
    } else {
      throw ccx::InvalidArgument("unknown scalar '" + s + "'");
    }
  });
}

ccx_status ccx_run_write(const ccx_run* run, const char* dir) {
  return guarded([&] {
    need(run, "run");
    need(dir, "dir");
    ccx::write_run_artifacts(run->out, run->cfg, dir);
  });
}

ccx_status ccx_metric_e_l2(const double* candidate, const double* reference, size_t n, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ccx::e_l2(span(candidate, n, "candidate"), span(reference, n, "reference"));
  });
}

ccx_status ccx_metric_e_linf(const double* candidate, const double* reference, size_t n, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ccx::e_linf(span(candidate, n, "candidate"), span(reference, n, "reference"));
  });
}

ccx_status ccx_metric_mean_difference(const double* candidate, const double* reference, const double* times,
                                      size_t n, double notional_total, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ccx::mean_difference(span(candidate, n, "candidate"), span(reference, n, "reference"),
                                span(times, n, "times"), notional_total);
  });
}

ccx_status ccx_metric_se(const double* se, const double* reference, size_t n, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ccx::se_profile(span(se, n, "se"), span(reference, n, "reference"));
  });
}

ccx_status ccx_compare_files(const char* candidate, const char* reference, double notional_total,
                             const char* case_name, const char* method, const char* out_csv) {
  return guarded([&] {
    need(candidate, "candidate");
    need(reference, "reference");
    need(out_csv, "out_csv");
    ccx::compare_profile_files(candidate, reference, notional_total, case_name ? case_name : "",
                               method ? method : "", out_csv);
  });
}

}  // extern "C"
