#include "engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>
#include <tuple>

#include "ionlag/spectra.hpp"
#include "ionlag/workstats.hpp"

namespace ionlag::app {

namespace {

constexpr double kDeskMaxRatio = 1e3;
constexpr int kDefaultDenseTrunc = 60;
constexpr int kDefaultSpectrumTrunc = 40;

std::string branch_name(Branch b) { return std::string(to_string(b)); }

void append_params(std::vector<Cell>& row, const Job& j) {
  const ReducedParams& rp = j.rp;
  row.insert(row.end(), {Cell{j.spec.thermal->nbar(j.spec.cfg.nu)}, Cell{rp.b_nu}, Cell{rp.b_w0}, Cell{rp.b_Om}, Cell{rp.b_wL}, Cell{j.spec.cfg.nu},
                         Cell{j.spec.cfg.omega0}, Cell{j.spec.cfg.rabi}, Cell{j.spec.cfg.mass}, Cell{j.spec.cfg.phi}});
}

const std::vector<std::string> kParamColumns{"nbar", "b_nu", "b_w0", "b_Om", "b_wL", "nu", "omega0", "omega_rabi", "mass", "phi"};

std::vector<Cell> lead(const Job& j) {
  return {Cell{j.rp.eta}, Cell{static_cast<long>(j.quench.m())}, Cell{branch_name(j.quench.branch())}};
}

}  // namespace

std::vector<Job> expand_jobs(const RunConfig& rc) {
  const std::vector<double> none{std::nan("")};
  const auto& g1 = rc.axis ? rc.axis->values : none;
  const auto& g2 = rc.axis2 ? rc.axis2->values : none;

  std::vector<Job> jobs;
  for (std::size_t p = 0; p < rc.panels.size(); ++p) {
    Settings base = rc.effective;
    for (const auto& [k, v] : rc.panels[p]) base[k] = v;
    for (double a1 : g1) {
      for (double a2 : g2) {
        Settings s = base;
        std::vector<int> ms = rc.ms;
        auto put = [&](const std::optional<Axis>& ax, double v) {
          if (!ax) return;
          if (ax->key == "m") {
            ms = {static_cast<int>(v)};
            return;
          }
          if (ax->key == "nbar") s.erase("beta");
          if (ax->key == "beta") s.erase("nbar");
          s[ax->key] = format_double(v);
        };
        put(rc.axis, a1);
        put(rc.axis2, a2);
        const PointSpec spec = resolve_point(s);

        std::set<std::tuple<int, Branch>> seen;
        for (Branch b : rc.branches) {
          for (int m : ms) {
            if (b == Branch::Carrier && m != 0) continue;
            QuenchSpec q = QuenchSpec::carrier();
            try {
              q = QuenchSpec(m, b);
            } catch (const std::logic_error& e) {
              throw UsageError(e.what());
            }
            if (!seen.insert({q.m(), q.branch()}).second) continue;
            Job j;
            j.index = jobs.size();
            j.spec = spec;
            j.quench = q;
            try {
              j.rp = reduce(spec.cfg, q, *spec.thermal, spec.eta);
            } catch (const std::logic_error& e) {
              throw UsageError(e.what());
            }
            if (rc.desk_scale && j.rp.w0 > kDeskMaxRatio) {
              throw UsageError("desk-scale runs need omega0/nu <= 1e3 (got " + format_double(j.rp.w0) + ")");
            }
            j.policy = rc.policy(q.branch());
            jobs.push_back(std::move(j));
          }
        }
      }
    }
  }
  if (jobs.empty()) throw UsageError("configuration selects no points (carrier needs m = 0)");
  return jobs;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

LagRun run_lag(const RunConfig& rc) {
  const std::vector<Job> jobs = expand_jobs(rc);
  LagRun run;
  run.results.resize(jobs.size());

  // Chunks of consecutive jobs share one batched recurrence when their
  // policies agree; batched and single results are bit-identical.
  constexpr std::size_t kChunk = 4;
  const std::size_t chunks = (jobs.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, rc.threads, [&](std::size_t c) {
    const std::size_t lo = c * kChunk, hi = std::min(jobs.size(), lo + kChunk);
    bool same = true;
    for (std::size_t i = lo + 1; i < hi; ++i) same = same && jobs[i].policy.fixed_terms == jobs[lo].policy.fixed_terms;
    if (same) {
      std::vector<ReducedParams> pts;
      for (std::size_t i = lo; i < hi; ++i) pts.push_back(jobs[i].rp);
      const auto res = nonequilibrium_lag_batch(pts, jobs[lo].policy);
      std::copy(res.begin(), res.end(), run.results.begin() + static_cast<std::ptrdiff_t>(lo));
    } else {
      for (std::size_t i = lo; i < hi; ++i) run.results[i] = nonequilibrium_lag(jobs[i].rp, jobs[i].policy);
    }
  });

  run.table.columns = {"eta", "m", "branch", "L", "N_used", "converged", "tail_bound_log",
                       "divergence_predicted", "low_t_finite", "low_t_limit"};
  run.table.columns.insert(run.table.columns.end(), kParamColumns.begin(), kParamColumns.end());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const LagResult& r = run.results[i];
    std::vector<Cell> row = lead(jobs[i]);
    row.insert(row.end(), {Cell{r.value}, Cell{r.truncation.n_used}, Cell{r.truncation.converged},
                           Cell{r.truncation.tail_bound_log}, Cell{r.regime_flags.divergence_predicted},
                           Cell{r.regime_flags.low_temperature_finite},
                           r.regime_flags.low_temperature_finite ? Cell{r.regime_flags.low_temperature_limit} : Cell{}});
    append_params(row, jobs[i]);
    run.table.rows.push_back(std::move(row));
    run.any_nonconverged = run.any_nonconverged || !r.truncation.converged;
  }
  return run;
}

Table run_moments(const RunConfig& rc) {
  const std::vector<Job> jobs = expand_jobs(rc);
  if (rc.numeric_oracle) {
    for (const Job& j : jobs) {
      if (j.rp.w0 > kDeskMaxRatio) {
        throw UsageError("numeric-oracle needs omega0/nu <= 1e3 (use --desk-scale or smaller omega0)");
      }
    }
  }
  std::vector<std::vector<Cell>> rows(jobs.size());
  parallel_for(jobs.size(), rc.threads, [&](std::size_t i) {
    const Job& j = jobs[i];
    const WorkMoments a = moments_analytic(j.rp);
    std::vector<Cell> row = lead(j);
    row.insert(row.end(), {Cell{a.mean}, Cell{a.second}, Cell{a.third}, Cell{a.skewness}});
    if (rc.numeric_oracle) {
      const int nt = j.policy.fixed_terms.value_or(kDefaultDenseTrunc);
      const NumericMoment n1 = moments_numeric(j.rp, nt, 1, QuenchTarget::Full);
      const NumericMoment n2 = moments_numeric(j.rp, nt, 2, QuenchTarget::Full);
      const NumericMoment n3 = moments_numeric(j.rp, nt, 3, QuenchTarget::Full);
      auto rel = [](double x, double ref) { return ref == 0.0 ? std::fabs(x) : std::fabs(x - ref) / std::fabs(ref); };
      row.insert(row.end(), {Cell{n1.value}, Cell{n2.value}, Cell{n3.value}, Cell{std::fabs(n1.value - a.mean)},
                             Cell{rel(n2.value, a.second)}, Cell{rel(n3.value, a.third)},
                             Cell{n3.cancellation_ratio}, Cell{static_cast<long>(nt)},
                             Cell{n1.thermal_tail_warning || n2.thermal_tail_warning || n3.thermal_tail_warning}});
    }
    append_params(row, j);
    rows[i] = std::move(row);
  });
  Table t;
  t.columns = {"eta", "m", "branch", "mean", "second", "third", "skewness"};
  if (rc.numeric_oracle) {
    t.columns.insert(t.columns.end(), {"numeric_mean", "numeric_second", "numeric_third", "abs_dev_mean",
                                       "rel_dev_second", "rel_dev_third", "cancellation_ratio", "n_trunc",
                                       "thermal_tail_warning"});
  }
  t.columns.insert(t.columns.end(), kParamColumns.begin(), kParamColumns.end());
  t.rows = std::move(rows);
  return t;
}

Table run_spectrum(const RunConfig& rc) {
  const std::vector<Job> jobs = expand_jobs(rc);
  Table t;
  t.columns = {"eta", "m", "branch", "kind", "n", "lower", "upper"};
  for (const Job& j : jobs) {
    const int nt = j.policy.fixed_terms.value_or(kDefaultSpectrumTrunc);
    const SpectrumTable s = spectrum_table(j.rp, nt);
    for (std::size_t n = 0; n < s.edge.size(); ++n) {
      std::vector<Cell> row = lead(j);
      row.insert(row.end(), {Cell{std::string("edge")}, Cell{static_cast<long>(n)}, Cell{s.edge[n]}, Cell{}});
      t.rows.push_back(std::move(row));
    }
    for (std::size_t n = 0; n < s.pairs.size(); ++n) {
      std::vector<Cell> row = lead(j);
      row.insert(row.end(), {Cell{std::string("block")}, Cell{static_cast<long>(n)}, Cell{s.pairs[n][0]}, Cell{s.pairs[n][1]}});
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

}  // namespace ionlag::app
