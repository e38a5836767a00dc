#include "mfg/experiment.hpp"

#include <chrono>
#include <cstdio>

#include "mfg/csv.hpp"
#include "mfg/ensemble.hpp"

namespace mfg {

using nlohmann::json;

std::vector<ModelParams> sweep_points(const RunConfig& c) {
  std::vector<ModelParams> out;
  for (double g : c.sweep.gamma_pen) {
    for (double l : c.sweep.lambda) {
      for (double r : c.sweep.rho) {
        ModelParams p = c.model;
        p.gamma_pen = g;
        p.lambda = l;
        p.rho = r;
        out.push_back(p);
      }
    }
  }
  return out;
}

std::uint64_t repetition_seed(const RunConfig& c, std::uint64_t base, std::size_t point, int rep) {
  const auto r = static_cast<std::uint64_t>(rep);
  if (c.flags.common_random_numbers) return base + r;
  return base + point * static_cast<std::uint64_t>(c.repetitions) + r;
}

PointResult run_point(const RunConfig& c, const ModelParams& params, std::size_t point_index,
                      std::uint64_t base_seed) {
  validate(params);
  PointResult out;
  out.params = params;
  const GridSpec grid = make_grid(params.T, params.n);
  SimulationOptions sim;
  sim.memory_budget_bytes = c.memory_budget_mb << 20;
  SolveOptions solve_opts;
  solve_opts.features = c.features;
  solve_opts.keep_history = true;

  std::vector<PriceDecomposition> prices;
  std::vector<double> psi_means;
  for (int r = 0; r < c.repetitions; ++r) {
    ModelParams p = params;
    p.seed = repetition_seed(c, base_seed, point_index, r);
    PathEnsemble e;
    if (r == 0 && c.ensemble_file) {
      e = load_ensemble(*c.ensemble_file, p, grid);
    } else {
      e = simulate_paths(p, grid, sim);
      if (c.flags.antithetic) e = antithetic_extend(e, p, grid);
    }
    SolveResult sol = solve(e, p, grid, solve_opts);
    RepetitionResult rep;
    rep.seed = p.seed;
    rep.prices = price_components(e, sol.xi, sol.models, p, grid);
    EmissionDistribution em = total_emissions(e, sol.models, p, grid);
    rep.psi_mean = stats::mean_se(em.samples).mean;
    out.reps.push_back(rep);
    prices.push_back(rep.prices);
    psi_means.push_back(rep.psi_mean);
    if (r == 0) {
      out.curve = expected_emission_curve(e, sol.xi, sol.models, p, grid);
      out.emissions = std::move(em);
      out.solution = std::move(sol);
    }
  }
  out.combined = combine_repetitions(prices);
  out.psi_mean = stats::mean_se(psi_means);
  if (c.flags.oracle_crosscheck) {
    OracleOptions o;
    o.nodes = c.oracle_nodes;
    o.memory_budget_bytes = c.memory_budget_mb << 20;
    out.oracle = oracle_solve(params, o);
  }
  return out;
}

std::string trace_csv(const PotentialTrace& trace) {
  csv::Table t{"q", "alpha", "H", "L", "G", "residual", "wall_ms"};
  for (const auto& r : trace) {
    t.cell(r.q).cell(r.alpha).cell(r.potential.H).cell(r.potential.L).cell(r.potential.G);
    t.cell(r.residual).cell(r.wall_ms).end_row();
  }
  return t.str();
}

std::string emissions_csv(const EmissionDistribution& em) {
  csv::Table t{"path", "psi_bar"};
  for (Index i = 0; i < em.samples.size(); ++i) {
    t.cell(static_cast<long long>(i)).cell(em.samples(i)).end_row();
  }
  return t.str();
}

std::string curve_csv(const EmissionCurve& c) {
  csv::Table t{"k", "t", "expected_emission_direct", "expected_emission_regression"};
  for (Index k = 0; k < c.t.size(); ++k) {
    t.cell(static_cast<long long>(k)).cell(c.t(k)).cell(c.direct(k)).cell(c.regression(k)).end_row();
  }
  return t.str();
}

std::string prices_csv(const std::vector<RepetitionResult>& reps) {
  csv::Table t{"rep", "P1", "P2"};
  for (std::size_t r = 0; r < reps.size(); ++r) {
    t.cell(static_cast<long long>(r)).cell(reps[r].prices.P1).cell(reps[r].prices.P2).end_row();
  }
  return t.str();
}

std::string table_csv(const std::vector<TableEntry>& entries) {
  csv::Table t{"gamma", "lambda", "rho", "P1", "P1_se", "P2", "P2_se"};
  for (const auto& e : entries) {
    t.cell(e.row[0]).cell(e.row[1]).cell(e.row[2]);
    t.cell(e.prices.P1).cell(e.prices.P1_se).cell(e.prices.P2).cell(e.prices.P2_se).end_row();
  }
  return t.str();
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json distribution_summary(const Eigen::VectorXd& samples) {
  std::vector<double> v(samples.data(), samples.data() + samples.size());
  const auto ms = stats::mean_se(samples);
  return {{"mean", ms.mean},
          {"sd", ms.se * std::sqrt(static_cast<double>(samples.size()))},
          {"q05", stats::quantile(v, 0.05)},
          {"q25", stats::quantile(v, 0.25)},
          {"q50", stats::quantile(v, 0.50)},
          {"q75", stats::quantile(v, 0.75)},
          {"q95", stats::quantile(v, 0.95)}};
}

json trace_json(const PotentialTrace& trace) {
  json out = json::array();
  for (const auto& r : trace) {
    out.push_back({{"q", r.q},
                   {"alpha", r.alpha},
                   {"H", r.potential.H},
                   {"L", r.potential.L},
                   {"G", r.potential.G},
                   {"G_se", r.potential.G_se},
                   {"H_bound", r.potential.H_bound},
                   {"residual", r.residual},
                   {"wall_ms", r.wall_ms}});
  }
  return out;
}

json curve_json(const EmissionCurve& c) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"t", vec(c.t)},
          {"direct", vec(c.direct)},
          {"direct_se", vec(c.direct_se)},
          {"regression", vec(c.regression)},
          {"regression_se", vec(c.regression_se)}};
}

json models_json(const std::vector<CondExpModel>& models) {
  json out = json::array();
  for (const auto& m : models) {
    const char* form = m.form == CondExpModel::Form::constant   ? "constant"
                       : m.form == CondExpModel::Form::identity ? "identity"
                                                                : "linear";
    out.push_back({{"k", m.k},
                   {"form", form},
                   {"coef", std::vector<double>(m.coef.data(), m.coef.data() + m.coef.size())},
                   {"rmse", m.rmse},
                   {"rmse_constant", m.rmse_constant},
                   {"condition", m.condition}});
  }
  return out;
}

json oracle_json(const OracleResult& o) {
  return {{"n", o.grid.n},
          {"nodes", o.grid.nodes_per_dim},
          {"iterations", o.iterations},
          {"residual", o.residual},
          {"damped_fallback", o.damped_fallback},
          {"P1", o.P1},
          {"P2", o.P2},
          {"psi_bar_mean", o.psi_mean},
          {"expected_emission",
           std::vector<double>(o.expected_emission.data(),
                               o.expected_emission.data() + o.expected_emission.size())}};
}

std::filesystem::path out_dir_of(const RunConfig& c, const RunOptions& o) {
  return o.out_dir ? *o.out_dir : std::filesystem::path(c.out_dir);
}

}  // namespace

json run(const RunConfig& c, const RunOptions& options, std::vector<PointResult>* points_out) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t base_seed = options.seed.value_or(c.model.seed);
  RunConfig echo = c;
  echo.model.seed = base_seed;
  const auto dir = out_dir_of(c, options);
  const auto points = sweep_points(echo);

  json report;
  report["version"] = kVersion;
  report["oracle"] = false;
  report["config"] = to_json(echo);
  report["params_hash"] = hex(params_hash(echo.model));
  report["points"] = json::array();

  std::vector<PointResult> results;
  for (std::size_t j = 0; j < points.size(); ++j) {
    PointResult res = run_point(echo, points[j], j, base_seed);
    const auto point_dir = points.size() == 1 ? dir : dir / ("point_" + std::to_string(j));
    json pj;
    pj["gamma_pen"] = res.params.gamma_pen;
    pj["lambda"] = res.params.lambda;
    pj["rho"] = res.params.rho;
    pj["params_hash"] = hex(params_hash(res.params));
    json seeds = json::array();
    for (const auto& r : res.reps) seeds.push_back(r.seed);
    pj["seeds"] = seeds;
    pj["P1"] = res.combined.P1;
    pj["P1_se"] = res.combined.P1_se;
    pj["P2"] = res.combined.P2;
    pj["P2_se"] = res.combined.P2_se;
    pj["psi_bar"] = distribution_summary(res.emissions.samples);
    pj["psi_bar_mean_across_reps"] = {{"mean", res.psi_mean.mean}, {"se", res.psi_mean.se}};
    pj["trace"] = trace_json(res.solution.trace);
    pj["curve"] = curve_json(res.curve);
    pj["models"] = models_json(res.solution.models);
    if (res.oracle) pj["oracle_crosscheck"] = oracle_json(*res.oracle);
    if (points.size() > 1) pj["dir"] = point_dir.filename().string();
    report["points"].push_back(pj);

    if (options.write_files) {
      csv::write_atomic(point_dir / "trace.csv", trace_csv(res.solution.trace));
      csv::write_atomic(point_dir / "emissions.csv", emissions_csv(res.emissions));
      csv::write_atomic(point_dir / "curve.csv", curve_csv(res.curve));
      csv::write_atomic(point_dir / "prices.csv", prices_csv(res.reps));
      if (c.flags.ensemble_dump) {
        ModelParams p = res.params;
        p.seed = res.reps.front().seed;
        const GridSpec grid = make_grid(p.T, p.n);
        PathEnsemble e = c.ensemble_file ? load_ensemble(*c.ensemble_file, p, grid)
                                         : simulate_paths(p, grid);
        if (c.flags.antithetic && !c.ensemble_file) e = antithetic_extend(e, p, grid);
        std::filesystem::create_directories(point_dir);
        dump_ensemble(e, p, point_dir / "ensemble.bin");
      }
    }
    if (points_out != nullptr) results.push_back(std::move(res));
  }
  report["wall_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (options.write_files) csv::write_atomic(dir / "report.json", report.dump(2) + "\n");
  if (points_out != nullptr) *points_out = std::move(results);
  return report;
}

std::vector<TableEntry> reproduce_table(const RunConfig& c, const RunOptions& options) {
  const std::uint64_t base_seed = options.seed.value_or(c.model.seed);
  RunConfig cfg = c;
  cfg.flags.oracle_crosscheck = false;
  std::vector<TableEntry> entries;
  for (std::size_t j = 0; j < c.table_rows.size(); ++j) {
    const TableRow& row = c.table_rows[j];
    ModelParams p = c.model;
    p.gamma_pen = row[0];
    p.lambda = row[1];
    p.rho = row[2];
    const PointResult res = run_point(cfg, p, j, base_seed);
    entries.push_back({row, res.combined, res.psi_mean});
  }
  if (options.write_files) {
    const auto dir = out_dir_of(c, options);
    csv::write_atomic(dir / "table.csv", table_csv(entries));
  }
  return entries;
}

json run_oracle(const RunConfig& c, int n, const RunOptions& options, OracleResult* result) {
  const auto start = std::chrono::steady_clock::now();
  ModelParams p = c.model;
  p.n = n;
  OracleOptions o;
  o.nodes = c.oracle_nodes;
  o.memory_budget_bytes = c.memory_budget_mb << 20;
  OracleResult res = oracle_solve(p, o);

  RunConfig echo = c;
  echo.model.n = n;
  json report;
  report["version"] = kVersion;
  report["oracle"] = true;
  report["config"] = to_json(echo);
  report["params_hash"] = hex(params_hash(p));

  PotentialTrace trace;
  for (const auto& it : res.trace) {
    TraceRecord r;
    r.q = it.q;
    r.alpha = it.alpha;
    r.potential.H = it.H;
    r.potential.L = it.L;
    r.potential.G = it.G;
    r.residual = it.residual;
    trace.push_back(r);
  }
  const GridSpec grid = make_grid(p.T, n);
  EmissionCurve curve;
  curve.t = grid.t;
  curve.direct = res.expected_emission;
  curve.regression = res.expected_emission;
  curve.direct_se = Eigen::VectorXd::Zero(n + 1);
  curve.regression_se = Eigen::VectorXd::Zero(n + 1);

  const double mean = res.psi_mean;
  const double var = res.grid.weight.dot((res.psi_bar.array() - mean).square().matrix());
  json pj;
  pj["gamma_pen"] = p.gamma_pen;
  pj["lambda"] = p.lambda;
  pj["rho"] = p.rho;
  pj["P1"] = res.P1;
  pj["P1_se"] = 0.0;
  pj["P2"] = res.P2;
  pj["P2_se"] = 0.0;
  pj["psi_bar"] = {{"mean", mean}, {"sd", std::sqrt(var)}};
  pj["trace"] = trace_json(trace);
  pj["curve"] = curve_json(curve);
  pj["oracle_crosscheck"] = oracle_json(res);
  report["points"] = json::array({pj});
  report["wall_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if (options.write_files) {
    const auto dir = out_dir_of(c, options);
    csv::write_atomic(dir / "trace.csv", trace_csv(trace));
    csv::write_atomic(dir / "curve.csv", curve_csv(curve));
    csv::Table em{"path", "psi_bar", "weight"};
    for (Index i = 0; i < res.psi_bar.size(); ++i) {
      em.cell(static_cast<long long>(i)).cell(res.psi_bar(i)).cell(res.grid.weight(i)).end_row();
    }
    csv::write_atomic(dir / "emissions.csv", em.str());
    csv::write_atomic(dir / "report.json", report.dump(2) + "\n");
  }
  if (result != nullptr) *result = std::move(res);
  return report;
}

}  // namespace mfg
