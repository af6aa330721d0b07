// Command-line front end.
//
//   varic solve <scenario.json>          dual ascent + primal recovery
//   varic certify <scenario.json> <pair.json>
//   varic sweep value <scenario.json>    value-function brackets as CSV
//   varic sweep lyapunov <scenario.json> deficit decay across refinements
//   varic round <scenario.json> <relaxed.json>
//   varic demo                           tour of the bundled instances
//
// Exit codes: 0 solved/ok, 2 bad input, 3 a duality gap stayed open,
// 4 infeasible. Reports go to stdout as deterministic JSON/CSV (sorted keys,
// 17 significant digits, no timestamps); --out duplicates them to a file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varic/varic.hpp"

namespace {

using varic::detail::json;

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitGapOpen = 3;
constexpr int kExitInfeasible = 4;

void emit(const json& report, const std::string& out_path) {
  std::string text = varic::detail::dump_json(report);
  std::fputs(text.c_str(), stdout);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      throw std::runtime_error("cannot write \"" + out_path + "\"");
    }
    out << text;
  }
}

void emit_text(const std::string& text, const std::string& out_path) {
  std::fputs(text.c_str(), stdout);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      throw std::runtime_error("cannot write \"" + out_path + "\"");
    }
    out << text;
  }
}

json certificate_json(const varic::Certificate& cert) {
  json j;
  j["mpResidual"] = cert.mp_residual;
  j["ncResidual"] = cert.nc_residual;
  j["feasResidual"] = cert.feas_residual;
  j["dualityGap"] = cert.duality_gap;
  j["suboptimalityBound"] = cert.suboptimality_bound;
  j["verdict"] = varic::to_string(cert.verdict);
  return j;
}

int exit_code_for(varic::SolveStatus status) {
  switch (status) {
    case varic::SolveStatus::solved:
      return kExitOk;
    case varic::SolveStatus::gap_open:
      return kExitGapOpen;
    case varic::SolveStatus::infeasible:
      return kExitInfeasible;
  }
  return kExitBadInput;
}

// "lo:step:hi" -> inclusive 1-D grid.
std::vector<varic::Vec> parse_grid_spec(const std::string& spec,
                                        std::size_t dim) {
  auto bad = [&](const std::string& why) {
    throw varic::schema_error("grid \"" + spec + "\": " + why);
  };
  std::size_t c1 = spec.find(':');
  std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                           : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) {
    bad("expected lo:step:hi");
  }
  double lo = 0.0, step = 0.0, hi = 0.0;
  try {
    lo = std::stod(spec.substr(0, c1));
    step = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    hi = std::stod(spec.substr(c2 + 1));
  } catch (const std::exception&) {
    bad("not numeric");
  }
  if (dim != 1) bad("lo:step:hi grids require a 1-dimensional constraint");
  if (!(step > 0.0)) bad("step must be positive");
  if (hi < lo) bad("hi must be >= lo");
  std::vector<varic::Vec> grid;
  long count = std::lround((hi - lo) / step);
  for (long i = 0; i <= count; ++i) {
    double x = lo + static_cast<double>(i) * step;
    if (x > hi + 0.5 * step) break;
    grid.push_back(varic::Vec{x});
  }
  return grid;
}

std::vector<varic::Vec> load_grid_file(const std::string& path,
                                       std::size_t dim) {
  std::ifstream in(path);
  if (!in) {
    throw varic::schema_error("grid: cannot open \"" + path + "\"");
  }
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw varic::schema_error("grid: \"" + path +
                              "\" is not valid JSON: " + e.what());
  }
  if (!j.is_array() || j.empty()) {
    throw varic::schema_error("grid: expected a nonempty JSON array");
  }
  std::vector<varic::Vec> grid;
  for (const auto& e : j) {
    if (e.is_number()) {
      grid.push_back(varic::Vec{e.get<double>()});
    } else {
      grid.push_back(varic::detail::as_vec(e, "grid"));
    }
    if (grid.back().size() != dim) {
      throw varic::schema_error("grid: point dimension does not match the "
                                "constraint");
    }
  }
  return grid;
}

json solve_report(const varic::Scenario& s, const varic::DualReport& report,
                  bool with_oracle, std::uint64_t oracle_budget) {
  json j;
  j["status"] = varic::to_string(report.status);
  j["dualValue"] = report.dual_value;
  j["iterations"] = report.iterations;
  j["adjoint"] = report.adjoint.x;
  if (report.primal_feasible) {
    j["primalCost"] = report.primal_cost;
    j["gap"] = report.gap;
    j["policy"] = report.primal.choice;
    j["certificate"] =
        certificate_json(varic::certificate(s, report.primal, report.adjoint));
  } else {
    j["primalCost"] = nullptr;
    j["gap"] = nullptr;
    j["policy"] = nullptr;
    j["certificate"] = nullptr;
  }
  if (with_oracle) {
    varic::ExactSolution exact = varic::solve_exact(s, oracle_budget);
    if (exact.feasible) {
      j["oracleOptimum"] = exact.optimum;
    } else {
      j["oracleOptimum"] = nullptr;
    }
    j["oracleFeasibleCount"] = exact.feasible_count;
  }
  return j;
}

int run_solve(const std::string& scenario_path, const std::string& out_path,
              std::size_t max_iter, double tol, bool with_oracle,
              std::uint64_t oracle_budget) {
  varic::Scenario s = varic::load_scenario(scenario_path);
  varic::AscendParams params;
  params.max_iter = max_iter;
  params.solved_tol = tol;
  varic::DualReport report =
      varic::ascend(s, varic::Adjoint{varic::Vec(s.dim, 0.0)}, params);
  emit(solve_report(s, report, with_oracle, oracle_budget), out_path);
  return exit_code_for(report.status);
}

int run_certify(const std::string& scenario_path, const std::string& pair_path,
                const std::string& out_path) {
  varic::Scenario s = varic::load_scenario(scenario_path);
  std::ifstream in(pair_path);
  if (!in) {
    throw varic::schema_error("pair: cannot open \"" + pair_path + "\"");
  }
  json pj;
  try {
    in >> pj;
  } catch (const std::exception& e) {
    throw varic::schema_error("pair: \"" + pair_path +
                              "\" is not valid JSON: " + e.what());
  }
  if (!pj.contains("policy") || !pj.at("policy").is_array()) {
    throw varic::schema_error("pair: missing field \"policy\"");
  }
  if (!pj.contains("adjoint")) {
    throw varic::schema_error("pair: missing field \"adjoint\"");
  }
  varic::Policy u;
  for (const auto& e : pj.at("policy")) {
    if (!e.is_number_integer() || e.get<long>() < 0) {
      throw varic::schema_error("pair: field \"policy\" must hold entry "
                                "indices");
    }
    u.choice.push_back(e.get<std::size_t>());
  }
  varic::Adjoint p{varic::detail::as_vec(pj.at("adjoint"), "adjoint")};

  varic::Certificate cert = varic::certificate(s, u, p);
  emit(certificate_json(cert), out_path);
  return kExitOk;
}

int run_sweep_value(const std::string& scenario_path,
                    const std::string& grid_spec,
                    const std::string& grid_file, const std::string& out_path,
                    std::uint64_t budget) {
  varic::Scenario s = varic::load_scenario(scenario_path);
  std::vector<varic::Vec> grid;
  if (!grid_file.empty()) {
    grid = load_grid_file(grid_file, s.dim);
  } else if (!grid_spec.empty()) {
    grid = parse_grid_spec(grid_spec, s.dim);
  } else {
    throw varic::schema_error("sweep value: provide --grid or --grid-file");
  }
  varic::SweepOptions opts;
  opts.oracle_budget = budget;
  std::vector<varic::ValueSample> samples = varic::value_sweep(s, grid, opts);
  std::ostringstream csv;
  varic::write_value_csv(csv, samples, s.dim);
  emit_text(csv.str(), out_path);
  return kExitOk;
}

int run_sweep_lyapunov(const std::string& scenario_path, std::size_t levels,
                       std::uint64_t seed, const std::string& out_path,
                       std::uint64_t budget) {
  varic::Scenario s = varic::load_scenario(scenario_path);
  if (levels == 0) {
    throw varic::schema_error("sweep lyapunov: --levels must be positive");
  }
  std::vector<varic::DeficitRow> rows;
  varic::Scenario level_s = s;
  for (std::size_t level = 0; level < levels; ++level) {
    if (level > 0) level_s = varic::refine_scenario(level_s, 2);
    varic::DeficitOptions opts;
    opts.seed = seed;
    varic::AumannSum sum = varic::aumann_sum(level_s, budget, opts);
    varic::DeficitRow row;
    row.level = level;
    row.atoms = level_s.space.size();
    row.points = sum.points.size();
    row.deficit = sum.deficit;
    rows.push_back(row);
  }
  std::ostringstream csv;
  varic::write_deficit_csv(csv, rows);
  emit_text(csv.str(), out_path);
  return kExitOk;
}

int run_round(const std::string& scenario_path, const std::string& relaxed_path,
              const std::string& out_path, const std::string& out_scenario,
              const std::string& out_policy) {
  varic::Scenario s = varic::load_scenario(scenario_path);
  std::ifstream in(relaxed_path);
  if (!in) {
    throw varic::schema_error("relaxed: cannot open \"" + relaxed_path + "\"");
  }
  json rj;
  try {
    in >> rj;
  } catch (const std::exception& e) {
    throw varic::schema_error("relaxed: \"" + relaxed_path +
                              "\" is not valid JSON: " + e.what());
  }
  if (!rj.contains("weights") || !rj.at("weights").is_array()) {
    throw varic::schema_error("relaxed: missing field \"weights\"");
  }
  varic::RelaxedPolicy rp;
  for (const auto& row : rj.at("weights")) {
    rp.weights.push_back(varic::detail::as_vec(row, "weights"));
  }

  varic::RoundResult result = varic::sf_round(s, rp);
  json j;
  j["splitCount"] = result.split_count;
  j["pivotCount"] = result.pivot_count;
  j["atoms"] = result.scenario.space.size();
  j["relaxed"]["cost"] = result.relaxed.cost;
  j["relaxed"]["load"] = result.relaxed.load;
  j["rounded"]["cost"] = result.rounded.cost;
  j["rounded"]["load"] = result.rounded.load;
  varic::Vec diff = varic::sub(result.rounded.load, result.relaxed.load);
  double drift = std::max(std::abs(result.rounded.cost - result.relaxed.cost),
                          varic::norm(diff));
  j["integralDrift"] = drift;
  j["policy"] = result.policy.choice;
  emit(j, out_path);
  if (!out_scenario.empty()) {
    varic::save_scenario(result.scenario, out_scenario);
  }
  if (!out_policy.empty()) {
    json pj;
    pj["policy"] = result.policy.choice;
    std::ofstream pout(out_policy);
    if (!pout) {
      throw std::runtime_error("cannot write \"" + out_policy + "\"");
    }
    pout << varic::detail::dump_json(pj);
  }
  return kExitOk;
}

int run_demo(const std::string& dir) {
  struct Item {
    const char* file;
    const char* blurb;
  };
  const Item items[] = {
      {"S1.json", "cheapest half: linear cost, tight dual"},
      {"S2.json", "concave cost on two atoms: extremes win"},
      {"S3.json", "single atom: an honest duality gap"},
  };
  std::printf("instance        status      dual        primal      gap\n");
  for (const Item& item : items) {
    varic::Scenario s = varic::load_scenario(dir + "/" + item.file);
    varic::DualReport r =
        varic::ascend(s, varic::Adjoint{varic::Vec(s.dim, 0.0)});
    std::printf("%-15s %-11s %-11.6g %-11.6g %-11.6g\n", item.file,
                varic::to_string(r.status), r.dual_value, r.primal_cost,
                r.gap);
    std::printf("  %s\n", item.blurb);
  }

  std::printf("\nvalue sweep on S1.json (target {1/2} + x):\n");
  varic::Scenario s1 = varic::load_scenario(dir + "/S1.json");
  std::vector<varic::Vec> grid;
  for (double x = -0.5; x <= 0.5 + 1e-12; x += 0.25) {
    grid.push_back(varic::Vec{x});
  }
  for (const varic::ValueSample& sample : varic::value_sweep(s1, grid)) {
    std::printf("  x = %+5.2f   V in [%.6g, %.6g]   %s\n", sample.x[0],
                sample.lower + 0.0, sample.upper + 0.0,  // collapse -0
                varic::to_string(sample.status));
  }

  std::printf("\ndeficit decay on S3.json refinements (cost,load cloud):\n");
  varic::Scenario level_s = varic::load_scenario(dir + "/S3.json");
  for (std::size_t level = 0; level <= 3; ++level) {
    if (level > 0) level_s = varic::refine_scenario(level_s, 2);
    varic::AumannSum sum = varic::aumann_sum(level_s);
    std::printf("  %zu atoms: %zu policy points, deficit %.6g\n",
                level_s.space.size(), sum.points.size(), sum.deficit.value);
  }

  std::printf("\nrounding a half/half mix on S3.json:\n");
  varic::Scenario s3 = varic::load_scenario(dir + "/S3.json");
  varic::RelaxedPolicy rp;
  rp.weights = {varic::Vec{0.5, 0.0, 0.5}};
  varic::RoundResult rr = varic::sf_round(s3, rp);
  std::printf("  %zu atom -> %zu sub-atoms, relaxed cost %.6g, "
              "rounded cost %.6g\n",
              s3.space.size(), rr.scenario.space.size(), rr.relaxed.cost,
              rr.rounded.cost);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite relaxations of measure-constrained control problems"};
  app.require_subcommand(1);

  std::string scenario_path, out_path;

  auto* solve = app.add_subcommand("solve", "dual ascent and primal recovery");
  std::size_t max_iter = 2000;
  double tol = 1e-9;
  bool with_oracle = false;
  std::uint64_t oracle_budget = 10000000;
  solve->add_option("scenario", scenario_path, "scenario JSON")->required();
  solve->add_option("--out", out_path, "also write the report here");
  solve->add_option("--max-iter", max_iter, "ascent iteration cap");
  solve->add_option("--tol", tol, "relative gap to report solved");
  solve->add_flag("--oracle", with_oracle,
                  "add the enumerated optimum to the report");
  solve->add_option("--oracle-budget", oracle_budget,
                    "policy budget for --oracle");

  auto* certify = app.add_subcommand(
      "certify", "grade a (policy, adjoint) pair from a JSON file");
  std::string pair_path;
  certify->add_option("scenario", scenario_path, "scenario JSON")->required();
  certify->add_option("pair", pair_path, "{\"policy\": [...], \"adjoint\": [...]}")
      ->required();
  certify->add_option("--out", out_path, "also write the certificate here");

  auto* sweep = app.add_subcommand("sweep", "grid experiments");
  sweep->require_subcommand(1);

  auto* sweep_value =
      sweep->add_subcommand("value", "value-function brackets on a grid");
  std::string grid_spec, grid_file;
  std::uint64_t sweep_budget = 1000000;
  sweep_value->add_option("scenario", scenario_path, "scenario JSON")
      ->required();
  sweep_value->add_option("--grid", grid_spec, "lo:step:hi (1-D constraints)");
  sweep_value->add_option("--grid-file", grid_file,
                          "JSON array of grid points");
  sweep_value->add_option("--out", out_path, "also write the CSV here");
  sweep_value->add_option("--budget", sweep_budget,
                          "policy budget for the enumeration oracle");

  auto* sweep_lyap = sweep->add_subcommand(
      "lyapunov", "policy-integral cloud deficit across refinements");
  std::size_t levels = 3;
  std::uint64_t seed = 1;
  std::uint64_t lyap_budget = 1000000;
  sweep_lyap->add_option("scenario", scenario_path, "scenario JSON")
      ->required();
  sweep_lyap->add_option("--levels", levels, "refinement levels (factor 2)");
  sweep_lyap->add_option("--seed", seed, "seed for sampled deficits");
  sweep_lyap->add_option("--out", out_path, "also write the CSV here");
  sweep_lyap->add_option("--budget", lyap_budget, "policy enumeration budget");

  auto* round = app.add_subcommand(
      "round", "purify a relaxed policy without moving its integral");
  std::string relaxed_path, out_scenario, out_policy;
  round->add_option("scenario", scenario_path, "scenario JSON")->required();
  round->add_option("relaxed", relaxed_path, "{\"weights\": [[...], ...]}")
      ->required();
  round->add_option("--out", out_path, "also write the report here");
  round->add_option("--out-scenario", out_scenario,
                    "write the split scenario here");
  round->add_option("--out-policy", out_policy, "write the pure policy here");

  auto* demo = app.add_subcommand("demo", "tour of the bundled instances");
  std::string fixture_dir = VARIC_DEFAULT_FIXTURE_DIR;
  demo->add_option("--dir", fixture_dir, "fixture directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (solve->parsed()) {
      return run_solve(scenario_path, out_path, max_iter, tol, with_oracle,
                       oracle_budget);
    }
    if (certify->parsed()) {
      return run_certify(scenario_path, pair_path, out_path);
    }
    if (sweep->parsed() && sweep_value->parsed()) {
      return run_sweep_value(scenario_path, grid_spec, grid_file, out_path,
                             sweep_budget);
    }
    if (sweep->parsed() && sweep_lyap->parsed()) {
      return run_sweep_lyapunov(scenario_path, levels, seed, out_path,
                                lyap_budget);
    }
    if (round->parsed()) {
      return run_round(scenario_path, relaxed_path, out_path, out_scenario,
                       out_policy);
    }
    if (demo->parsed()) {
      return run_demo(fixture_dir);
    }
  } catch (const varic::infeasible_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInfeasible;
  } catch (const varic::schema_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const varic::budget_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  }
  return kExitBadInput;
}
