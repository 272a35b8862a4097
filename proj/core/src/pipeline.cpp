// Copyright 2026 The ihom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ihom/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ihom/cell_solver.hpp"
#include "ihom/error.hpp"
#include "ihom/io.hpp"
#include "ihom/limit_process.hpp"
#include "ihom/sde_engine.hpp"
#include "ihom/strip_solver.hpp"

namespace ihom {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kStageNames[kStageCount] = {"cell", "strip", "params", "simulate", "verify", "compare"};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, std::string_view value, const char* expected) {
  fail(ErrorCode::kValidation, "config field '" + key + "': expected " + expected + ", got '" + std::string(value) + "'");
}

double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a number");
  return out;
}

long long to_int(const std::string& key, std::string_view v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "an unsigned 64-bit integer");
  return out;
}

bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

std::vector<Stage> parse_stages(const std::string& key, std::string_view v) {
  if (v == "all") return stages_through(Stage::kCompare);
  std::vector<bool> seen(kStageCount, false);
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto comma = v.find(',', pos);
    if (comma == std::string_view::npos) comma = v.size();
    const auto name = trim(v.substr(pos, comma - pos));
    if (name.empty()) bad_value(key, v, "a comma-separated stage list");
    seen[static_cast<std::size_t>(stage_from_string(name))] = true;
    pos = comma + 1;
  }
  std::vector<Stage> out;
  bool gap = false;
  for (int i = 0; i < kStageCount; ++i) {
    if (seen[i]) {
      if (gap) {
        fail(ErrorCode::kValidation, "config field 'stages': stage '" + std::string(kStageNames[i]) +
                                         "' requires every earlier stage, missing '" +
                                         std::string(kStageNames[i - 1]) + "' or an earlier one");
      }
      out.push_back(static_cast<Stage>(i));
    } else {
      gap = true;
    }
  }
  return out;
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) fail(ErrorCode::kValidation, std::string("config field '") + field + "': " + what);
}

}  // namespace

std::string_view to_string(Stage stage) { return kStageNames[static_cast<int>(stage)]; }

Stage stage_from_string(std::string_view name) {
  for (int i = 0; i < kStageCount; ++i) {
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  }
  fail(ErrorCode::kValidation, "unknown stage '" + std::string(name) + "'");
}

std::vector<Stage> stages_through(Stage last) {
  std::vector<Stage> out;
  for (int i = 0; i <= static_cast<int>(last); ++i) out.push_back(static_cast<Stage>(i));
  return out;
}

bool RunConfig::has_stage(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }

std::string RunConfig::hash() const { return hex64(fnv1a(field_text, fnv1a(text))); }

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.text = std::string(text);
  using Setter = std::function<void(const std::string&, std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"field", [&](const std::string&, std::string_view v) { c.field = std::string(v); }},
      {"eta", [&](const std::string& k, std::string_view v) { c.eta = to_double(k, v); }},
      {"n", [&](const std::string& k, std::string_view v) { c.n = static_cast<int>(to_int(k, v)); }},
      {"k_trunc", [&](const std::string& k, std::string_view v) { c.k_trunc = static_cast<int>(to_int(k, v)); }},
      {"stencil",
       [&](const std::string& k, std::string_view v) {
         try {
           c.stencil = stencil_from_string(v);
         } catch (const Error&) {
           bad_value(k, v, "central2, central4 or upwind");
         }
       }},
      {"strict", [&](const std::string& k, std::string_view v) { c.strict = to_bool(k, v); }},
      {"stages", [&](const std::string& k, std::string_view v) { c.stages = parse_stages(k, v); }},
      {"seed", [&](const std::string& k, std::string_view v) { c.seed = to_u64(k, v); }},
      {"out", [&](const std::string&, std::string_view v) { c.out = std::string(v); }},
      {"epsilon", [&](const std::string& k, std::string_view v) { c.epsilon = to_double(k, v); }},
      {"a", [&](const std::string& k, std::string_view v) { c.a = to_double(k, v); }},
      {"dt", [&](const std::string& k, std::string_view v) { c.dt = v == "auto" ? 0.0 : to_double(k, v); }},
      {"paths", [&](const std::string& k, std::string_view v) { c.paths = to_int(k, v); }},
      {"bridge", [&](const std::string& k, std::string_view v) { c.bridge = to_bool(k, v); }},
      {"horizon_factor", [&](const std::string& k, std::string_view v) { c.horizon_factor = to_double(k, v); }},
      {"longrun_k", [&](const std::string& k, std::string_view v) { c.longrun_k = to_double(k, v); }},
      {"longrun_paths", [&](const std::string& k, std::string_view v) { c.longrun_paths = to_int(k, v); }},
      {"longrun_dt", [&](const std::string& k, std::string_view v) { c.longrun_dt = to_double(k, v); }},
      {"occupation_paths", [&](const std::string& k, std::string_view v) { c.occupation_paths = to_int(k, v); }},
      {"occupation_dt", [&](const std::string& k, std::string_view v) { c.occupation_dt = to_double(k, v); }},
      {"limit_h", [&](const std::string& k, std::string_view v) { c.limit_h = to_double(k, v); }},
      {"limit_paths", [&](const std::string& k, std::string_view v) { c.limit_paths = to_int(k, v); }},
      {"limit_t", [&](const std::string& k, std::string_view v) { c.limit_t = to_double(k, v); }},
      {"compare_t", [&](const std::string& k, std::string_view v) { c.compare_t = to_double(k, v); }},
      {"compare_paths", [&](const std::string& k, std::string_view v) { c.compare_paths = to_int(k, v); }},
      {"compare_dt", [&](const std::string& k, std::string_view v) { c.compare_dt = to_double(k, v); }},
      {"export_paths", [&](const std::string& k, std::string_view v) { c.export_paths = to_int(k, v); }},
      {"export_stride", [&](const std::string& k, std::string_view v) { c.export_stride = to_int(k, v); }},
  };

  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": missing key before '='");
    if (value.empty()) fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": missing value for '" + key + "'");
    const auto it = setters.find(key);
    if (it == setters.end()) {
      fail(ErrorCode::kValidation, "line " + std::to_string(line_no) + ": unknown config key '" + key + "'");
    }
    if (seen.count(key) != 0) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": key '" + key + "' repeats line " +
                                  std::to_string(seen[key]));
    }
    seen[key] = line_no;
    it->second(key, value);
  }

  require(!c.field.empty(), "field", "a field file is required");
  require(c.eta > 0.0, "eta", "must be positive");
  require(c.n >= 8, "n", "must be at least 8");
  require(c.k_trunc >= 4, "k_trunc", "must be at least 4");
  require(!c.stages.empty(), "stages", "at least one stage is required");
  require(c.epsilon > 0.0 && c.epsilon <= 1.0, "epsilon", "must lie in (0, 1]");
  require(c.a > 0.5 && c.a < 1.0, "a", "must lie in (1/2, 1)");
  require(c.dt >= 0.0, "dt", "must be positive or auto");
  if (c.dt > 0.0) require(c.dt <= max_hitting_dt(c.epsilon, c.a) * (1.0 + 1e-12), "dt",
                          "exceeds min(delta^2 / 100, 1e-3)");
  require(c.paths >= 100, "paths", "must be at least 100");
  require(c.horizon_factor > 0.0, "horizon_factor", "must be positive");
  require(c.longrun_k >= 4.0, "longrun_k", "must be at least 4");
  require(c.longrun_paths >= 100, "longrun_paths", "must be at least 100");
  require(c.longrun_dt > 0.0 && c.longrun_dt <= 1e-3, "longrun_dt", "must lie in (0, 1e-3]");
  require(c.occupation_paths == 0 || c.occupation_paths >= 100, "occupation_paths", "must be 0 or at least 100");
  require(c.occupation_dt > 0.0 && c.occupation_dt <= 1e-3, "occupation_dt", "must lie in (0, 1e-3]");
  require(c.limit_h > 0.0, "limit_h", "must be positive");
  require(c.limit_t > 0.0, "limit_t", "must be positive");
  require(c.limit_t / (c.limit_h * c.limit_h) >= static_cast<double>(kMinLimitSteps) - 0.5, "limit_h",
          "limit_t / limit_h^2 must be at least 10000 steps");
  require(c.limit_paths >= 1000, "limit_paths", "must be at least 1000");
  require(c.compare_t > 0.0, "compare_t", "must be positive");
  require(c.compare_t / (c.limit_h * c.limit_h) >= static_cast<double>(kMinLimitSteps) - 0.5, "compare_t",
          "compare_t / limit_h^2 must be at least 10000 steps");
  require(c.compare_paths >= 1000, "compare_paths", "must be at least 1000");
  require(c.compare_dt > 0.0 && c.compare_dt <= 1e-2, "compare_dt", "must lie in (0, 1e-2]");
  require(c.export_paths >= 0, "export_paths", "must be nonnegative");
  require(c.export_stride >= 1, "export_stride", "must be at least 1");

  std::filesystem::path fp(c.field);
  if (fp.is_relative() && !base_dir.empty()) fp = base_dir / fp;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(fp, ec)) {
    fail(ErrorCode::kValidation, "config field 'field': file '" + fp.string() + "' does not exist");
  }
  c.field = fp.string();
  c.field_text = read_text_file(fp);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.parent_path());
}

namespace {

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(r);
  }
  return rows;
}

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json estimate_json(const PathEstimate& e) {
  return Json{{"value", e.value}, {"stderr", e.std_error}, {"n", e.n}, {"censored", e.censored}};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Renders every scalar of the report as one `path: value` line, using the
// report's own number formatting so the two files agree.
void render(const Json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) render(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array() && !j.empty() && !j.front().is_structured()) {
    os << prefix << ": [";
    for (std::size_t i = 0; i < j.size(); ++i) os << (i ? ", " : "") << j[i].dump();
    os << "]\n";
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) render(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else if (j.is_string()) {
    os << prefix << ": " << j.get<std::string>() << "\n";
  } else {
    os << prefix << ": " << j.dump() << "\n";
  }
}

struct Context {
  const RunConfig& config;
  InterfaceDriftField field;
  GridSpec grid;
  CellSolution plus;
  CellSolution minus;
  StripMeasure strip;
  InterfaceParams params;
  Json report;
  PipelineResult result;

  void check(const std::string& name, bool pass, const std::string& detail) {
    result.checks.push_back({name, pass, detail});
    result.pass = result.pass && pass;
  }
  void check_z(const std::string& name, const PathEstimate& e, double target) {
    const double z = z_score(e, target);
    check(name, z <= 3.0, "estimate " + fmt(e.value) + " +- " + fmt(e.std_error) + " vs " + fmt(target) +
                              " (" + fmt(z) + " SE)");
  }
  void add(const PathEstimate& e) { result.estimates.push_back(e); }
};

SimConfig sim_config(const RunConfig& c) {
  SimConfig s;
  s.epsilon = c.epsilon;
  s.a = c.a;
  s.dt = c.dt > 0.0 ? c.dt : max_hitting_dt(c.epsilon, c.a);
  s.horizon_factor = c.horizon_factor;
  s.seed = c.seed;
  s.paths = c.paths;
  s.bridge = c.bridge;
  return s;
}

void stage_cell(Context& ctx) {
  CellOptions opt;
  opt.stencil = ctx.config.stencil;
  opt.tol.strict = ctx.config.strict;
  ctx.plus = solve_cell(Side::kPlus, ctx.field.plus(), ctx.grid, opt);
  ctx.minus = solve_cell(Side::kMinus, ctx.field.minus(), ctx.grid, opt);
  Json j;
  for (const CellSolution* c : {&ctx.plus, &ctx.minus}) {
    const auto [lo, hi] = std::minmax_element(c->mu.values.begin(), c->mu.values.end());
    j[side_name(c->side)] = Json{{"D", matrix_json(c->D)},
                                 {"density_residual", c->residuals.density},
                                 {"corrector_residuals", c->residuals.corrector},
                                 {"asymmetry", c->residuals.asymmetry},
                                 {"mu_min", *lo},
                                 {"mu_max", *hi}};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c->D, Eigen::EigenvaluesOnly);
    ctx.check(std::string("cell.") + side_name(c->side) + ".spd", eig.eigenvalues().minCoeff() > 0.0,
              "smallest eigenvalue " + fmt(eig.eigenvalues().minCoeff()));
  }
  j["grid"] = Json{{"n", ctx.grid.n}, {"dim", ctx.grid.dim}, {"stencil", std::string(to_string(ctx.config.stencil))}};
  ctx.report["cell"] = j;
}

void stage_strip(Context& ctx) {
  StripOptions opt;
  opt.stencil = ctx.config.stencil;
  ctx.strip = solve_strip_measure(ctx.field, ctx.plus, ctx.minus, ctx.grid, opt);
  const auto& q = ctx.strip.q;
  ctx.report["strip"] = Json{{"q_plus", q.q_plus},
                             {"q_minus", q.q_minus},
                             {"rate_plus", num(q.rate_plus)},
                             {"rate_minus", num(q.rate_minus)},
                             {"r2_plus", q.r2_plus},
                             {"r2_minus", q.r2_minus},
                             {"fit_points_plus", q.fit_points_plus},
                             {"fit_points_minus", q.fit_points_minus},
                             {"tail_bound", q.tail_bound()},
                             {"k_trunc", ctx.strip.grid.k_trunc},
                             {"k_history", ctx.strip.k_history},
                             {"residual", ctx.strip.residual},
                             {"masses_plus", ctx.strip.masses_plus},
                             {"masses_minus", ctx.strip.masses_minus}};
  ctx.check("strip.normalisation", std::abs(q.q_plus + q.q_minus - 1.0) < 1e-12,
            "q+ + q- = " + fmt(q.q_plus + q.q_minus));
}

void stage_params(Context& ctx) {
  const auto [pp, pm] = compute_p(ctx.strip.q.q_plus, ctx.strip.q.q_minus, ctx.plus.D(0, 0), ctx.minus.D(0, 0));
  const AlphaResult alpha = compute_alpha(ctx.strip, ctx.field, pp, pm, ctx.plus.D, ctx.minus.D, &ctx.plus, &ctx.minus);
  ctx.params = assemble_interface_params(ctx.plus, ctx.minus, ctx.strip.q, alpha);
  LimitScheme scheme;
  scheme.h = ctx.config.limit_h;
  scheme.params = ctx.params;
  Json j = Json::parse(params_to_json(ctx.params));
  j["skew_beta"] = scheme.skew_beta();
  j["local_time_per_visit"] = scheme.local_time_step();
  ctx.report["params"] = j;
  ctx.check("params.p_sum", std::abs(ctx.params.p_plus + ctx.params.p_minus - 1.0) < 1e-15,
            "p+ + p- = " + fmt(ctx.params.p_plus + ctx.params.p_minus));
  ctx.check("params.k1_range", std::abs(ctx.params.K[0]) < 1.0, "K1 = " + fmt(ctx.params.K[0]));
  ctx.check("params.factorization", ctx.params.factor_error < 1e-12, "|M M^T - D| = " + fmt(ctx.params.factor_error));
}

void stage_simulate(Context& ctx) {
  const RunConfig& c = ctx.config;
  const SimConfig sim = sim_config(c);
  Json j;
  j["epsilon"] = sim.epsilon;
  j["delta"] = sim.delta();
  j["dt"] = sim.dt;

  const ExitEstimate exits = estimate_exit_probs(ctx.field, sim);
  ctx.add(exits.plus);
  for (const auto& e : exits.per_point) ctx.add(e);
  j["exit_prob_plus"] = estimate_json(exits.plus);
  j["exit_spread"] = exits.spread;
  ctx.check_z("simulate.exit_prob_vs_p", exits.plus, ctx.params.p_plus);

  const int d = ctx.field.dim();
  if (d > 1) {
    const auto tang = estimate_tangential_drift(ctx.field, sim);
    SimConfig lr = sim;
    lr.dt = c.longrun_dt;
    lr.paths = c.longrun_paths;
    Vec x0{};
    const auto longrun = estimate_alpha_longrun(ctx.field, c.longrun_k, x0, lr);
    Json tj = Json::array();
    Json lj = Json::array();
    for (int k = 1; k < d; ++k) {
      ctx.add(tang[k]);
      ctx.add(longrun[k]);
      tj.push_back(estimate_json(tang[k]));
      lj.push_back(estimate_json(longrun[k]));
      ctx.check_z("simulate.tangential_drift_" + std::to_string(k + 1), tang[k], ctx.params.alpha[k]);
      ctx.check_z("simulate.alpha_longrun_" + std::to_string(k + 1), longrun[k], ctx.params.alpha[k]);
    }
    j["tangential_drift"] = tj;
    j["alpha_longrun"] = lj;
  }

  if (c.occupation_paths > 0) {
    SimConfig oc = sim;
    oc.dt = c.occupation_dt;
    oc.paths = c.occupation_paths;
    const auto coarse = interface_occupation_stats(ctx.field, oc);
    oc.epsilon = sim.epsilon / 2.0;
    const auto fine = interface_occupation_stats(ctx.field, oc);
    const auto r = ratio(fine.occupation, coarse.occupation, "occupation_ratio");
    ctx.add(coarse.occupation);
    ctx.add(fine.occupation);
    j["occupation"] = Json{{"coarse", estimate_json(coarse.occupation)},
                           {"fine", estimate_json(fine.occupation)},
                           {"ratio", r.value},
                           {"ratio_stderr", r.std_error},
                           {"excursion_constant_coarse", coarse.excursion_constant},
                           {"excursion_constant_fine", fine.excursion_constant}};
  }
  ctx.report["simulate"] = j;
}

std::vector<GluingTestFunction> compliant_functions(const InterfaceParams& p) {
  const int d = p.dim;
  std::vector<GluingTestFunction> out;
  QuadraticSpec s;
  s.dim = d;
  // Linear.
  s.hess = Eigen::MatrixXd::Zero(d, d);
  s.grad = Vec{0.5, 1.0, -0.5, 0.25};
  s.a11_plus = 0.0;
  out.push_back(make_gluing_test_function(p, s));
  // Quadratic with cross terms.
  s.c = 0.2;
  s.grad = Vec{-0.3, 0.7, 0.2, -0.1};
  s.hess = Eigen::MatrixXd::Identity(d, d);
  for (int i = 1; i < d; ++i) {
    s.hess(i, i) = -0.5;
    s.hess(0, i) = s.hess(i, 0) = 0.3;
  }
  s.a11_plus = 0.8;
  out.push_back(make_gluing_test_function(p, s));
  // Convex on one side, concave on the other.
  s.c = 0.0;
  s.grad = Vec{0.0, -1.0, 0.5, 0.0};
  s.hess = 0.4 * Eigen::MatrixXd::Identity(d, d);
  for (int i = 1; i < d; ++i) s.hess(0, i) = s.hess(i, 0) = -0.6;
  s.a11_plus = -0.5;
  out.push_back(make_gluing_test_function(p, s));
  return out;
}

void stage_verify(Context& ctx) {
  const RunConfig& c = ctx.config;
  LimitScheme scheme;
  scheme.h = c.limit_h;
  scheme.params = ctx.params;
  scheme.horizon = c.limit_t;
  const auto paths = simulate_limit_endpoints(scheme, Vec{}, c.limit_paths, c.seed, Stream::kLimitPaths);
  RunningStats local;
  for (const auto& e : paths) local.add(e.local_time);
  const auto lt = PathEstimate::from("limit_local_time", local, c.seed);
  ctx.add(lt);
  Json j;
  j["local_time"] = estimate_json(lt);
  Json defects = Json::array();
  const auto fs = compliant_functions(ctx.params);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    auto e = verify_martingale_problem(paths, fs[i], ctx.params);
    e.name = "martingale_defect_" + std::to_string(i + 1);
    e.seed = c.seed;
    ctx.add(e);
    defects.push_back(estimate_json(e));
    ctx.check_z("verify." + e.name, e, 0.0);
  }
  j["defects"] = defects;

  // Negative control: break the gluing condition by r = 1/2.
  const auto& f = fs.front();
  const double r = 0.5;
  Eigen::VectorXd mixed = f.hess_plus.row(0).transpose();
  QuadraticSpec s;
  s.dim = f.dim;
  s.c = f.c;
  for (int i = 0; i < f.dim; ++i) s.grad[i] = f.grad_minus[i];
  s.hess = f.hess_minus;
  s.a11_plus = f.hess_plus(0, 0);
  const auto bad = make_piecewise_quadratic(s, f.grad_plus[0] + r / ctx.params.p_plus, mixed);
  auto e = verify_martingale_problem(paths, bad, ctx.params, true);
  e.seed = c.seed;
  ctx.add(e);
  const double z = z_score(e, 0.0);
  j["control"] = estimate_json(e);
  j["control_expected"] = r * lt.value;
  ctx.check("verify.negative_control", z > 3.0, "defect " + fmt(e.value) + " +- " + fmt(e.std_error) + " (" +
                                                    fmt(z) + " SE from zero)");
  ctx.report["verify"] = j;
}

void stage_compare(Context& ctx) {
  const RunConfig& c = ctx.config;
  SimConfig sim = sim_config(c);
  sim.dt = c.compare_dt;
  sim.paths = c.compare_paths;
  Vec x0{};
  const auto micro = sample_rescaled(ctx.field, c.compare_t, x0, sim);
  const auto limit = sample_limit(ctx.params, c.limit_h, c.compare_t, x0, c.compare_paths, c.seed);
  const auto cmp = compare_laws(micro, limit, ctx.field.dim());
  ctx.report["compare"] = Json{{"t", c.compare_t},
                               {"epsilon", c.epsilon},
                               {"ks", cmp.ks},
                               {"max_ks", cmp.max_ks},
                               {"threshold", cmp.threshold}};
  ctx.check("compare.ks", cmp.pass, "max KS " + fmt(cmp.max_ks) + " vs threshold " + fmt(cmp.threshold));
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config) {
  Context ctx{config, parse_field(config.field_text, config.eta), {}, {}, {}, {}, {}, Json::object(), {}};
  ctx.grid.n = config.n;
  ctx.grid.dim = ctx.field.dim();
  ctx.grid.k_trunc = config.k_trunc;

  const std::string hash = config.hash();
  Json stages = Json::array();
  for (Stage s : config.stages) stages.push_back(std::string(to_string(s)));
  ctx.report["config_hash"] = hash;
  ctx.report["seed"] = config.seed;
  ctx.report["stages"] = stages;
  ctx.report["field"] = Json{{"dim", ctx.field.dim()}, {"eta", ctx.field.eta()},
                             {"sup_norm_bound", ctx.field.sup_norm_bound()}};

  const std::pair<Stage, void (*)(Context&)> runners[] = {
      {Stage::kCell, stage_cell},         {Stage::kStrip, stage_strip},   {Stage::kParams, stage_params},
      {Stage::kSimulate, stage_simulate}, {Stage::kVerify, stage_verify}, {Stage::kCompare, stage_compare},
  };
  for (const auto& [stage, run] : runners) {
    if (!config.has_stage(stage)) continue;
    try {
      run(ctx);
    } catch (const Error& e) {
      fail(ErrorCode::kStage, "stage '" + std::string(to_string(stage)) + "' failed [" +
                                  std::string(to_string(e.code())) + "]: " + e.what());
    }
  }

  Json checks = Json::array();
  for (const auto& c : ctx.result.checks) checks.push_back(Json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  ctx.report["checks"] = checks;
  ctx.report["pass"] = ctx.result.pass;
  ctx.result.report = ctx.report.dump(2) + "\n";

  std::ostringstream os;
  os << "ihom run " << hash << " (" << (ctx.result.pass ? "PASS" : "FAIL") << ")\n";
  render(ctx.report, "", os);
  ctx.result.summary = os.str();
  return std::move(ctx.result);
}

void write_outputs(const RunConfig& config, const PipelineResult& result) {
  const std::filesystem::path out(config.out);
  write_text_file(out / "report.json", result.report);
  write_text_file(out / "summary.txt", result.summary);
  write_text_file(out / "estimates.tsv", estimates_tsv(result.estimates, config.hash()));
}

std::vector<std::filesystem::path> export_paths(const RunConfig& config) {
  if (!config.has_stage(Stage::kSimulate)) fail(ErrorCode::kValidation, "path export needs the simulate stage");
  std::vector<std::filesystem::path> files;
  if (config.export_paths <= 0) return files;

  const InterfaceDriftField field = parse_field(config.field_text, config.eta);
  GridSpec grid{config.n, field.dim(), config.k_trunc};
  CellOptions copt;
  copt.stencil = config.stencil;
  copt.tol.strict = config.strict;
  const auto plus = solve_cell(Side::kPlus, field.plus(), grid, copt);
  const auto minus = solve_cell(Side::kMinus, field.minus(), grid, copt);
  StripOptions sopt;
  sopt.stencil = config.stencil;
  const auto strip = solve_strip_measure(field, plus, minus, grid, sopt);
  const auto [pp, pm] = compute_p(strip.q.q_plus, strip.q.q_minus, plus.D(0, 0), minus.D(0, 0));
  const auto alpha = compute_alpha(strip, field, pp, pm, plus.D, minus.D, &plus, &minus);
  const auto params = assemble_interface_params(plus, minus, strip.q, alpha);

  const std::filesystem::path dir = std::filesystem::path(config.out) / "paths";
  const int d = field.dim();
  const double eps = config.epsilon;
  const double micro_t = config.compare_t / (eps * eps);
  auto row = [&](std::ostringstream& os, double t, const Vec& x, int dim, const double* extra) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    os << buf;
    for (int i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", x[i]);
      os << '\t' << buf;
    }
    if (extra != nullptr) {
      std::snprintf(buf, sizeof buf, "%.17g", *extra);
      os << '\t' << buf;
    }
    os << '\n';
  };
  auto header = [&](std::ostringstream& os, bool with_l) {
    os << "t";
    for (int i = 0; i < d; ++i) os << "\tx" << (i + 1);
    if (with_l) os << "\tL";
    os << '\n';
  };

  for (long long i = 0; i < config.export_paths; ++i) {
    PathRng rng(derive_seed(config.seed, Stream::kPathExport, static_cast<std::uint64_t>(i)));
    const Path micro = simulate_path(field, Vec{}, config.compare_dt, micro_t, rng);
    std::ostringstream m;
    std::ostringstream r;
    header(m, false);
    header(r, false);
    for (std::size_t k = 0; k < micro.t.size(); k += static_cast<std::size_t>(config.export_stride)) {
      row(m, micro.t[k], micro.x[k], d, nullptr);
      const double t = micro.t[k] * eps * eps;
      row(r, t, rescaled_state(micro, eps, t), d, nullptr);
    }
    LimitScheme scheme;
    scheme.h = config.limit_h;
    scheme.params = params;
    scheme.horizon = config.compare_t;
    PathRng lrng(derive_seed(config.seed, Stream::kPathExport, static_cast<std::uint64_t>(config.export_paths + i)));
    const LimitPath lim = simulate_limit_path(scheme, Vec{}, lrng);
    std::ostringstream l;
    header(l, true);
    for (std::size_t k = 0; k < lim.t.size(); k += static_cast<std::size_t>(config.export_stride)) {
      row(l, lim.t[k], lim.x[k], d, &lim.local_time[k]);
    }
    const auto tag = std::to_string(i);
    files.push_back(dir / ("micro_" + tag + ".tsv"));
    write_text_file(files.back(), m.str());
    files.push_back(dir / ("rescaled_" + tag + ".tsv"));
    write_text_file(files.back(), r.str());
    files.push_back(dir / ("limit_" + tag + ".tsv"));
    write_text_file(files.back(), l.str());
  }
  return files;
}

}  // namespace ihom
