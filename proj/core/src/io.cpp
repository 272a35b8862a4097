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

#include "ihom/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ihom/error.hpp"

namespace ihom {

using Json = nlohmann::ordered_json;

namespace {

Json parse_json(std::string_view text, const char* what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

template <class T>
T get(const Json& j, const char* key, const char* what) {
  if (!j.contains(key)) fail(ErrorCode::kParse, std::string(what) + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParse, std::string(what) + ": bad \"" + key + "\": " + e.what());
  }
}

Json terms_to_json(const FourierSeries& s) {
  Json arr = Json::array();
  for (const auto& t : s.terms()) {
    Json k = Json::array();
    for (int a = 0; a < s.dim(); ++a) k.push_back(t.wave[a]);
    arr.push_back(Json{{"k", k}, {"cos", t.cos_coef}, {"sin", t.sin_coef}});
  }
  return arr;
}

FourierSeries terms_from_json(const Json& arr, int dim) {
  if (!arr.is_array()) fail(ErrorCode::kParse, "Fourier terms must be an array");
  std::vector<FourierTerm> terms;
  for (const auto& t : arr) {
    FourierTerm term;
    const auto k = get<std::vector<int>>(t, "k", "Fourier term");
    if (static_cast<int>(k.size()) != dim) fail(ErrorCode::kParse, "wave vector length differs from dim");
    for (int a = 0; a < dim; ++a) term.wave[a] = k[a];
    term.cos_coef = t.value("cos", 0.0);
    term.sin_coef = t.value("sin", 0.0);
    terms.push_back(term);
  }
  return FourierSeries(dim, std::move(terms));
}

Json torus_to_json(const TorusField& f) {
  Json comps = Json::array();
  for (int i = 0; i < f.dim(); ++i) comps.push_back(terms_to_json(f.component(i)));
  return Json{{"components", comps}};
}

TorusField torus_from_json(const Json& j, int dim, const char* what) {
  if (j.is_string() && j.get<std::string>() == "zero") return TorusField::zero(dim);
  if (!j.is_object()) fail(ErrorCode::kParse, std::string(what) + ": side must be an object or \"zero\"");
  if (j.size() != 1) fail(ErrorCode::kParse, std::string(what) + ": exactly one representation expected");
  const auto& [key, val] = *j.items().begin();
  if (key == "zero") return TorusField::zero(dim);
  if (key == "constant") {
    const auto v = val.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != dim) fail(ErrorCode::kParse, std::string(what) + ": constant has wrong length");
    Vec c{};
    for (int i = 0; i < dim; ++i) c[i] = v[i];
    return TorusField::constant(c, dim);
  }
  if (key == "potential") return TorusField::gradient_flow(terms_from_json(val, dim));
  if (key == "stream") return TorusField::stream_flow(terms_from_json(val, dim));
  if (key == "components") {
    if (!val.is_array() || static_cast<int>(val.size()) != dim) {
      fail(ErrorCode::kParse, std::string(what) + ": need one term list per component");
    }
    std::vector<FourierSeries> comps;
    for (const auto& c : val) comps.push_back(terms_from_json(c, dim));
    return TorusField(dim, std::move(comps));
  }
  fail(ErrorCode::kParse, std::string(what) + ": unknown representation \"" + key + "\"");
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(m.cols())) fail(ErrorCode::kParse, "ragged matrix");
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

InterfaceDriftField parse_field(std::string_view json_text, double default_eta) {
  const Json j = parse_json(json_text, "field file");
  const int dim = get<int>(j, "dim", "field file");
  const double eta = j.contains("eta") ? get<double>(j, "eta", "field file") : default_eta;
  for (const auto& [key, v] : j.items()) {
    if (key != "dim" && key != "eta" && key != "plus" && key != "minus" && key != "perturbation") {
      fail(ErrorCode::kParse, "field file: unknown key \"" + key + "\"");
    }
  }
  if (!j.contains("plus") || !j.contains("minus")) fail(ErrorCode::kParse, "field file: need \"plus\" and \"minus\"");
  TorusField plus = torus_from_json(j.at("plus"), dim, "plus");
  TorusField minus = torus_from_json(j.at("minus"), dim, "minus");
  std::optional<TorusField> pert;
  if (j.contains("perturbation")) pert = torus_from_json(j.at("perturbation"), dim, "perturbation");
  return make_interface_field(std::move(plus), std::move(minus), eta, std::move(pert));
}

std::string field_to_json(const InterfaceDriftField& field) {
  Json j{{"dim", field.dim()}, {"eta", field.eta()}, {"plus", torus_to_json(field.plus())},
         {"minus", torus_to_json(field.minus())}};
  if (field.perturbation()) j["perturbation"] = torus_to_json(*field.perturbation());
  return j.dump(2);
}

std::string cell_to_json(const CellSolution& cell) {
  Json g = Json::array();
  for (const auto& c : cell.correctors) g.push_back(c.values);
  Json j{{"side", side_name(cell.side)},
         {"grid", {{"n", cell.grid.n}, {"dim", cell.grid.dim}}},
         {"stencil", std::string(to_string(cell.stencil))},
         {"D", matrix_to_json(cell.D)},
         {"residuals",
          {{"density", cell.residuals.density},
           {"corrector", cell.residuals.corrector},
           {"asymmetry", cell.residuals.asymmetry}}},
         {"mu", cell.mu.values},
         {"correctors", g}};
  return j.dump();
}

CellSolution parse_cell(std::string_view json_text) {
  const Json j = parse_json(json_text, "cell solution");
  CellSolution c;
  const auto side = get<std::string>(j, "side", "cell solution");
  if (side != "plus" && side != "minus") fail(ErrorCode::kParse, "cell solution: side must be plus or minus");
  c.side = side == "plus" ? Side::kPlus : Side::kMinus;
  c.grid.n = j.at("grid").at("n").get<int>();
  c.grid.dim = j.at("grid").at("dim").get<int>();
  c.grid.validate();
  c.stencil = stencil_from_string(get<std::string>(j, "stencil", "cell solution"));
  c.D = matrix_from_json(j.at("D"));
  c.mu = GridFunction(c.grid);
  c.mu.values = get<std::vector<double>>(j, "mu", "cell solution");
  if (c.mu.values.size() != c.grid.torus_nodes()) fail(ErrorCode::kParse, "cell solution: mu has wrong size");
  for (const auto& g : j.at("correctors")) {
    GridFunction f(c.grid);
    f.values = g.get<std::vector<double>>();
    if (f.values.size() != c.grid.torus_nodes()) fail(ErrorCode::kParse, "cell solution: corrector has wrong size");
    c.correctors.push_back(std::move(f));
  }
  const auto& r = j.at("residuals");
  c.residuals.density = r.at("density").get<double>();
  c.residuals.corrector = r.at("corrector").get<std::vector<double>>();
  c.residuals.asymmetry = r.at("asymmetry").get<double>();
  return c;
}

std::string params_to_json(const InterfaceParams& p) {
  Json alpha = Json::array();
  for (int j = 1; j < p.dim; ++j) alpha.push_back(p.alpha[j]);
  Json k = Json::array();
  for (Eigen::Index i = 0; i < p.K.size(); ++i) k.push_back(p.K[i]);
  Json j{{"dim", p.dim},
         {"p_plus", p.p_plus},
         {"p_minus", p.p_minus},
         {"q_plus", p.q_plus},
         {"q_minus", p.q_minus},
         {"alpha", alpha},
         {"D_plus", matrix_to_json(p.D_plus)},
         {"D_minus", matrix_to_json(p.D_minus)},
         {"M_plus", matrix_to_json(p.M_plus)},
         {"M_minus", matrix_to_json(p.M_minus)},
         {"K", k},
         {"rate_plus", number(p.rate_plus)},
         {"rate_minus", number(p.rate_minus)},
         {"tail_bound", p.tail_bound},
         {"alpha_tail_residual", p.alpha_tail_residual},
         {"factor_error", p.factor_error}};
  return j.dump(2);
}

InterfaceParams parse_params(std::string_view json_text) {
  const Json j = parse_json(json_text, "interface parameters");
  const int dim = get<int>(j, "dim", "interface parameters");
  const auto alpha = get<std::vector<double>>(j, "alpha", "interface parameters");
  if (static_cast<int>(alpha.size()) != dim - 1) fail(ErrorCode::kParse, "alpha must have dim - 1 entries");
  Vec a{};
  for (int i = 1; i < dim; ++i) a[i] = alpha[static_cast<std::size_t>(i - 1)];
  InterfaceParams p = make_interface_params(get<double>(j, "p_plus", "interface parameters"), a,
                                            matrix_from_json(j.at("D_plus")), matrix_from_json(j.at("D_minus")));
  if (j.contains("q_plus")) {
    p.q_plus = j.at("q_plus").get<double>();
    p.q_minus = 1.0 - p.q_plus;
  }
  auto opt = [&](const char* key) {
    return j.contains(key) && j.at(key).is_number() ? j.at(key).get<double>() : std::nan("");
  };
  p.rate_plus = opt("rate_plus");
  p.rate_minus = opt("rate_minus");
  if (j.contains("tail_bound")) p.tail_bound = j.at("tail_bound").get<double>();
  if (j.contains("alpha_tail_residual")) p.alpha_tail_residual = j.at("alpha_tail_residual").get<double>();
  return p;
}

std::string estimates_tsv(const std::vector<PathEstimate>& rows, std::string_view config_hash) {
  std::ostringstream os;
  os << "estimator\tvalue\tstderr\tn\tseed\tcensored\tconfig_hash\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.name << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    os << buf << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", r.std_error);
    os << buf << '\t' << r.n << '\t' << r.seed << '\t' << r.censored << '\t' << config_hash << '\n';
  }
  return os.str();
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace ihom
