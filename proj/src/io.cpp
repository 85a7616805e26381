#include "apshear/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace apshear {

namespace {

using json = nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && errno != ERANGE && std::isfinite(out);
}

bool parse_int(const std::string& text, int& out) {
  const std::string t = trim(text);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return !t.empty() && ec == std::errc() && p == t.data() + t.size();
}

bool parse_list(const std::string& text, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_double(item, v)) return false;
    out.push_back(v);
  }
  return !out.empty() || trim(text).empty();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Table of recognised keys per section, each with a setter that reports a type error as a message.
class Schema {
 public:
  using Setter = std::function<std::optional<std::string>(const std::string&)>;

  void add(const std::string& section, const std::string& key, Setter s) { keys_[section + "." + key] = std::move(s); }
  void real(const std::string& section, const std::string& key, double& target) {
    add(section, key, [&target](const std::string& v) -> std::optional<std::string> {
      if (!parse_double(v, target)) return "expected a real number, got '" + trim(v) + "'";
      return std::nullopt;
    });
  }
  void integer(const std::string& section, const std::string& key, int& target) {
    add(section, key, [&target](const std::string& v) -> std::optional<std::string> {
      if (!parse_int(v, target)) return "expected an integer, got '" + trim(v) + "'";
      return std::nullopt;
    });
  }
  void optional_real(const std::string& section, const std::string& key, std::optional<double>& target) {
    add(section, key, [&target](const std::string& v) -> std::optional<std::string> {
      double x;
      if (!parse_double(v, x)) return "expected a real number, got '" + trim(v) + "'";
      target = x;
      return std::nullopt;
    });
  }
  void list(const std::string& section, const std::string& key, std::vector<double>& target) {
    add(section, key, [&target](const std::string& v) -> std::optional<std::string> {
      if (!parse_list(v, target)) return "expected a comma-separated list of reals, got '" + trim(v) + "'";
      return std::nullopt;
    });
  }
  void text(const std::string& section, const std::string& key, std::string& target) {
    add(section, key, [&target](const std::string& v) -> std::optional<std::string> {
      target = trim(v);
      if (target.empty()) return "expected a non-empty value";
      return std::nullopt;
    });
  }

  const Setter* find(const std::string& section, const std::string& key) const {
    auto it = keys_.find(section + "." + key);
    return it == keys_.end() ? nullptr : &it->second;
  }
  bool has_section(const std::string& section) const {
    for (const auto& [k, _] : keys_)
      if (k.compare(0, section.size() + 1, section + ".") == 0) return true;
    return false;
  }

 private:
  std::map<std::string, Setter> keys_;
};

void validate(RunConfig& c, std::vector<std::string>& errors) {
  if (c.model_coeffs.empty() || c.model_coeffs.front() != 1.0)
    errors.push_back("model.coeffs: leading coefficient must be 1 (normalization)");
  if (!(c.q_probe_max > 0)) errors.push_back("model.q_probe_max: must be positive");
  if (c.force_coeffs.size() > 3) errors.push_back("force.coeffs: at most 3 odd coefficients (degree <= 7)");
  if (!(c.L > 0)) errors.push_back("grid.L: must be positive");
  if (c.Nx < 16) errors.push_back("grid.Nx: must be >= 16, got " + std::to_string(c.Nx));
  if (c.Ny < 16) errors.push_back("grid.Ny: must be >= 16, got " + std::to_string(c.Ny));
  if (!(c.seed_epsilon > 0)) errors.push_back("continuation.seed_epsilon: must be positive");
  for (const auto& p : c.continuation.problems()) errors.push_back("continuation: " + p);
  if (c.hypothesis_samples < 100) errors.push_back("diagnostics.hypothesis_samples: must be >= 100");
  if (c.limit_lambda && !(*c.limit_lambda > 0)) errors.push_back("diagnostics.limit_lambda: must be positive");
  if (c.limit_mu && !(*c.limit_mu >= 0)) errors.push_back("diagnostics.limit_mu: must be nonnegative");
  if (!(c.ode_h > 0)) errors.push_back("reduced_ode.h: must be positive");
  if (c.xi1 && c.kind != ModelKind::ModelI) errors.push_back("model.xi1: only meaningful for model_i");
  if (c.xi1 && !(*c.xi1 > 0)) errors.push_back("model.xi1: must be positive");

  // The structural hypotheses need a well-formed law.
  if (!errors.empty()) return;
  const auto model = make_model(c.model_coeffs, c.kind, c.q_probe_max);
  const auto force = make_force(c.force_coeffs);
  c.report = verify_hypotheses(model, force, c.hypothesis_samples);
  for (const auto& v : c.report.violations)
    errors.push_back("hypothesis " + v.condition + " violated at " + fmt(v.location) + " (value " + fmt(v.value) + ")");
  if (c.xi1 && c.report.passed && *c.xi1 > c.report.xi1)
    errors.push_back("model.xi1: " + fmt(*c.xi1) + " exceeds the sampled ellipticity floor " + fmt(c.report.xi1));
}

}  // namespace

RunConfig parse_config_string(const std::string& input, const std::string& origin) {
  RunConfig c;
  std::string kind_text = "model_i";
  auto& k = c.continuation;
  Schema s;
  s.text("model", "kind", kind_text);
  s.list("model", "coeffs", c.model_coeffs);
  s.real("model", "q_probe_max", c.q_probe_max);
  s.optional_real("model", "xi1", c.xi1);
  s.list("force", "coeffs", c.force_coeffs);
  s.real("grid", "L", c.L);
  s.integer("grid", "Nx", c.Nx);
  s.integer("grid", "Ny", c.Ny);
  s.real("continuation", "seed_epsilon", c.seed_epsilon);
  s.real("continuation", "ds_init", k.ds_init);
  s.real("continuation", "ds_min", k.ds_min);
  s.real("continuation", "ds_max", k.ds_max);
  s.integer("continuation", "max_steps", k.max_steps);
  s.real("continuation", "theta", k.theta);
  s.real("continuation", "margin_stop", k.margin_stop);
  s.real("continuation", "width_stop_factor", k.width_stop_factor);
  s.real("continuation", "lambda_max", k.lambda_max);
  s.real("continuation", "newton_tol", k.newton.tol_residual);
  s.integer("continuation", "newton_max_iterations", k.newton.max_iterations);
  s.integer("continuation", "fast_iterations", k.fast_iterations);
  s.real("continuation", "truncation_tol", k.truncation_tol);
  s.real("continuation", "extension_factor", k.extension_factor);
  s.real("continuation", "L_max", k.L_max);
  s.real("continuation", "lambda_floor", k.lambda_floor);
  s.real("diagnostics", "sigma", k.sigma);
  s.integer("diagnostics", "hypothesis_samples", c.hypothesis_samples);
  s.optional_real("diagnostics", "limit_lambda", c.limit_lambda);
  s.optional_real("diagnostics", "limit_mu", c.limit_mu);
  s.real("reduced_ode", "X_start", c.ode_X_start);
  s.real("reduced_ode", "X_end", c.ode_X_end);
  s.real("reduced_ode", "h", c.ode_h);
  s.text("output", "branch", c.branch_file);
  s.text("output", "solution", c.solution_file);

  std::vector<std::string> errors;
  std::istringstream in(input);
  std::string line, section;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto where = origin + ":" + std::to_string(lineno) + ": ";
    const auto hash = line.find_first_of("#;");
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        errors.push_back(where + "malformed section header '" + t + "'");
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      if (!s.has_section(section)) errors.push_back(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value', got '" + t + "'");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = t.substr(eq + 1);
    if (section.empty()) {
      errors.push_back(where + "key '" + key + "' outside any section");
      continue;
    }
    const auto* setter = s.find(section, key);
    if (!setter) {
      if (s.has_section(section)) errors.push_back(where + "unknown key '" + key + "' in [" + section + "]");
      continue;
    }
    if (++seen[section + "." + key] > 1) errors.push_back(where + "duplicate key " + section + "." + key);
    if (auto err = (*setter)(value)) errors.push_back(where + section + "." + key + ": " + *err);
  }

  if (kind_text == "model_i")
    c.kind = ModelKind::ModelI;
  else if (kind_text == "model_ii")
    c.kind = ModelKind::ModelII;
  else
    errors.push_back("model.kind: expected model_i or model_ii, got '" + kind_text + "'");

  validate(c, errors);
  if (!errors.empty()) throw ValidationError(errors);
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path.string());
}

ConstitutiveModel<double> build_model(const RunConfig& cfg) {
  auto m = make_model(cfg.model_coeffs, cfg.kind, cfg.q_probe_max);
  apply_report(m, cfg.report);
  if (cfg.xi1) m.xi1 = *cfg.xi1;
  return m;
}

BodyForce<double> build_force(const RunConfig& cfg) { return make_force(cfg.force_coeffs); }

StripGrid<double> build_grid(const RunConfig& cfg) { return build_grid(cfg.L, cfg.Nx, cfg.Ny); }

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void write_branch(const std::vector<BranchPoint<double>>& points, std::optional<Termination> termination,
                  const std::filesystem::path& path) {
  std::ostringstream os;
  os << std::setprecision(17) << kBranchHeader << '\n';
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    const auto& d = p.diagnostics;
    os << p.s << ',' << p.field.lambda << ',' << d.amplitude << ',' << d.width_half << ',' << d.e_min << ','
       << d.H_max_dev << ',' << d.residual_norm << ',' << p.newton_iterations << ','
       << (d.nodal.all() ? "true" : "false") << ',';
    if (k + 1 == points.size() && termination) os << to_string(*termination);
    os << '\n';
  }
  write_atomic(path, os.str());
}

namespace {

json bound_json(const BoundCheck& b) {
  return {{"applicable", b.applicable}, {"lhs", b.lhs}, {"rhs", b.rhs}, {"pass", b.pass}};
}

BoundCheck bound_from(const json& j) {
  return {j.at("applicable").get<bool>(), j.at("lhs").get<double>(), j.at("rhs").get<double>(),
          j.at("pass").get<bool>()};
}

json diagnostics_json(const DiagnosticsRecord& d) {
  json j = {{"lambda", d.lambda},
            {"amplitude", d.amplitude},
            {"width_half", d.width_half},
            {"sup_grad_sq", d.sup_grad_sq},
            {"e_min", d.e_min},
            {"e_min_location", {d.e_min_x, d.e_min_y}},
            {"H_max_dev", d.H_max_dev},
            {"residual_norm", d.residual_norm},
            {"nodal",
             {{"ux_negative_interior", d.nodal.ux_negative_interior},
              {"uy_negative_interior", d.nodal.uy_negative_interior},
              {"uxx_negative_on_L", d.nodal.uxx_negative_on_L},
              {"uxy_positive_on_T", d.nodal.uxy_positive_on_T},
              {"uyy_negative_on_M", d.nodal.uyy_negative_on_M}}},
            {"bounds",
             {{"l6", bound_json(d.bounds.l6)},
              {"lambda_inequality", bound_json(d.bounds.lambda_inequality)},
              {"gradient", bound_json(d.bounds.gradient)}}}};
  j["front_gap"] = d.front_gap ? json(*d.front_gap) : json(nullptr);
  return j;
}

DiagnosticsRecord diagnostics_from(const json& j) {
  DiagnosticsRecord d;
  d.lambda = j.at("lambda").get<double>();
  d.amplitude = j.at("amplitude").get<double>();
  d.width_half = j.at("width_half").get<double>();
  d.sup_grad_sq = j.at("sup_grad_sq").get<double>();
  d.e_min = j.at("e_min").get<double>();
  d.e_min_x = j.at("e_min_location").at(0).get<double>();
  d.e_min_y = j.at("e_min_location").at(1).get<double>();
  d.H_max_dev = j.at("H_max_dev").get<double>();
  d.residual_norm = j.at("residual_norm").get<double>();
  const auto& n = j.at("nodal");
  d.nodal.ux_negative_interior = n.at("ux_negative_interior").get<bool>();
  d.nodal.uy_negative_interior = n.at("uy_negative_interior").get<bool>();
  d.nodal.uxx_negative_on_L = n.at("uxx_negative_on_L").get<bool>();
  d.nodal.uxy_positive_on_T = n.at("uxy_positive_on_T").get<bool>();
  d.nodal.uyy_negative_on_M = n.at("uyy_negative_on_M").get<bool>();
  const auto& b = j.at("bounds");
  d.bounds.l6 = bound_from(b.at("l6"));
  d.bounds.lambda_inequality = bound_from(b.at("lambda_inequality"));
  d.bounds.gradient = bound_from(b.at("gradient"));
  if (!j.at("front_gap").is_null()) d.front_gap = j.at("front_gap").get<double>();
  return d;
}

}  // namespace

void write_solution(const SolutionField<double>& field, const DiagnosticsRecord* diagnostics,
                    const ConstitutiveModel<double>* model, const BodyForce<double>* force,
                    const std::filesystem::path& path) {
  const auto& g = field.grid;
  std::vector<double> u;
  u.reserve(static_cast<std::size_t>(field.u.size()));
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j <= g.Ny; ++j) u.push_back(field.u(i, j));
  json j = {{"grid", {{"L", g.L}, {"Nx", g.Nx}, {"Ny", g.Ny}, {"hx", g.hx}, {"hy", g.hy}}},
            {"lambda", field.lambda},
            {"u_layout", "row-major, index i*(Ny+1)+j, x_i = i*hx, y_j = j*hy"},
            {"u", u}};
  if (model)
    j["model"] = {{"kind", to_string(model->kind)},
                  {"coeffs", std::vector<double>(model->coeffs.data(), model->coeffs.data() + model->coeffs.size())}};
  if (force)
    j["force"] = {{"coeffs", std::vector<double>(force->odd_coeffs.data(),
                                                 force->odd_coeffs.data() + force->odd_coeffs.size())}};
  if (diagnostics) j["diagnostics"] = diagnostics_json(*diagnostics);
  write_atomic(path, j.dump(1));
}

SolutionFile read_solution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read solution " + path.string());
  json j;
  try {
    in >> j;
    const auto& g = j.at("grid");
    StripGrid<double> grid = build_grid(g.at("L").get<double>(), g.at("Nx").get<int>(), g.at("Ny").get<int>());
    grid.hx = g.at("hx").get<double>();
    grid.hy = g.at("hy").get<double>();
    SolutionFile out{SolutionField<double>::zeros(grid, j.at("lambda").get<double>()), {}, {}, {}, {}};
    const auto u = j.at("u").get<std::vector<double>>();
    if (u.size() != static_cast<std::size_t>(out.field.u.size()))
      throw IoError(path.string() + ": u has " + std::to_string(u.size()) + " values, grid expects " +
                    std::to_string(out.field.u.size()));
    std::size_t k = 0;
    for (int i = 0; i <= grid.Nx; ++i)
      for (int jj = 0; jj <= grid.Ny; ++jj) out.field.u(i, jj) = u[k++];
    if (j.contains("diagnostics")) out.diagnostics = diagnostics_from(j.at("diagnostics"));
    if (j.contains("model")) {
      const auto kind = j["model"].at("kind").get<std::string>();
      out.kind = kind == "model_ii" ? ModelKind::ModelII : ModelKind::ModelI;
      out.model_coeffs = j["model"].at("coeffs").get<std::vector<double>>();
    }
    if (j.contains("force")) out.force_coeffs = j["force"].at("coeffs").get<std::vector<double>>();
    return out;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": malformed solution file: " + e.what());
  } catch (const DomainError& e) {
    throw IoError(path.string() + ": invalid grid: " + e.what());
  }
}

}  // namespace apshear
