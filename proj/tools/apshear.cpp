// Command-line front end: one subcommand per stage of a run.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "apshear/io.hpp"

namespace fs = std::filesystem;
using namespace apshear;

namespace {

enum Exit { kOk = 0, kFailure = 1, kValidation = 2, kNoConvergence = 3, kIo = 4 };

struct Options {
  std::string config;
  std::string out = ".";
  bool verbose = false;
  std::string solution;
  std::optional<double> lambda, mu;
};

RunConfig load(const Options& o) {
  if (o.config.empty()) return parse_config_string("", "<defaults>");
  return parse_config(o.config);
}

fs::path out_path(const Options& o, const std::string& name) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw IoError("cannot create output directory " + o.out + ": " + ec.message());
  return fs::path(o.out) / name;
}

void print_report(const RunConfig& c) {
  const auto& r = c.report;
  std::cout << "model: " << to_string(c.kind) << "\n";
  std::cout << "hypotheses: " << (r.passed ? "passed" : "FAILED") << "\n";
  if (c.kind == ModelKind::ModelI) std::cout << "xi1: " << std::setprecision(17) << r.xi1 << "\n";
  if (r.q1) std::cout << "q1: " << std::setprecision(17) << *r.q1 << "\n";
  for (const auto& v : r.violations)
    std::cout << "  violation " << v.condition << " at " << v.location << " value " << v.value << "\n";
}

int cmd_verify(const Options& o) {
  const auto c = load(o);
  print_report(c);
  return kOk;
}

int cmd_seed(const Options& o) {
  const auto c = load(o);
  const auto model = build_model(c);
  const auto force = build_force(c);
  const auto p = make_seed_parameters(model, force, c.seed_epsilon);
  const auto seed = homoclinic_seed(p, build_grid(c));
  std::cout << std::setprecision(17) << "epsilon: " << p.epsilon << "\nlambda: " << p.lambda << "\nalpha: " << p.alpha
            << "\nalpha_stated: " << stated_amplitude(model.c1(), force.b1()) << "\n";
  const auto d = diagnose(seed, model, force, model.xi1, c.continuation.sigma, 0.0);
  const auto path = out_path(o, "seed.json");
  write_solution(seed, &d, &model, &force, path);
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_run(const Options& o) {
  const auto c = load(o);
  const auto model = build_model(c);
  const auto force = build_force(c);
  PointCallback<double> progress;
  if (o.verbose)
    progress = [](const BranchPoint<double>& p) {
      const auto& d = p.diagnostics;
      std::cerr << std::setprecision(6) << "s=" << p.s << " lambda=" << p.field.lambda << " amp=" << d.amplitude
                << " width=" << d.width_half << " e_min=" << d.e_min << " H=" << d.H_max_dev
                << " iters=" << p.newton_iterations << " L=" << p.field.grid.L << (d.nodal.all() ? "" : " NODAL")
                << "\n";
    };
  const auto branch = run_branch(c.continuation, model, force, build_grid(c), c.seed_epsilon, progress);
  if (o.verbose)
    for (const auto& e : branch.events)
      std::cerr << "event " << to_string(e.kind) << " step=" << e.step << " ds=" << e.ds << " " << e.detail << "\n";

  const auto bpath = out_path(o, c.branch_file);
  write_branch(branch.points, branch.termination, bpath);
  const auto& last = branch.points.back();
  const auto spath = out_path(o, c.solution_file);
  write_solution(last.field, &last.diagnostics, &model, &force, spath);
  std::cout << "points: " << branch.points.size() << "\ntermination: " << to_string(branch.termination)
            << "\nnodal_rejections: " << branch.count(BranchEvent::Kind::nodal_rejection)
            << "\ndomain_extensions: " << branch.count(BranchEvent::Kind::domain_extension) << "\nwrote "
            << bpath.string() << "\nwrote " << spath.string() << "\n";
  return branch.termination == Termination::ds_underflow ? kNoConvergence : kOk;
}

int cmd_limit(const Options& o) {
  const auto c = load(o);
  const auto model = build_model(c);
  const auto force = build_force(c);
  const auto seed = make_seed_parameters(model, force, c.seed_epsilon);
  const double lambda = o.lambda ? *o.lambda : c.limit_lambda.value_or(seed.lambda);
  const double mu = o.mu ? *o.mu : c.limit_mu.value_or(seed.alpha * seed.epsilon);
  const auto prof = limiting_profile(model, force, lambda, mu, c.Ny);
  std::ostringstream csv;
  csv << std::setprecision(17) << "y,U,U_y\n";
  for (Eigen::Index j = 0; j < prof.U.size(); ++j)
    csv << double(j) * prof.hy << ',' << prof.U[j] << ',' << prof.Uy[j] << '\n';
  const auto path = out_path(o, "limit_profile.csv");
  write_atomic(path, csv.str());
  std::cout << std::setprecision(17) << "lambda: " << lambda << "\nmu: " << prof.mu
            << "\ntrivial: " << (prof.trivial ? "true" : "false")
            << "\nfront_identity: " << front_identity(prof, model, force)
            << "\ntransversal_hamiltonian: " << transversal_hamiltonian(prof, model, force) << "\nwrote "
            << path.string() << "\n";
  return kOk;
}

int cmd_diagnose(const Options& o) {
  const auto sol = read_solution(o.solution);
  ConstitutiveModel<double> model;
  BodyForce<double> force;
  if (!o.config.empty() || !sol.kind) {
    const auto c = load(o);
    model = build_model(c);
    force = build_force(c);
  } else {
    model = make_model(sol.model_coeffs, *sol.kind);
    force = make_force(sol.force_coeffs);
    const auto rep = verify_hypotheses(model, force, 2000);
    if (!rep.passed) {
      std::vector<std::string> v;
      for (const auto& x : rep.violations) v.push_back("hypothesis violated: " + x.condition);
      throw ValidationError(v);
    }
    apply_report(model, rep);
  }
  const double res = scaled_residual(assemble_residual(sol.field, model, force), sol.field);
  auto d = diagnose(sol.field, model, force, model.xi1, 0.5, res);
  std::cout << std::setprecision(17) << "lambda: " << d.lambda << "\namplitude: " << d.amplitude
            << "\nwidth_half: " << d.width_half << "\nsup_grad_sq: " << d.sup_grad_sq << "\ne_min: " << d.e_min
            << " at (" << d.e_min_x << ", " << d.e_min_y << ")\nH_max_dev: " << d.H_max_dev
            << "\nresidual: " << d.residual_norm << "\nnodal_ok: " << (d.nodal.all() ? "true" : "false") << "\n";
  auto bound = [](const char* name, const BoundCheck& b) {
    if (!b.applicable)
      std::cout << name << ": n/a\n";
    else
      std::cout << name << ": " << b.lhs << " <= " << b.rhs << " " << (b.pass ? "pass" : "FAIL") << "\n";
  };
  bound("l6_bound", d.bounds.l6);
  bound("lambda_inequality", d.bounds.lambda_inequality);
  bound("gradient_bound", d.bounds.gradient);
  return kOk;
}

int cmd_reduce(const Options& o) {
  const auto c = load(o);
  const auto model = build_model(c);
  const auto force = build_force(c);
  const double g = force.b1() + 2.0 * model.c1();
  if (!(g < 0)) throw DomainError("front regime (b1 + 2 c1 >= 0), no homoclinic orbit");
  const double k = 0.75 * std::abs(g);
  const auto start = closed_form_orbit(c.ode_X_start, k);
  const auto traj = integrate_planar(start, c.seed_epsilon, k, c.ode_X_end, c.ode_h);
  std::ostringstream csv;
  csv << std::setprecision(17) << "X,V,W,first_integral\n";
  for (const auto& s : traj) csv << s.X << ',' << s.V << ',' << s.W << ',' << planar_first_integral(s, k) << '\n';
  const auto path = out_path(o, "reduced_ode.csv");
  write_atomic(path, csv.str());
  const auto exact = closed_form_orbit(c.ode_X_end, k);
  const auto& end = traj.back();
  std::cout << std::setprecision(17) << "k: " << k << "\nsteps: " << traj.size() - 1 << "\nend: (" << end.V << ", "
            << end.W << ")\nendpoint_error: " << std::hypot(end.V - exact.V, end.W - exact.W) << "\nwrote "
            << path.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anti-plane shear equilibria: seeds, branch continuation and structural diagnostics"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "run configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory");
  app.add_flag("--verbose", o.verbose, "progress on stderr");

  auto* verify = app.add_subcommand("verify-model", "check the constitutive hypotheses");
  auto* seed = app.add_subcommand("seed", "write the asymptotic seed field");
  auto* run = app.add_subcommand("run", "trace the branch, write branch CSV and final solution");
  auto* limit = app.add_subcommand("limit-profile", "x-independent transversal state by shooting");
  limit->add_option("--lambda", o.lambda, "load parameter");
  limit->add_option("--mu", o.mu, "initial guess for U(0)");
  auto* diag = app.add_subcommand("diagnose", "diagnostics of a saved solution");
  diag->add_option("solution", o.solution, "solution JSON")->required();
  auto* reduce = app.add_subcommand("reduce-ode", "integrate the planar reduced system from the closed-form orbit");
  for (auto* sub : {verify, seed, run, limit, diag, reduce}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*verify) return cmd_verify(o);
    if (*seed) return cmd_seed(o);
    if (*run) return cmd_run(o);
    if (*limit) return cmd_limit(o);
    if (*diag) return cmd_diagnose(o);
    if (*reduce) return cmd_reduce(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const SingularJacobian& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const EllipticityExceeded& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
