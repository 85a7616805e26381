#pragma once

// Run configuration, branch CSV and solution JSON.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "apshear/continuation.hpp"

namespace apshear {

struct RunConfig {
  ModelKind kind = ModelKind::ModelI;
  std::vector<double> model_coeffs{1.0, -0.3, 0.2};
  double q_probe_max = 10.0;
  std::optional<double> xi1;  // must not exceed the sampled floor

  std::vector<double> force_coeffs{-0.1};

  double L = 60.0;
  int Nx = 240;
  int Ny = 32;

  double seed_epsilon = 0.25;
  ContinuationConfig continuation;

  int hypothesis_samples = 2000;
  std::optional<double> limit_lambda;  // defaults to the seed load
  std::optional<double> limit_mu;      // defaults to the seed amplitude

  double ode_X_start = -10.0;
  double ode_X_end = 0.0;
  double ode_h = 1e-3;

  std::string branch_file = "branch.csv";
  std::string solution_file = "solution.json";

  /// Hypothesis report for the configured law, filled by parse_config.
  HypothesisReport report;
};

/// Parses the sectioned `key = value` format. Every problem found is reported in one ValidationError;
/// a missing or unreadable file raises IoError.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_string(const std::string& text, const std::string& origin = "<string>");

/// Law with xi1 / q1 filled in from the report (or the accepted override).
ConstitutiveModel<double> build_model(const RunConfig& cfg);
BodyForce<double> build_force(const RunConfig& cfg);
StripGrid<double> build_grid(const RunConfig& cfg);

inline constexpr const char* kBranchHeader =
    "s,lambda,amplitude,width_half,e_min,H_max_dev,residual,newton_iters,nodal_ok,termination";

/// One row per point, 17 significant digits; the termination reason appears on the last row only.
void write_branch(const std::vector<BranchPoint<double>>& points, std::optional<Termination> termination,
                  const std::filesystem::path& path);

struct SolutionFile {
  SolutionField<double> field;
  std::optional<DiagnosticsRecord> diagnostics;
  std::optional<ModelKind> kind;
  std::vector<double> model_coeffs;
  std::vector<double> force_coeffs;
};

/// Grid metadata, row-major u (index i (Ny + 1) + j), lambda, the law and the diagnostics record.
void write_solution(const SolutionField<double>& field, const DiagnosticsRecord* diagnostics,
                    const ConstitutiveModel<double>* model, const BodyForce<double>* force,
                    const std::filesystem::path& path);
SolutionFile read_solution(const std::filesystem::path& path);

/// Writes `text` to a sibling temporary and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace apshear
