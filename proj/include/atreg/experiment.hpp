#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "atreg/diagnostics.hpp"
#include "atreg/pgm.hpp"
#include "atreg/problems.hpp"

namespace atreg {

using ordered_json = nlohmann::ordered_json;

class NonSquareImage : public Error {
 public:
  using Error::Error;
};

/// Fully resolved description of one solver run.
struct ExperimentSpec {
  std::string problem = "shaw";  // shaw|baart|foxgood|ilaplace|blur|matrix-file
  std::size_t n = 120;
  double noise_level = 1e-3;
  std::uint64_t seed = 0;
  std::string reg = "l1";        // identity|l1|l2|grad2d
  std::string mode = "embedded"; // embedded|secant|gmres-switch
  double lambda0 = 1.0;
  double eta = 1.02;
  double tau_res = 5e-2;
  double tau_discr = 5e-2;
  std::size_t max_iter = 50;
  double lambda_floor = 1e-12;
  /// Noise norm handed to secant/gmres-switch; 0 means "use the actual ||e||
  /// of the generated noise".
  double noise_norm = 0.0;
  // blur problem inputs
  std::size_t band = 7;
  double sigma = 2.0;
  std::string image;
  // matrix-file problem inputs
  std::string matrix_file;
  std::string rhs_file;
  std::string exact_file;
  std::string out_prefix = "atreg_run";
};

struct RunArtifact {
  std::string csv_path;
  std::string json_path;
  StopReason stop_reason = StopReason::max_iter;
  std::size_t iterations = 0;
  double lambda_final = 0.0;
  std::optional<double> rel_error;
  double wall_seconds = 0.0;
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<double> read_number_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  return values;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace detail

/// A problem ready to run: the operator, the clean right-hand side, and the
/// exact solution when one is known.
struct ProblemInstance {
  std::string name;
  LinearOperator A;
  Vector b_ex;
  std::optional<Vector> x_ex;
};

inline ProblemInstance build_problem(const ExperimentSpec& spec) {
  if (spec.problem == "shaw" || spec.problem == "baart" || spec.problem == "foxgood" ||
      spec.problem == "ilaplace") {
    TestProblem p = spec.problem == "shaw"      ? gen_shaw(spec.n)
                    : spec.problem == "baart"   ? gen_baart(spec.n)
                    : spec.problem == "foxgood" ? gen_foxgood(spec.n)
                                                : gen_ilaplace(spec.n);
    return ProblemInstance{p.name, std::move(p.A), std::move(p.b_ex), std::move(p.x_ex)};
  }
  if (spec.problem == "blur") {
    if (spec.image.empty()) throw InvalidSize("blur problem requires an input image");
    PgmImage img = read_pgm(spec.image);
    if (img.rows != img.cols) throw NonSquareImage("blur problem requires a square image");
    TestProblem p = gen_blur(img.rows, spec.band, spec.sigma, std::move(img.pixels));
    return ProblemInstance{p.name, std::move(p.A), std::move(p.b_ex), std::move(p.x_ex)};
  }
  if (spec.problem == "matrix-file") {
    if (spec.matrix_file.empty()) throw InvalidSize("matrix-file problem requires --matrix");
    std::vector<double> raw = detail::read_number_file(spec.matrix_file);
    if (raw.size() < 2) throw FormatError("matrix file must start with rows cols");
    const auto rows = static_cast<std::size_t>(raw[0]);
    const auto cols = static_cast<std::size_t>(raw[1]);
    if (rows != cols || raw.size() != 2 + rows * cols)
      throw FormatError("matrix file must contain a square matrix");
    Matrix A(rows, cols, std::vector<double>(raw.begin() + 2, raw.end()));
    LinearOperator op = dense_operator(std::move(A));

    std::optional<Vector> x_ex;
    Vector b_ex;
    if (!spec.exact_file.empty()) {
      x_ex = detail::read_number_file(spec.exact_file);
      if (x_ex->size() != rows) throw FormatError("exact-solution file has wrong length");
      b_ex = op.apply(*x_ex);
    } else if (!spec.rhs_file.empty()) {
      b_ex = detail::read_number_file(spec.rhs_file);
      if (b_ex.size() != rows) throw FormatError("rhs file has wrong length");
    } else {
      throw InvalidSize("matrix-file problem requires --rhs or --exact");
    }
    return ProblemInstance{"matrix-file", std::move(op), std::move(b_ex), std::move(x_ex)};
  }
  throw InvalidSize("unknown problem '" + spec.problem + "'");
}

inline RegOperator build_reg(const std::string& reg, std::size_t dim) {
  if (reg == "identity") return RegOperator::identity(dim);
  if (reg == "l1") return deriv1(dim);
  if (reg == "l2") return deriv2(dim);
  if (reg == "grad2d") {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dim))));
    if (side * side != dim) throw InvalidSize("grad2d requires a square problem dimension");
    return grad2d(side);
  }
  throw InvalidSize("unknown regularization operator '" + reg + "'");
}

inline ParamMode parse_mode(const std::string& mode) {
  if (mode == "embedded") return ParamMode::embedded;
  if (mode == "secant") return ParamMode::secant;
  if (mode == "gmres-switch") return ParamMode::gmres_switch;
  throw InvalidSize("unknown mode '" + mode + "'");
}

inline SolverConfig solver_config(const ExperimentSpec& spec, double actual_noise_norm) {
  SolverConfig cfg;
  cfg.lambda0 = spec.lambda0;
  cfg.eta = spec.eta;
  cfg.tau_res = spec.tau_res;
  cfg.tau_discr = spec.tau_discr;
  cfg.max_iter = spec.max_iter;
  cfg.mode = parse_mode(spec.mode);
  cfg.lambda_floor = spec.lambda_floor;
  cfg.noise_norm = spec.noise_norm > 0.0 ? spec.noise_norm : actual_noise_norm;
  return cfg;
}

inline std::string history_csv(const std::vector<IterationRecord>& history) {
  std::string csv = "m,lambda_prev,phi0,phi_lambda,lambda_new,res_change,discr_change,rel_error\n";
  for (const IterationRecord& r : history) {
    csv += std::to_string(r.m);
    csv += ',' + detail::fmt17(r.lambda_prev);
    csv += ',' + detail::fmt17(r.phi0);
    csv += ',' + detail::fmt17(r.phi_lambda);
    csv += ',' + detail::fmt17(r.lambda_new);
    csv += ',' + detail::fmt17(r.res_change);
    csv += ',' + detail::fmt17(r.discr_change);
    csv += ',';
    if (r.rel_error) csv += detail::fmt17(*r.rel_error);
    csv += '\n';
  }
  return csv;
}

inline ordered_json spec_to_json(const ExperimentSpec& spec) {
  ordered_json j;
  j["problem"] = spec.problem;
  j["n"] = spec.n;
  j["noise_level"] = spec.noise_level;
  j["seed"] = spec.seed;
  j["reg"] = spec.reg;
  j["mode"] = spec.mode;
  j["lambda0"] = spec.lambda0;
  j["eta"] = spec.eta;
  j["tau_res"] = spec.tau_res;
  j["tau_discr"] = spec.tau_discr;
  j["max_iter"] = spec.max_iter;
  j["lambda_floor"] = spec.lambda_floor;
  j["noise_norm"] = spec.noise_norm;
  j["band"] = spec.band;
  j["sigma"] = spec.sigma;
  j["image"] = spec.image;
  j["matrix_file"] = spec.matrix_file;
  j["rhs_file"] = spec.rhs_file;
  j["exact_file"] = spec.exact_file;
  j["out_prefix"] = spec.out_prefix;
  return j;
}

inline ExperimentSpec spec_from_json(const ordered_json& j) {
  ExperimentSpec spec;
  spec.problem = j.at("problem").get<std::string>();
  spec.n = j.at("n").get<std::size_t>();
  spec.noise_level = j.at("noise_level").get<double>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.reg = j.at("reg").get<std::string>();
  spec.mode = j.at("mode").get<std::string>();
  spec.lambda0 = j.at("lambda0").get<double>();
  spec.eta = j.at("eta").get<double>();
  spec.tau_res = j.at("tau_res").get<double>();
  spec.tau_discr = j.at("tau_discr").get<double>();
  spec.max_iter = j.at("max_iter").get<std::size_t>();
  spec.lambda_floor = j.at("lambda_floor").get<double>();
  spec.noise_norm = j.at("noise_norm").get<double>();
  spec.band = j.at("band").get<std::size_t>();
  spec.sigma = j.at("sigma").get<double>();
  spec.image = j.at("image").get<std::string>();
  spec.matrix_file = j.at("matrix_file").get<std::string>();
  spec.rhs_file = j.at("rhs_file").get<std::string>();
  spec.exact_file = j.at("exact_file").get<std::string>();
  spec.out_prefix = j.at("out_prefix").get<std::string>();
  return spec;
}

/// Load the spec back from an emitted summary JSON (its "config" object).
inline ExperimentSpec spec_from_summary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  ordered_json j;
  in >> j;
  return spec_from_json(j.at("config"));
}

/// Run one experiment: build the problem, inject noise, solve, and write
/// `<prefix>_history.csv` and `<prefix>_summary.json`. The summary echoes the
/// resolved spec so the run can be repeated bit-for-bit; timing is returned
/// but intentionally kept out of the files.
inline RunArtifact cmd_run(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();

  ProblemInstance problem = build_problem(spec);
  const std::size_t N = problem.A.dim_in();
  NoisySystem noisy = add_noise(problem.b_ex, spec.noise_level, spec.seed);
  const RegOperator L = build_reg(spec.reg, N);
  const SolverConfig cfg = solver_config(spec, norm(noisy.e));

  const Vector* x_ex = problem.x_ex ? &*problem.x_ex : nullptr;
  SolveResult result = at_solve(problem.A, noisy.b, L, cfg, x_ex);

  RunArtifact artifact;
  artifact.csv_path = spec.out_prefix + "_history.csv";
  artifact.json_path = spec.out_prefix + "_summary.json";
  artifact.stop_reason = result.stop_reason;
  artifact.iterations = result.iterations;
  artifact.lambda_final = result.lambda_final;
  // Error of the solution actually returned; at an exact breakdown this can
  // differ from the last record's regularized iterate.
  if (x_ex) artifact.rel_error = relative_error(result.x, *x_ex);

  detail::write_text_file(artifact.csv_path, history_csv(result.history));

  ordered_json summary;
  summary["config"] = spec_to_json(spec);
  ordered_json res;
  res["stop_reason"] = to_string(result.stop_reason);
  res["iterations"] = result.iterations;
  res["lambda_final"] = result.lambda_final;
  res["lambda_next"] = result.history.back().lambda_new;
  res["phi0_final"] = result.history.back().phi0;
  res["phi_lambda_final"] = result.history.back().phi_lambda;
  res["noise_norm_actual"] = norm(noisy.e);
  if (artifact.rel_error)
    res["rel_error"] = *artifact.rel_error;
  else
    res["rel_error"] = nullptr;
  summary["result"] = res;
  detail::write_text_file(artifact.json_path, summary.dump(2) + "\n");

  artifact.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return artifact;
}

struct DeblurArtifact {
  RunArtifact run;
  std::string blurred_path;
  std::string restored_path;
  double blurred_rel_error = 0.0;
  double restored_rel_error = 0.0;
};

/// Blur and corrupt a square grayscale image, restore it with the solver and
/// the 2-D smoothing operator, and write the blurred and restored images next
/// to the usual telemetry.
inline DeblurArtifact cmd_deblur(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  if (spec.image.empty()) throw InvalidSize("deblur requires an input image");
  PgmImage img = read_pgm(spec.image);
  if (img.rows != img.cols) throw NonSquareImage("deblur requires a square image");
  const std::size_t side = img.rows;

  TestProblem problem = gen_blur(side, spec.band, spec.sigma, img.pixels);
  NoisySystem noisy = add_noise(problem.b_ex, spec.noise_level, spec.seed);
  const RegOperator L = grad2d(side);
  const SolverConfig cfg = solver_config(spec, norm(noisy.e));

  SolveResult result = at_solve(problem.A, noisy.b, L, cfg, &problem.x_ex);

  DeblurArtifact artifact;
  artifact.blurred_rel_error = relative_error(noisy.b, problem.x_ex);
  artifact.restored_rel_error = relative_error(result.x, problem.x_ex);
  artifact.blurred_path = spec.out_prefix + "_blurred.pgm";
  artifact.restored_path = spec.out_prefix + "_restored.pgm";
  write_pgm(artifact.blurred_path, side, side, noisy.b);
  write_pgm(artifact.restored_path, side, side, result.x);

  artifact.run.csv_path = spec.out_prefix + "_history.csv";
  artifact.run.json_path = spec.out_prefix + "_summary.json";
  artifact.run.stop_reason = result.stop_reason;
  artifact.run.iterations = result.iterations;
  artifact.run.lambda_final = result.lambda_final;
  artifact.run.rel_error = artifact.restored_rel_error;
  detail::write_text_file(artifact.run.csv_path, history_csv(result.history));

  ordered_json summary;
  summary["config"] = spec_to_json(spec);
  ordered_json res;
  res["stop_reason"] = to_string(result.stop_reason);
  res["iterations"] = result.iterations;
  res["lambda_final"] = result.lambda_final;
  res["lambda_next"] = result.history.back().lambda_new;
  res["blurred_rel_error"] = artifact.blurred_rel_error;
  res["restored_rel_error"] = artifact.restored_rel_error;
  res["noise_norm_actual"] = norm(noisy.e);
  summary["result"] = res;
  detail::write_text_file(artifact.run.json_path, summary.dump(2) + "\n");

  artifact.run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return artifact;
}

struct DiagSpec {
  std::string kind = "decay";  // decay|stagnation|noisecurve|peakplateau
  ExperimentSpec base;
  std::size_t steps = 12;
  std::size_t k = 8;
};

struct DiagArtifact {
  std::string csv_path;
  std::string json_path;
  ordered_json summary;
};

/// Run one diagnostic and emit its table as CSV plus a small JSON summary.
inline DiagArtifact cmd_diag(const DiagSpec& diag) {
  const ExperimentSpec& spec = diag.base;
  ProblemInstance problem = build_problem(spec);
  NoisySystem noisy = add_noise(problem.b_ex, spec.noise_level, spec.seed);

  DiagArtifact artifact;
  artifact.csv_path = spec.out_prefix + "_" + diag.kind + ".csv";
  artifact.json_path = spec.out_prefix + "_" + diag.kind + "_summary.json";

  std::string csv;
  ordered_json summary;
  summary["config"] = spec_to_json(spec);
  summary["kind"] = diag.kind;
  summary["steps"] = diag.steps;

  if (diag.kind == "decay") {
    const DecayReport report = subdiag_decay(problem.A, noisy.b, diag.steps);
    csv = "m,h_sub,sigma,ratio\n";
    for (const DecayRow& row : report.rows) {
      csv += std::to_string(row.m) + ',' + detail::fmt17(row.h_sub) + ',' +
             detail::fmt17(row.sigma) + ',' + detail::fmt17(row.ratio) + '\n';
    }
    summary["rows"] = report.rows.size();
    summary["truncated_by_breakdown"] = report.truncated_by_breakdown;
    if (!report.rows.empty()) {
      summary["h_first"] = report.rows.front().h_sub;
      summary["h_last"] = report.rows.back().h_sub;
    }
  } else if (diag.kind == "stagnation") {
    const StagnationReport report =
        residual_stagnation(problem.A, noisy.b, norm(noisy.e), diag.steps);
    csv = "m,residual\n";
    for (std::size_t i = 0; i < report.residuals.size(); ++i)
      csv += std::to_string(i + 1) + ',' + detail::fmt17(report.residuals[i]) + '\n';
    summary["noise_norm"] = report.noise_norm;
    summary["noise_norm_positive"] = report.noise_norm_positive;
    summary["min_rel_distance"] =
        report.noise_norm_positive ? ordered_json(report.min_rel_distance) : ordered_json(nullptr);
    summary["argmin_m"] = report.argmin_m;
  } else if (diag.kind == "noisecurve") {
    const std::vector<double> values =
        noise_revealing_curve(problem.A, noisy.b, problem.b_ex, noisy.e, diag.k);
    csv = "k,value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
      csv += std::to_string(i + 1) + ',' + detail::fmt17(values[i]) + '\n';
    summary["k"] = diag.k;
    summary["values_emitted"] = values.size();
    double vmax = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) vmax = std::max(vmax, values[i]);
    summary["max_value_from_k2"] = vmax;
  } else if (diag.kind == "peakplateau") {
    ArnoldiState state = arnoldi_init(problem.A, noisy.b);
    std::vector<double> r_norms, rho_norms;
    for (std::size_t m = 1; m <= std::min(diag.steps, problem.A.dim_in()); ++m) {
      arnoldi_step(state, problem.A);
      r_norms.push_back(gmres_residual_norm(state.hessenberg(), state.rhs_projected()));
      Vector c(m, 0.0);
      c[0] = state.b_norm();
      rho_norms.push_back(fom_residual_norm(state.hessenberg_square(), state.subdiag().back(), c));
      if (state.breakdown()) break;
    }
    csv = "m,r_norm,rho_norm\n";
    for (std::size_t i = 0; i < r_norms.size(); ++i)
      csv += std::to_string(i + 1) + ',' + detail::fmt17(r_norms[i]) + ',' +
             detail::fmt17(rho_norms[i]) + '\n';
    summary["violation"] = peak_plateau_violation(r_norms, rho_norms);
  } else {
    throw InvalidSize("unknown diagnostic '" + diag.kind + "'");
  }

  detail::write_text_file(artifact.csv_path, csv);
  detail::write_text_file(artifact.json_path, summary.dump(2) + "\n");
  artifact.summary = std::move(summary);
  return artifact;
}

/// Run one spec per seed concurrently; each run writes to its own prefix.
inline std::vector<RunArtifact> cmd_sweep(const ExperimentSpec& base,
                                          const std::vector<std::uint64_t>& seeds) {
  std::vector<std::future<RunArtifact>> futures;
  futures.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    ExperimentSpec spec = base;
    spec.seed = seed;
    spec.out_prefix = base.out_prefix + "_seed" + std::to_string(seed);
    futures.push_back(std::async(std::launch::async, [spec] { return cmd_run(spec); }));
  }
  std::vector<RunArtifact> artifacts;
  artifacts.reserve(seeds.size());
  for (auto& f : futures) artifacts.push_back(f.get());
  return artifacts;
}

}  // namespace atreg
