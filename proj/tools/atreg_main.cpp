// Command-line front end for the Arnoldi-Tikhonov regularization toolkit.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "atreg/atreg.hpp"

namespace {

constexpr int kExitMaxIter = 2;
constexpr int kExitBreakdown = 3;
constexpr int kExitIo = 10;
constexpr int kExitNonSquareImage = 11;
constexpr int kExitSizeLimit = 12;

int exit_code_for(atreg::StopReason reason) {
  switch (reason) {
    case atreg::StopReason::converged: return 0;
    case atreg::StopReason::max_iter: return kExitMaxIter;
    case atreg::StopReason::breakdown: return kExitBreakdown;
  }
  return 1;
}

void add_solver_options(CLI::App* cmd, atreg::ExperimentSpec& spec) {
  cmd->add_option("--mode", spec.mode, "Parameter rule: embedded, secant, gmres-switch")
      ->check(CLI::IsMember({"embedded", "secant", "gmres-switch"}));
  cmd->add_option("--lambda0", spec.lambda0, "Initial regularization parameter");
  cmd->add_option("--eta", spec.eta, "Discrepancy safety factor (> 1)");
  cmd->add_option("--tau-res", spec.tau_res, "Residual stability threshold");
  cmd->add_option("--tau-discr", spec.tau_discr, "Discrepancy stability threshold");
  cmd->add_option("--max-iter", spec.max_iter, "Iteration cap");
  cmd->add_option("--lambda-floor", spec.lambda_floor, "Zero-numerator substitution factor");
  cmd->add_option("--noise-norm", spec.noise_norm,
                  "Known noise norm for secant/gmres-switch (default: actual ||e||)");
  cmd->add_option("--noise", spec.noise_level, "Relative noise level");
  cmd->add_option("--seed", spec.seed, "Noise seed");
  cmd->add_option("--out", spec.out_prefix, "Output path prefix");
}

void add_problem_options(CLI::App* cmd, atreg::ExperimentSpec& spec) {
  cmd->add_option("--problem", spec.problem,
                  "Test problem: shaw, baart, foxgood, ilaplace, blur, matrix-file")
      ->check(CLI::IsMember({"shaw", "baart", "foxgood", "ilaplace", "blur", "matrix-file"}));
  cmd->add_option("--n", spec.n, "Problem dimension for the integral-equation problems");
  cmd->add_option("--reg", spec.reg, "Regularization operator: identity, l1, l2, grad2d")
      ->check(CLI::IsMember({"identity", "l1", "l2", "grad2d"}));
  cmd->add_option("--band", spec.band, "Blur half-bandwidth");
  cmd->add_option("--sigma", spec.sigma, "Blur Gaussian spread");
  cmd->add_option("--image", spec.image, "Input PGM image for the blur problem");
  cmd->add_option("--matrix", spec.matrix_file, "Matrix file (rows cols entries...)");
  cmd->add_option("--rhs", spec.rhs_file, "Right-hand-side file");
  cmd->add_option("--exact", spec.exact_file, "Exact-solution file");
}

void apply_env_seed(atreg::ExperimentSpec& spec) {
  if (const char* env = std::getenv("ATREG_SEED")) {
    spec.seed = std::strtoull(env, nullptr, 10);
  }
}

void report_run(const atreg::RunArtifact& artifact) {
  std::printf("stop_reason=%s iterations=%zu lambda_final=%.6g\n",
              atreg::to_string(artifact.stop_reason), artifact.iterations,
              artifact.lambda_final);
  if (artifact.rel_error) std::printf("rel_error=%.6g\n", *artifact.rel_error);
  std::printf("wrote %s and %s\n", artifact.csv_path.c_str(), artifact.json_path.c_str());
  std::fprintf(stderr, "wall time: %.3f s\n", artifact.wall_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arnoldi-Tikhonov regularization for discrete ill-posed systems"};
  app.require_subcommand(1);

  atreg::ExperimentSpec run_spec;
  std::string run_from_json;
  CLI::App* run = app.add_subcommand("run", "Solve one test problem and emit telemetry");
  run->set_config("--config");
  add_problem_options(run, run_spec);
  add_solver_options(run, run_spec);
  run->add_option("--from-json", run_from_json,
                  "Load the full spec from a previously emitted summary JSON");

  atreg::ExperimentSpec deblur_spec;
  deblur_spec.problem = "blur";
  deblur_spec.out_prefix = "atreg_deblur";
  CLI::App* deblur = app.add_subcommand("deblur", "Blur, corrupt, and restore a PGM image");
  deblur->set_config("--config");
  deblur->add_option("input", deblur_spec.image, "Input PGM image")->required();
  deblur->add_option("--band", deblur_spec.band, "Blur half-bandwidth");
  deblur->add_option("--sigma", deblur_spec.sigma, "Blur Gaussian spread");
  add_solver_options(deblur, deblur_spec);

  atreg::DiagSpec diag_spec;
  diag_spec.base.noise_level = 0.0;
  diag_spec.base.out_prefix = "atreg_diag";
  CLI::App* diag = app.add_subcommand("diag", "Emit a diagnostic table");
  diag->set_config("--config");
  diag->add_option("kind", diag_spec.kind, "decay, stagnation, noisecurve, peakplateau")
      ->required()
      ->check(CLI::IsMember({"decay", "stagnation", "noisecurve", "peakplateau"}));
  add_problem_options(diag, diag_spec.base);
  diag->add_option("--noise", diag_spec.base.noise_level, "Relative noise level");
  diag->add_option("--seed", diag_spec.base.seed, "Noise seed");
  diag->add_option("--steps", diag_spec.steps, "Arnoldi steps to run");
  diag->add_option("--k", diag_spec.k, "Number of noise-curve points");
  diag->add_option("--out", diag_spec.base.out_prefix, "Output path prefix");

  atreg::ExperimentSpec sweep_spec;
  sweep_spec.out_prefix = "atreg_sweep";
  std::vector<std::uint64_t> sweep_seeds{0, 1, 2};
  CLI::App* sweep = app.add_subcommand("sweep", "Run one spec over several seeds in parallel");
  sweep->set_config("--config");
  add_problem_options(sweep, sweep_spec);
  add_solver_options(sweep, sweep_spec);
  sweep->add_option("--seeds", sweep_seeds, "Seeds to run")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      atreg::ExperimentSpec spec = run_spec;
      if (!run_from_json.empty()) spec = atreg::spec_from_summary_file(run_from_json);
      apply_env_seed(spec);
      const atreg::RunArtifact artifact = atreg::cmd_run(spec);
      report_run(artifact);
      return exit_code_for(artifact.stop_reason);
    }
    if (deblur->parsed()) {
      apply_env_seed(deblur_spec);
      const atreg::DeblurArtifact artifact = atreg::cmd_deblur(deblur_spec);
      std::printf("blurred_rel_error=%.6g restored_rel_error=%.6g\n",
                  artifact.blurred_rel_error, artifact.restored_rel_error);
      report_run(artifact.run);
      return exit_code_for(artifact.run.stop_reason);
    }
    if (diag->parsed()) {
      apply_env_seed(diag_spec.base);
      const atreg::DiagArtifact artifact = atreg::cmd_diag(diag_spec);
      std::printf("wrote %s and %s\n", artifact.csv_path.c_str(), artifact.json_path.c_str());
      return 0;
    }
    if (sweep->parsed()) {
      const auto artifacts = atreg::cmd_sweep(sweep_spec, sweep_seeds);
      for (const auto& artifact : artifacts) report_run(artifact);
      return 0;
    }
  } catch (const atreg::NonSquareImage& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNonSquareImage;
  } catch (const atreg::SizeLimit& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSizeLimit;
  } catch (const atreg::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const atreg::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
