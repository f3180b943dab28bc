// fmatv: sampled translation validation of FMA contraction on LLVM blocks.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "fmatv/validator.hpp"

namespace {

bool parse_positive_double(const std::string& text, double& out) {
  auto v = fmatv::parse_binary64(text);
  if (!v || !(v->to_double() > 0) || !fmatv::is_finite(*v)) return false;
  out = v->to_double();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translation validation for FMA contraction on LLVM basic blocks"};
  app.require_subcommand(1);

  fmatv::ValidateOptions vopt;
  std::string mode = "lenient", bound = "both", delta_text, eta_text;
  bool no_corpus = false;
  auto* validate = app.add_subcommand("validate", "Check that the optimized block refines the original on sampled inputs");
  validate->add_option("--original", vopt.original_path, "Original block (.ll)")->required();
  validate->add_option("--optimized", vopt.optimized_path, "Optimized block (.ll)")->required();
  validate->add_option("--alignment", vopt.alignment_path, "Alignment of locals (.json)")->required();
  validate->add_option("--samples", vopt.sampler.samples, "Number of random input tuples")->capture_default_str();
  validate->add_option("--seed", vopt.sampler.seed, "Sampler seed")->capture_default_str();
  validate->add_option("--exp-min", vopt.sampler.exp_min, "Smallest sampled binary exponent")->capture_default_str();
  validate->add_option("--exp-max", vopt.sampler.exp_max, "Largest sampled binary exponent")->capture_default_str();
  validate->add_option("--mode", mode, "Finiteness handling")->check(CLI::IsMember({"strict", "lenient"}))->capture_default_str();
  validate->add_option("--bound", bound, "Error bound used for the verdict")
      ->check(CLI::IsMember({"paper", "derived", "both"}))
      ->capture_default_str();
  validate->add_option("--report", vopt.report_path, "Write the JSON report here instead of stdout");
  validate->add_option("--delta", delta_text, "Relative error unit (default 2^-53)");
  validate->add_option("--eta", eta_text, "Absolute error unit (default 2^-1074, half-ulp 2^-1075 rounded up)");
  validate->add_flag("--no-corpus", no_corpus, "Skip the special-value corpus");

  std::string block_path, inputs;
  auto* run = app.add_subcommand("run", "Interpret one block on concrete inputs and print its trace");
  run->add_option("--block", block_path, "Block (.ll)")->required();
  run->add_option("--inputs", inputs, "Parameter values, e.g. a=1.0,b=0x3FF0000000000000,c=poison")->required();

  std::string b_orig, b_opt, mags;
  auto* bnd = app.add_subcommand("bound", "Print the error bounds for a block pair at given input magnitudes");
  bnd->add_option("--original", b_orig, "Original block (.ll)")->required();
  bnd->add_option("--optimized", b_opt, "Optimized block (.ll)")->required();
  bnd->add_option("--mags", mags, "Input magnitudes, e.g. a=1,b=1,c=1")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fmatv::kExitNoVerdict;
  }

  fmatv::ErrorModelParams params;
  if (!delta_text.empty() && !parse_positive_double(delta_text, params.delta)) {
    std::cerr << "error: --delta must be a positive finite number\n";
    return fmatv::kExitNoVerdict;
  }
  if (!eta_text.empty() && !parse_positive_double(eta_text, params.eta)) {
    std::cerr << "error: --eta must be a positive finite number\n";
    return fmatv::kExitNoVerdict;
  }

  if (*validate) {
    vopt.sampler.include_special_corpus = !no_corpus;
    vopt.cfg.finiteness_mode = mode == "strict" ? fmatv::FinitenessMode::Strict : fmatv::FinitenessMode::Lenient;
    vopt.cfg.bound_source = bound == "paper"     ? fmatv::BoundSource::PaperFormula
                            : bound == "derived" ? fmatv::BoundSource::DerivedBound
                                                 : fmatv::BoundSource::Both;
    vopt.cfg.params = params;
    return fmatv::cmd_validate(vopt);
  }
  if (*run) return fmatv::cmd_run(block_path, inputs);
  return fmatv::cmd_bound(b_orig, b_opt, mags, params);
}
