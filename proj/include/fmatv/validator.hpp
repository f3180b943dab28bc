#pragma once

// Driver operations behind the command-line tool: sampled validation of a
// block pair, single-input tracing, and bound inspection.

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fmatv/denotation.hpp"
#include "fmatv/error_model.hpp"
#include "fmatv/parser.hpp"
#include "fmatv/refinement.hpp"
#include "fmatv/sampler.hpp"

namespace fmatv {

inline constexpr std::size_t kMaxCounterexamples = 16;

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitNoVerdict = 2 };

struct IndexedVerdict {
  std::uint64_t index = 0;
  bool from_corpus = false;
  Verdict verdict;
};

struct Report {
  VerdictStatus verdict = VerdictStatus::Pass;
  std::uint64_t samples_run = 0;
  std::uint64_t corpus_samples = 0;
  std::uint64_t passes = 0;
  std::uint64_t failures = 0;
  std::uint64_t unsupported = 0;
  std::uint64_t nonzero_diff_samples = 0;
  std::uint64_t poison_samples = 0;
  std::uint64_t nonfinite_samples = 0;  // double results compared with a non-finite operand or difference
  std::optional<Binary64> max_observed_diff;
  std::optional<IndexedVerdict> worst_case;  // sample attaining max_observed_diff (lowest index)
  std::vector<IndexedVerdict> counterexamples;
  std::uint64_t paper_formula_discrepancies = 0;
  std::vector<IndexedVerdict> discrepancy_examples;
  std::string first_unsupported_reason;
  double seconds = 0;
  nlohmann::json config;
};

namespace detail {

inline void absorb(Report& r, IndexedVerdict iv) {
  const Verdict& v = iv.verdict;
  ++r.samples_run;
  if (iv.from_corpus) ++r.corpus_samples;
  switch (v.status) {
    case VerdictStatus::Pass: ++r.passes; break;
    case VerdictStatus::Fail: ++r.failures; break;
    case VerdictStatus::Unsupported:
      if (r.unsupported++ == 0) r.first_unsupported_reason = v.message;
      break;
  }
  if (v.poison_branch) ++r.poison_samples;
  if (v.optimized_result && v.original_result && v.optimized_result->is_double() && v.original_result->is_double() &&
      !v.observed_diff)
    ++r.nonfinite_samples;
  if (v.paper_discrepancy) {
    ++r.paper_formula_discrepancies;
    if (r.discrepancy_examples.size() < kMaxCounterexamples) r.discrepancy_examples.push_back(iv);
  }
  if (v.observed_diff) {
    if (v.observed_diff->to_double() != 0) ++r.nonzero_diff_samples;
    if (!r.max_observed_diff || v.observed_diff->to_double() > r.max_observed_diff->to_double()) {
      r.max_observed_diff = v.observed_diff;
      r.worst_case = iv;
    }
  }
  if (v.status == VerdictStatus::Fail && r.counterexamples.size() < kMaxCounterexamples)
    r.counterexamples.push_back(std::move(iv));
}

// Merges a later chunk into an earlier one, preserving index order.
inline void merge(Report& into, Report&& later) {
  into.samples_run += later.samples_run;
  into.corpus_samples += later.corpus_samples;
  into.passes += later.passes;
  into.failures += later.failures;
  if (into.unsupported == 0 && later.unsupported) into.first_unsupported_reason = later.first_unsupported_reason;
  into.unsupported += later.unsupported;
  into.nonzero_diff_samples += later.nonzero_diff_samples;
  into.poison_samples += later.poison_samples;
  into.nonfinite_samples += later.nonfinite_samples;
  into.paper_formula_discrepancies += later.paper_formula_discrepancies;
  if (later.max_observed_diff &&
      (!into.max_observed_diff || later.max_observed_diff->to_double() > into.max_observed_diff->to_double())) {
    into.max_observed_diff = later.max_observed_diff;
    into.worst_case = std::move(later.worst_case);
  }
  for (auto& c : later.counterexamples)
    if (into.counterexamples.size() < kMaxCounterexamples) into.counterexamples.push_back(std::move(c));
  for (auto& c : later.discrepancy_examples)
    if (into.discrepancy_examples.size() < kMaxCounterexamples) into.discrepancy_examples.push_back(std::move(c));
}

inline unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FMA_TV_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

}  // namespace detail

/// Runs the checker over the special corpus (when enabled) followed by
/// `sampler.samples` random inputs. Aggregation is deterministic regardless
/// of the thread count.
inline Report run_validation(const EquivChecker& checker, const SamplerConfig& sampler, unsigned threads = 0) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t nparams = checker.optimized().params.size();
  const auto corpus = sampler.include_special_corpus ? corpus_inputs(nparams) : std::vector<std::vector<Value>>{};
  const std::uint64_t total = corpus.size() + sampler.samples;
  if (threads == 0) threads = detail::thread_count();
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, total / 4096)));

  const GlobalEnv g;
  const LocalEnv l;
  auto run_range = [&](std::uint64_t begin, std::uint64_t end, Report& out) {
    for (std::uint64_t i = begin; i < end; ++i) {
      const bool from_corpus = i < corpus.size();
      std::vector<Value> args = from_corpus ? corpus[i] : sample_input(sampler, i - corpus.size(), nparams);
      detail::absorb(out, IndexedVerdict{from_corpus ? i : i - corpus.size(), from_corpus, checker.check(g, l, args)});
    }
  };

  std::vector<Report> parts(std::max(1u, threads));
  if (parts.size() == 1) {
    run_range(0, total, parts[0]);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (total + parts.size() - 1) / parts.size();
    for (std::size_t t = 0; t < parts.size(); ++t) {
      const std::uint64_t b = std::min(total, t * chunk), e = std::min(total, (t + 1) * chunk);
      pool.emplace_back(run_range, b, e, std::ref(parts[t]));
    }
    for (auto& th : pool) th.join();
  }
  Report r = std::move(parts[0]);
  for (std::size_t t = 1; t < parts.size(); ++t) detail::merge(r, std::move(parts[t]));

  r.verdict = r.failures ? VerdictStatus::Fail : r.unsupported ? VerdictStatus::Unsupported : VerdictStatus::Pass;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline nlohmann::json to_json(const IndexedVerdict& iv) {
  nlohmann::json j = to_json(iv.verdict);
  j["index"] = iv.index;
  j["source"] = iv.from_corpus ? "corpus" : "random";
  return j;
}

/// The report as JSON. `timing` is the only field that varies between
/// identical runs.
inline nlohmann::json to_json(const Report& r, bool include_timing = true) {
  nlohmann::json j;
  j["verdict"] = to_string(r.verdict);
  j["config"] = r.config;
  j["samples_run"] = r.samples_run;
  j["corpus_samples"] = r.corpus_samples;
  j["random_samples"] = r.samples_run - r.corpus_samples;
  j["passes"] = r.passes;
  j["failures"] = r.failures;
  j["unsupported"] = r.unsupported;
  if (r.unsupported) j["unsupported_reason"] = r.first_unsupported_reason;
  j["nonzero_diff_samples"] = r.nonzero_diff_samples;
  j["poison_samples"] = r.poison_samples;
  j["nonfinite_samples"] = r.nonfinite_samples;
  j["max_observed_diff"] = r.max_observed_diff ? binary64_json(*r.max_observed_diff) : nlohmann::json(nullptr);
  j["bound_paper"] = nullptr;
  j["bound_derived"] = nullptr;
  if (r.worst_case) {
    j["worst_case"] = to_json(*r.worst_case);
    if (const auto& rb = r.worst_case->verdict.return_bounds) {
      if (rb->paper) j["bound_paper"] = binary64_json(*rb->paper);
      if (rb->derived) j["bound_derived"] = binary64_json(*rb->derived);
    }
  } else {
    j["worst_case"] = nullptr;
  }
  auto& ce = j["counterexamples"] = nlohmann::json::array();
  for (const auto& c : r.counterexamples) ce.push_back(to_json(c));
  j["paper_formula_discrepancies"] = r.paper_formula_discrepancies;
  auto& de = j["paper_formula_discrepancy_examples"] = nlohmann::json::array();
  for (const auto& c : r.discrepancy_examples) de.push_back(to_json(c));
  if (include_timing) j["timing"] = {{"seconds", r.seconds}};
  return j;
}

// ---------------------------------------------------------------------------
// Command implementations

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The first function defined in a `.ll` file.
inline FunctionDef load_function(const std::string& path) {
  auto text = read_file(path);
  if (!text) throw UsageError("cannot read " + path);
  Module m;
  try {
    m = parse_module(*text);
  } catch (const ParseError& e) {
    throw UsageError(path + ":" + e.what());
  }
  if (m.functions.empty()) throw UsageError(path + ": no function definition");
  return m.functions.front();
}

/// Splits `a=1.0,b=0x...` (commas or whitespace) into ordered key/value pairs.
inline std::vector<std::pair<std::string, std::string>> split_assignments(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string item;
  auto flush = [&] {
    if (item.empty()) return;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw UsageError("expected name=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    item.clear();
  };
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) flush();
    else item += c;
  }
  flush();
  return out;
}

/// Maps each assignment to a parameter position. A key may be the parameter
/// id (`%0`, `0`, `%x`, `x`) or, for anonymous parameters, the letter alias
/// `a`, `b`, `c`, ... by position. Every parameter must be named exactly once.
inline std::vector<std::string> bind_params(const FunctionDef& f,
                                            const std::vector<std::pair<std::string, std::string>>& kv) {
  std::vector<std::optional<std::string>> slots(f.params.size());
  for (const auto& [key, val] : kv) {
    std::optional<std::size_t> pos;
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      const std::string id = f.params[i].id.str();
      const bool alias = f.params[i].id.is_anon() && i < 26 && key.size() == 1 && key[0] == static_cast<char>('a' + i);
      if (key == id || "%" + key == id || alias) pos = i;
    }
    if (!pos) throw UsageError("'" + key + "' does not name a parameter of " + f.name.str());
    if (slots[*pos]) throw UsageError("parameter " + f.params[*pos].id.str() + " given more than once");
    slots[*pos] = val;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) throw UsageError("missing value for parameter " + f.params[i].id.str());
    out.push_back(*slots[i]);
  }
  return out;
}

struct ValidateOptions {
  std::string original_path;
  std::string optimized_path;
  std::string alignment_path;
  SamplerConfig sampler;
  RefinementConfig cfg;
  std::string report_path;  // empty: JSON to stdout
};

inline int cmd_validate(const ValidateOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::optional<EquivChecker> checker;
  try {
    opt.sampler.validate();
    opt.cfg.params.validate();
    FunctionDef orig = load_function(opt.original_path);
    FunctionDef optimized = load_function(opt.optimized_path);
    auto align_text = read_file(opt.alignment_path);
    if (!align_text) throw UsageError("cannot read alignment file " + opt.alignment_path);
    AlignmentSpec align = parse_alignment(*align_text);
    validate_alignment(align, optimized, orig);
    checker.emplace(std::move(optimized), std::move(orig), std::move(align), opt.cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoVerdict;
  }

  Report r = run_validation(*checker, opt.sampler);
  r.config = {{"original", opt.original_path},
              {"optimized", opt.optimized_path},
              {"alignment", opt.alignment_path},
              {"samples", opt.sampler.samples},
              {"seed", opt.sampler.seed},
              {"exponent_range", {opt.sampler.exp_min, opt.sampler.exp_max}},
              {"include_special_corpus", opt.sampler.include_special_corpus},
              {"mode", to_string(opt.cfg.finiteness_mode)},
              {"bound", to_string(opt.cfg.bound_source)},
              {"delta", binary64_json(b64(opt.cfg.params.delta))},
              {"eta", binary64_json(b64(opt.cfg.params.eta))}};
  const std::string json = to_json(r).dump(2) + "\n";
  if (opt.report_path.empty()) {
    out << json;
  } else {
    std::ofstream f(opt.report_path, std::ios::binary);
    if (!f) {
      err << "error: cannot write report " << opt.report_path << '\n';
      return kExitNoVerdict;
    }
    f << json;
  }
  std::ostream& summary = opt.report_path.empty() ? err : out;
  summary << to_string(r.verdict) << ": " << r.samples_run << " samples, " << r.failures << " failures, max diff "
          << (r.max_observed_diff ? to_hex(*r.max_observed_diff) : std::string("n/a")) << ", "
          << r.paper_formula_discrepancies << " closed-form bound discrepancies\n";
  if (r.verdict == VerdictStatus::Unsupported) {
    err << "error: unsupported: " << r.first_unsupported_reason << '\n';
    return kExitNoVerdict;
  }
  return r.verdict == VerdictStatus::Pass ? kExitPass : kExitFail;
}

inline std::string render_state(const MachineState& s) {
  std::ostringstream os;
  os << "globals:";
  if (s.globals.entries.empty()) os << " (none)";
  os << '\n';
  for (const auto& [k, v] : s.globals.entries) os << "  " << k.str() << " = " << v.str() << '\n';
  os << "locals:\n";
  for (const auto& [k, v] : s.locals.entries()) {
    os << "  " << k.str() << " = " << v.str();
    if (v.is_double()) os << " (" << to_decimal(v.as_double()) << ")";
    os << '\n';
  }
  os << "result: " << s.result.str();
  if (s.result.is_double()) os << " (" << to_decimal(s.result.as_double()) << ")";
  os << '\n';
  return os.str();
}

inline int cmd_run(const std::string& block_path, const std::string& inputs, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  FunctionDef f;
  std::vector<Value> args;
  try {
    f = load_function(block_path);
    if (auto wf = check_wellformed(f)) throw UsageError(std::string(to_string(wf->kind)) + ": " + wf->message);
    for (const auto& text : bind_params(f, split_assignments(inputs))) {
      auto v = parse_value(text);
      if (!v) throw UsageError("bad value '" + text + "'");
      args.push_back(*v);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoVerdict;
  }
  try {
    auto [state, trace] = interp_cfg2(f, GlobalEnv{}, LocalEnv{}, args);
    out << "trace:\n";
    for (const auto& e : strip_taus(trace).events) out << "  " << render_event(e) << '\n';
    out << render_state(state);
  } catch (const EvalError& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitFail;
  }
  return kExitPass;
}

inline int cmd_bound(const std::string& original_path, const std::string& optimized_path, const std::string& mags_text,
                     const ErrorModelParams& params = {}, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    params.validate();
    const FunctionDef orig = load_function(original_path);
    const FunctionDef opt = load_function(optimized_path);
    if (opt.params != orig.params) throw UsageError("parameter lists differ");
    const FpExpr e_orig = recover_expr(orig);
    const FpExpr e_opt = recover_expr(opt);

    std::map<std::string, double> mags;
    std::vector<double> by_position;
    for (const auto& text : bind_params(orig, split_assignments(mags_text))) {
      auto v = parse_binary64(text);
      if (!v || !(v->to_double() >= 0)) throw UsageError("magnitude must be a non-negative real, got '" + text + "'");
      by_position.push_back(v->to_double());
    }
    for (std::size_t i = 0; i < orig.params.size(); ++i) mags[orig.params[i].id.str()] = by_position[i];

    out << "original:  " << e_orig.str() << '\n';
    out << "optimized: " << e_opt.str() << '\n';
    out << "delta = " << to_decimal(b64(params.delta)) << ", eta = " << to_decimal(b64(params.eta)) << '\n';
    if (auto leaves = match_fma_pair(e_orig, e_opt)) {
      auto mag = [&](const FpExpr& x) { return x.op == FpExpr::Op::Const ? std::fabs(x.value.to_double()) : mags.at(x.name); };
      const Binary64 pb = b64(epsilon_fma_paper(mag((*leaves)[0]), mag((*leaves)[1]), mag((*leaves)[2]), params));
      out << "epsilon_fma (closed form): " << to_decimal(pb) << "  " << to_hex(pb) << '\n';
    } else {
      out << "epsilon_fma (closed form): not applicable to this pair\n";
    }
    const BoundResult br = derive_bound(e_orig, e_opt, mags, params);
    const Binary64 db = eval_bound(br);
    out << "derived bound: " << to_decimal(db) << "  " << to_hex(db) << '\n';
    out << "contributions:\n";
    for (const auto& t : br.exact_magnitude_terms)
      out << "  [" << t.tree << "] " << t.node << ": rounding " << to_decimal(b64(t.rounding)) << ", accumulated "
          << to_decimal(b64(t.accumulated)) << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoVerdict;
  }
  return kExitPass;
}

}  // namespace fmatv
