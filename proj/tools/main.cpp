// Command-line front end: factorization, margins, gap distances and
// controller synthesis for finite-horizon linear time-varying plants
// described by small JSON documents.

#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ltvgap/io.hpp"
#include "ltvgap/ltvgap.hpp"

namespace {

using namespace ltvgap;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCertificate = 3;

struct CommonOptions {
  Index horizon = 0;
  double tol = 1e-8;
  std::string output;
  bool timings = false;
};

class PhaseTimer {
 public:
  explicit PhaseTimer(bool enabled) : enabled_(enabled) {}

  template <typename F>
  auto time(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    auto result = f();
    if (enabled_) {
      const auto ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start).count();
      phases_[name] = ms;
    }
    return result;
  }

  std::optional<Json> to_json() const {
    if (!enabled_) return std::nullopt;
    Json j;
    for (const auto& [k, v] : phases_) j[k] = v;
    return j;
  }

 private:
  bool enabled_;
  std::map<std::string, double> phases_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

LtvOperator<double> load_plant(const std::string& path, Index horizon,
                               std::string* digest) {
  const std::string bytes = read_file(path);
  *digest = digest_bytes(bytes);
  Json doc;
  try {
    doc = Json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  const SystemDescription desc = system_from_json(doc);
  const auto plant = to_operator(desc, horizon);
  if (!is_causal(plant))
    throw ValidationError(path + ": plant operator is not causal");
  return plant;
}

void emit(const RunReport& report, const CommonOptions& opts) {
  const std::string text = report.to_json().dump(2) + "\n";
  if (opts.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opts.output, std::ios::binary);
    if (!out) throw ValidationError(opts.output + ": cannot open for writing");
    out << text;
  }
}

CoprimeFactorization<double> factorize_checked(const LtvOperator<double>& plant,
                                               double tol) {
  auto f = factorize(plant);
  if (!f.residuals.accepted(tol))
    throw std::runtime_error("factorization residuals exceed " + std::to_string(tol));
  return f;
}

int run_factorize(const std::string& input, const CommonOptions& opts) {
  PhaseTimer timer(opts.timings);
  RunReport rep;
  rep.command = "factorize";
  const auto plant = timer.time("parse", [&] {
    return load_plant(input, opts.horizon, &rep.input_digest);
  });
  const auto f = timer.time("factorize", [&] { return factorize_checked(plant, opts.tol); });
  rep.residuals = f.residuals;
  Json ops;
  ops["M"] = operator_to_json(f.M);
  ops["N"] = operator_to_json(f.N);
  ops["Mhat"] = operator_to_json(f.Mhat);
  ops["Nhat"] = operator_to_json(f.Nhat);
  ops["U"] = operator_to_json(f.U);
  ops["V"] = operator_to_json(f.V);
  ops["Uhat"] = operator_to_json(f.Uhat);
  ops["Vhat"] = operator_to_json(f.Vhat);
  rep.extra["factorization"] = std::move(ops);
  rep.timings_ms = timer.to_json();
  emit(rep, opts);
  return kExitOk;
}

int run_margin(const std::string& input, const CommonOptions& opts) {
  PhaseTimer timer(opts.timings);
  RunReport rep;
  rep.command = "margin";
  const auto plant = timer.time("parse", [&] {
    return load_plant(input, opts.horizon, &rep.input_digest);
  });
  const auto f = timer.time("factorize", [&] { return factorize_checked(plant, opts.tol); });
  rep.residuals = f.residuals;
  rep.margin = timer.time("margin", [&] { return margin_report(f); });
  rep.timings_ms = timer.to_json();
  emit(rep, opts);
  return kExitOk;
}

int run_gap(const std::string& input_a, const std::string& input_b,
            const CommonOptions& opts) {
  PhaseTimer timer(opts.timings);
  RunReport rep;
  rep.command = "gap";
  std::string digest_a, digest_b;
  const auto plant_a = load_plant(input_a, opts.horizon, &digest_a);
  const auto plant_b = load_plant(input_b, opts.horizon, &digest_b);
  rep.input_digest = digest_a + "+" + digest_b;
  if (plant_a.domain() != plant_b.domain() || plant_a.codomain() != plant_b.codomain())
    throw ValidationError("gap: the two plants live on different signal spaces");
  const auto fa = timer.time("factorize_a", [&] { return factorize_checked(plant_a, opts.tol); });
  const auto fb = timer.time("factorize_b", [&] { return factorize_checked(plant_b, opts.tol); });
  rep.gap = timer.time("gap", [&] { return tv_gap(fa, fb); });
  rep.timings_ms = timer.to_json();
  emit(rep, opts);
  return kExitOk;
}

int run_corona(const std::string& input, const CommonOptions& opts) {
  PhaseTimer timer(opts.timings);
  RunReport rep;
  rep.command = "corona";
  const auto plant = load_plant(input, opts.horizon, &rep.input_digest);
  const auto f = factorize_checked(plant, opts.tol);
  rep.residuals = f.residuals;
  rep.extra["corona_value"] = timer.time("corona", [&] {
    return corona_criterion(f.M, f.N);
  });
  rep.timings_ms = timer.to_json();
  emit(rep, opts);
  return kExitOk;
}

int run_synthesize(const std::string& input, const CommonOptions& opts) {
  PhaseTimer timer(opts.timings);
  RunReport rep;
  rep.command = "synthesize";
  const auto plant = timer.time("parse", [&] {
    return load_plant(input, opts.horizon, &rep.input_digest);
  });
  const auto f = timer.time("factorize", [&] { return factorize_checked(plant, opts.tol); });
  rep.residuals = f.residuals;
  rep.margin = timer.time("margin", [&] { return margin_report(f); });

  const auto q = timer.time("optimal_q", [&] { return optimal_q(f); });
  const auto synth = timer.time("controller", [&] { return robust_controller(f, q); });
  Json ctrl;
  ctrl["Q"] = operator_to_json(q);
  ctrl["C"] = operator_to_json(synth.C);
  ctrl["achieved_margin"] = synth.achieved_margin;
  ctrl["achieved_margin_row"] = synth.achieved_margin_row;
  ctrl["closed_loop_norms"] = synth.closed_loop_norms;
  rep.extra["controller"] = std::move(ctrl);
  if (std::abs(synth.achieved_margin - rep.margin->r_o) > 1e-7)
    throw std::runtime_error("synthesize: achieved margin disagrees with r_o");

  const auto po = timer.time("proof_operators", [&] { return build_proof_operators(f); });
  Json schmidt = Json::array();
  for (const auto& sd : timer.time("schmidt", [&] { return schmidt_pairs(po, 3); })) {
    Json item;
    item["lambda"] = sd.lambda;
    item["residual_max"] = sd.residuals.max();
    const auto crit = schmidt_criterion_check(po, sd);
    item["criterion_causal_part"] = crit.causal_part_residual;
    item["criterion_s_membership"] = crit.s_membership_residual;
    schmidt.push_back(std::move(item));
  }
  rep.extra["schmidt_pairs"] = std::move(schmidt);
  rep.timings_ms = timer.to_json();
  emit(rep, opts);
  return kExitOk;
}

int run_selftest(std::uint64_t seed, const CommonOptions& opts) {
  PhaseTimer timer(opts.timings);
  RunReport rep;
  rep.command = "selftest";
  rep.input_digest = digest_bytes("selftest:" + std::to_string(seed));
  std::mt19937_64 rng(seed);
  bool all_ok = true;
  Json checks = Json::array();
  auto record = [&](const std::string& name, double worst, double tol) {
    Json j;
    j["name"] = name;
    j["worst"] = worst;
    j["tolerance"] = tol;
    j["pass"] = worst < tol;
    all_ok = all_ok && worst < tol;
    checks.push_back(std::move(j));
  };

  auto random_plant = [&](Index T, Index d) {
    const SignalSpace s = SignalSpace::uniform(T, d);
    auto p = random_causal<double>(s, s, rng);
    return scale(1.0 / std::max(1.0, operator_norm(p)), p);
  };

  {
    double worst = 0;
    for (int i = 0; i < 10; ++i)
      worst = std::max(worst, factorize(random_plant(5, i % 2 + 1)).residuals.max());
    record("factorization_residuals", worst, opts.tol);
  }
  {
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
      const SignalSpace s = SignalSpace::uniform(5);
      const auto r = random_operator<double>(s, s, rng);
      worst = std::max(worst,
                       std::abs(distance_to_causal(r) - flatten_hankel(r).norm()));
    }
    record("hankel_vs_corner_distance", worst, 1e-7);
  }
  {
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
      const auto f = factorize(random_plant(5, 1));
      worst = std::max(worst, std::abs(r_upper(f).r_o - r_upper_alt(f).r_o_alt));
    }
    record("margin_formula_agreement", worst, 1e-8);
  }
  {
    double worst = 0;
    for (int i = 0; i < 4; ++i) {
      const auto a = random_plant(4, 1);
      const auto b = random_plant(4, 1);
      const auto c = random_plant(4, 1);
      worst = std::max(worst, tv_gap(a, a).alpha);
      worst = std::max(worst,
                       tv_gap(a, c).alpha - tv_gap(a, b).alpha - tv_gap(b, c).alpha);
    }
    record("gap_metric_axioms", worst, 1e-9);
  }
  {
    double worst = 0;
    for (int i = 0; i < 3; ++i) {
      const auto po = build_proof_operators(factorize(random_plant(4, 1)));
      worst = std::max({worst, po.checks.gamma_xi_identity, po.checks.xi_gamma_identity,
                        po.checks.norm_identity});
    }
    record("proof_operator_identities", worst, 1e-8);
  }

  rep.extra["seed"] = seed;
  rep.extra["checks"] = std::move(checks);
  rep.extra["all_pass"] = all_ok;
  rep.timings_ms = timer.to_json();
  emit(rep, opts);
  return all_ok ? kExitOk : kExitCertificate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-horizon robust stabilization toolkit for LTV systems"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string input, input_a, input_b;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool with_input) {
    if (with_input)
      cmd->add_option("--input", input, "plant description file (JSON)")->required();
    cmd->add_option("--horizon", opts.horizon,
                    "override the horizon (fir and state_space inputs)");
    cmd->add_option("--tol", opts.tol, "acceptance tolerance for residual checks")
        ->capture_default_str();
    cmd->add_option("--output", opts.output, "write the report here instead of stdout");
    cmd->add_flag("--timings", opts.timings, "include wall-clock timings in the report");
  };

  auto* factorize_cmd = app.add_subcommand(
      "factorize", "normalized doubly coprime factorization with residuals");
  add_common(factorize_cmd, true);
  auto* margin_cmd = app.add_subcommand(
      "margin", "stability-margin report (both formulas, profile, corona, radius)");
  add_common(margin_cmd, true);
  auto* gap_cmd = app.add_subcommand("gap", "time-varying gap between two plants");
  gap_cmd->add_option("--plant-a", input_a, "first plant file")->required();
  gap_cmd->add_option("--plant-b", input_b, "second plant file")->required();
  add_common(gap_cmd, false);
  auto* corona_cmd = app.add_subcommand("corona", "operator corona criterion value");
  add_common(corona_cmd, true);
  auto* synth_cmd = app.add_subcommand(
      "synthesize", "optimal parameter, robust controller and certificates");
  add_common(synth_cmd, true);
  auto* selftest_cmd = app.add_subcommand("selftest", "randomized property suite");
  selftest_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  add_common(selftest_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (factorize_cmd->parsed()) return run_factorize(input, opts);
    if (margin_cmd->parsed()) return run_margin(input, opts);
    if (gap_cmd->parsed()) return run_gap(input_a, input_b, opts);
    if (corona_cmd->parsed()) return run_corona(input, opts);
    if (synth_cmd->parsed()) return run_synthesize(input, opts);
    if (selftest_cmd->parsed()) return run_selftest(seed, opts);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical certificate failure: " << e.what() << "\n";
    return kExitCertificate;
  }
  return kExitValidation;
}
