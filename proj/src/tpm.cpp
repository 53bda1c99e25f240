#include "momlab/tpm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace momlab::tpm {

void QuadraticSequenceSpec::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(z0 > 0.0)) fail("tpm: z0 must be > 0");
  if (!(upsilon >= z0)) fail("tpm: upsilon must be >= z0");
  switch (mode) {
    case Mode::TwoSided:
      if (!(lower_coef > 0.0)) fail("tpm: lower_coef must be > 0");
      if (!(upper_coef >= lower_coef)) fail("tpm: need upper_coef >= lower_coef");
      break;
    case Mode::SumForm:
      if (!(A > 0.0)) fail("tpm: A must be > 0");
      if (!(C >= 0.0)) fail("tpm: C must be >= 0");
      if (!(C <= z0 / 2.0)) fail("tpm: sum-form requires C <= z0/2");
      break;
    case Mode::Momentum:
      if (!(eta > 0.0)) fail("tpm: eta must be > 0");
      if (!(gamma > 0.0 && gamma < 1.0)) fail("tpm: gamma must lie in (0, 1)");
      if (!(alpha3 > 0.0)) fail("tpm: alpha3 must be > 0");
      break;
  }
}

HitResult simulate_hitting_time(const QuadraticSequenceSpec& spec, StepRule rule,
                                Rng* rng) {
  spec.validate();
  if (spec.mode != Mode::TwoSided)
    throw std::invalid_argument("simulate_hitting_time: spec is not two-sided");
  if (rule == StepRule::RandomInRange && !rng)
    throw std::invalid_argument("simulate_hitting_time: random rule needs an rng");

  double z = spec.z0;
  for (long t = 0; t < kStepCap; ++t) {
    if (z >= spec.upsilon) return {t, false};
    double coef = spec.lower_coef;
    if (rule == StepRule::UpperCoef) coef = spec.upper_coef;
    if (rule == StepRule::RandomInRange)
      coef = spec.lower_coef + (spec.upper_coef - spec.lower_coef) * rng->uniform01();
    z += coef * z * z;
  }
  return {kStepCap, true};
}

double bound_gd(const QuadraticSequenceSpec& spec) {
  spec.validate();
  const double doublings = std::ceil(std::log(spec.upsilon / spec.z0) / std::log(2.0));
  return 3.0 / (spec.lower_coef * spec.z0) +
         8.0 * spec.upper_coef / spec.lower_coef * doublings;
}

HitResult simulate_sum_form(const QuadraticSequenceSpec& spec) {
  spec.validate();
  if (spec.mode != Mode::SumForm)
    throw std::invalid_argument("simulate_sum_form: spec is not sum-form");

  // Lower trajectory of the band: the C slack pushes down at every step.
  double z = spec.z0;
  double sum_sq = 0.0;
  for (long t = 0; t < kStepCap; ++t) {
    if (z >= spec.upsilon) return {t, false};
    sum_sq += z * z;
    z = spec.z0 + spec.A * sum_sq - spec.C;
  }
  return {kStepCap, true};
}

double bound_sum(const QuadraticSequenceSpec& spec) {
  spec.validate();
  const double doublings = std::ceil(std::log(spec.upsilon / spec.z0) / std::log(2.0));
  return 8.0 * doublings + 21.0 / (spec.z0 * spec.A);
}

HitResult simulate_momentum(const QuadraticSequenceSpec& spec) {
  spec.validate();
  if (spec.mode != Mode::Momentum)
    throw std::invalid_argument("simulate_momentum: spec is not momentum mode");

  double c = spec.z0;
  double g = 0.0;
  for (long t = 0; t < kStepCap; ++t) {
    if (c >= spec.upsilon) return {t, false};
    g = spec.gamma * g - spec.alpha3 * c * c;
    c -= spec.eta * g;
  }
  return {kStepCap, true};
}

namespace {

double momentum_bound_impl(const QuadraticSequenceSpec& spec, double delta,
                           double log_arg) {
  const double phases = std::ceil(std::log(log_arg) / std::log1p(delta));
  return phases / (1.0 - spec.gamma) +
         (1.0 + delta) / (spec.eta * (1.0 - std::exp(-1.0)) * spec.alpha3 * spec.z0);
}

}  // namespace

double bound_momentum(const QuadraticSequenceSpec& spec, double delta) {
  spec.validate();
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("bound_momentum: delta must lie in (0, 1)");
  return momentum_bound_impl(spec, delta, spec.upsilon);
}

double bound_momentum_ratio_variant(const QuadraticSequenceSpec& spec, double delta) {
  spec.validate();
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("bound_momentum: delta must lie in (0, 1)");
  return momentum_bound_impl(spec, delta, spec.upsilon / spec.z0);
}

MomentumCheck check_momentum(const QuadraticSequenceSpec& spec) {
  const HitResult hit = simulate_momentum(spec);
  MomentumCheck out;
  out.steps = hit.steps;
  out.capped = hit.capped;
  out.best_bound = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 9; ++k) {
    const double delta = 0.1 * k;
    const double printed = bound_momentum(spec, delta);
    const double variant = bound_momentum_ratio_variant(spec, delta);
    if (printed < out.best_bound) {
      out.best_bound = printed;
      out.best_delta = delta;
    }
    if (!hit.capped && static_cast<double>(hit.steps) <= printed) out.passes_printed = true;
    if (!hit.capped && static_cast<double>(hit.steps) <= variant) out.passes_variant = true;
  }
  out.flagged = !out.passes_printed && out.passes_variant;
  return out;
}

SublinearResult check_sublinear(double A, long t_offset, double x0, long steps) {
  if (!(A > 0.0)) throw std::invalid_argument("check_sublinear: A must be > 0");
  if (x0 < 0.0) throw std::invalid_argument("check_sublinear: x0 must be >= 0");
  if (A * x0 > 1.0)
    throw std::invalid_argument("check_sublinear: need A*x0 <= 1 to keep x nonnegative");
  if (t_offset < 0) throw std::invalid_argument("check_sublinear: t_offset must be >= 0");

  SublinearResult out;
  out.ok = true;
  double x = x0;
  for (long t = t_offset; t <= t_offset + steps; ++t) {
    if (t > t_offset) {
      const double bound = 1.0 / (A * static_cast<double>(t - t_offset));
      out.max_ratio = std::max(out.max_ratio, x * A * static_cast<double>(t - t_offset));
      if (x > bound) out.ok = false;
    }
    x = x - A * x * x;
  }
  return out;
}

namespace {

using nlohmann::json;

QuadraticSequenceSpec spec_from_json(const json& j) {
  QuadraticSequenceSpec spec;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "two-sided")
    spec.mode = Mode::TwoSided;
  else if (mode == "sum-form")
    spec.mode = Mode::SumForm;
  else if (mode == "momentum")
    spec.mode = Mode::Momentum;
  else
    throw std::invalid_argument("tpm: unknown mode " + mode);
  spec.z0 = j.at("z0").get<double>();
  spec.upsilon = j.at("upsilon").get<double>();
  spec.lower_coef = j.value("lower_coef", 0.0);
  spec.upper_coef = j.value("upper_coef", 0.0);
  spec.A = j.value("A", 0.0);
  spec.C = j.value("C", 0.0);
  spec.eta = j.value("eta", 0.0);
  spec.gamma = j.value("gamma", 0.0);
  spec.alpha3 = j.value("alpha3", 0.0);
  return spec;
}

json spec_to_json(const QuadraticSequenceSpec& spec) {
  json j;
  switch (spec.mode) {
    case Mode::TwoSided:
      j["mode"] = "two-sided";
      j["lower_coef"] = spec.lower_coef;
      j["upper_coef"] = spec.upper_coef;
      break;
    case Mode::SumForm:
      j["mode"] = "sum-form";
      j["A"] = spec.A;
      j["C"] = spec.C;
      break;
    case Mode::Momentum:
      j["mode"] = "momentum";
      j["eta"] = spec.eta;
      j["gamma"] = spec.gamma;
      j["alpha3"] = spec.alpha3;
      break;
  }
  j["z0"] = spec.z0;
  j["upsilon"] = spec.upsilon;
  return j;
}

json check_one(const QuadraticSequenceSpec& spec) {
  json entry;
  entry["spec"] = spec_to_json(spec);
  switch (spec.mode) {
    case Mode::TwoSided: {
      // The worst admissible trajectory for the bound is the slowest one.
      const HitResult hit = simulate_hitting_time(spec, StepRule::LowerCoef);
      const double bound = bound_gd(spec);
      entry["simulated"] = hit.steps;
      entry["capped"] = hit.capped;
      entry["bound"] = bound;
      entry["pass"] = !hit.capped && static_cast<double>(hit.steps) <= bound;
      break;
    }
    case Mode::SumForm: {
      const HitResult hit = simulate_sum_form(spec);
      const double bound = bound_sum(spec);
      entry["simulated"] = hit.steps;
      entry["capped"] = hit.capped;
      entry["bound"] = bound;
      entry["pass"] = !hit.capped && static_cast<double>(hit.steps) <= bound;
      break;
    }
    case Mode::Momentum: {
      const MomentumCheck check = check_momentum(spec);
      entry["simulated"] = check.steps;
      entry["capped"] = check.capped;
      entry["bound"] = check.best_bound;
      entry["best_delta"] = check.best_delta;
      entry["flagged_log_upsilon"] = check.flagged;
      entry["pass"] = check.passes_printed || check.passes_variant;
      break;
    }
  }
  return entry;
}

}  // namespace

int run_batch_file(const std::string& spec_path, const std::string& report_path) {
  std::ifstream in(spec_path);
  if (!in) throw std::runtime_error("cannot open spec file: " + spec_path);
  json specs;
  in >> specs;
  if (!specs.is_array()) throw std::runtime_error("tpm spec file must hold a JSON array");

  json report = json::array();
  int failures = 0;
  for (const json& j : specs) {
    const json entry = check_one(spec_from_json(j));
    if (!entry.at("pass").get<bool>()) ++failures;
    report.push_back(entry);
  }
  std::ofstream out(report_path);
  if (!out) throw std::runtime_error("cannot open report file: " + report_path);
  out << report.dump(2) << "\n";
  return failures;
}

std::string builtin_battery_report(std::uint64_t seed, int per_mode) {
  Rng rng(seed);
  json report = json::array();

  auto push = [&report](const QuadraticSequenceSpec& spec) {
    report.push_back(check_one(spec));
  };

  for (int k = 0; k < per_mode; ++k) {
    QuadraticSequenceSpec spec;
    spec.mode = Mode::TwoSided;
    spec.z0 = 0.05 + 0.95 * rng.uniform01();
    spec.lower_coef = 0.05 + 0.95 * rng.uniform01();
    spec.upper_coef = spec.lower_coef * (1.0 + 3.0 * rng.uniform01());
    spec.upsilon = spec.z0 * (1.0 + 99.0 * rng.uniform01());
    push(spec);
  }
  for (int k = 0; k < per_mode; ++k) {
    QuadraticSequenceSpec spec;
    spec.mode = Mode::SumForm;
    spec.z0 = 0.05 + 0.95 * rng.uniform01();
    spec.A = 0.05 + 0.95 * rng.uniform01();
    spec.C = 0.5 * spec.z0 * rng.uniform01();
    spec.upsilon = spec.z0 * (1.0 + 99.0 * rng.uniform01());
    push(spec);
  }
  for (int k = 0; k < per_mode; ++k) {
    QuadraticSequenceSpec spec;
    spec.mode = Mode::Momentum;
    spec.z0 = 0.01 + 0.49 * rng.uniform01();
    spec.eta = 0.1 + 0.9 * rng.uniform01();
    spec.gamma = 0.5 + 0.45 * rng.uniform01();
    spec.alpha3 = 0.1 + 0.9 * rng.uniform01();
    spec.upsilon = std::max(spec.z0, 1.0 + 9.0 * rng.uniform01());
    push(spec);
  }
  return report.dump(2);
}

}  // namespace momlab::tpm
