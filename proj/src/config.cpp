#include "momlab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace momlab {

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "constant") return ScheduleKind::Constant;
  if (name == "linear-decay") return ScheduleKind::LinearDecay;
  throw std::invalid_argument("unknown lr_schedule: " + name);
}

std::string schedule_kind_name(ScheduleKind kind) {
  return kind == ScheduleKind::Constant ? "constant" : "linear-decay";
}

ExperimentConfig ExperimentConfig::defaults(int d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  ExperimentConfig cfg;
  cfg.d = d;
  cfg.beta = std::pow(static_cast<double>(d), -0.251);
  cfg.sigma = std::pow(static_cast<double>(d), -0.509);
  cfg.alpha = cfg.c_alpha * std::sqrt(static_cast<double>(d)) * cfg.beta;
  // Init variance sigma0^2 scales like 1/d; the constant is pilot-fixed
  // together with the per-optimizer learning rates (see README).
  cfg.sigma0 = 2.2 / std::sqrt(static_cast<double>(d));
  return cfg;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (d < 1) fail("d must be >= 1");
  if (P < 1) fail("P must be >= 1");
  if (m < 1) fail("m must be >= 1");
  if (N < 1) fail("N must be >= 1");
  if (n_test < 1) fail("n_test must be >= 1");
  if (!(beta > 0.0)) fail("beta must be > 0");
  if (!(beta <= alpha)) fail("need 0 < beta <= alpha");
  if (!(sigma > 0.0)) fail("sigma must be > 0");
  if (!(sigma0 > 0.0)) fail("sigma0 must be > 0");
  if (!(mu >= 0.0 && mu <= 1.0)) fail("mu must lie in [0, 1]");
  if (!(eta_gd > 0.0)) fail("eta_gd must be > 0");
  if (!(eta_gdm > 0.0)) fail("eta_gdm must be > 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (T < 0) fail("T must be >= 0");
  if (!std::isfinite(alpha) || !std::isfinite(sigma0)) fail("non-finite config value");
}

namespace {

ExperimentConfig config_from_json(const nlohmann::json& j) {
  const int d = j.value("d", 30);
  ExperimentConfig cfg = ExperimentConfig::defaults(d);

  if (j.contains("P")) cfg.P = j.at("P").get<int>();
  if (j.contains("m")) cfg.m = j.at("m").get<int>();
  if (j.contains("N")) cfg.N = j.at("N").get<int>();
  if (j.contains("n_test")) cfg.n_test = j.at("n_test").get<int>();

  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
  if (j.contains("c_alpha")) cfg.c_alpha = j.at("c_alpha").get<double>();
  // alpha follows c_alpha/beta unless given explicitly.
  cfg.alpha = cfg.c_alpha * std::sqrt(static_cast<double>(cfg.d)) * cfg.beta;
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  if (j.contains("sigma0")) cfg.sigma0 = j.at("sigma0").get<double>();
  if (j.contains("mu")) cfg.mu = j.at("mu").get<double>();

  if (j.contains("eta_gd")) cfg.eta_gd = j.at("eta_gd").get<double>();
  if (j.contains("eta_gdm")) cfg.eta_gdm = j.at("eta_gdm").get<double>();
  if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
  if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();

  if (j.contains("T")) cfg.T = j.at("T").get<long>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("lr_schedule"))
    cfg.lr_schedule = parse_schedule_kind(j.at("lr_schedule").get<std::string>());
  if (j.contains("record_noise_stats"))
    cfg.record_noise_stats = j.at("record_noise_stats").get<bool>();

  cfg.validate();
  return cfg;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j{
      {"d", cfg.d},
      {"P", cfg.P},
      {"m", cfg.m},
      {"N", cfg.N},
      {"n_test", cfg.n_test},
      {"c_alpha", cfg.c_alpha},
      {"alpha", cfg.alpha},
      {"beta", cfg.beta},
      {"sigma", cfg.sigma},
      {"sigma0", cfg.sigma0},
      {"mu", cfg.mu},
      {"eta_gd", cfg.eta_gd},
      {"eta_gdm", cfg.eta_gdm},
      {"gamma", cfg.gamma},
      {"lambda", cfg.lambda},
      {"T", cfg.T},
      {"seed", cfg.seed},
      {"lr_schedule", schedule_kind_name(cfg.lr_schedule)},
      {"record_noise_stats", cfg.record_noise_stats},
  };
  return j.dump(2);
}

}  // namespace momlab
