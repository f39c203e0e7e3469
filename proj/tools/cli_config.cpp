#include "cli_config.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

#include "steklov/ellipse.hpp"
#include "steklov/errors.hpp"
#include "steklov/test_metrics.hpp"

namespace steklov::cli {

using nlohmann::json;

namespace {

const json& member(const json& j, const char* key) { return j.at(key); }

std::string where(const std::string& ctx, const char* key) { return ctx + "." + key; }

}  // namespace

void check_object(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(ErrorKind::config, ctx + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return std::string_view(a) == it.key(); });
    if (!known) fail(ErrorKind::config, "unknown key " + ctx + "." + it.key());
  }
}

double get_double(const json& j, const char* key, double def, const std::string& ctx) {
  if (!j.contains(key)) return def;
  const json& v = member(j, key);
  if (!v.is_number() || !std::isfinite(v.get<double>()))
    fail(ErrorKind::config, where(ctx, key) + " must be a finite number");
  return v.get<double>();
}

std::size_t get_size(const json& j, const char* key, std::size_t def, const std::string& ctx) {
  return static_cast<std::size_t>(get_u64(j, key, def, ctx));
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t def, const std::string& ctx) {
  if (!j.contains(key)) return def;
  const json& v = member(j, key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  fail(ErrorKind::config, where(ctx, key) + " must be a non-negative integer");
}

bool get_bool(const json& j, const char* key, bool def, const std::string& ctx) {
  if (!j.contains(key)) return def;
  const json& v = member(j, key);
  if (!v.is_boolean()) fail(ErrorKind::config, where(ctx, key) + " must be a boolean");
  return v.get<bool>();
}

std::vector<double> get_doubles(const json& j, const char* key, std::vector<double> def, const std::string& ctx) {
  if (!j.contains(key)) return def;
  const json& v = member(j, key);
  if (!v.is_array()) fail(ErrorKind::config, where(ctx, key) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>()))
      fail(ErrorKind::config, where(ctx, key) + " must be an array of finite numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void check_monotone(const std::vector<double>& g, const std::string& name) {
  if (g.empty()) fail(ErrorKind::config, name + " must not be empty");
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < g.size(); ++i) {
    inc = inc && g[i] > g[i - 1];
    dec = dec && g[i] < g[i - 1];
  }
  if (!inc && !dec) fail(ErrorKind::config, name + " must be strictly monotone");
}

BoundaryWeight parse_weight(const json& j, const std::string& ctx) {
  check_object(j, ctx, {"preset", "cos", "sin", "log_cos", "log_sin", "degree", "p", "epsilon", "N", "coeffs"});
  std::string preset;
  if (j.contains("preset")) {
    if (!member(j, "preset").is_string()) fail(ErrorKind::config, ctx + ".preset must be a string");
    preset = member(j, "preset").get<std::string>();
  }
  auto series = [&](const char* ck, const char* sk) {
    const std::vector<double> a = get_doubles(j, ck, {}, ctx), b = get_doubles(j, sk, {}, ctx);
    TrigSeries s(std::max(a.empty() ? 0 : a.size() - 1, b.size()));
    for (std::size_t k = 0; k < a.size(); ++k) s.set_a(k, a[k]);
    for (std::size_t k = 0; k < b.size(); ++k) s.set_b(k + 1, b[k]);
    s.detect_parity();
    return s;
  };

  if (preset == "flat" || (preset.empty() && j.empty()))
    return BoundaryWeight::from_density(TrigSeries::constant(1.0));
  if (preset == "ellipse") {
    if (!j.contains("p")) fail(ErrorKind::config, ctx + ".p is required for the ellipse preset");
    return pullback_weight(conformal_map_auto(get_double(j, "p", 0.0, ctx)), get_size(j, "N", 0, ctx));
  }
  if (preset == "testfamily") {
    if (!j.contains("epsilon")) fail(ErrorKind::config, ctx + ".epsilon is required for the testfamily preset");
    const double eps = get_double(j, "epsilon", 0.0, ctx);
    return omega_eps_weight(eps, get_size(j, "N", omega_eps_min_N(eps), ctx)).weight;
  }
  if (preset == "coeffs") {
    const std::vector<double> c = get_doubles(j, "coeffs", {}, ctx);
    return weight_from_coeffs(c, get_size(j, "N", std::max<std::size_t>(4 * c.size(), 64), ctx));
  }
  if (!preset.empty()) fail(ErrorKind::config, ctx + ".preset must be flat, ellipse, testfamily or coeffs");
  if (j.contains("cos") || j.contains("sin")) return BoundaryWeight::from_density(series("cos", "sin"));
  if (j.contains("log_cos") || j.contains("log_sin")) {
    const TrigSeries v = series("log_cos", "log_sin");
    return BoundaryWeight::from_log(v, get_size(j, "degree", std::max<std::size_t>(4 * v.n_modes(), 64), ctx));
  }
  fail(ErrorKind::config, ctx + " needs a preset, cos/sin or log_cos/log_sin");
}

FunctionalParams parse_params(const json& j) {
  check_object(j, "params", {"s", "t"});
  return FunctionalParams(get_double(j, "s", 1.0, "params"), get_double(j, "t", 8.0, "params"));
}

OptimizerConfig parse_optimizer(const json& j, std::optional<std::uint64_t> seed_override) {
  check_object(j, "optimizer", {"n_modes", "solver_N", "max_iters", "step_init", "armijo_factor", "grad_tol",
                                "mass_tol", "seed", "newton"});
  OptimizerConfig c;
  const std::string ctx = "optimizer";
  c.n_modes = get_size(j, "n_modes", c.n_modes, ctx);
  c.solver_N = get_size(j, "solver_N", c.solver_N, ctx);
  c.max_iters = get_size(j, "max_iters", c.max_iters, ctx);
  c.step_init = get_double(j, "step_init", c.step_init, ctx);
  c.armijo_factor = get_double(j, "armijo_factor", c.armijo_factor, ctx);
  c.grad_tol = get_double(j, "grad_tol", c.grad_tol, ctx);
  c.mass_tol = get_double(j, "mass_tol", c.mass_tol, ctx);
  c.seed = get_u64(j, "seed", c.seed, ctx);
  c.newton = get_bool(j, "newton", c.newton, ctx);
  if (seed_override) c.seed = *seed_override;
  c.validate();
  return c;
}

}  // namespace steklov::cli
