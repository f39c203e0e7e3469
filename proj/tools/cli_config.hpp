#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "steklov/functional.hpp"
#include "steklov/optimizer.hpp"
#include "steklov/steklov_solver.hpp"

namespace steklov::cli {

// Schema helpers; every violation is a config error naming the offending key.
void check_object(const nlohmann::json& j, const std::string& ctx, std::initializer_list<const char*> allowed);
double get_double(const nlohmann::json& j, const char* key, double def, const std::string& ctx);
std::size_t get_size(const nlohmann::json& j, const char* key, std::size_t def, const std::string& ctx);
std::uint64_t get_u64(const nlohmann::json& j, const char* key, std::uint64_t def, const std::string& ctx);
bool get_bool(const nlohmann::json& j, const char* key, bool def, const std::string& ctx);
std::vector<double> get_doubles(const nlohmann::json& j, const char* key, std::vector<double> def,
                                const std::string& ctx);
// Strictly increasing or strictly decreasing, non-empty.
void check_monotone(const std::vector<double>& grid, const std::string& name);

BoundaryWeight parse_weight(const nlohmann::json& j, const std::string& ctx);
FunctionalParams parse_params(const nlohmann::json& j);
OptimizerConfig parse_optimizer(const nlohmann::json& j, std::optional<std::uint64_t> seed_override);

}  // namespace steklov::cli
