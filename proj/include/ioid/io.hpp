#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ioid/model.hpp"

namespace ioid {

using json = nlohmann::json;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Parses a decimal number; `what` names the field in error messages.
double parse_double(std::string_view text, std::string_view what);

json matrix_to_json(const Matrix& m);
/// Row-major nested array. `where` prefixes diagnostics (e.g. "model.F[0]").
Matrix matrix_from_json(const json& j, const std::string& where);

/// {"n":..,"p":..,"m":..,"F":[F_1..F_n],"G":[G_0..G_n]}, matrices row-major.
json model_to_json(const IOModel& model);
IOModel model_from_json(const json& j, const std::string& where = "model");

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

IOModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const IOModel& model);

/// CSV with header `k,u_1..u_m,y_1..y_p`, one row per time step. Leading rows
/// may leave the u cells empty; they become the undefined prefix of the
/// trajectory. Rows must have consecutive k.
Trajectory read_trajectory_csv(const std::filesystem::path& path);
std::string trajectory_to_csv(const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace ioid
