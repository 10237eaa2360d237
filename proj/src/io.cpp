#include "ioid/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace ioid {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError(std::string(what) + ": cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  require(j.is_array() && !j.empty(), where + ": expected a non-empty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  require(cols > 0, where + ": rows must be non-empty arrays");
  Matrix out(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    require(j[r].is_array() && j[r].size() == cols, row_where + ": ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c) {
      require(j[r][c].is_number(), row_where + "[" + std::to_string(c) + "]: expected a number");
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return out;
}

json model_to_json(const IOModel& model) {
  json F = json::array();
  json G = json::array();
  for (const auto& f : model.F()) F.push_back(matrix_to_json(f));
  for (const auto& g : model.G()) G.push_back(matrix_to_json(g));
  return json{{"n", model.order()}, {"p", model.p()}, {"m", model.m()}, {"F", F}, {"G", G}};
}

IOModel model_from_json(const json& j, const std::string& where) {
  require(j.is_object(), where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    require(key == "n" || key == "p" || key == "m" || key == "F" || key == "G",
            where + "." + key + ": unknown key");
  }
  for (const char* key : {"n", "p", "m"}) {
    require(j.contains(key) && j[key].is_number_integer(),
            where + "." + key + ": expected an integer");
  }
  require(j.contains("F") && j["F"].is_array(), where + ".F: expected an array of matrices");
  require(j.contains("G") && j["G"].is_array(), where + ".G: expected an array of matrices");
  const int n = j["n"].get<int>();
  const int p = j["p"].get<int>();
  const int m = j["m"].get<int>();
  require(n >= 0, where + ".n: must be non-negative");
  require(j["F"].size() == static_cast<std::size_t>(n), where + ".F: expected n matrices");
  require(j["G"].size() == static_cast<std::size_t>(n) + 1, where + ".G: expected n+1 matrices");
  std::vector<Matrix> F;
  std::vector<Matrix> G;
  for (std::size_t i = 0; i < j["F"].size(); ++i) {
    F.push_back(matrix_from_json(j["F"][i], where + ".F[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < j["G"].size(); ++i) {
    G.push_back(matrix_from_json(j["G"][i], where + ".G[" + std::to_string(i) + "]"));
  }
  return IOModel(p, m, std::move(F), std::move(G));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write '" + path.string() + "'");
  out << text;
}

IOModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path), path.filename().string());
}

void save_model(const std::filesystem::path& path, const IOModel& model) {
  write_text_file(path, model_to_json(model).dump(2) + "\n");
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open '" + path.string() + "'");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), path.string() + ": empty file");
  const auto header = split_commas(line);
  require(!header.empty() && trim(header[0]) == "k", path.string() + ": first column must be k");
  int m = 0;
  int p = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    const bool is_u = name.rfind("u_", 0) == 0;
    const bool is_y = name.rfind("y_", 0) == 0;
    require(is_u || is_y, path.string() + ": unexpected column '" + std::string(name) + "'");
    require(!(is_u && p > 0), path.string() + ": u columns must precede y columns");
    const int idx = is_u ? ++m : ++p;
    require(name.substr(2) == std::to_string(idx),
            path.string() + ": column '" + std::string(name) + "' out of order");
  }
  require(m > 0 && p > 0, path.string() + ": need at least one u and one y column");

  Trajectory traj;
  bool inputs_started = false;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto cells = split_commas(line);
    require(cells.size() == header.size(), where + ": wrong number of cells");
    const long k = std::lround(parse_double(cells[0], where + " k"));
    if (traj.y.empty()) {
      traj.k0 = k;
    } else {
      require(k == traj.k0 + static_cast<long>(traj.y.size()), where + ": k must be consecutive");
    }
    Vector u(m);
    bool u_empty = true;
    bool u_full = true;
    for (int c = 0; c < m; ++c) {
      const auto cell = trim(cells[static_cast<std::size_t>(1 + c)]);
      if (cell.empty()) {
        u_full = false;
        u(c) = std::numeric_limits<double>::quiet_NaN();
      } else {
        u_empty = false;
        u(c) = parse_double(cell, where + " u_" + std::to_string(c + 1));
      }
    }
    require(u_empty || u_full, where + ": partially empty input row");
    if (u_empty) {
      require(!inputs_started, where + ": empty inputs are only allowed before the first input");
      traj.input_start = traj.y.size() + 1;
    } else {
      inputs_started = true;
    }
    Vector y(p);
    for (int c = 0; c < p; ++c) {
      y(c) = parse_double(cells[static_cast<std::size_t>(1 + m + c)],
                          where + " y_" + std::to_string(c + 1));
    }
    traj.u.push_back(std::move(u));
    traj.y.push_back(std::move(y));
  }
  require(!traj.y.empty(), path.string() + ": no data rows");
  return traj;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream out;
  const int m = traj.m();
  const int p = traj.p();
  out << "k";
  for (int c = 1; c <= m; ++c) out << ",u_" << c;
  for (int c = 1; c <= p; ++c) out << ",y_" << c;
  out << "\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << traj.k0 + static_cast<long>(i);
    for (int c = 0; c < m; ++c) {
      out << ',';
      if (i >= traj.input_start) out << format_double(traj.u[i](c));
    }
    for (int c = 0; c < p; ++c) out << ',' << format_double(traj.y[i](c));
    out << "\n";
  }
  return out.str();
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  write_text_file(path, trajectory_to_csv(traj));
}

}  // namespace ioid
