#include "ioid/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "ioid/rls.hpp"

#ifndef IOID_VERSION
#define IOID_VERSION "0.0.0"
#endif

namespace ioid {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(item, what));
  return out;
}

// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

InputKind parse_kind(const std::string& name, const std::string& where) {
  if (name == "white") return InputKind::kWhite;
  if (name == "prbs") return InputKind::kPrbs;
  if (name == "sine-mix") return InputKind::kSineMix;
  if (name == "file") return InputKind::kFile;
  throw ValidationError(where + ": unknown input kind '" + name + "'");
}

void check_spec(const InputSpec& spec, const std::string& where) {
  require(std::isfinite(spec.scale) && spec.scale >= 0.0, where + ".scale: must be finite and >= 0");
  if (spec.kind == InputKind::kSineMix) {
    require(!spec.freqs.empty(), where + ".freqs: sine-mix needs at least one frequency");
    require(spec.amps.empty() || spec.amps.size() == spec.freqs.size(),
            where + ".amps: must match the number of frequencies");
  }
  if (spec.kind == InputKind::kFile) require(!spec.path.empty(), where + ".path: required for file input");
}

std::vector<Vector> read_input_csv(const std::filesystem::path& path, std::size_t count, int m) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open input file '" + path.string() + "'");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].rfind("u_", 0) == 0) cols.push_back(c);
  }
  require(static_cast<int>(cols.size()) == m,
          path.string() + ": expected " + std::to_string(m) + " u_ columns");
  std::vector<Vector> out;
  long line_no = 1;
  while (out.size() < count && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    require(cells.size() == header.size(),
            path.string() + ":" + std::to_string(line_no) + ": wrong number of cells");
    Vector u(m);
    for (int c = 0; c < m; ++c) {
      u(c) = parse_double(cells[cols[static_cast<std::size_t>(c)]],
                          path.string() + ":" + std::to_string(line_no));
    }
    out.push_back(std::move(u));
  }
  require(out.size() == count, path.string() + ": needs " + std::to_string(count) + " input rows");
  return out;
}

double json_number(const json& j, const std::string& where) {
  require(j.is_number(), where + ": expected a number");
  return j.get<double>();
}

long json_integer(const json& j, const std::string& where) {
  require(j.is_number_integer(), where + ": expected an integer");
  return j.get<long>();
}

std::string json_string(const json& j, const std::string& where) {
  require(j.is_string(), where + ": expected a string");
  return j.get<std::string>();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    require(allowed.count(key) > 0, where + "." + key + ": unknown key");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

json optional_matrix(const std::optional<Matrix>& m) {
  return m ? matrix_to_json(*m) : json(nullptr);
}

OutputFile write_output(const std::filesystem::path& dir, const std::string& name,
                        const std::string& text) {
  write_text_file(dir / name, text);
  return OutputFile{name, sha256_hex(text), static_cast<std::uintmax_t>(text.size())};
}

}  // namespace

std::string to_string(InputKind kind) {
  switch (kind) {
    case InputKind::kWhite: return "white";
    case InputKind::kPrbs: return "prbs";
    case InputKind::kSineMix: return "sine-mix";
    case InputKind::kFile: return "file";
  }
  return "unknown";
}

InputSpec parse_input_spec(const std::string& text) {
  const std::string where = "input '" + text + "'";
  const auto colon = text.find(':');
  InputSpec spec;
  spec.kind = parse_kind(text.substr(0, colon), where);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  while (!rest.empty()) {
    const auto eq = rest.find('=');
    require(eq != std::string::npos, where + ": expected key=value");
    const std::string key = rest.substr(0, eq);
    std::string value;
    if (key == "path") {
      // Paths may contain ':' so they take the rest of the string.
      value = rest.substr(eq + 1);
      rest.clear();
    } else {
      const auto next = rest.find(':', eq);
      value = rest.substr(eq + 1, next == std::string::npos ? std::string::npos : next - eq - 1);
      rest = next == std::string::npos ? "" : rest.substr(next + 1);
    }
    if (key == "seed") {
      const double s = parse_double(value, where + " seed");
      require(s >= 0 && s == std::floor(s), where + ": seed must be a non-negative integer");
      spec.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "scale") {
      spec.scale = parse_double(value, where + " scale");
    } else if (key == "freqs") {
      spec.freqs = parse_list(value, where + " freqs");
    } else if (key == "amps") {
      spec.amps = parse_list(value, where + " amps");
    } else if (key == "path") {
      spec.path = value;
    } else {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
  check_spec(spec, "input");
  return spec;
}

InputSpec input_spec_from_json(const json& j, const std::string& where) {
  if (j.is_string()) return parse_input_spec(j.get<std::string>());
  require(j.is_object(), where + ": expected an object or a spec string");
  reject_unknown(j, {"kind", "seed", "scale", "freqs", "amps", "path"}, where);
  require(j.contains("kind"), where + ".kind: required");
  InputSpec spec;
  spec.kind = parse_kind(json_string(j["kind"], where + ".kind"), where + ".kind");
  if (j.contains("seed")) {
    require(j["seed"].is_number_unsigned(), where + ".seed: expected a non-negative integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("scale")) spec.scale = json_number(j["scale"], where + ".scale");
  for (const char* key : {"freqs", "amps"}) {
    if (!j.contains(key)) continue;
    require(j[key].is_array(), where + "." + key + ": expected an array");
    std::vector<double> values;
    for (std::size_t i = 0; i < j[key].size(); ++i) {
      values.push_back(json_number(j[key][i], where + "." + key + "[" + std::to_string(i) + "]"));
    }
    (std::string(key) == "freqs" ? spec.freqs : spec.amps) = std::move(values);
  }
  if (j.contains("path")) spec.path = json_string(j["path"], where + ".path");
  check_spec(spec, where);
  return spec;
}

json input_spec_to_json(const InputSpec& spec) {
  json j{{"kind", to_string(spec.kind)}, {"seed", spec.seed}, {"scale", spec.scale}};
  if (spec.kind == InputKind::kSineMix) {
    j["freqs"] = spec.freqs;
    j["amps"] = spec.amps;
  }
  if (spec.kind == InputKind::kFile) j["path"] = spec.path.string();
  return j;
}

std::vector<Vector> generate_input(const InputSpec& spec, std::size_t count, int m) {
  require(m >= 1, "input dimension must be positive");
  check_spec(spec, "input");
  if (spec.kind == InputKind::kFile) {
    std::vector<Vector> rows = read_input_csv(spec.path, count, m);
    for (auto& u : rows) u *= spec.scale;
    return rows;
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<Vector> out(count, Vector::Zero(m));
  switch (spec.kind) {
    case InputKind::kWhite: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& u : out) {
        for (int c = 0; c < m; ++c) u(c) = spec.scale * normal(rng);
      }
      break;
    }
    case InputKind::kPrbs:
      for (auto& u : out) {
        // + 0.0 turns a -0.0 from a zero scale into +0.0.
        for (int c = 0; c < m; ++c) u(c) = ((rng() >> 63) ? spec.scale : -spec.scale) + 0.0;
      }
      break;
    case InputKind::kSineMix: {
      const std::size_t nf = spec.freqs.size();
      Matrix phase(m, static_cast<Eigen::Index>(nf));
      for (int c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < nf; ++i) {
          phase(c, static_cast<Eigen::Index>(i)) = 2.0 * std::numbers::pi * unit_uniform(rng);
        }
      }
      for (std::size_t k = 0; k < count; ++k) {
        for (int c = 0; c < m; ++c) {
          double v = 0.0;
          for (std::size_t i = 0; i < nf; ++i) {
            const double amp = spec.amps.empty() ? 1.0 : spec.amps[i];
            v += amp * std::sin(2.0 * std::numbers::pi * spec.freqs[i] * static_cast<double>(k) +
                                phase(c, static_cast<Eigen::Index>(i)));
          }
          out[k](c) = spec.scale * v;
        }
      }
      break;
    }
    case InputKind::kFile:
      break;
  }
  return out;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string root = "config";
  require(j.is_object(), root + ": expected an object");
  reject_unknown(j,
                 {"true_model", "fit_orders", "input", "horizon", "theta0", "p0_scale",
                  "tolerances", "output_dir", "trace_stride"},
                 root);
  for (const char* key : {"true_model", "fit_orders", "horizon"}) {
    require(j.contains(key), root + "." + key + ": required");
  }

  ExperimentConfig cfg;
  const json& tm = j["true_model"];
  if (tm.is_string()) {
    cfg.true_model = load_model(resolve(base_dir, tm.get<std::string>()));
  } else {
    cfg.true_model = model_from_json(tm, root + ".true_model");
  }

  const json& fo = j["fit_orders"];
  require(fo.is_array(), root + ".fit_orders: expected an array");
  require(!fo.empty(), "fit_orders empty");
  std::set<int> seen;
  for (std::size_t i = 0; i < fo.size(); ++i) {
    const std::string where = root + ".fit_orders[" + std::to_string(i) + "]";
    const long order = json_integer(fo[i], where);
    require(order >= 0 && order <= 64, where + ": order must be in [0, 64]");
    require(seen.insert(static_cast<int>(order)).second, where + ": duplicate fit order");
    cfg.fit_orders.push_back(static_cast<int>(order));
  }

  cfg.horizon = json_integer(j["horizon"], root + ".horizon");
  require(cfg.horizon > 0, root + ".horizon: must be positive");
  const int max_order = *std::max_element(cfg.fit_orders.begin(), cfg.fit_orders.end());
  require(cfg.horizon > max_order, "horizon below order window: horizon " +
                                       std::to_string(cfg.horizon) + " must exceed fit order " +
                                       std::to_string(max_order));

  if (j.contains("input")) {
    cfg.input = input_spec_from_json(j["input"], root + ".input");
    if (cfg.input.kind == InputKind::kFile) cfg.input.path = resolve(base_dir, cfg.input.path.string());
  }

  if (j.contains("theta0")) {
    const json& t0 = j["theta0"];
    if (t0.is_string()) {
      require(t0.get<std::string>() == "zeros", root + ".theta0: expected \"zeros\" or {\"file\": path}");
    } else {
      require(t0.is_object(), root + ".theta0: expected \"zeros\" or {\"file\": path}");
      reject_unknown(t0, {"file"}, root + ".theta0");
      require(t0.contains("file"), root + ".theta0.file: required");
      cfg.theta0_file = resolve(base_dir, json_string(t0["file"], root + ".theta0.file"));
    }
  }

  if (j.contains("p0_scale")) {
    cfg.p0_scale = json_number(j["p0_scale"], root + ".p0_scale");
    require(std::isfinite(cfg.p0_scale) && cfg.p0_scale > 0.0,
            root + ".p0_scale: must be positive and finite");
  }

  if (j.contains("tolerances")) {
    const json& tol = j["tolerances"];
    const std::string where = root + ".tolerances";
    require(tol.is_object(), where + ": expected an object");
    reject_unknown(tol, {"equivalence", "asymptote", "pe_slope"}, where);
    if (tol.contains("equivalence")) cfg.tolerances.equivalence = json_number(tol["equivalence"], where + ".equivalence");
    if (tol.contains("asymptote")) cfg.tolerances.asymptote = json_number(tol["asymptote"], where + ".asymptote");
    if (tol.contains("pe_slope")) cfg.tolerances.pe_slope = json_number(tol["pe_slope"], where + ".pe_slope");
    require(cfg.tolerances.equivalence > 0 && cfg.tolerances.asymptote > 0 && cfg.tolerances.pe_slope > 0,
            where + ": tolerances must be positive");
  }

  cfg.output_dir = base_dir / "results";
  if (j.contains("output_dir")) cfg.output_dir = resolve(base_dir, json_string(j["output_dir"], root + ".output_dir"));

  if (j.contains("trace_stride")) {
    cfg.trace_stride = json_integer(j["trace_stride"], root + ".trace_stride");
    require(cfg.trace_stride >= 1, root + ".trace_stride: must be at least 1");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["true_model"] = model_to_json(config.true_model);
  j["fit_orders"] = config.fit_orders;
  j["input"] = input_spec_to_json(config.input);
  j["horizon"] = config.horizon;
  j["theta0"] = config.theta0_file.empty() ? json("zeros") : json{{"file", config.theta0_file.string()}};
  j["p0_scale"] = config.p0_scale;
  j["tolerances"] = {{"equivalence", config.tolerances.equivalence},
                     {"asymptote", config.tolerances.asymptote},
                     {"pe_slope", config.tolerances.pe_slope}};
  j["output_dir"] = config.output_dir.string();
  j["trace_stride"] = config.trace_stride;
  return j;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

json manifest_to_json(const RunManifest& manifest) {
  json runs = json::array();
  for (const auto& run : manifest.runs) {
    json outputs = json::array();
    for (const auto& f : run.outputs) {
      outputs.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    }
    json r{{"fit_order", run.fit_order}, {"status", run.ok ? "ok" : "failed"}, {"outputs", outputs}};
    if (!run.ok) {
      r["error_kind"] = run.error_kind;
      r["error"] = run.error;
    }
    runs.push_back(std::move(r));
  }
  return json{{"tool", "ioid"},
              {"tool_version", manifest.tool_version},
              {"config_hash", manifest.config_hash},
              {"seeds", {{"input", manifest.input_seed}}},
              {"runs", runs},
              {"content_hash", manifest.content_hash},
              {"wall_clock_seconds", manifest.wall_clock_seconds}};
}

std::string trace_to_csv(const std::vector<TraceRecord>& records, int p, int d) {
  std::string out = "k";
  for (int r = 1; r <= p; ++r) {
    for (int c = 1; c <= d; ++c) out += ",theta_" + std::to_string(r) + "_" + std::to_string(c);
  }
  out += ",frob_err_to_ref,residual_norm,pmin_eig\n";
  for (const auto& rec : records) {
    out += std::to_string(rec.k);
    for (double v : rec.theta_flat) {
      out += ',';
      out += format_double(v);
    }
    out += ',' + format_double(rec.err_norm);
    out += ',' + format_double(rec.residual_norm);
    out += ',' + format_double(rec.pmin_eig);
    out += '\n';
  }
  return out;
}

json trace_summary(const ConvergenceTrace& trace, const ExperimentTolerances& tolerances) {
  const double err = (trace.theta_final - trace.theta_ref).norm();
  json j{{"n", trace.n},
         {"n_hat", trace.n_hat},
         {"steps", trace.steps},
         {"reference", trace.reference},
         {"theta_ref", matrix_to_json(trace.theta_ref)},
         {"theta_final", matrix_to_json(trace.theta_final)},
         {"final_error_norm", err},
         {"final_residual_norm", trace.final_residual_norm},
         {"gram_avg", matrix_to_json(trace.gram_avg)},
         {"gram_stabilization", trace.gram_stabilization},
         {"empirical_scaled_error", matrix_to_json(trace.empirical_scaled_error)},
         {"predicted_asymptote", optional_matrix(trace.predicted_asymptote)},
         {"asymptote_tolerance", tolerances.asymptote},
         {"note", trace.note}};
  if (trace.predicted_asymptote) {
    j["asymptote_rel_error"] = trace.asymptote_rel_error;
    j["asymptote_within_tolerance"] = trace.asymptote_rel_error <= tolerances.asymptote;
  } else {
    j["asymptote_rel_error"] = nullptr;
    j["asymptote_within_tolerance"] = nullptr;
  }
  return j;
}

RunManifest run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const IOModel& model = config.true_model;
  const int p = model.p();
  const int m = model.m();
  const int max_order = *std::max_element(config.fit_orders.begin(), config.fit_orders.end());
  std::filesystem::create_directories(config.output_dir);

  json hashed = config_to_json(config);
  hashed.erase("output_dir");

  RunManifest manifest;
  manifest.config_hash = sha256_hex(hashed.dump());
  manifest.tool_version = IOID_VERSION;
  manifest.input_seed = config.input.seed;

  // One shared input sequence; each order uses its own prefix.
  const auto inputs = generate_input(
      config.input, static_cast<std::size_t>(max_order + config.horizon + 1), m);
  json theta0_map;
  if (!config.theta0_file.empty()) theta0_map = read_json_file(config.theta0_file);

  auto run_order = [&](int order) {
    RunRecord rec;
    rec.fit_order = order;
    try {
      const int d = regressor_dim(order, p, m);
      Matrix theta0 = Matrix::Zero(p, d);
      if (!config.theta0_file.empty()) {
        const std::string key = std::to_string(order);
        require(theta0_map.is_object() && theta0_map.contains(key),
                config.theta0_file.string() + ": no theta0 for fit order " + key);
        theta0 = matrix_from_json(theta0_map[key], "theta0." + key);
      }
      const Matrix P0 = config.p0_scale * Matrix::Identity(d, d);
      TrackingOptions opts;
      opts.stride = config.trace_stride;
      const ConvergenceTrace trace =
          run_tracked_identification(model, order, inputs, config.horizon, theta0, P0, opts);
      json summary = trace_summary(trace, config.tolerances);
      const double eq = theta_equivalence_residual(trace.theta_final, model, order);
      summary["equivalence_residual"] = eq;
      summary["equivalent_to_truth"] = eq <= config.tolerances.equivalence;
      summary["input_seed"] = config.input.seed;
      const std::string stem = "n" + std::to_string(order);
      const std::string csv = trace_to_csv(trace.records, p, d);
      const std::string summary_text = summary.dump(2) + "\n";
      rec.outputs.push_back(write_output(config.output_dir, "trace_" + stem + ".csv", csv));
      rec.outputs.push_back(write_output(config.output_dir, "summary_" + stem + ".json", summary_text));
      rec.ok = true;
    } catch (const ValidationError& e) {
      rec.error_kind = "validation";
      rec.error = e.what();
    } catch (const NumericalError& e) {
      rec.error_kind = "numerical";
      rec.error = e.what();
    } catch (const std::exception& e) {
      rec.error_kind = "error";
      rec.error = e.what();
    }
    return rec;
  };

  std::vector<std::future<RunRecord>> workers;
  for (int order : config.fit_orders) workers.push_back(std::async(std::launch::async, run_order, order));
  for (auto& w : workers) manifest.runs.push_back(w.get());

  json stable = manifest_to_json(manifest);
  stable.erase("content_hash");
  stable.erase("wall_clock_seconds");
  manifest.content_hash = sha256_hex(stable.dump());
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_text_file(config.output_dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
  return manifest;
}

Matrix theta0_from_spec(const std::string& spec, int p, int d) {
  if (spec.empty() || spec == "zeros") return Matrix::Zero(p, d);
  const Matrix theta0 = matrix_from_json(read_json_file(spec), spec);
  require(theta0.rows() == p && theta0.cols() == d,
          spec + ": theta0 must be " + std::to_string(p) + "x" + std::to_string(d));
  return theta0;
}

FitResult fit_trajectory(const Trajectory& traj, int order, const FitOptions& options) {
  require(order >= 0, "fit order must be non-negative");
  require(options.stride >= 1, "trace stride must be positive");
  require(std::isfinite(options.p0_scale) && options.p0_scale > 0.0, "p0 scale must be positive");
  const int p = traj.p();
  const int m = traj.m();
  const int d = regressor_dim(order, p, m);
  const Matrix theta0 = options.theta0.size() == 0 ? Matrix::Zero(p, d) : options.theta0;
  require(theta0.rows() == p && theta0.cols() == d, "theta0 shape does not match the fit order");
  const Matrix P0 = options.p0_scale * Matrix::Identity(d, d);

  const auto samples = build_regressors(traj, order);
  require(!samples.empty(), "trajectory too short for the requested order");

  FitResult out;
  out.order = order;
  out.first_index = traj.k0 + first_regressor_index(traj, order);
  out.samples = static_cast<long>(samples.size());

  NormalEquations normal(p, d);
  for (const auto& s : samples) normal.add(s);
  out.theta_batch = batch_solve(normal, theta0, P0);

  if (options.reference) {
    const IOModel& ref = *options.reference;
    require(ref.p() == p && ref.m() == m, "reference model dimensions do not match the data");
    require(order >= ref.order(), "fit order below the reference model order");
    if (order == ref.order()) {
      out.reference = "theta_true";
      out.theta_ref = ref.theta();
    } else {
      out.reference = "theta_star";
      out.theta_ref = projected_limit(ref, order, theta0, P0).theta_star;
    }
  } else {
    out.reference = "batch";
    out.theta_ref = out.theta_batch;
  }

  RlsState state = RlsState::initial(theta0, P0);
  const long N = out.samples;
  auto record = [&](long k, const RegressorSample& sample) {
    TraceRecord r;
    r.k = k;
    r.theta_flat.resize(static_cast<std::size_t>(p * d));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        r.theta_flat.data(), p, d) = state.theta;
    r.err_norm = (state.theta - out.theta_ref).norm();
    r.scaled_err_norm = static_cast<double>(k) * r.err_norm;
    r.residual_norm = residual(state.theta, sample).norm();
    r.pmin_eig = state.min_eigenvalue();
    out.records.push_back(std::move(r));
  };
  for (long k = 0; k < N; ++k) {
    const auto& sample = samples[static_cast<std::size_t>(k)];
    if (k % options.stride == 0) record(k, sample);
    state = rls_step(std::move(state), sample);
  }
  record(N, samples.back());

  out.theta_final = state.theta;
  out.batch_gap = (out.theta_final - out.theta_batch).norm() / (1.0 + out.theta_batch.norm());
  if (options.reference) {
    out.equivalence_residual = theta_equivalence_residual(out.theta_final, *options.reference, order);
  }
  return out;
}

}  // namespace ioid
