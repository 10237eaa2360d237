#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ioid/convergence.hpp"
#include "ioid/io.hpp"
#include "ioid/model.hpp"

namespace ioid {

enum class InputKind { kWhite, kPrbs, kSineMix, kFile };

/// Input generator description. Parsed from JSON or from the compact form
/// "white:seed=7:scale=1.0", "prbs:seed=3:scale=2",
/// "sine-mix:freqs=0.05,0.21:amps=1,0.5:seed=1", "file:path=inputs.csv".
struct InputSpec {
  InputKind kind = InputKind::kWhite;
  std::uint64_t seed = 0;
  double scale = 1.0;
  std::vector<double> freqs;  // cycles per sample
  std::vector<double> amps;   // defaults to 1 for every frequency
  std::filesystem::path path;
};

InputSpec parse_input_spec(const std::string& text);
InputSpec input_spec_from_json(const json& j, const std::string& where = "input");
json input_spec_to_json(const InputSpec& spec);
std::string to_string(InputKind kind);

/// `count` input vectors of dimension m. Deterministic given the spec:
/// white draws i.i.d. N(0, scale^2); prbs draws +-scale with equal odds;
/// sine-mix sums amp * sin(2 pi f k + phase) with per-channel phases drawn
/// from the seed; file reads the u_ columns of a CSV.
std::vector<Vector> generate_input(const InputSpec& spec, std::size_t count, int m);

struct ExperimentTolerances {
  double equivalence = kDefaultEquivalenceTol;
  double asymptote = 0.10;  // relative Frobenius error of k * theta_tilde
  double pe_slope = 5e-2;
};

struct ExperimentConfig {
  IOModel true_model = IOModel::zero(0, 1, 1);
  std::vector<int> fit_orders;
  InputSpec input;
  long horizon = 0;
  /// Empty means zeros. Otherwise a JSON file mapping fit order to a theta0 matrix.
  std::filesystem::path theta0_file;
  double p0_scale = 1e3;
  ExperimentTolerances tolerances;
  std::filesystem::path output_dir = "results";
  long trace_stride = 1;
};

/// Validates `j` against the config schema and fills defaults. Relative
/// paths resolve against `base_dir`.
ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Normalized form with every default spelled out; the config hash covers it.
json config_to_json(const ExperimentConfig& config);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunRecord {
  int fit_order = 0;
  bool ok = false;
  std::string error_kind;  // "validation" or "numerical" when !ok
  std::string error;
  std::vector<OutputFile> outputs;
};

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::uint64_t input_seed = 0;
  std::vector<RunRecord> runs;
  double wall_clock_seconds = 0.0;
  /// Hash over everything except the wall clock: equal for identical reruns.
  std::string content_hash;
};

json manifest_to_json(const RunManifest& manifest);

/// Runs every fit order (in parallel), writing trace_n<order>.csv and
/// summary_n<order>.json per order and manifest.json into the output directory.
/// A failing order is recorded in the manifest; the others still run.
RunManifest run_experiment(const ExperimentConfig& config);

/// Trace CSV: k, theta_<row>_<col>..., frob_err_to_ref, residual_norm, pmin_eig.
std::string trace_to_csv(const std::vector<TraceRecord>& records, int p, int d);
json trace_summary(const ConvergenceTrace& trace, const ExperimentTolerances& tolerances);

struct FitOptions {
  Matrix theta0;  // empty means zeros
  double p0_scale = 1e3;
  long stride = 1;
  /// When set, the trace measures distance to this model's order-matched
  /// limit (theta_true or theta_star); otherwise to the batch solution.
  std::optional<IOModel> reference;
};

struct FitResult {
  int order = 0;
  long first_index = 0;  // time index of the first usable regressor
  long samples = 0;
  std::string reference;  // "batch", "theta_true" or "theta_star"
  Matrix theta_ref;
  Matrix theta_final;
  Matrix theta_batch;
  double batch_gap = 0.0;  // ||theta_final - theta_batch|| / (1 + ||theta_batch||)
  std::optional<double> equivalence_residual;  // to the reference model
  std::vector<TraceRecord> records;
};

/// Runs RLS of the given order over a recorded trajectory.
FitResult fit_trajectory(const Trajectory& traj, int order, const FitOptions& options);

/// Reads a theta0 matrix for the given shape: "zeros" or a JSON matrix file.
Matrix theta0_from_spec(const std::string& spec, int p, int d);

}  // namespace ioid
