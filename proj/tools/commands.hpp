#pragma once

#include <CLI11.hpp>

namespace ioid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

void add_fit(CLI::App& app);
void add_excite(CLI::App& app);
void add_equiv(CLI::App& app);
void add_reduce(CLI::App& app);
void add_converge(CLI::App& app);
void add_experiment(CLI::App& app);

/// Parses and dispatches, mapping failures to exit codes: 2 for bad input,
/// 3 for numerical failure.
int run(CLI::App& app, int argc, char** argv);

}  // namespace ioid::cli
