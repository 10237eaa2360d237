#include "commands.hpp"

#include <cmath>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "ioid/convergence.hpp"
#include "ioid/equivalence.hpp"
#include "ioid/excitation.hpp"
#include "ioid/experiment.hpp"
#include "ioid/io.hpp"
#include "ioid/rls.hpp"

namespace ioid::cli {

namespace {

// Set by subcommands that finish without throwing but still want a nonzero exit.
int g_exit_code = kExitOk;

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int rank_of(const Matrix& gram, double rel) {
  if (gram.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(gram);
  const auto& s = svd.singularValues();
  const double cut = rel * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > cut ? 1 : 0;
  return r;
}

json report_json(const ExcitationReport& r) {
  return json{{"weak_pe", r.weak_pe},
              {"pe", r.pe},
              {"heuristic", true},
              {"threshold", r.threshold},
              {"final_lambda_min", r.min_eig_curve.back()},
              {"gram_avg_min_eig", r.gram_avg_min_eig},
              {"stabilization", r.stabilization},
              {"samples", r.window_end - r.window_begin}};
}

}  // namespace

void add_fit(CLI::App& app) {
  struct Opts {
    std::string data;
    int order = 0;
    double p0_scale = 1e3;
    std::string theta0 = "zeros";
    std::string emit_trace;
    std::string reference;
    long stride = 1;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("fit", "Run recursive least squares over a recorded trajectory");
  sub->add_option("--data", o->data, "Trajectory CSV with columns k,u_1..u_m,y_1..y_p")
      ->required()->check(CLI::ExistingFile);
  sub->add_option("--order", o->order, "Fit order n_hat")->required()->check(CLI::NonNegativeNumber);
  sub->add_option("--p0-scale", o->p0_scale, "P0 = scale * I")->capture_default_str();
  sub->add_option("--theta0", o->theta0, "\"zeros\" or a JSON matrix file")->capture_default_str();
  sub->add_option("--emit-trace", o->emit_trace, "Write the per-step trace CSV here");
  sub->add_option("--reference", o->reference,
                  "Model JSON; the trace then measures distance to its order-matched limit "
                  "instead of the batch solution")
      ->check(CLI::ExistingFile);
  sub->add_option("--stride", o->stride, "Record every stride-th step")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->callback([o] {
    const Trajectory traj = read_trajectory_csv(o->data);
    FitOptions opts;
    opts.p0_scale = o->p0_scale;
    opts.stride = o->stride;
    opts.theta0 = theta0_from_spec(o->theta0, traj.p(), regressor_dim(o->order, traj.p(), traj.m()));
    if (!o->reference.empty()) opts.reference = load_model(o->reference);
    const FitResult fit = fit_trajectory(traj, o->order, opts);
    if (!o->emit_trace.empty()) {
      write_text_file(o->emit_trace,
                      trace_to_csv(fit.records, traj.p(), regressor_dim(o->order, traj.p(), traj.m())));
    }
    json out{{"order", fit.order},
             {"first_regressor_k", fit.first_index},
             {"skipped_leading_samples", fit.first_index - traj.k0},
             {"samples", fit.samples},
             {"reference", fit.reference},
             {"theta_final", matrix_to_json(fit.theta_final)},
             {"theta_batch", matrix_to_json(fit.theta_batch)},
             {"batch_gap", fit.batch_gap},
             {"final_error_to_ref", (fit.theta_final - fit.theta_ref).norm()}};
    if (fit.equivalence_residual) out["equivalence_residual"] = *fit.equivalence_residual;
    print_json(out);
  });
}

void add_excite(CLI::App& app) {
  struct Opts {
    std::string data;
    int order = 0;
    std::optional<int> true_order;
    std::string emit;
    double pe_slope_tol = 5e-2;
    std::optional<double> weak_pe_threshold;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("excite", "Excitation diagnostics of the regressor sequence");
  sub->add_option("--data", o->data, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--order", o->order, "Regressor order n_hat")->required()->check(CLI::NonNegativeNumber);
  sub->add_option("--true-order", o->true_order,
                  "Known true order n < n_hat; adds the reduced regressor diagnostics");
  sub->add_option("--emit", o->emit,
                  "CSV with columns k,lambda_min_partial,lambda_min_avg (plus reduced_* columns)");
  sub->add_option("--pe-slope-tol", o->pe_slope_tol,
                  "Largest relative change of the Gram average between k/2 and k for a PE verdict")
      ->capture_default_str();
  sub->add_option("--weak-pe-threshold", o->weak_pe_threshold,
                  "Floor on lambda_min of the partial sum (default 10 eps trace)");
  sub->callback([o] {
    const Trajectory traj = read_trajectory_csv(o->data);
    ExcitationOptions opts;
    opts.pe_slope_tol = o->pe_slope_tol;
    opts.weak_pe_threshold = o->weak_pe_threshold;
    const long first = first_regressor_index(traj, o->order);
    std::vector<Vector> full;
    for (const auto& s : build_regressors(traj, o->order)) full.push_back(s.phi);
    require(!full.empty(), "trajectory too short for the requested order");
    const auto report = excitation_report(full, opts);
    json out{{"order", o->order}, {"first_regressor_k", traj.k0 + first}, {"full", report_json(report)}};
    out["full"]["rank"] = rank_of(report.gram_avg, 1e-8);
    out["full"]["dimension"] = report.gram_avg.rows();

    std::optional<ExcitationReport> reduced;
    if (o->true_order) {
      const int n = *o->true_order;
      require(n >= 0 && n < o->order, "--true-order must be below --order");
      std::vector<Vector> red;
      for (long k = first; k < static_cast<long>(traj.size()); ++k) {
        red.push_back(build_reduced_regressor(traj, k, n, o->order));
      }
      reduced = excitation_report(red, opts);
      out["reduced"] = report_json(*reduced);
      out["full"]["rank_bound"] = traj.p() * n + traj.m() * (o->order + 1);
    }
    if (!o->emit.empty()) {
      std::string csv = "k,lambda_min_partial,lambda_min_avg";
      if (reduced) csv += ",reduced_lambda_min_partial,reduced_lambda_min_avg";
      csv += "\n";
      for (std::size_t i = 0; i < full.size(); ++i) {
        csv += std::to_string(traj.k0 + first + static_cast<long>(i));
        csv += "," + format_double(report.min_eig_curve[i]);
        csv += "," + format_double(report.avg_min_eig_curve[i]);
        if (reduced) {
          csv += "," + format_double(reduced->min_eig_curve[i]);
          csv += "," + format_double(reduced->avg_min_eig_curve[i]);
        }
        csv += "\n";
      }
      write_text_file(o->emit, csv);
    }
    print_json(out);
  });
}

void add_equiv(CLI::App& app) {
  struct Opts {
    std::string a;
    std::string b;
    double tol = kDefaultEquivalenceTol;
    bool as_json = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("equiv", "Decide whether two models are equivalent");
  sub->add_option("model_a", o->a, "First model JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("model_b", o->b, "Second model JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--tol", o->tol, "Relative residual tolerance")->capture_default_str();
  sub->add_flag("--json", o->as_json, "Print the certificate as JSON");
  sub->callback([o] {
    const auto cert = is_equivalent(load_model(o->a), load_model(o->b), o->tol);
    const std::string condition =
        cert.condition == EquivalenceCondition::kSameOrderCoefficients ? "same-order-coefficients"
                                                                       : "cross-order-lift";
    if (o->as_json) {
      print_json({{"equivalent", cert.equivalent},
                  {"residual", cert.residual},
                  {"absolute_residual", cert.absolute_residual},
                  {"condition", condition},
                  {"base_order", cert.base_order},
                  {"high_order", cert.high_order},
                  {"tol", o->tol}});
    } else {
      std::cout << (cert.equivalent ? "equivalent" : "not equivalent") << "\n"
                << "residual " << format_double(cert.residual) << "\n"
                << "condition " << condition << " (orders " << cert.base_order << ", "
                << cert.high_order << ")\n";
    }
  });
}

void add_reduce(CLI::App& app) {
  struct Opts {
    std::string model;
    std::string strategy;
    std::string candidate;
    std::string out;
    std::string witness;
    double tol = kDefaultEquivalenceTol;
    std::uint64_t seed = 0;
    int starts = 32;
    bool once = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("reduce", "Search for a lower-order equivalent model");
  sub->add_option("model", o->model, "Model JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--strategy", o->strategy,
                  "verify-candidate, scalar-root-search or newton-search "
                  "(default: scalar-root-search for p = 1, newton-search otherwise)");
  sub->add_option("--candidate", o->candidate, "JSON matrix F_1 to verify (verify-candidate)")
      ->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Write the final reduced model JSON here");
  sub->add_option("--witness", o->witness, "Write the F_1 witnesses (JSON list) here");
  sub->add_option("--tol", o->tol, "Equivalence tolerance")->capture_default_str();
  sub->add_option("--seed", o->seed, "Seed for the Newton search starts")->capture_default_str();
  sub->add_option("--starts", o->starts, "Random starts for the Newton search")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_flag("--once", o->once, "Reduce by a single order instead of repeating");
  sub->callback([o] {
    const IOModel model = load_model(o->model);
    ReductionOptions opts;
    opts.tol = o->tol;
    opts.seed = o->seed;
    opts.random_starts = o->starts;
    if (!o->candidate.empty()) opts.candidate_F1 = matrix_from_json(read_json_file(o->candidate), o->candidate);
    std::optional<ReductionStrategy> strategy;
    if (!o->strategy.empty()) strategy = parse_reduction_strategy(o->strategy);

    IOModel final_model = model;
    std::vector<Matrix> witnesses;
    json out{{"input_order", model.order()}};
    if (o->once) {
      require(model.order() >= 1, "an order-0 model has no lower order");
      const auto s = strategy.value_or(model.p() == 1 ? ReductionStrategy::kScalarRootSearch
                                                      : ReductionStrategy::kNewtonSearch);
      const auto res = reduce_once(model, s, opts);
      out["strategy"] = to_string(s);
      out["reduced"] = res.reduced.has_value();
      out["residual"] = res.residual;
      out["exhaustive"] = res.exhaustive;
      out["note"] = res.note;
      if (res.reduced) {
        final_model = *res.reduced;
        witnesses.push_back(res.witness_F1);
      }
    } else {
      const auto rep = reducibility_check(model, opts, strategy);
      final_model = rep.final_model;
      witnesses = rep.witnesses;
      json orders = json::array();
      for (const auto& step : rep.chain) orders.push_back(step.order());
      out["chain_orders"] = orders;
      out["reduced"] = rep.reduced;
      out["proven_irreducible"] = rep.proven_irreducible;
      out["last_residual"] = rep.last_residual;
      out["note"] = rep.note;
    }
    json wj = json::array();
    for (const auto& w : witnesses) wj.push_back(matrix_to_json(w));
    out["final_order"] = final_model.order();
    out["witnesses"] = wj;
    out["model"] = model_to_json(final_model);
    if (!o->out.empty()) save_model(o->out, final_model);
    if (!o->witness.empty()) write_text_file(o->witness, wj.dump(2) + "\n");
    print_json(out);
  });
}

void add_converge(CLI::App& app) {
  struct Opts {
    std::string model;
    int fit_order = 0;
    std::string input = "white:seed=0:scale=1";
    long horizon = 0;
    std::string emit;
    std::string emit_summary;
    double p0_scale = 1e3;
    std::string theta0 = "zeros";
    long stride = 1;
    double asymptote_tol = 0.10;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("converge", "Simulate a model and track RLS convergence");
  sub->add_option("--model", o->model, "True model JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--fit-order", o->fit_order, "Fit order n_hat >= n")->required()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--input", o->input,
                  "Input spec, e.g. white:seed=7:scale=1.0, prbs:seed=1, "
                  "sine-mix:freqs=0.1,0.2:amps=1,1, file:path=u.csv")
      ->capture_default_str();
  sub->add_option("--horizon", o->horizon, "Number of RLS steps")->required()->check(CLI::PositiveNumber);
  sub->add_option("--emit", o->emit, "Trace CSV path");
  sub->add_option("--emit-summary", o->emit_summary, "Summary JSON path");
  sub->add_option("--p0-scale", o->p0_scale, "P0 = scale * I")->capture_default_str();
  sub->add_option("--theta0", o->theta0, "\"zeros\" or a JSON matrix file")->capture_default_str();
  sub->add_option("--stride", o->stride, "Record every stride-th step")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--asymptote-tol", o->asymptote_tol,
                  "Relative error tolerance for the k * error asymptote")
      ->capture_default_str();
  sub->callback([o] {
    const IOModel model = load_model(o->model);
    const InputSpec spec = parse_input_spec(o->input);
    const int d = regressor_dim(o->fit_order, model.p(), model.m());
    const Matrix theta0 = theta0_from_spec(o->theta0, model.p(), d);
    require(std::isfinite(o->p0_scale) && o->p0_scale > 0.0, "--p0-scale must be positive");
    const Matrix P0 = o->p0_scale * Matrix::Identity(d, d);
    const auto inputs =
        generate_input(spec, static_cast<std::size_t>(o->fit_order + o->horizon + 1), model.m());
    TrackingOptions topts;
    topts.stride = o->stride;
    const auto trace = run_tracked_identification(model, o->fit_order, inputs, o->horizon, theta0, P0, topts);
    ExperimentTolerances tol;
    tol.asymptote = o->asymptote_tol;
    json summary = trace_summary(trace, tol);
    summary["equivalence_residual"] = theta_equivalence_residual(trace.theta_final, model, o->fit_order);
    summary["input"] = input_spec_to_json(spec);
    if (!o->emit.empty()) write_text_file(o->emit, trace_to_csv(trace.records, model.p(), d));
    if (!o->emit_summary.empty()) write_text_file(o->emit_summary, summary.dump(2) + "\n");
    print_json({{"reference", trace.reference},
                {"final_error_norm", summary["final_error_norm"]},
                {"final_residual_norm", trace.final_residual_norm},
                {"asymptote_rel_error", summary["asymptote_rel_error"]},
                {"gram_stabilization", trace.gram_stabilization},
                {"equivalence_residual", summary["equivalence_residual"]},
                {"note", trace.note}});
  });
}

void add_experiment(CLI::App& app) {
  struct Opts {
    std::string config;
    std::string output_dir;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("experiment", "Run every fit order of an experiment config");
  sub->add_option("--config", o->config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--output-dir", o->output_dir, "Override the config's output_dir");
  sub->callback([o] {
    ExperimentConfig cfg = load_config(o->config);
    if (!o->output_dir.empty()) cfg.output_dir = o->output_dir;
    const RunManifest manifest = run_experiment(cfg);
    print_json(manifest_to_json(manifest));
    for (const auto& run : manifest.runs) {
      if (run.ok) continue;
      const int code = run.error_kind == "numerical" ? kExitNumerical : kExitValidation;
      if (g_exit_code == kExitOk) g_exit_code = code;
    }
  });
}

int run(CLI::App& app, int argc, char** argv) {
  app.require_subcommand(1);
  g_exit_code = kExitOk;
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return g_exit_code;
}

}  // namespace ioid::cli
