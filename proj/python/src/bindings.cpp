// Python bindings for the ioid core. Sequences of vectors cross the boundary
// as 2-D arrays with one row per time step.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ioid/convergence.hpp"
#include "ioid/equivalence.hpp"
#include "ioid/excitation.hpp"
#include "ioid/experiment.hpp"
#include "ioid/io.hpp"
#include "ioid/rls.hpp"

namespace py = pybind11;
using namespace ioid;

namespace {

std::vector<Vector> rows_to_vectors(const Matrix& rows) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.emplace_back(rows.row(i).transpose());
  return out;
}

Matrix vectors_to_rows(const std::vector<Vector>& vs, int width) {
  Matrix out(static_cast<Eigen::Index>(vs.size()), width);
  for (std::size_t i = 0; i < vs.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = vs[i].transpose();
  return out;
}

Trajectory make_trajectory(const Matrix& u, const Matrix& y, std::size_t input_start) {
  require(u.rows() == y.rows(), "u and y must have the same number of rows");
  Trajectory t;
  t.u = rows_to_vectors(u);
  t.y = rows_to_vectors(y);
  t.input_start = input_start;
  return t;
}

py::dict trace_dict(const ConvergenceTrace& tr) {
  py::dict d;
  d["n"] = tr.n;
  d["n_hat"] = tr.n_hat;
  d["steps"] = tr.steps;
  d["reference"] = tr.reference;
  d["theta_ref"] = tr.theta_ref;
  d["theta_final"] = tr.theta_final;
  std::vector<long> k;
  std::vector<double> err, res, pmin;
  for (const auto& r : tr.records) {
    k.push_back(r.k);
    err.push_back(r.err_norm);
    res.push_back(r.residual_norm);
    pmin.push_back(r.pmin_eig);
  }
  d["k"] = k;
  d["err_norm"] = err;
  d["residual_norm"] = res;
  d["pmin_eig"] = pmin;
  d["gram_avg"] = tr.gram_avg;
  d["gram_stabilization"] = tr.gram_stabilization;
  d["empirical_scaled_error"] = tr.empirical_scaled_error;
  d["predicted_asymptote"] = tr.predicted_asymptote ? py::cast(*tr.predicted_asymptote) : py::none();
  d["asymptote_rel_error"] = tr.asymptote_rel_error;
  d["final_residual_norm"] = tr.final_residual_norm;
  d["note"] = tr.note;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ioid, mod) {
  mod.doc() = "Input/output model equivalence and recursive least squares identification";

  static py::exception<ValidationError> validation_error(mod, "ValidationError", PyExc_ValueError);
  static py::exception<NumericalError> numerical_error(mod, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical_error, e.what());
    }
  });

  py::class_<IOModel>(mod, "IOModel")
      .def(py::init<int, int, std::vector<Matrix>, std::vector<Matrix>>(), py::arg("p"), py::arg("m"),
           py::arg("F"), py::arg("G"))
      .def_static("zero", &IOModel::zero, py::arg("n"), py::arg("p"), py::arg("m"))
      .def_static("from_theta", &IOModel::from_theta, py::arg("n"), py::arg("p"), py::arg("m"),
                  py::arg("theta"))
      .def_property_readonly("order", &IOModel::order)
      .def_property_readonly("p", &IOModel::p)
      .def_property_readonly("m", &IOModel::m)
      .def_property_readonly("F", py::overload_cast<>(&IOModel::F, py::const_))
      .def_property_readonly("G", py::overload_cast<>(&IOModel::G, py::const_))
      .def("theta", &IOModel::theta)
      .def("regressor_dim", &IOModel::regressor_dim)
      .def("to_json", [](const IOModel& m) { return model_to_json(m).dump(); })
      .def_static("from_json", [](const std::string& s) { return model_from_json(json::parse(s)); })
      .def("__repr__", [](const IOModel& m) {
        return "IOModel(order=" + std::to_string(m.order()) + ", p=" + std::to_string(m.p()) +
               ", m=" + std::to_string(m.m()) + ")";
      });

  mod.def("load_model", &load_model, py::arg("path"));
  mod.def(
      "save_model", [](const IOModel& model, const std::filesystem::path& path) { save_model(path, model); },
      py::arg("model"), py::arg("path"));
  mod.def("regressor_dim", py::overload_cast<int, int, int>(&regressor_dim), py::arg("n"), py::arg("p"),
          py::arg("m"));

  mod.def(
      "simulate",
      [](const IOModel& model, const Matrix& inputs, const Matrix& initial_outputs) {
        std::vector<Vector> ics = rows_to_vectors(initial_outputs);
        const Trajectory t = simulate(model, ics, rows_to_vectors(inputs), static_cast<std::size_t>(inputs.rows()));
        return vectors_to_rows(t.y, model.p());
      },
      py::arg("model"), py::arg("inputs"), py::arg("initial_outputs"),
      "Outputs (T x p) for inputs (T x m); the first n rows are the initial outputs.");

  py::class_<EquivalenceCertificate>(mod, "EquivalenceCertificate")
      .def_readonly("equivalent", &EquivalenceCertificate::equivalent)
      .def_readonly("base_order", &EquivalenceCertificate::base_order)
      .def_readonly("high_order", &EquivalenceCertificate::high_order)
      .def_readonly("residual", &EquivalenceCertificate::residual)
      .def_readonly("absolute_residual", &EquivalenceCertificate::absolute_residual)
      .def_readonly("residual_matrix", &EquivalenceCertificate::residual_matrix)
      .def("__bool__", [](const EquivalenceCertificate& c) { return c.equivalent; });

  mod.def("is_equivalent", &is_equivalent, py::arg("a"), py::arg("b"),
          py::arg("tol") = kDefaultEquivalenceTol);
  mod.def("lift_by_factor", &lift_by_factor, py::arg("model"), py::arg("D"));
  mod.def("trivial_embed", &trivial_embed, py::arg("model"), py::arg("n_hat"));
  mod.def(
      "lift_matrix",
      [](const IOModel& base, int n_hat) { return build_lift_matrix(base, n_hat).M; },
      py::arg("base"), py::arg("n_hat"));
  mod.def("lift_true", &lift_true, py::arg("model"), py::arg("n_hat"));

  py::class_<ReducibilityReport>(mod, "ReducibilityReport")
      .def_readonly("final_model", &ReducibilityReport::final_model)
      .def_readonly("chain", &ReducibilityReport::chain)
      .def_readonly("witnesses", &ReducibilityReport::witnesses)
      .def_readonly("reduced", &ReducibilityReport::reduced)
      .def_readonly("proven_irreducible", &ReducibilityReport::proven_irreducible)
      .def_readonly("last_residual", &ReducibilityReport::last_residual)
      .def_readonly("note", &ReducibilityReport::note);

  mod.def(
      "reducibility_check",
      [](const IOModel& model, double tol, std::uint64_t seed, int starts) {
        ReductionOptions opts;
        opts.tol = tol;
        opts.seed = seed;
        opts.random_starts = starts;
        return reducibility_check(model, opts);
      },
      py::arg("model"), py::arg("tol") = kDefaultEquivalenceTol, py::arg("seed") = 0,
      py::arg("starts") = 32);
  mod.def("reduction_residual", &reduction_residual, py::arg("high"), py::arg("D"));

  py::class_<RlsState>(mod, "RlsState")
      .def_static("initial", &RlsState::initial, py::arg("theta0"), py::arg("P0"),
                  py::arg("track_information") = false)
      .def_readonly("theta", &RlsState::theta)
      .def_readonly("P", &RlsState::P)
      .def_readonly("k", &RlsState::k)
      .def("step",
           [](const RlsState& s, const Vector& phi, const Vector& y) { return rls_step(s, {phi, y}); },
           py::arg("phi"), py::arg("y"));

  mod.def("default_P0", &default_P0, py::arg("n"), py::arg("p"), py::arg("m"), py::arg("scale") = 1e3);
  mod.def(
      "regressors",
      [](const Matrix& u, const Matrix& y, int order, std::size_t input_start) {
        const auto samples = build_regressors(make_trajectory(u, y, input_start), order);
        Matrix phi(static_cast<Eigen::Index>(samples.size()), regressor_dim(order, static_cast<int>(y.cols()), static_cast<int>(u.cols())));
        Matrix out(static_cast<Eigen::Index>(samples.size()), y.cols());
        for (std::size_t i = 0; i < samples.size(); ++i) {
          phi.row(static_cast<Eigen::Index>(i)) = samples[i].phi.transpose();
          out.row(static_cast<Eigen::Index>(i)) = samples[i].y.transpose();
        }
        return py::make_tuple(phi, out);
      },
      py::arg("u"), py::arg("y"), py::arg("order"), py::arg("input_start") = 0,
      "Regressor rows (N x d) and matching outputs (N x p).");
  mod.def(
      "batch_solve",
      [](const Matrix& phi, const Matrix& y, const Matrix& theta0, const Matrix& P0) {
        require(phi.rows() == y.rows(), "phi and y must have the same number of rows");
        std::vector<RegressorSample> samples;
        for (Eigen::Index i = 0; i < phi.rows(); ++i) samples.push_back({phi.row(i).transpose(), y.row(i).transpose()});
        return batch_solve(samples, theta0, P0);
      },
      py::arg("phi"), py::arg("y"), py::arg("theta0"), py::arg("P0"));
  mod.def(
      "rls",
      [](const Matrix& phi, const Matrix& y, const Matrix& theta0, const Matrix& P0) {
        require(phi.rows() == y.rows(), "phi and y must have the same number of rows");
        RlsState st = RlsState::initial(theta0, P0);
        for (Eigen::Index i = 0; i < phi.rows(); ++i) st = rls_step(std::move(st), {phi.row(i).transpose(), y.row(i).transpose()});
        return st;
      },
      py::arg("phi"), py::arg("y"), py::arg("theta0"), py::arg("P0"));

  py::class_<ProjectedLimit>(mod, "ProjectedLimit")
      .def_readonly("theta_star", &ProjectedLimit::theta_star)
      .def_readonly("theta_true", &ProjectedLimit::theta_true)
      .def_readonly("H", &ProjectedLimit::H)
      .def_readonly("W", &ProjectedLimit::W)
      .def_readonly("M", &ProjectedLimit::M);
  mod.def("projected_limit", &projected_limit, py::arg("model"), py::arg("n_hat"), py::arg("theta0"),
          py::arg("P0"));
  mod.def("theta_equivalence_residual", &theta_equivalence_residual, py::arg("theta_hat"),
          py::arg("model"), py::arg("n_hat"));

  mod.def(
      "excitation_report",
      [](const Matrix& phi, double pe_slope_tol, std::optional<double> weak_pe_threshold) {
        ExcitationOptions opts;
        opts.pe_slope_tol = pe_slope_tol;
        opts.weak_pe_threshold = weak_pe_threshold;
        const ExcitationReport r = excitation_report(rows_to_vectors(phi), opts);
        py::dict d;
        d["min_eig_curve"] = r.min_eig_curve;
        d["avg_min_eig_curve"] = r.avg_min_eig_curve;
        d["gram_avg"] = r.gram_avg;
        d["gram_avg_min_eig"] = r.gram_avg_min_eig;
        d["threshold"] = r.threshold;
        d["stabilization"] = r.stabilization;
        d["weak_pe"] = r.weak_pe;
        d["pe"] = r.pe;
        return d;
      },
      py::arg("phi"), py::arg("pe_slope_tol") = 5e-2, py::arg("weak_pe_threshold") = py::none(),
      "Excitation diagnostics for regressor rows (N x d).");
  mod.def(
      "lift_identity_check",
      [](const Matrix& u, const Matrix& y, const IOModel& model, int n_hat) {
        return lift_identity_check(make_trajectory(u, y, 0), model, n_hat);
      },
      py::arg("u"), py::arg("y"), py::arg("model"), py::arg("n_hat"));

  mod.def(
      "run_tracked_identification",
      [](const IOModel& model, int n_hat, const Matrix& inputs, long horizon, const Matrix& theta0,
         const Matrix& P0, long stride) {
        TrackingOptions opts;
        opts.stride = stride;
        return trace_dict(run_tracked_identification(model, n_hat, rows_to_vectors(inputs), horizon,
                                                      theta0, P0, opts));
      },
      py::arg("model"), py::arg("n_hat"), py::arg("inputs"), py::arg("horizon"), py::arg("theta0"),
      py::arg("P0"), py::arg("stride") = 1);

  mod.def(
      "generate_input",
      [](const std::string& spec, std::size_t count, int m) {
        return vectors_to_rows(generate_input(parse_input_spec(spec), count, m), m);
      },
      py::arg("spec"), py::arg("count"), py::arg("m"),
      "Input rows from a spec such as 'white:seed=7' or 'sine-mix:freqs=0.1,0.2'.");

  mod.def(
      "run_experiment",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> output_dir) {
        ExperimentConfig cfg = load_config(config);
        if (output_dir) cfg.output_dir = *output_dir;
        RunManifest manifest;
        {
          py::gil_scoped_release release;
          manifest = run_experiment(cfg);
        }
        return manifest_to_json(manifest).dump();
      },
      py::arg("config"), py::arg("output_dir") = py::none(),
      "Runs an experiment config; returns the manifest as a JSON string.");
}
