// Python bindings for the planner: the scenario data model, channel and
// rate evaluation, both solvers and the benchmark schemes.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uavplan/channel.hpp"
#include "uavplan/poa.hpp"
#include "uavplan/report.hpp"
#include "uavplan/sca.hpp"

namespace py = pybind11;
using namespace uavplan;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-UAV uplink/downlink trajectory and communication planner";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<KernelError>(m, "KernelError", PyExc_RuntimeError);
  py::register_exception<PoaError>(m, "PoaError", PyExc_RuntimeError);
  py::register_exception<ScaError>(m, "ScaError", PyExc_RuntimeError);

  py::class_<UavEndpoints>(m, "UavEndpoints")
      .def(py::init<>())
      .def_readwrite("q_init", &UavEndpoints::q_init)
      .def_readwrite("q_final", &UavEndpoints::q_final)
      .def_readwrite("h_init", &UavEndpoints::h_init)
      .def_readwrite("h_final", &UavEndpoints::h_final);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("sn_positions", &ScenarioConfig::sn_positions)
      .def_readwrite("ap_positions", &ScenarioConfig::ap_positions)
      .def_readwrite("uav_bs", &ScenarioConfig::uav_bs)
      .def_readwrite("uav_ap", &ScenarioConfig::uav_ap)
      .def_readwrite("period_T", &ScenarioConfig::period_T)
      .def_readwrite("slot_count_N", &ScenarioConfig::slot_count_N)
      .def_readwrite("slot_delta", &ScenarioConfig::slot_delta)
      .def_readwrite("v_xy_max", &ScenarioConfig::v_xy_max)
      .def_readwrite("v_z_max", &ScenarioConfig::v_z_max)
      .def_readwrite("h_min", &ScenarioConfig::h_min)
      .def_readwrite("h_max", &ScenarioConfig::h_max)
      .def_readwrite("d_min", &ScenarioConfig::d_min)
      .def_readwrite("p_max_uav", &ScenarioConfig::p_max_uav)
      .def_readwrite("p_max_sn", &ScenarioConfig::p_max_sn)
      .def_readwrite("beta0", &ScenarioConfig::beta0)
      .def_readwrite("kappa_a", &ScenarioConfig::kappa_a)
      .def_readwrite("kappa_s", &ScenarioConfig::kappa_s)
      .def_readwrite("kappa_u", &ScenarioConfig::kappa_u)
      .def_readwrite("alpha_g2g", &ScenarioConfig::alpha_g2g)
      .def_readwrite("rician_Ka", &ScenarioConfig::rician_Ka)
      .def_readwrite("rician_Ks", &ScenarioConfig::rician_Ks)
      .def_readwrite("rician_Ku", &ScenarioConfig::rician_Ku)
      .def_readwrite("noise_power", &ScenarioConfig::noise_power)
      .def_readwrite("weight_beta1", &ScenarioConfig::weight_beta1)
      .def_readwrite("weight_beta2", &ScenarioConfig::weight_beta2)
      .def_readwrite("penalty_M", &ScenarioConfig::penalty_M)
      .def_readwrite("bandwidth_B", &ScenarioConfig::bandwidth_B)
      .def_property_readonly("num_sns", &ScenarioConfig::num_sns)
      .def_property_readonly("num_aps", &ScenarioConfig::num_aps)
      .def("validate", &ScenarioConfig::validate);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init<>())
      .def_readwrite("q_u", &Trajectory::q_u)
      .def_readwrite("q_b", &Trajectory::q_b)
      .def_readwrite("h_u", &Trajectory::h_u)
      .def_readwrite("h_b", &Trajectory::h_b)
      .def("separation_sq", &Trajectory::separation_sq);

  py::enum_<ScheduleMode>(m, "ScheduleMode")
      .value("relaxed", ScheduleMode::relaxed)
      .value("binary", ScheduleMode::binary);

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<>())
      .def_static("zeros", &Schedule::zeros, py::arg("num_aps"),
                  py::arg("num_sns"), py::arg("num_slots"),
                  py::arg("mode") = ScheduleMode::relaxed)
      .def_readwrite("x", &Schedule::x)
      .def_readwrite("y", &Schedule::y)
      .def_readwrite("mode", &Schedule::mode);

  py::class_<PowerAllocation>(m, "PowerAllocation")
      .def(py::init<>())
      .def_static("zeros", &PowerAllocation::zeros, py::arg("num_sns"),
                  py::arg("num_slots"))
      .def_readwrite("p_u", &PowerAllocation::p_u)
      .def_readwrite("p_s", &PowerAllocation::p_s);

  py::class_<PenalizedPower>(m, "PenalizedPower")
      .def(py::init<>())
      .def_static("zeros", &PenalizedPower::zeros, py::arg("num_sns"),
                  py::arg("num_aps"), py::arg("num_slots"))
      .def_readwrite("p_s", &PenalizedPower::p_s)
      .def_readwrite("p_u", &PenalizedPower::p_u);

  py::class_<RateBreakdown>(m, "RateBreakdown")
      .def_readonly("r_s", &RateBreakdown::r_s)
      .def_readonly("r_u", &RateBreakdown::r_u)
      .def_readonly("uplink_weighted", &RateBreakdown::uplink_weighted)
      .def_readonly("downlink_weighted", &RateBreakdown::downlink_weighted)
      .def_readonly("objective", &RateBreakdown::objective);

  py::class_<SolverDiagnostics>(m, "SolverDiagnostics")
      .def_readonly("solver_id", &SolverDiagnostics::solver_id)
      .def_readonly("iterations", &SolverDiagnostics::iterations)
      .def_readonly("converged", &SolverDiagnostics::converged)
      .def_readonly("certified", &SolverDiagnostics::certified)
      .def_readonly("gap", &SolverDiagnostics::gap)
      .def_readonly("relaxed_objective", &SolverDiagnostics::relaxed_objective);

  py::class_<Solution>(m, "Solution")
      .def(py::init<>())
      .def_readwrite("trajectory", &Solution::trajectory)
      .def_readwrite("schedule", &Solution::schedule)
      .def_readwrite("power", &Solution::power)
      .def_readwrite("objective_value", &Solution::objective_value)
      .def_readonly("rates", &Solution::rates)
      .def_readonly("diagnostics", &Solution::diagnostics);

  py::class_<ConstraintViolation>(m, "ConstraintViolation")
      .def_readonly("constraint", &ConstraintViolation::constraint)
      .def_readonly("slot", &ConstraintViolation::slot)
      .def_readonly("magnitude", &ConstraintViolation::magnitude)
      .def("__repr__", [](const ConstraintViolation& v) {
        return "<violation " + v.constraint + " slot " + std::to_string(v.slot) +
               " by " + std::to_string(v.magnitude) + ">";
      });

  py::class_<ExpectedGains>(m, "ExpectedGains")
      .def_readonly("h", &ExpectedGains::h)
      .def_readonly("g", &ExpectedGains::g)
      .def_readonly("f", &ExpectedGains::f)
      .def_readonly("h_g2g", &ExpectedGains::h_g2g);

  py::class_<SandwichReport>(m, "SandwichReport")
      .def_readonly("lower", &SandwichReport::lower)
      .def_readonly("approx", &SandwichReport::approx)
      .def_readonly("upper", &SandwichReport::upper)
      .def_readonly("empirical", &SandwichReport::empirical)
      .def_readonly("empirical_stderr", &SandwichReport::empirical_stderr);

  m.def("load_scenario", &load_scenario, py::arg("text"),
        "Parse and validate a scenario from JSON text");
  m.def("load_scenario_file", &load_scenario_file, py::arg("path"));
  m.def("validate_solution", &validate_solution, py::arg("cfg"), py::arg("sol"),
        py::arg("tol") = 1e-6);
  m.def("validate_trajectory", &validate_trajectory, py::arg("cfg"),
        py::arg("traj"), py::arg("tol") = 1e-6);

  m.def("expected_gains", &expected_gains, py::arg("cfg"), py::arg("traj"));
  m.def("sample_rician_power", &sample_rician_power, py::arg("k_factor"),
        py::arg("seed"), py::arg("count"));
  m.def(
      "theorem1_sandwich",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return theorem1_sandwich(std::span(x), std::span(y));
      },
      py::arg("x"), py::arg("y"));

  m.def("uplink_rate", &uplink_rate, py::arg("cfg"), py::arg("gains"),
        py::arg("power"), py::arg("k"), py::arg("n"));
  m.def("downlink_rate", &downlink_rate, py::arg("cfg"), py::arg("gains"),
        py::arg("power"), py::arg("sched"), py::arg("l"), py::arg("n"));
  m.def("evaluate_objective", &evaluate_objective, py::arg("cfg"), py::arg("traj"),
        py::arg("sched"), py::arg("power"));
  m.def("evaluate_penalized_objective", &evaluate_penalized_objective,
        py::arg("cfg"), py::arg("gains"), py::arg("tilde"));

  py::class_<PoaOptions>(m, "PoaOptions")
      .def(py::init<>())
      .def_readwrite("eps", &PoaOptions::eps)
      .def_readwrite("bisect_eps", &PoaOptions::bisect_eps)
      .def_readwrite("max_iters", &PoaOptions::max_iters)
      .def_readwrite("dim_guard", &PoaOptions::dim_guard)
      .def_readwrite("prune_dominated", &PoaOptions::prune_dominated)
      .def_readwrite("prune_by_bound", &PoaOptions::prune_by_bound)
      .def_readwrite("decompose_slots", &PoaOptions::decompose_slots)
      .def_readwrite("activity_threshold_scale",
                     &PoaOptions::activity_threshold_scale);

  m.def("initial_vertex", &initial_vertex, py::arg("cfg"), py::arg("gains"));
  m.def(
      "project_to_boundary",
      [](const ScenarioConfig& cfg, const ExpectedGains& gains,
         const SinrVertex& v, double eps) {
        const ProjectionResult r = project_to_boundary(cfg, gains, v, eps);
        return py::make_tuple(r.lambda, r.point, r.power);
      },
      py::arg("cfg"), py::arg("gains"), py::arg("vertex"), py::arg("eps") = 1e-2);
  m.def("recover_schedule", &recover_schedule, py::arg("cfg"), py::arg("tilde"),
        py::arg("threshold_scale") = 1e-6);
  m.def("poa_solve", &poa_solve, py::arg("cfg"), py::arg("traj"),
        py::arg("options") = PoaOptions{});

  py::class_<BcdOptions>(m, "BcdOptions")
      .def(py::init<>())
      .def_readwrite("eps", &BcdOptions::eps)
      .def_readwrite("max_outer", &BcdOptions::max_outer)
      .def_readwrite("inner_iters", &BcdOptions::inner_iters)
      .def_readwrite("solver_tol", &BcdOptions::solver_tol);

  py::class_<InitialPlan>(m, "InitialPlan")
      .def_readonly("trajectory", &InitialPlan::trajectory)
      .def_readonly("schedule", &InitialPlan::schedule)
      .def_readonly("power", &InitialPlan::power);

  m.def("init_circular", &init_circular, py::arg("cfg"));
  m.def("straight_line_trajectory", &straight_line_trajectory, py::arg("cfg"));
  m.def("round_schedule", &round_schedule, py::arg("relaxed"));
  m.def("bcd_solve", &bcd_solve, py::arg("cfg"), py::arg("options") = BcdOptions{});
  m.def("solve_comm_design", &solve_comm_design, py::arg("cfg"), py::arg("traj"),
        py::arg("options") = BcdOptions{});
  m.def(
      "run_benchmark_scheme",
      [](const ScenarioConfig& cfg, const std::string& scheme,
         const BcdOptions& opts) {
        return run_benchmark_scheme(cfg, parse_scheme(scheme), opts);
      },
      py::arg("cfg"), py::arg("scheme"), py::arg("options") = BcdOptions{});
  m.def("scheme_names", [] {
    std::vector<std::string> names;
    for (Scheme s : all_schemes()) names.push_back(scheme_name(s));
    return names;
  });

  m.def(
      "solution_to_json",
      [](const Solution& sol) { return solution_to_json(sol).dump(2); },
      py::arg("sol"));
  m.def(
      "solution_from_json",
      [](const std::string& text) {
        return solution_from_json(nlohmann::json::parse(text));
      },
      py::arg("text"));
  m.def("scenario_digest", &scenario_digest, py::arg("cfg"));
  m.def("slot_table_csv", &slot_table_csv, py::arg("cfg"), py::arg("sol"));
}
