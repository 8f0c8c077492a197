#include "uavplan/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace uavplan {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json points_to_json(const std::vector<Eigen::Vector2d>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x(), p.y()});
  return arr;
}

std::vector<Eigen::Vector2d> points_from_json(const json& arr) {
  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : arr) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return pts;
}

}  // namespace

json config_to_json(const ScenarioConfig& cfg) {
  return json{
      {"sns", points_to_json(cfg.sn_positions)},
      {"aps", points_to_json(cfg.ap_positions)},
      {"uav_bs",
       {{"q_i", {cfg.uav_bs.q_init.x(), cfg.uav_bs.q_init.y()}},
        {"q_f", {cfg.uav_bs.q_final.x(), cfg.uav_bs.q_final.y()}},
        {"h_i", cfg.uav_bs.h_init},
        {"h_f", cfg.uav_bs.h_final}}},
      {"uav_ap",
       {{"q_i", {cfg.uav_ap.q_init.x(), cfg.uav_ap.q_init.y()}},
        {"q_f", {cfg.uav_ap.q_final.x(), cfg.uav_ap.q_final.y()}},
        {"h_i", cfg.uav_ap.h_init},
        {"h_f", cfg.uav_ap.h_final}}},
      {"time", {{"T", cfg.period_T}, {"N", cfg.slot_count_N}}},
      {"limits",
       {{"v_xy", cfg.v_xy_max},
        {"v_z", cfg.v_z_max},
        {"h_min", cfg.h_min},
        {"h_max", cfg.h_max},
        {"d_min", cfg.d_min}}},
      {"power", {{"p_max_uav", cfg.p_max_uav}, {"p_max_sn", cfg.p_max_sn}}},
      {"channel",
       {{"beta0", cfg.beta0},
        {"kappa_a", cfg.kappa_a},
        {"kappa_s", cfg.kappa_s},
        {"kappa_u", cfg.kappa_u},
        {"alpha", cfg.alpha_g2g},
        {"K_a", cfg.rician_Ka},
        {"K_s", cfg.rician_Ks},
        {"K_u", cfg.rician_Ku},
        {"noise_w", cfg.noise_power}}},
      {"objective",
       {{"beta1", cfg.weight_beta1},
        {"beta2", cfg.weight_beta2},
        {"penalty_M", cfg.penalty_M},
        {"bandwidth_hz", cfg.bandwidth_B}}},
  };
}

std::string scenario_digest(const ScenarioConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
  return buf;
}

json solution_to_json(const Solution& sol) {
  json traj{{"q_b", json::array()},
            {"h_b", sol.trajectory.h_b},
            {"q_u", json::array()},
            {"h_u", sol.trajectory.h_u}};
  for (const auto& p : sol.trajectory.q_b) traj["q_b"].push_back({p.x(), p.y()});
  for (const auto& p : sol.trajectory.q_u) traj["q_u"].push_back({p.x(), p.y()});

  return json{
      {"trajectory", std::move(traj)},
      {"schedule",
       {{"x", sol.schedule.x},
        {"y", sol.schedule.y},
        {"mode", sol.schedule.mode == ScheduleMode::binary ? "binary" : "relaxed"}}},
      {"power", {{"p_u", sol.power.p_u}, {"p_s", sol.power.p_s}}},
      {"objective", sol.objective_value},
      {"diagnostics",
       {{"solver", sol.diagnostics.solver_id},
        {"iterations", sol.diagnostics.iterations},
        {"converged", sol.diagnostics.converged},
        {"certified", sol.diagnostics.certified},
        {"gap", sol.diagnostics.gap},
        {"relaxed_objective", sol.diagnostics.relaxed_objective}}},
  };
}

Solution solution_from_json(const json& j) {
  Solution sol;
  const json& traj = j.at("trajectory");
  sol.trajectory.q_b = points_from_json(traj.at("q_b"));
  sol.trajectory.q_u = points_from_json(traj.at("q_u"));
  sol.trajectory.h_b = traj.at("h_b").get<std::vector<double>>();
  sol.trajectory.h_u = traj.at("h_u").get<std::vector<double>>();

  const json& sched = j.at("schedule");
  sol.schedule.x = sched.at("x").get<std::vector<std::vector<double>>>();
  sol.schedule.y = sched.at("y").get<std::vector<std::vector<double>>>();
  sol.schedule.mode = sched.at("mode").get<std::string>() == "binary"
                          ? ScheduleMode::binary
                          : ScheduleMode::relaxed;

  const json& power = j.at("power");
  sol.power.p_u = power.at("p_u").get<std::vector<double>>();
  sol.power.p_s = power.at("p_s").get<std::vector<std::vector<double>>>();

  sol.objective_value = j.at("objective").get<double>();
  if (j.contains("diagnostics")) {
    const json& d = j.at("diagnostics");
    sol.diagnostics.solver_id = d.value("solver", "");
    sol.diagnostics.iterations = d.value("iterations", 0);
    sol.diagnostics.converged = d.value("converged", true);
    sol.diagnostics.certified = d.value("certified", false);
    sol.diagnostics.gap = d.value("gap", 0.0);
    sol.diagnostics.relaxed_objective = d.value("relaxed_objective", 0.0);
  }
  return sol;
}

Solution load_solution_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open solution file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("solution parse error: ") + e.what());
  }
  return solution_from_json(j);
}

std::string slot_table_csv(const ScenarioConfig& cfg, const Solution& sol) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  std::ostringstream out;

  out << "n,t,q_bx,q_by,H_b,q_ux,q_uy,H_u";
  for (int l = 1; l <= L; ++l) out << ",x_" << l;
  for (int k = 1; k <= K; ++k) out << ",y_" << k;
  out << ",p_u";
  for (int k = 1; k <= K; ++k) out << ",p_s" << k;
  out << ",r_u_total,r_s_total\n";

  for (int n = 1; n <= cfg.num_slots(); ++n) {
    const int i = n - 1;
    out << n << ',' << fmt_double(n * cfg.slot_delta);
    out << ',' << fmt_double(sol.trajectory.q_b[n].x());
    out << ',' << fmt_double(sol.trajectory.q_b[n].y());
    out << ',' << fmt_double(sol.trajectory.h_b[n]);
    out << ',' << fmt_double(sol.trajectory.q_u[n].x());
    out << ',' << fmt_double(sol.trajectory.q_u[n].y());
    out << ',' << fmt_double(sol.trajectory.h_u[n]);
    for (int l = 0; l < L; ++l) out << ',' << fmt_double(sol.schedule.x[l][i]);
    for (int k = 0; k < K; ++k) out << ',' << fmt_double(sol.schedule.y[k][i]);
    out << ',' << fmt_double(sol.power.p_u[i]);
    for (int k = 0; k < K; ++k) out << ',' << fmt_double(sol.power.p_s[k][i]);

    double r_u = 0.0, r_s = 0.0;
    if (!sol.rates.r_u.empty()) {
      for (int l = 0; l < L; ++l) r_u += sol.schedule.x[l][i] * sol.rates.r_u[l][i];
      for (int k = 0; k < K; ++k) r_s += sol.schedule.y[k][i] * sol.rates.r_s[k][i];
    }
    out << ',' << fmt_double(r_u) << ',' << fmt_double(r_s) << '\n';
  }
  return out.str();
}

std::string poa_trace_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream out;
  out << "slot,iteration,vertices,upper_bound,lower_bound,lambda\n";
  for (const TraceRow& r : rows)
    out << r.slot << ',' << r.iteration << ',' << r.vertex_count << ','
        << fmt_double(r.upper_bound) << ',' << fmt_double(r.lower_bound) << ','
        << fmt_double(r.lambda) << '\n';
  return out.str();
}

std::string bcd_trace_csv(const std::vector<BcdTraceRow>& rows) {
  std::ostringstream out;
  out << "iteration,objective,delta_schedule,delta_trajectory,delta_power,"
         "max_residual\n";
  for (const BcdTraceRow& r : rows)
    out << r.iteration << ',' << fmt_double(r.objective) << ','
        << fmt_double(r.delta_schedule) << ',' << fmt_double(r.delta_trajectory)
        << ',' << fmt_double(r.delta_power) << ',' << fmt_double(r.max_residual)
        << '\n';
  return out.str();
}

json make_run_report(const ScenarioConfig& cfg, const Solution& sol,
                     const json& options, std::uint64_t seed) {
  // Totals in megabits follow from the dimensionless objective scaled by
  // bandwidth and slot length.
  const double megabits = sol.objective_value * cfg.bandwidth_B * cfg.slot_delta / 1e6;
  return json{
      {"scenario_digest", scenario_digest(cfg)},
      {"solver", sol.diagnostics.solver_id},
      {"options", options},
      {"seed", seed},
      {"objective_bits_per_hz", sol.objective_value},
      {"total_megabits", megabits},
      {"uplink_weighted", sol.rates.uplink_weighted},
      {"downlink_weighted", sol.rates.downlink_weighted},
      {"relaxed_objective", sol.diagnostics.relaxed_objective},
      {"iterations", sol.diagnostics.iterations},
      {"converged", sol.diagnostics.converged},
      {"certified", sol.diagnostics.certified},
      {"gap", sol.diagnostics.gap},
  };
}

}  // namespace uavplan
