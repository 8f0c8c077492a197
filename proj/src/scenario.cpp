#include "uavplan/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace uavplan {

using nlohmann::json;

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

Eigen::Vector2d parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where + ": expected a 2-element [x, y] array");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Eigen::Vector2d> parse_points(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of [x, y] pairs");
  std::vector<Eigen::Vector2d> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_point(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

UavEndpoints parse_endpoints(const json& j, const std::string& where) {
  UavEndpoints e;
  e.q_init = parse_point(j.at("q_i"), where + ".q_i");
  e.q_final = parse_point(j.at("q_f"), where + ".q_f");
  e.h_init = j.at("h_i").get<double>();
  e.h_final = j.at("h_f").get<double>();
  return e;
}

// Accepts either the dB/dBm convenience key or a linear key, never both.
double linear_field(const json& j, const std::string& db_key,
                    const std::string& linear_key, bool dbm) {
  const bool has_db = j.contains(db_key);
  const bool has_lin = j.contains(linear_key);
  if (has_db && has_lin)
    throw ConfigError("give either " + db_key + " or " + linear_key + ", not both");
  if (has_db) {
    const double v = j.at(db_key).get<double>();
    return dbm ? dbm_to_watt(v) : db_to_linear(v);
  }
  if (has_lin) return j.at(linear_key).get<double>();
  throw ConfigError("missing field: " + db_key + " (or " + linear_key + ")");
}

}  // namespace

void ScenarioConfig::validate() const {
  require(num_sns() >= 1, "at least one SN is required (K >= 1)");
  require(num_aps() >= 1, "at least one AP is required (L >= 1)");
  require(slot_count_N >= 1, "slot count N must be >= 1");
  require(period_T > 0.0, "period T must be positive");
  require(std::abs(slot_delta * slot_count_N - period_T) <=
              1e-9 * std::max(1.0, std::abs(period_T)),
          "slot duration * N must equal T");
  require(h_min > 0.0, "h_min must be strictly positive");
  require(h_max >= h_min, "h_max must be >= h_min");
  require(v_xy_max > 0.0, "v_xy must be strictly positive");
  require(v_z_max > 0.0, "v_z must be strictly positive");
  require(d_min > 0.0, "d_min must be strictly positive");
  require(p_max_uav > 0.0, "p_max_uav must be strictly positive");
  require(p_max_sn > 0.0, "p_max_sn must be strictly positive");
  require(beta0 > 0.0, "beta0 must be strictly positive");
  require(noise_power > 0.0, "noise power must be strictly positive");
  require(penalty_M > 0.0, "penalty_M must be strictly positive");
  require(weight_beta1 >= 0.0 && weight_beta2 >= 0.0,
          "objective weights must be nonnegative");
  require(rician_Ka >= 0.0 && rician_Ks >= 0.0 && rician_Ku >= 0.0,
          "Rician factors must be nonnegative");
  require(kappa_a > 0.0 && kappa_s > 0.0 && kappa_u > 0.0 && alpha_g2g > 0.0,
          "path-loss exponents must be positive");

  const auto check_uav = [&](const UavEndpoints& e, const std::string& name) {
    require(e.h_init >= h_min && e.h_init <= h_max,
            name + ": initial altitude outside [h_min, h_max]");
    require(e.h_final >= h_min && e.h_final <= h_max,
            name + ": final altitude outside [h_min, h_max]");
    const double reach_xy = slot_count_N * v_xy_max * slot_delta;
    const double reach_z = slot_count_N * v_z_max * slot_delta;
    require((e.q_final - e.q_init).norm() <= reach_xy + 1e-9,
            name + ": endpoints not reachable horizontally within N slots");
    require(std::abs(e.h_final - e.h_init) <= reach_z + 1e-9,
            name + ": endpoint altitudes not reachable within N slots");
  };
  check_uav(uav_bs, "uav_bs");
  check_uav(uav_ap, "uav_ap");
}

Schedule Schedule::zeros(int num_aps, int num_sns, int num_slots, ScheduleMode mode) {
  Schedule s;
  s.x.assign(num_aps, std::vector<double>(num_slots, 0.0));
  s.y.assign(num_sns, std::vector<double>(num_slots, 0.0));
  s.mode = mode;
  return s;
}

PowerAllocation PowerAllocation::zeros(int num_sns, int num_slots) {
  PowerAllocation p;
  p.p_u.assign(num_slots, 0.0);
  p.p_s.assign(num_sns, std::vector<double>(num_slots, 0.0));
  return p;
}

ScenarioConfig load_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }

  ScenarioConfig cfg;
  try {
    cfg.sn_positions = parse_points(root.at("sns"), "sns");
    cfg.ap_positions = parse_points(root.at("aps"), "aps");
    cfg.uav_bs = parse_endpoints(root.at("uav_bs"), "uav_bs");
    cfg.uav_ap = parse_endpoints(root.at("uav_ap"), "uav_ap");

    const json& time = root.at("time");
    cfg.period_T = time.at("T").get<double>();
    cfg.slot_count_N = time.at("N").get<int>();
    if (cfg.slot_count_N <= 0) throw ConfigError("time.N must be a positive integer");
    cfg.slot_delta = cfg.period_T / cfg.slot_count_N;

    const json& limits = root.at("limits");
    cfg.v_xy_max = limits.at("v_xy").get<double>();
    cfg.v_z_max = limits.at("v_z").get<double>();
    cfg.h_min = limits.at("h_min").get<double>();
    cfg.h_max = limits.at("h_max").get<double>();
    cfg.d_min = limits.at("d_min").get<double>();

    const json& power = root.at("power");
    cfg.p_max_uav = power.at("p_max_uav").get<double>();
    cfg.p_max_sn = power.at("p_max_sn").get<double>();

    const json& ch = root.at("channel");
    // beta0 is a dimensionless gain; its _db form is plain dB even though
    // some sources quote it as "dBm".
    cfg.beta0 = linear_field(ch, "beta0_db", "beta0", /*dbm=*/false);
    cfg.kappa_a = ch.value("kappa_a", 2.0);
    cfg.kappa_s = ch.value("kappa_s", 2.0);
    cfg.kappa_u = ch.value("kappa_u", 2.0);
    cfg.alpha_g2g = ch.at("alpha").get<double>();
    cfg.rician_Ka = linear_field(ch, "K_a_db", "K_a", false);
    cfg.rician_Ks = linear_field(ch, "K_s_db", "K_s", false);
    cfg.rician_Ku = linear_field(ch, "K_u_db", "K_u", false);
    cfg.noise_power = linear_field(ch, "noise_dbm", "noise_w", /*dbm=*/true);

    const json& obj = root.at("objective");
    cfg.weight_beta1 = obj.at("beta1").get<double>();
    cfg.weight_beta2 = obj.at("beta2").get<double>();
    cfg.penalty_M = obj.value("penalty_M", 1e5);
    cfg.bandwidth_B = obj.value("bandwidth_hz", 1e6);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario schema error: ") + e.what());
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

namespace {

void check_dimensions(const ScenarioConfig& cfg, const Solution& sol) {
  const int n = cfg.num_slots();
  const auto bad = [&](const std::string& what) {
    throw DimensionError("solution/scenario dimension mismatch: " + what);
  };
  if (static_cast<int>(sol.trajectory.q_u.size()) != n + 1 ||
      static_cast<int>(sol.trajectory.q_b.size()) != n + 1 ||
      static_cast<int>(sol.trajectory.h_u.size()) != n + 1 ||
      static_cast<int>(sol.trajectory.h_b.size()) != n + 1)
    bad("trajectory arrays must have N+1 entries");
  if (static_cast<int>(sol.schedule.x.size()) != cfg.num_aps() ||
      static_cast<int>(sol.schedule.y.size()) != cfg.num_sns())
    bad("schedule row counts");
  for (const auto& row : sol.schedule.x)
    if (static_cast<int>(row.size()) != n) bad("schedule x slot count");
  for (const auto& row : sol.schedule.y)
    if (static_cast<int>(row.size()) != n) bad("schedule y slot count");
  if (static_cast<int>(sol.power.p_u.size()) != n) bad("p_u slot count");
  if (static_cast<int>(sol.power.p_s.size()) != cfg.num_sns()) bad("p_s row count");
  for (const auto& row : sol.power.p_s)
    if (static_cast<int>(row.size()) != n) bad("p_s slot count");
}

}  // namespace

std::vector<ConstraintViolation> validate_trajectory(const ScenarioConfig& cfg,
                                                     const Trajectory& traj,
                                                     double tol) {
  std::vector<ConstraintViolation> out;
  const int n_slots = cfg.num_slots();
  const auto add = [&](const std::string& name, int slot, double magnitude) {
    if (magnitude > tol) out.push_back({name, slot, magnitude});
  };

  struct Leg {
    const char* tag;
    const std::vector<Eigen::Vector2d>& q;
    const std::vector<double>& h;
    const UavEndpoints& ends;
  };
  const Leg legs[2] = {{"bs", traj.q_b, traj.h_b, cfg.uav_bs},
                       {"ap", traj.q_u, traj.h_u, cfg.uav_ap}};

  for (const Leg& leg : legs) {
    const std::string tag = leg.tag;
    add("boundary_q_init_" + tag, 0, (leg.q.front() - leg.ends.q_init).norm());
    add("boundary_q_final_" + tag, n_slots, (leg.q.back() - leg.ends.q_final).norm());
    add("boundary_h_init_" + tag, 0, std::abs(leg.h.front() - leg.ends.h_init));
    add("boundary_h_final_" + tag, n_slots, std::abs(leg.h.back() - leg.ends.h_final));
    for (int n = 1; n <= n_slots; ++n) {
      add("speed_xy_" + tag, n,
          (leg.q[n] - leg.q[n - 1]).norm() - cfg.v_xy_max * cfg.slot_delta);
      add("speed_z_" + tag, n,
          std::abs(leg.h[n] - leg.h[n - 1]) - cfg.v_z_max * cfg.slot_delta);
    }
    for (int n = 0; n <= n_slots; ++n) {
      add("altitude_min_" + tag, n, cfg.h_min - leg.h[n]);
      add("altitude_max_" + tag, n, leg.h[n] - cfg.h_max);
    }
  }
  for (int n = 0; n <= n_slots; ++n)
    add("collision", n, cfg.d_min * cfg.d_min - traj.separation_sq(n));
  return out;
}

std::vector<ConstraintViolation> validate_solution(const ScenarioConfig& cfg,
                                                   const Solution& sol,
                                                   double tol) {
  check_dimensions(cfg, sol);
  std::vector<ConstraintViolation> out = validate_trajectory(cfg, sol.trajectory, tol);
  const int n_slots = cfg.num_slots();
  const auto add = [&](const std::string& name, int slot, double magnitude) {
    if (magnitude > tol) out.push_back({name, slot, magnitude});
  };

  for (int n = 1; n <= n_slots; ++n) {
    double sum_x = 0.0, sum_y = 0.0;
    for (int l = 0; l < cfg.num_aps(); ++l) {
      const double v = sol.schedule.x[l][n - 1];
      add("schedule_x_box", n, std::max(-v, v - 1.0));
      if (sol.schedule.mode == ScheduleMode::binary)
        add("schedule_x_binary", n, std::min(std::abs(v), std::abs(v - 1.0)));
      sum_x += v;
    }
    for (int k = 0; k < cfg.num_sns(); ++k) {
      const double v = sol.schedule.y[k][n - 1];
      add("schedule_y_box", n, std::max(-v, v - 1.0));
      if (sol.schedule.mode == ScheduleMode::binary)
        add("schedule_y_binary", n, std::min(std::abs(v), std::abs(v - 1.0)));
      sum_y += v;
    }
    add("schedule_x_sum", n, sum_x - 1.0);
    add("schedule_y_sum", n, sum_y - 1.0);

    const double pu = sol.power.p_u[n - 1];
    add("power_uav_box", n, std::max(-pu, pu - cfg.p_max_uav));
    for (int k = 0; k < cfg.num_sns(); ++k) {
      const double ps = sol.power.p_s[k][n - 1];
      add("power_sn_box", n, std::max(-ps, ps - cfg.p_max_sn));
    }
  }
  return out;
}

}  // namespace uavplan
