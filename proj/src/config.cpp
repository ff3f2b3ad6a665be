// Copyright 2026 The RALMPC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>

#include "json.hpp"
#include "ralmpc/harness.hpp"

namespace ralmpc {

using nlohmann::json;

namespace {

Matrix to_matrix(const json& j, const char* what) {
  require(j.is_array() && !j.empty() && j[0].is_array(), ErrorCode::kMalformed,
          std::string("config: ") + what + " must be a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    require(j[i].size() == static_cast<std::size_t>(cols), ErrorCode::kMalformed,
            std::string("config: ragged matrix ") + what);
    for (Index k = 0; k < cols; ++k) M(i, k) = j[i][k].get<double>();
  }
  return M;
}

Vector to_vector(const json& j, const char* what) {
  require(j.is_array(), ErrorCode::kMalformed, std::string("config: ") + what + " must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

json from_matrix(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(row);
  }
  return rows;
}

json from_vector(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

DisturbanceMode parse_mode(const std::string& s) {
  if (s == "constant") return DisturbanceMode::kConstant;
  if (s == "uniform") return DisturbanceMode::kUniform;
  if (s == "extremal") return DisturbanceMode::kExtremal;
  throw Error(ErrorCode::kMalformed, "config: unknown disturbance mode '" + s + "'");
}

const char* mode_name(DisturbanceMode m) {
  switch (m) {
    case DisturbanceMode::kConstant: return "constant";
    case DisturbanceMode::kUniform: return "uniform";
    case DisturbanceMode::kExtremal: return "extremal";
  }
  return "constant";
}

void read_range(const json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  const Vector v = to_vector(j.at(key), key);
  require(v.size() == 2 && v(0) <= v(1), ErrorCode::kMalformed,
          std::string("config: ") + key + " must be [lo, hi]");
  lo = v(0);
  hi = v(1);
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::kIo, "load_config: cannot open " + path);
  json j;
  try {
    j = json::parse(is, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, "load_config: " + path + ": " + e.what());
  }

  ExperimentConfig cfg = msd_config();
  try {
    if (j.contains("msd")) {
      const json& m = j.at("msd");
      cfg.msd.Ts = m.value("Ts", cfg.msd.Ts);
      cfg.msd.mass = m.value("mass", cfg.msd.mass);
      read_range(m, "damping", cfg.msd.c_lo, cfg.msd.c_hi);
      read_range(m, "stiffness", cfg.msd.k_lo, cfg.msd.k_hi);
      read_range(m, "position", cfg.msd.x1_lo, cfg.msd.x1_hi);
      cfg.msd.d_max = m.value("force_disturbance_max", cfg.msd.d_max);
      cfg.msd.x2_max = m.value("velocity_max", cfg.msd.x2_max);
      cfg.msd.u_max = m.value("input_max", cfg.msd.u_max);
    }
    if (j.contains("system")) {
      const json& s = j.at("system");
      if (s.is_string()) {
        cfg.system = s.get<std::string>();
        require(cfg.system == "msd", ErrorCode::kMalformed,
                "config: unknown system preset '" + cfg.system + "'");
      } else {
        cfg.system = "custom";
        UncertainLinearSystem& sys = cfg.custom;
        sys.A.clear();
        sys.B.clear();
        for (const json& a : s.at("A")) sys.A.push_back(to_matrix(a, "A"));
        for (const json& b : s.at("B")) sys.B.push_back(to_matrix(b, "B"));
        sys.D = HPolytope(to_matrix(s.at("D_H"), "D_H"), to_vector(s.at("D_h"), "D_h"));
        sys.F = to_matrix(s.at("F"), "F");
        sys.G = to_matrix(s.at("G"), "G");
        sys.theta0.center = to_vector(s.at("theta0_center"), "theta0_center");
        sys.theta0.radius = s.at("theta0_radius").get<double>();
      }
    }
    if (j.contains("Q")) cfg.Q = to_matrix(j.at("Q"), "Q");
    if (j.contains("R")) cfg.R = to_matrix(j.at("R"), "R");
    if (j.contains("K")) cfg.K = to_matrix(j.at("K"), "K");
    if (j.contains("P_lyap")) cfg.P_lyap = to_matrix(j.at("P_lyap"), "P_lyap");
    if (j.contains("x_s")) cfg.x_s = to_vector(j.at("x_s"), "x_s");
    cfg.offline.lambda = j.value("contraction_lambda", cfg.offline.lambda);
    cfg.offline.N_bar_max = j.value("initial_horizon_max", cfg.offline.N_bar_max);
    cfg.offline.padding_margin = j.value("padding_margin", cfg.offline.padding_margin);
    cfg.offline.symmetric = j.value("symmetric_tube_shape", cfg.offline.symmetric);
    cfg.offline.max_iter = j.value("contractive_max_sweeps", cfg.offline.max_iter);
    cfg.N = j.value("N", cfg.N);
    cfg.H = j.value("H", cfg.H);
    cfg.T_max = j.value("T_max", cfg.T_max);
    cfg.M = j.value("M", cfg.M);
    cfg.early_stop = j.value("early_stop", cfg.early_stop);
    cfg.stationary_tol = j.value("stationary_tol", cfg.stationary_tol);
    cfg.frozen = j.value("frozen", cfg.frozen);
    cfg.frozen_N = j.value("frozen_N", cfg.frozen_N);
    if (j.contains("compare_horizons"))
      cfg.compare_horizons = j.at("compare_horizons").get<std::vector<int>>();
    if (j.contains("theta_star")) cfg.theta_star = to_vector(j.at("theta_star"), "theta_star");
    if (j.contains("disturbance")) {
      const json& d = j.at("disturbance");
      cfg.disturbance.mode = parse_mode(d.value("mode", std::string("constant")));
      cfg.disturbance.seed = d.value("seed", cfg.disturbance.seed);
      if (d.contains("value")) cfg.disturbance.value = to_vector(d.at("value"), "disturbance.value");
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      cfg.solver.tol = s.value("tol", cfg.solver.tol);
      cfg.solver.max_iter = s.value("max_iter", cfg.solver.max_iter);
      cfg.solver.acceptable_tol = s.value("acceptable_tol", cfg.solver.acceptable_tol);
      cfg.solver.stall_iterations = s.value("stall_iterations", cfg.solver.stall_iterations);
      cfg.solver.static_reg = s.value("static_reg", cfg.solver.static_reg);
      cfg.solver.refinement_steps = s.value("refinement_steps", cfg.solver.refinement_steps);
    }
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, "load_config: " + path + ": " + e.what());
  }
  return cfg;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  json j;
  if (cfg.system == "msd") {
    j["system"] = "msd";
    j["msd"] = {{"Ts", cfg.msd.Ts},
                {"mass", cfg.msd.mass},
                {"damping", {cfg.msd.c_lo, cfg.msd.c_hi}},
                {"stiffness", {cfg.msd.k_lo, cfg.msd.k_hi}},
                {"position", {cfg.msd.x1_lo, cfg.msd.x1_hi}},
                {"force_disturbance_max", cfg.msd.d_max},
                {"velocity_max", cfg.msd.x2_max},
                {"input_max", cfg.msd.u_max}};
  } else {
    const UncertainLinearSystem& s = cfg.custom;
    json A = json::array(), B = json::array();
    for (const Matrix& M : s.A) A.push_back(from_matrix(M));
    for (const Matrix& M : s.B) B.push_back(from_matrix(M));
    j["system"] = {{"A", A},
                   {"B", B},
                   {"D_H", from_matrix(s.D.H)},
                   {"D_h", from_vector(s.D.h)},
                   {"F", from_matrix(s.F)},
                   {"G", from_matrix(s.G)},
                   {"theta0_center", from_vector(s.theta0.center)},
                   {"theta0_radius", s.theta0.radius}};
  }
  j["Q"] = from_matrix(cfg.Q);
  j["R"] = from_matrix(cfg.R);
  j["K"] = from_matrix(cfg.K);
  j["P_lyap"] = from_matrix(cfg.P_lyap);
  j["x_s"] = from_vector(cfg.x_s);
  j["contraction_lambda"] = cfg.offline.lambda;
  j["initial_horizon_max"] = cfg.offline.N_bar_max;
  j["padding_margin"] = cfg.offline.padding_margin;
  j["symmetric_tube_shape"] = cfg.offline.symmetric;
  j["contractive_max_sweeps"] = cfg.offline.max_iter;
  j["N"] = cfg.N;
  j["H"] = cfg.H;
  j["T_max"] = cfg.T_max;
  j["M"] = cfg.M;
  j["early_stop"] = cfg.early_stop;
  j["stationary_tol"] = cfg.stationary_tol;
  j["frozen"] = cfg.frozen;
  j["frozen_N"] = cfg.frozen_N;
  j["compare_horizons"] = cfg.compare_horizons;
  j["theta_star"] = from_vector(cfg.theta_star);
  j["disturbance"] = {{"mode", mode_name(cfg.disturbance.mode)},
                      {"seed", cfg.disturbance.seed},
                      {"value", from_vector(cfg.disturbance.value)}};
  j["solver"] = {{"tol", cfg.solver.tol},
                 {"acceptable_tol", cfg.solver.acceptable_tol},
                 {"stall_iterations", cfg.solver.stall_iterations},
                 {"max_iter", cfg.solver.max_iter},
                 {"static_reg", cfg.solver.static_reg},
                 {"refinement_steps", cfg.solver.refinement_steps}};
  j["out_dir"] = cfg.out_dir;

  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::kIo, "save_config: cannot open " + path);
  os << j.dump(2) << '\n';
}

}  // namespace ralmpc
