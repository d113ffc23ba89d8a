#pragma once

#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "czsd/algorithm.hpp"
#include "czsd/compressor.hpp"
#include "czsd/problems.hpp"
#include "czsd/schedule.hpp"
#include "czsd/topology.hpp"

namespace czsd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::string kind = "pl_quadratic";  // logistic | pl_quadratic | deterministic_quadratic
  int n = 20, p = 50, m = 200;
  double theta = 1e-3, tau = 1.0;
  std::string heterogeneity = "zero";  // zero | scaled
};

struct TopologyConfig {
  std::string kind = "geometric_sphere";  // geometric_sphere|ring|path|complete|edge_list|adjacency
  double threshold_deg = 10.0;
  std::string edge_list_path;
  std::vector<std::vector<double>> matrix;  // dense adjacency
};

struct CompressorConfig {
  std::string kind = "dithered";  // dithered | identity | topk
  int bits = 2;
  double fraction = 0.1;
};

struct ScheduleConfig {
  std::string regime = "table1";
  ScheduleParams prm;
};

struct RunConfig {
  ProblemConfig problem;
  TopologyConfig topology;
  std::string algorithm = "czsd";  // czsd | zsdpd | czsd_identity
  CompressorConfig compressor;
  ScheduleConfig schedule;
  long iterations = 1000;
  std::vector<std::uint64_t> seeds = {1};
  int cadence = 10;
  int eval_batch = 64;
  bool lyapunov = false;
  std::string bit_convention = "broadcast";  // broadcast | per_edge
  bool timing = true;
  std::vector<double> thresholds;
  std::string out_dir = "out";
  std::uint64_t instance_seed = 1234;  // topology + problem data generation
  std::string x0 = "gaussian";         // zero | gaussian
  double x0_scale = 1.0;

  void validate() const {
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (seeds.empty()) throw ConfigError("seeds must be nonempty");
    if (cadence < 1) throw ConfigError("cadence must be >= 1");
    if (eval_batch < 1) throw ConfigError("eval_batch must be >= 1");
  }
};

inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig c;
  try {
    if (j.contains("problem")) {
      const auto& p = j.at("problem");
      c.problem.kind = p.value("kind", c.problem.kind);
      if (c.problem.kind == "logistic") c.problem.kind = "logistic";
      c.problem.n = p.value("n", c.problem.n);
      c.problem.p = p.value("p", c.problem.p);
      c.problem.m = p.value("m", c.problem.m);
      c.problem.theta = p.value("theta", c.problem.theta);
      c.problem.tau = p.value("tau", c.problem.tau);
      c.problem.heterogeneity = p.value("heterogeneity", c.problem.heterogeneity);
    }
    if (j.contains("topology")) {
      const auto& t = j.at("topology");
      c.topology.kind = t.value("kind", c.topology.kind);
      c.topology.threshold_deg = t.value("threshold_deg", c.topology.threshold_deg);
      c.topology.edge_list_path = t.value("path", c.topology.edge_list_path);
      if (t.contains("matrix"))
        c.topology.matrix = t.at("matrix").get<std::vector<std::vector<double>>>();
    }
    c.algorithm = j.value("algorithm", c.algorithm);
    if (j.contains("compressor")) {
      const auto& cc = j.at("compressor");
      c.compressor.kind = cc.value("kind", c.compressor.kind);
      c.compressor.bits = cc.value("bits", c.compressor.bits);
      c.compressor.fraction = cc.value("fraction", c.compressor.fraction);
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      c.schedule.regime = s.value("regime", c.schedule.regime);
      auto& prm = c.schedule.prm;
      prm.eps1 = s.value("eps1", prm.eps1);
      prm.eps2 = s.value("eps2", prm.eps2);
      prm.eps3 = s.value("eps3", prm.eps3);
      prm.m = s.value("m", prm.m);
      prm.horizon = s.value("T", prm.horizon);
      prm.kappa_mu = s.value("kappa_mu", prm.kappa_mu);
      prm.eps_tilde = s.value("eps_tilde", prm.eps_tilde);
      prm.gamma_fixed = s.value("gamma", prm.gamma_fixed);
      prm.omega = s.value("omega", prm.omega);
      prm.alpha0 = s.value("alpha0", prm.alpha0);
      prm.beta0 = s.value("beta0", prm.beta0);
      prm.gamma0 = s.value("gamma0", prm.gamma0);
      prm.mu_decay = s.value("mu_decay", prm.mu_decay);
    }
    c.iterations = j.value("iterations", c.iterations);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.cadence = j.value("cadence", c.cadence);
    c.eval_batch = j.value("eval_batch", c.eval_batch);
    c.lyapunov = j.value("lyapunov", c.lyapunov);
    c.bit_convention = j.value("bit_convention", c.bit_convention);
    c.timing = j.value("timing", c.timing);
    if (j.contains("thresholds"))
      c.thresholds = j.at("thresholds").get<std::vector<double>>();
    c.out_dir = j.value("out_dir", c.out_dir);
    c.instance_seed = j.value("instance_seed", c.instance_seed);
    c.x0 = j.value("x0", c.x0);
    c.x0_scale = j.value("x0_scale", c.x0_scale);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return parse_config(j);
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["problem"] = {{"kind", c.problem.kind}, {"n", c.problem.n},
                  {"p", c.problem.p},       {"m", c.problem.m},
                  {"theta", c.problem.theta}, {"tau", c.problem.tau},
                  {"heterogeneity", c.problem.heterogeneity}};
  j["topology"] = {{"kind", c.topology.kind},
                   {"threshold_deg", c.topology.threshold_deg}};
  if (!c.topology.edge_list_path.empty())
    j["topology"]["path"] = c.topology.edge_list_path;
  if (!c.topology.matrix.empty()) j["topology"]["matrix"] = c.topology.matrix;
  j["algorithm"] = c.algorithm;
  j["compressor"] = {{"kind", c.compressor.kind},
                     {"bits", c.compressor.bits},
                     {"fraction", c.compressor.fraction}};
  j["schedule"] = {{"regime", c.schedule.regime},
                   {"eps1", c.schedule.prm.eps1},
                   {"eps2", c.schedule.prm.eps2},
                   {"eps3", c.schedule.prm.eps3},
                   {"m", c.schedule.prm.m},
                   {"T", c.schedule.prm.horizon},
                   {"kappa_mu", c.schedule.prm.kappa_mu},
                   {"eps_tilde", c.schedule.prm.eps_tilde},
                   {"gamma", c.schedule.prm.gamma_fixed},
                   {"omega", c.schedule.prm.omega},
                   {"alpha0", c.schedule.prm.alpha0},
                   {"beta0", c.schedule.prm.beta0},
                   {"gamma0", c.schedule.prm.gamma0},
                   {"mu_decay", c.schedule.prm.mu_decay}};
  j["iterations"] = c.iterations;
  j["seeds"] = c.seeds;
  j["cadence"] = c.cadence;
  j["eval_batch"] = c.eval_batch;
  j["lyapunov"] = c.lyapunov;
  j["bit_convention"] = c.bit_convention;
  j["timing"] = c.timing;
  j["thresholds"] = c.thresholds;
  j["out_dir"] = c.out_dir;
  j["instance_seed"] = c.instance_seed;
  j["x0"] = c.x0;
  j["x0_scale"] = c.x0_scale;
  return j;
}

// --- instantiation from config blocks ---

inline ProblemInstance make_problem(const ProblemConfig& pc, std::uint64_t seed) {
  if (pc.kind == "logistic")
    return make_logistic(pc.n, pc.p, pc.m, pc.theta, pc.tau, seed);
  if (pc.kind == "pl_quadratic")
    return pl_quadratic_make(pc.n, pc.p,
                             pc.heterogeneity == "scaled" ? Heterogeneity::scaled
                                                          : Heterogeneity::zero,
                             seed);
  if (pc.kind == "deterministic_quadratic")
    return deterministic_quadratic_make(pc.n, pc.p);
  throw ConfigError("unknown problem kind: " + pc.kind);
}

inline Topology make_topology(const TopologyConfig& tc, int n, std::uint64_t seed) {
  if (tc.kind == "geometric_sphere")
    return random_geometric_sphere(n, tc.threshold_deg, seed);
  if (tc.kind == "ring" || tc.kind == "path") {
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) adj(i, i + 1) = adj(i + 1, i) = 1.0;
    if (tc.kind == "ring" && n > 2) adj(0, n - 1) = adj(n - 1, 0) = 1.0;
    return build_topology(adj);
  }
  if (tc.kind == "complete") {
    Eigen::MatrixXd adj = Eigen::MatrixXd::Constant(n, n, 1.0);
    adj.diagonal().setZero();
    return build_topology(adj);
  }
  if (tc.kind == "edge_list") {
    std::ifstream in(tc.edge_list_path);
    if (!in) throw ConfigError("cannot open edge list: " + tc.edge_list_path);
    return build_topology(read_edge_list(in, n));
  }
  if (tc.kind == "adjacency") {
    const int rows = static_cast<int>(tc.matrix.size());
    Eigen::MatrixXd adj(rows, rows);
    for (int i = 0; i < rows; ++i) {
      if (static_cast<int>(tc.matrix[i].size()) != rows)
        throw ConfigError("adjacency matrix must be square");
      for (int j = 0; j < rows; ++j) adj(i, j) = tc.matrix[i][j];
    }
    if (rows != n) throw ConfigError("adjacency size does not match agent count");
    return build_topology(adj);
  }
  throw ConfigError("unknown topology kind: " + tc.kind);
}

inline CompressorSpec make_compressor(const CompressorConfig& cc) {
  if (cc.kind == "identity") return identity_compressor();
  if (cc.kind == "dithered") return dithered_quantizer(cc.bits);
  if (cc.kind == "topk") return top_k_compressor(cc.fraction);
  throw ConfigError("unknown compressor kind: " + cc.kind);
}

inline Schedule make_schedule(const ScheduleConfig& sc, int n, int p) {
  ScheduleRegime regime;
  if (sc.regime == "table1") regime = ScheduleRegime::table1;
  else if (sc.regime == "theorem1") regime = ScheduleRegime::theorem1_fixed;
  else if (sc.regime == "theorem2") regime = ScheduleRegime::theorem2_timevarying;
  else if (sc.regime == "theorem3") regime = ScheduleRegime::theorem3_geometric;
  else if (sc.regime == "custom") regime = ScheduleRegime::custom;
  else throw ConfigError("unknown schedule regime: " + sc.regime);
  return make_schedule(regime, sc.prm, n, p);
}

inline AlgorithmKind make_algorithm(const std::string& name) {
  if (name == "czsd") return AlgorithmKind::czsd;
  if (name == "zsdpd") return AlgorithmKind::zsdpd;
  if (name == "czsd_identity") return AlgorithmKind::czsd_identity;
  throw ConfigError("unknown algorithm: " + name);
}

}  // namespace czsd
