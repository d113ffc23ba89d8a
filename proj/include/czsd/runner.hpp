#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "czsd/config.hpp"
#include "czsd/metrics.hpp"

namespace czsd {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AllSeedsDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceRow {
  long k = 0;
  double consensus = 0, grad_sq = 0, p_running = 0, optimality = 0;
  std::uint64_t bits = 0;
  bool has_lyapunov = false;
  LyapunovComponents lyap;
  double wall_ms = 0;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "k,consensus,grad_sq,p_running,optimality,bits,e1,e2,e3,e4,e5,wall_ms\n";
  for (const auto& r : rows) {
    out << r.k << ',' << format_double(r.consensus) << ','
        << format_double(r.grad_sq) << ',' << format_double(r.p_running) << ','
        << format_double(r.optimality) << ',' << r.bits << ',';
    if (r.has_lyapunov)
      out << format_double(r.lyap.e1) << ',' << format_double(r.lyap.e2) << ','
          << format_double(r.lyap.e3) << ',' << format_double(r.lyap.e4) << ','
          << format_double(r.lyap.e5);
    else
      out << ",,,,";
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.3f", r.wall_ms);
    out << ',' << wall << '\n';
  }
}

inline std::vector<TraceRow> parse_trace_csv(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRow r;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      f.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (f.size() != 12) throw IoError("trace row has wrong column count");
    r.k = std::stol(f[0]);
    r.consensus = std::stod(f[1]);
    r.grad_sq = std::stod(f[2]);
    r.p_running = std::stod(f[3]);
    r.optimality = std::stod(f[4]);
    r.bits = std::stoull(f[5]);
    r.has_lyapunov = !f[6].empty();
    if (r.has_lyapunov) {
      r.lyap.e1 = std::stod(f[6]);
      r.lyap.e2 = std::stod(f[7]);
      r.lyap.e3 = std::stod(f[8]);
      r.lyap.e4 = std::stod(f[9]);
      r.lyap.e5 = std::stod(f[10]);
    }
    r.wall_ms = std::stod(f[11]);
    rows.push_back(r);
  }
  return rows;
}

/// Smallest cumulative bit count at which the running metric reached the
/// threshold; nullopt if it never did.
inline std::optional<std::uint64_t> bits_to_threshold(
    const std::vector<TraceRow>& rows, double threshold) {
  for (const auto& r : rows)
    if (r.p_running <= threshold) return r.bits;
  return std::nullopt;
}

struct SeedResult {
  std::uint64_t seed = 0;
  bool diverged = false;
  std::vector<TraceRow> rows;
};

/// Executes T rounds for one seed, measuring every `cadence` iterations
/// (rows at k = 0, cadence, 2*cadence, ... below T).
inline SeedResult run_seed(const RunConfig& cfg, const Topology& topo,
                           const ProblemInstance& prob, std::uint64_t seed) {
  const AlgorithmKind algo = make_algorithm(cfg.algorithm);
  CompressorSpec comp = algo == AlgorithmKind::czsd ? make_compressor(cfg.compressor)
                                                    : identity_compressor();
  const Schedule sched = make_schedule(cfg.schedule, prob.n, prob.p);
  const BitConvention bc = cfg.bit_convention == "per_edge"
                               ? BitConvention::per_edge
                               : BitConvention::broadcast;

  Eigen::MatrixXd x0 = Eigen::MatrixXd::Zero(prob.p, prob.n);
  if (cfg.x0 == "gaussian") {
    auto rng = substream(seed, 0x0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < prob.n; ++i)
      for (int l = 0; l < prob.p; ++l) x0(l, i) = cfg.x0_scale * gauss(rng);
  }

  RunState st = init(topo, prob, comp, sched, x0, seed, bc);
  Eigen::MatrixXd fm;
  if (cfg.lyapunov) fm = build_fm(topo);

  SeedResult res;
  res.seed = seed;
  RunningMin p_running;
  RunningMin best_f;  // optimum surrogate when f* is unknown
  const auto t0 = std::chrono::steady_clock::now();

  try {
    for (long k = 0; k < cfg.iterations; ++k) {
      if (k % cfg.cadence == 0) {
        const Eigen::VectorXd xbar = mean_column(st.X);
        const MeanEval ev =
            evaluate_at_mean(prob, xbar, seed, k, cfg.eval_batch);
        TraceRow row;
        row.k = k;
        row.consensus = consensus_error(st.X);
        row.grad_sq = ev.grad_sq;
        p_running.update(row.grad_sq + row.consensus);
        row.p_running = p_running.value();
        best_f.update(ev.f_bar);
        row.optimality = prob.f_star_exact ? ev.f_bar - prob.f_star
                                           : ev.f_bar - best_f.value();
        row.bits = st.bits;
        if (cfg.lyapunov) {
          row.has_lyapunov = true;
          row.lyap = lyapunov_components(
              st, fm, ev,
              prob.f_star_exact ? prob.f_star : best_f.value());
        }
        if (cfg.timing) {
          row.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        }
        res.rows.push_back(row);
      }
      step(st, algo);
    }
  } catch (const NonFiniteState&) {
    res.diverged = true;
  }
  return res;
}

struct RunOutput {
  nlohmann::json summary;
  std::vector<SeedResult> seeds;
};

inline RunOutput run(const RunConfig& cfg) {
  cfg.validate();
  const ProblemInstance prob = make_problem(cfg.problem, cfg.instance_seed);
  const Topology topo = make_topology(cfg.topology, prob.n, cfg.instance_seed);

  RunOutput out;
  std::filesystem::create_directories(cfg.out_dir);

  nlohmann::json per_seed = nlohmann::json::array();
  int diverged = 0;
  std::vector<double> finals;
  for (const auto seed : cfg.seeds) {
    SeedResult res = run_seed(cfg, topo, prob, seed);
    nlohmann::json js;
    js["seed"] = seed;
    js["diverged"] = res.diverged;
    if (!res.rows.empty()) {
      js["final_p"] = res.rows.back().p_running;
      js["final_bits"] = res.rows.back().bits;
      if (!res.diverged) finals.push_back(res.rows.back().p_running);
      nlohmann::json th;
      for (const double t : cfg.thresholds) {
        const auto b = bits_to_threshold(res.rows, t);
        th[format_double(t)] = b ? nlohmann::json(*b) : nlohmann::json();
      }
      js["bits_to_threshold"] = th;
    }
    if (res.diverged) ++diverged;

    const std::string path =
        cfg.out_dir + "/trace_" + cfg.algorithm + "_seed" + std::to_string(seed) + ".csv";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write trace: " + path);
    write_trace_csv(f, res.rows);
    js["trace"] = path;
    per_seed.push_back(js);
    out.seeds.push_back(std::move(res));
  }
  if (diverged == static_cast<int>(cfg.seeds.size()))
    throw AllSeedsDiverged("every seed diverged");

  nlohmann::json agg;
  if (!finals.empty()) {
    double mn = finals[0], mx = finals[0], sum = 0;
    for (double v : finals) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      sum += v;
    }
    agg["p_final_mean"] = sum / finals.size();
    agg["p_final_min"] = mn;
    agg["p_final_max"] = mx;
  }
  for (const double t : cfg.thresholds) {
    int reached = 0;
    double bit_sum = 0;
    for (const auto& res : out.seeds) {
      const auto b = bits_to_threshold(res.rows, t);
      if (b) {
        ++reached;
        bit_sum += double(*b);
      }
    }
    nlohmann::json jt;
    jt["reached"] = reached;
    if (reached > 0) jt["mean_bits"] = bit_sum / reached;
    agg["bits_to_threshold"][format_double(t)] = jt;
  }
  agg["diverged_seeds"] = diverged;

  out.summary["config"] = to_json(cfg);
  out.summary["seeds"] = per_seed;
  out.summary["aggregate"] = agg;

  std::ofstream sf(cfg.out_dir + "/summary.json");
  if (!sf) throw IoError("cannot write summary");
  sf << out.summary.dump(2) << '\n';
  return out;
}

}  // namespace czsd
