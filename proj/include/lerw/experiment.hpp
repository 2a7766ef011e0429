#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lerw/graph.hpp"
#include "lerw/loop_erasure.hpp"
#include "lerw/random_walk.hpp"
#include "lerw/rayleigh.hpp"
#include "lerw/rng.hpp"
#include "lerw/segments.hpp"
#include "lerw/stats.hpp"

namespace lerw {

inline constexpr const char* kVersionTag = "lerw 1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Subcommand {
  LerwRun,
  RayleighRun,
  SurrogateRun,
  Constants,
  Mixing,
  Fdd,
  CoupleVerify,
  Modulus,
};

inline const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::LerwRun: return "lerw-run";
    case Subcommand::RayleighRun: return "rayleigh-run";
    case Subcommand::SurrogateRun: return "surrogate-run";
    case Subcommand::Constants: return "constants";
    case Subcommand::Mixing: return "mixing";
    case Subcommand::Fdd: return "fdd";
    case Subcommand::CoupleVerify: return "couple-verify";
    case Subcommand::Modulus: return "modulus";
  }
  return "?";
}

struct ExperimentConfig {
  Subcommand subcommand = Subcommand::Mixing;
  std::string graph_spec;
  CaseKind case_kind = CaseKind::Case1;
  bool case_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::int64_t replicates = 1;
  std::int64_t rayleigh_replicates = 0;  // fdd; 0 means same as replicates
  double horizon = 0.0;
  std::vector<double> times;
  double eta = 0.05;
  std::optional<std::int64_t> tau;
  std::optional<double> delta;  // echoed in reports only
  std::optional<double> alpha_in, gamma_in, a_in, b_in;
  std::uint64_t surrogate_m = 0;
  std::int64_t steps = 0;
  std::int64_t tmax = 1 << 20;
  std::int64_t couple_j = 0;
  double couple_p = 0.0, couple_q = 0.0;
  double theta = 0.0;
  double slope = 1.0;
  double y0 = 0.0;
  std::string mode = "event";  // rayleigh-run: event | field
  std::string input_path;
  std::string out_prefix;
  int workers = 1;
};

namespace detail {

inline std::string format17(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

inline std::int64_t parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for key '" + key + "': " + text);
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  try {
    if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad unsigned integer for key '" + key + "': " + text);
  }
}

inline double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number for key '" + key + "': " + text);
  }
}

inline std::vector<double> parse_times(const std::string& text) {
  std::vector<double> times;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    times.push_back(parse_real("times", item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i - 1] < times[i])) throw ConfigError("times must be ascending");
  return times;
}

// Run fn(replicate) for every replicate, work-stealing across workers.
// Callers store results by replicate index, so output order is fixed.
template <class Fn>
void parallel_for_replicates(std::int64_t count, int workers, Fn&& fn) {
  workers = static_cast<int>(std::min<std::int64_t>(std::max(workers, 1), std::max<std::int64_t>(count, 1)));
  if (workers <= 1) {
    for (std::int64_t r = 0; r < count; ++r) fn(r);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t r = next.fetch_add(1);
      if (r >= count) return;
      try {
        fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

// Flat key=value text (comments with '#', blank lines allowed).
inline std::map<std::string, std::string> parse_key_value_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == first)
      throw ConfigError("bad config line: " + line);
    std::string key = line.substr(first, eq - first);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string value = line.substr(eq + 1);
    const auto vfirst = value.find_first_not_of(" \t");
    value = vfirst == std::string::npos ? std::string() : value.substr(vfirst);
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
    out[key] = value;
  }
  return out;
}

// Builds the config from merged key=value pairs (file first, flags win).
inline ExperimentConfig build_config(const std::map<std::string, std::string>& merged) {
  const auto sub_it = merged.find("subcommand");
  if (sub_it == merged.end()) throw ConfigError("subcommand required");

  ExperimentConfig cfg;
  const std::string& sub = sub_it->second;
  if (sub == "lerw-run") cfg.subcommand = Subcommand::LerwRun;
  else if (sub == "rayleigh-run") cfg.subcommand = Subcommand::RayleighRun;
  else if (sub == "surrogate-run") cfg.subcommand = Subcommand::SurrogateRun;
  else if (sub == "constants") cfg.subcommand = Subcommand::Constants;
  else if (sub == "mixing") cfg.subcommand = Subcommand::Mixing;
  else if (sub == "fdd") cfg.subcommand = Subcommand::Fdd;
  else if (sub == "couple-verify") cfg.subcommand = Subcommand::CoupleVerify;
  else if (sub == "modulus") cfg.subcommand = Subcommand::Modulus;
  else throw ConfigError("unknown subcommand '" + sub + "'");

  static const std::set<std::string> known_keys{
      "subcommand", "seed",  "out",   "workers", "graph", "case",
      "horizon",    "times", "replicates", "rayleigh_replicates", "eta",
      "tau",        "delta", "alpha", "gamma",   "a",     "b",
      "m",          "steps", "tmax",  "j",       "p",     "q",
      "theta",      "slope", "y0",    "mode",    "in"};
  for (const auto& [key, value] : merged)
    if (!known_keys.count(key)) throw ConfigError("unknown key '" + key + "'");

  auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = merged.find(key);
    if (it == merged.end()) return std::nullopt;
    return it->second;
  };

  if (const auto v = get("seed")) {
    cfg.seed = detail::parse_uint("seed", *v);
    cfg.seed_set = true;
  }
  if (const auto v = get("out")) cfg.out_prefix = *v;
  if (const auto v = get("workers")) {
    cfg.workers = static_cast<int>(detail::parse_int("workers", *v));
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  }
  if (const auto v = get("graph")) cfg.graph_spec = *v;
  if (const auto v = get("case")) {
    if (*v == "1") cfg.case_kind = CaseKind::Case1;
    else if (*v == "2") cfg.case_kind = CaseKind::Case2;
    else throw ConfigError("case must be 1 or 2");
    cfg.case_set = true;
  }
  if (const auto v = get("replicates")) {
    cfg.replicates = detail::parse_int("replicates", *v);
    if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
  }
  if (const auto v = get("rayleigh_replicates")) {
    cfg.rayleigh_replicates = detail::parse_int("rayleigh_replicates", *v);
    if (cfg.rayleigh_replicates < 1) throw ConfigError("rayleigh_replicates must be >= 1");
  }
  if (const auto v = get("horizon")) cfg.horizon = detail::parse_real("horizon", *v);
  if (const auto v = get("times")) cfg.times = detail::parse_times(*v);
  if (const auto v = get("eta")) cfg.eta = detail::parse_real("eta", *v);
  if (const auto v = get("tau")) cfg.tau = detail::parse_int("tau", *v);
  if (const auto v = get("delta")) cfg.delta = detail::parse_real("delta", *v);
  if (const auto v = get("alpha")) cfg.alpha_in = detail::parse_real("alpha", *v);
  if (const auto v = get("gamma")) cfg.gamma_in = detail::parse_real("gamma", *v);
  if (const auto v = get("a")) cfg.a_in = detail::parse_real("a", *v);
  if (const auto v = get("b")) cfg.b_in = detail::parse_real("b", *v);
  if (const auto v = get("m")) cfg.surrogate_m = detail::parse_uint("m", *v);
  if (const auto v = get("steps")) cfg.steps = detail::parse_int("steps", *v);
  if (const auto v = get("tmax")) cfg.tmax = detail::parse_int("tmax", *v);
  if (const auto v = get("j")) cfg.couple_j = detail::parse_int("j", *v);
  if (const auto v = get("p")) cfg.couple_p = detail::parse_real("p", *v);
  if (const auto v = get("q")) cfg.couple_q = detail::parse_real("q", *v);
  if (const auto v = get("theta")) cfg.theta = detail::parse_real("theta", *v);
  if (const auto v = get("slope")) cfg.slope = detail::parse_real("slope", *v);
  if (const auto v = get("y0")) cfg.y0 = detail::parse_real("y0", *v);
  if (const auto v = get("mode")) {
    cfg.mode = *v;
    if (cfg.mode != "event" && cfg.mode != "field")
      throw ConfigError("mode must be event or field");
  }
  if (const auto v = get("in")) cfg.input_path = *v;

  // Subcommands that consume randomness require an explicit seed.
  const bool needs_seed = cfg.subcommand != Subcommand::Mixing &&
                          cfg.subcommand != Subcommand::Modulus;
  if (needs_seed && !cfg.seed_set) throw ConfigError("seed required");
  if (cfg.out_prefix.empty()) cfg.out_prefix = subcommand_name(cfg.subcommand);
  return cfg;
}

// CLI grammar: <subcommand> [--config file] [--key value]...  The config file
// holds flat key=value lines; flags win on conflicts.
inline ExperimentConfig parse_config(const std::vector<std::string>& args) {
  std::map<std::string, std::string> file_keys;
  std::map<std::string, std::string> flag_keys;
  std::size_t index = 0;
  if (index < args.size() && args[index].rfind("--", 0) != 0) {
    flag_keys["subcommand"] = args[index];
    ++index;
  }
  while (index < args.size()) {
    const std::string& flag = args[index];
    if (flag.rfind("--", 0) != 0) throw ConfigError("expected --key, got '" + flag + "'");
    if (index + 1 >= args.size()) throw ConfigError("flag " + flag + " needs a value");
    const std::string key = flag.substr(2);
    const std::string& value = args[index + 1];
    index += 2;
    if (key == "config") {
      std::ifstream in(value);
      if (!in) throw ConfigError("cannot read config file " + value);
      std::stringstream buffer;
      buffer << in.rdbuf();
      for (const auto& [k, v] : parse_key_value_text(buffer.str())) {
        if (k == "config") throw ConfigError("config files cannot nest");
        file_keys[k] = v;
      }
    } else {
      flag_keys[key] = value;
    }
  }
  std::map<std::string, std::string> merged = file_keys;
  for (const auto& [k, v] : flag_keys) merged[k] = v;
  return build_config(merged);
}

inline ExperimentConfig parse_config(const std::string& config_text) {
  return build_config(parse_key_value_text(config_text));
}

struct RunResult {
  ExperimentConfig config;
  std::vector<std::string> csv;  // header row first
  nlohmann::json summary;
  double wall_seconds = 0.0;
  std::string csv_path;
  std::string json_path;
};

namespace detail {

inline nlohmann::json config_echo(const ExperimentConfig& cfg) {
  nlohmann::json echo;
  echo["subcommand"] = subcommand_name(cfg.subcommand);
  if (cfg.seed_set) echo["seed"] = cfg.seed;
  if (!cfg.graph_spec.empty()) echo["graph"] = cfg.graph_spec;
  if (cfg.case_set) echo["case"] = cfg.case_kind == CaseKind::Case1 ? 1 : 2;
  echo["replicates"] = cfg.replicates;
  echo["workers"] = cfg.workers;
  if (cfg.horizon > 0) echo["horizon"] = cfg.horizon;
  if (!cfg.times.empty()) echo["times"] = cfg.times;
  if (cfg.tau) echo["tau"] = *cfg.tau;
  if (cfg.delta) echo["delta"] = *cfg.delta;
  echo["out"] = cfg.out_prefix;
  return echo;
}

struct ScalePair {
  double a = 0.0;
  double b = 0.0;
};

inline ScalePair resolve_scale(const ExperimentConfig& cfg) {
  if (cfg.a_in && cfg.b_in) {
    if (!(*cfg.a_in > 0.0) || !(*cfg.b_in > 0.0))
      throw ConfigError("a and b must be positive");
    return {*cfg.a_in, *cfg.b_in};
  }
  if (cfg.alpha_in && cfg.gamma_in) {
    if (!(*cfg.alpha_in > 0.0) || !(*cfg.gamma_in > 0.0))
      throw ConfigError("alpha and gamma must be positive");
    return {1.0 / std::sqrt(*cfg.alpha_in), std::sqrt(*cfg.alpha_in) / *cfg.gamma_in};
  }
  throw ConfigError("scaling constants required: pass a and b, or alpha and gamma");
}

inline GraphModel graph_from_config(const ExperimentConfig& cfg) {
  if (cfg.graph_spec.empty()) throw ConfigError("graph required");
  try {
    return parse_graph_spec(cfg.graph_spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// Z_n samples at the configured times, one row of (Y, Z) per time per
// replicate. Shared by lerw-run and fdd.
inline std::vector<std::vector<std::pair<std::int64_t, double>>> lerw_samples(
    const ExperimentConfig& cfg, const GraphModel& g, const ScalePair& scale) {
  if (cfg.times.empty()) throw ConfigError("times required");
  if (cfg.case_kind == CaseKind::Case2 && g.kind != GraphKind::Torus)
    throw ConfigError("case 2 rescaling requires a torus");
  const double horizon = std::max(cfg.horizon, cfg.times.back());
  const std::int64_t total_steps = time_index(cfg.case_kind, g, scale.a, horizon);
  std::vector<std::int64_t> indices;
  indices.reserve(cfg.times.size());
  for (double t : cfg.times)
    indices.push_back(std::min(total_steps, time_index(cfg.case_kind, g, scale.a, t)));
  const double m_scale = length_scale(cfg.case_kind, g, scale.b);

  std::vector<std::vector<std::pair<std::int64_t, double>>> rows(
      static_cast<std::size_t>(cfg.replicates));
  // times are strictly ascending, so the step indices are nondecreasing
  parallel_for_replicates(cfg.replicates, cfg.workers, [&](std::int64_t rep) {
    const Trajectory traj = walk_trajectory(
        g, 0, total_steps, stream_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
    const std::vector<std::int64_t> sampled = length_at_times(traj, indices);
    auto& out = rows[static_cast<std::size_t>(rep)];
    out.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i)
      out.emplace_back(sampled[i], static_cast<double>(sampled[i]) / m_scale);
  });
  return rows;
}

}  // namespace detail

inline RunResult run_experiment(const ExperimentConfig& cfg) {
  const auto start_time = std::chrono::steady_clock::now();
  RunResult result;
  result.config = cfg;
  nlohmann::json estimates;
  nlohmann::json diagnostics;

  switch (cfg.subcommand) {
    case Subcommand::LerwRun: {
      const GraphModel g = detail::graph_from_config(cfg);
      if (!cfg.case_set) throw ConfigError("case required");
      const detail::ScalePair scale = detail::resolve_scale(cfg);
      const auto rows = detail::lerw_samples(cfg, g, scale);
      result.csv.push_back("replicate,t,Y,Z");
      std::vector<double> mean_z(cfg.times.size(), 0.0);
      for (std::int64_t rep = 0; rep < cfg.replicates; ++rep) {
        for (std::size_t i = 0; i < cfg.times.size(); ++i) {
          const auto& [y, z] = rows[static_cast<std::size_t>(rep)][i];
          result.csv.push_back(std::to_string(rep) + "," + detail::format17(cfg.times[i]) +
                               "," + std::to_string(y) + "," + detail::format17(z));
          mean_z[i] += z;
        }
      }
      nlohmann::json per_time = nlohmann::json::array();
      for (std::size_t i = 0; i < cfg.times.size(); ++i) {
        per_time.push_back({{"t", cfg.times[i]},
                            {"mean_Z", mean_z[i] / static_cast<double>(cfg.replicates)}});
      }
      estimates["a"] = scale.a;
      estimates["b"] = scale.b;
      estimates["per_time"] = per_time;
      diagnostics["steps"] = time_index(cfg.case_kind, g, scale.a,
                                        std::max(cfg.horizon, cfg.times.back()));
      break;
    }

    case Subcommand::RayleighRun: {
      if (!(cfg.horizon > 0.0)) throw ConfigError("horizon required");
      std::vector<StepPath> paths(static_cast<std::size_t>(cfg.replicates));
      detail::parallel_for_replicates(cfg.replicates, cfg.workers, [&](std::int64_t rep) {
        SplitMix64 rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
        if (cfg.mode == "event") {
          paths[static_cast<std::size_t>(rep)] =
              rayleigh_event_driven(cfg.y0, cfg.horizon, rng);
        } else {
          const PoissonField field =
              sample_poisson_field(cfg.horizon, cfg.y0 + cfg.horizon, rng);
          paths[static_cast<std::size_t>(rep)] = rayleigh_from_field(field, cfg.y0, cfg.horizon);
        }
      });
      result.csv.push_back("replicate,time,value");
      double mean_final = 0.0;
      for (std::int64_t rep = 0; rep < cfg.replicates; ++rep) {
        const StepPath& path = paths[static_cast<std::size_t>(rep)];
        result.csv.push_back(std::to_string(rep) + ",0," + detail::format17(path.origin));
        for (const auto& [time, value] : path.breakpoints)
          result.csv.push_back(std::to_string(rep) + "," + detail::format17(time) + "," +
                               detail::format17(value));
        mean_final += path.value_at(cfg.horizon);
      }
      estimates["mean_final"] = mean_final / static_cast<double>(cfg.replicates);
      diagnostics["mode"] = cfg.mode;
      break;
    }

    case Subcommand::SurrogateRun: {
      if (cfg.surrogate_m < 1) throw ConfigError("m required");
      if (cfg.steps < 1) throw ConfigError("steps required");
      std::vector<std::vector<std::int32_t>> lengths(static_cast<std::size_t>(cfg.replicates));
      detail::parallel_for_replicates(cfg.replicates, cfg.workers, [&](std::int64_t rep) {
        SplitMix64 rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
        lengths[static_cast<std::size_t>(rep)] =
            surrogate_chain(cfg.surrogate_m, cfg.steps, rng).lengths;
      });
      result.csv.push_back("replicate,j,L");
      double mean_final = 0.0;
      for (std::int64_t rep = 0; rep < cfg.replicates; ++rep) {
        const auto& l = lengths[static_cast<std::size_t>(rep)];
        for (std::size_t j = 0; j < l.size(); ++j)
          result.csv.push_back(std::to_string(rep) + "," + std::to_string(j) + "," +
                               std::to_string(l[j]));
        mean_final += l.back();
      }
      estimates["mean_final_L"] = mean_final / static_cast<double>(cfg.replicates);
      break;
    }

    case Subcommand::Constants: {
      const GraphModel g = detail::graph_from_config(cfg);
      if (!cfg.case_set) throw ConfigError("case required");
      std::int64_t tau = 0;
      if (cfg.tau) {
        tau = *cfg.tau;
      } else if (cfg.case_kind == CaseKind::Case1) {
        tau = find_mixing_time(g, cfg.tmax);
      }
      const SegmentSchedule schedule = build_schedule(cfg.case_kind, g, tau, cfg.eta, 1);
      SplitMix64 rng(cfg.seed);
      std::vector<std::pair<std::int64_t, int>> records;
      const ScalingConstants constants =
          estimate_constants_recorded(g, cfg.case_kind, schedule, cfg.replicates, rng, records);
      result.csv.push_back("replicate,le_length,cap_hit");
      for (std::size_t rep = 0; rep < records.size(); ++rep)
        result.csv.push_back(std::to_string(rep) + "," + std::to_string(records[rep].first) +
                             "," + std::to_string(records[rep].second));
      estimates["gamma"] = constants.gamma;
      estimates["alpha"] = constants.alpha;
      estimates["a"] = constants.a;
      estimates["b"] = constants.b;
      estimates["d"] = constants.d;
      estimates["m"] = constants.m;
      estimates["stderr_gamma"] = constants.stderr_gamma;
      estimates["stderr_alpha"] = constants.stderr_alpha;
      diagnostics["tau"] = tau;
      diagnostics["r"] = schedule.r;
      diagnostics["s"] = schedule.s;
      diagnostics["w"] = schedule.w;
      if (schedule.nonstandard_torus)
        diagnostics["warning"] = "case 2 on a torus with d != 4 (exploratory)";
      if (cfg.delta) diagnostics["delta"] = *cfg.delta;
      break;
    }

    case Subcommand::Mixing: {
      const GraphModel g = detail::graph_from_config(cfg);
      const MixingReport report = mixing_time(g, cfg.tmax);
      result.csv.push_back("t,separation_deviation");
      for (const auto& [t, dev] : report.separation_curve)
        result.csv.push_back(std::to_string(t) + "," + detail::format17(dev));
      if (report.tau)
        estimates["tau"] = *report.tau;
      else
        estimates["tau"] = nullptr;  // not reached by tmax
      estimates["graph"] = cfg.graph_spec;
      estimates["tmax"] = cfg.tmax;
      break;
    }

    case Subcommand::Fdd: {
      const GraphModel g = detail::graph_from_config(cfg);
      if (!cfg.case_set) throw ConfigError("case required");
      if (cfg.times.empty()) throw ConfigError("times required");
      const detail::ScalePair scale = detail::resolve_scale(cfg);
      const auto lerw_rows = detail::lerw_samples(cfg, g, scale);
      std::vector<std::vector<double>> lerw_by_time(cfg.times.size());
      for (const auto& row : lerw_rows)
        for (std::size_t i = 0; i < cfg.times.size(); ++i)
          lerw_by_time[i].push_back(row[i].second);

      const std::int64_t ray_count =
          cfg.rayleigh_replicates > 0 ? cfg.rayleigh_replicates : cfg.replicates;
      const double horizon = cfg.times.back();
      std::vector<std::vector<double>> ray_rows(static_cast<std::size_t>(ray_count));
      const std::uint64_t ray_base = mix64(cfg.seed ^ 0x52617968ULL);
      detail::parallel_for_replicates(ray_count, cfg.workers, [&](std::int64_t rep) {
        SplitMix64 rng(stream_seed(ray_base, static_cast<std::uint64_t>(rep)));
        const StepPath path = rayleigh_event_driven(0.0, horizon, rng);
        auto& out = ray_rows[static_cast<std::size_t>(rep)];
        out.reserve(cfg.times.size());
        for (double t : cfg.times) out.push_back(path.value_at(t));
      });
      std::vector<std::vector<double>> ray_by_time(cfg.times.size());
      for (const auto& row : ray_rows)
        for (std::size_t i = 0; i < cfg.times.size(); ++i) ray_by_time[i].push_back(row[i]);

      const FddReport report = fdd_compare(lerw_by_time, ray_by_time, cfg.times);
      result.csv.push_back("time,ks,n_lerw,n_rayleigh");
      double max_ks = 0.0;
      for (std::size_t i = 0; i < report.times.size(); ++i) {
        result.csv.push_back(detail::format17(report.times[i]) + "," +
                             detail::format17(report.ks[i]) + "," +
                             std::to_string(report.n_lerw[i]) + "," +
                             std::to_string(report.n_rayleigh[i]));
        max_ks = std::max(max_ks, report.ks[i]);
      }
      estimates["max_ks"] = max_ks;
      estimates["a"] = scale.a;
      estimates["b"] = scale.b;
      break;
    }

    case Subcommand::CoupleVerify: {
      if (cfg.couple_j < 1) throw ConfigError("j required");
      CouplingTable table;
      try {
        table = maximal_coupling(cfg.couple_p, cfg.couple_q, cfg.couple_j);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      result.csv.push_back("replicate,v,w_bits");
      SplitMix64 rng(cfg.seed);
      std::int64_t matches = 0;
      for (std::int64_t rep = 0; rep < cfg.replicates; ++rep) {
        const auto [v, w] = table.sample(rng);
        const std::uint32_t v_mask =
            v == 0 ? 0u : table.basis_mask(v);
        matches += v_mask == w ? 1 : 0;
        result.csv.push_back(std::to_string(rep) + "," + std::to_string(v) + "," +
                             std::to_string(w));
      }
      estimates["match_probability"] = table.match_probability;
      estimates["match_bound"] = table.match_lower_bound();
      // The bound is attained exactly at j = 1, so compare with
      // representation slack only.
      estimates["match_ge_bound"] = table.match_probability >= table.match_lower_bound() - 1e-12;
      diagnostics["empirical_match"] =
          static_cast<double>(matches) / static_cast<double>(cfg.replicates);
      break;
    }

    case Subcommand::Modulus: {
      if (cfg.input_path.empty()) throw ConfigError("in required");
      if (!(cfg.horizon > 0.0)) throw ConfigError("horizon required");
      std::ifstream in(cfg.input_path);
      if (!in) throw std::runtime_error("cannot read " + cfg.input_path);
      StepPath path;
      path.origin = cfg.y0;
      path.slope = cfg.slope;
      std::string line;
      bool first = true;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("bad breakpoint row: " + line);
        char* end = nullptr;
        const double time = std::strtod(line.c_str(), &end);
        if (first && end == line.c_str()) {  // header row
          first = false;
          continue;
        }
        first = false;
        const double value = detail::parse_real("in", line.substr(comma + 1));
        if (time == 0.0)
          path.origin = value;
        else
          path.breakpoints.emplace_back(time, value);
      }
      std::sort(path.breakpoints.begin(), path.breakpoints.end());
      const double w = modulus_w(path, cfg.theta, cfg.horizon);
      result.csv.push_back("theta,T,w");
      result.csv.push_back(detail::format17(cfg.theta) + "," + detail::format17(cfg.horizon) +
                           "," + detail::format17(w));
      estimates["w"] = w;
      break;
    }
  }

  result.summary["config"] = detail::config_echo(cfg);
  result.summary["estimates"] = estimates;
  result.summary["diagnostics"] = diagnostics;
  result.summary["version"] = kVersionTag;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  result.summary["wall_seconds"] = result.wall_seconds;

  result.csv_path = cfg.out_prefix + ".csv";
  result.json_path = cfg.out_prefix + ".json";
  std::ofstream csv_out(result.csv_path);
  if (!csv_out) throw std::runtime_error("cannot write " + result.csv_path);
  for (const auto& row : result.csv) csv_out << row << '\n';
  std::ofstream json_out(result.json_path);
  if (!json_out) throw std::runtime_error("cannot write " + result.json_path);
  json_out << result.summary.dump(2) << '\n';
  return result;
}

}  // namespace lerw
