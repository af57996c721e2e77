#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "csforge/error.hpp"
#include "csforge/io.hpp"
#include "csforge/ops.hpp"
#include "csforge/util.hpp"

namespace csforge {

struct PipelineStep {
  std::string name;
  std::string op;
  nlohmann::json args;
  std::vector<std::string> after;
};

struct PipelineConfig {
  std::uint64_t seed = 7;
  std::string out_dir;
  std::vector<PipelineStep> steps;
};

inline PipelineConfig parse_pipeline(const nlohmann::json& j) {
  PipelineConfig cfg;
  cfg.seed = j.value("seed", 7ULL);
  cfg.out_dir = j.value("out_dir", "");
  for (const auto& s : j.value("steps", nlohmann::json::array())) {
    PipelineStep step;
    step.name = s.at("name").get<std::string>();
    step.op = s.at("op").get<std::string>();
    step.args = s.value("args", nlohmann::json::object());
    if (s.contains("after"))
      step.after = s.at("after").get<std::vector<std::string>>();
    cfg.steps.push_back(std::move(step));
  }
  return cfg;
}

inline PipelineConfig load_pipeline(const std::string& path) {
  try {
    return parse_pipeline(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace detail {

// Kahn topological sort; rejects duplicate names, unknown dependencies
// and cycles before anything runs. Ready steps keep config order.
inline std::vector<std::size_t> topological_order(
    const std::vector<PipelineStep>& steps) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!index.emplace(steps[i].name, i).second)
      throw ConfigError("duplicate step name: " + steps[i].name);
  }
  std::vector<std::vector<std::size_t>> dependents(steps.size());
  std::vector<std::size_t> in_degree(steps.size(), 0);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const auto& dep : steps[i].after) {
      auto it = index.find(dep);
      if (it == index.end())
        throw ConfigError("step " + steps[i].name +
                          " depends on unknown step " + dep);
      dependents[it->second].push_back(i);
      ++in_degree[i];
    }
  }
  std::vector<std::size_t> order;
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (in_degree[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end());
    const std::size_t cur = ready.front();
    ready.erase(ready.begin());
    order.push_back(cur);
    for (std::size_t nxt : dependents[cur])
      if (--in_degree[nxt] == 0) ready.push_back(nxt);
  }
  if (order.size() != steps.size())
    throw ConfigError("pipeline steps contain a cycle");
  return order;
}

inline nlohmann::json digest_outputs(const nlohmann::json& outputs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : outputs) {
    const std::string path = p.get<std::string>();
    const std::string data = read_file(path);
    nlohmann::json e;
    e["path"] = path;
    e["bytes"] = data.size();
    e["crc32"] = crc32_digest(data);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace detail

struct PipelineResult {
  bool ok = false;
  nlohmann::json manifest;
};

// Executes the steps in topological order and writes a machine-readable
// manifest (inputs, seeds, output digests). The pipeline seed is injected
// into any step that does not pin its own. A failing step marks the rest
// skipped and the run unsuccessful; partial outputs stay flagged in the
// manifest.
inline PipelineResult run_pipeline(const PipelineConfig& cfg,
                                   const std::string& manifest_path = "") {
  auto order = detail::topological_order(cfg.steps);

  nlohmann::json manifest;
  manifest["seed"] = cfg.seed;
  manifest["tool"] = "csforge";
  manifest["n_steps"] = cfg.steps.size();
  nlohmann::json steps_out = nlohmann::json::array();

  bool failed = false;
  for (std::size_t idx : order) {
    const PipelineStep& step = cfg.steps[idx];
    nlohmann::json entry;
    entry["name"] = step.name;
    entry["op"] = step.op;
    nlohmann::json args = step.args;
    if (!args.contains("seed")) args["seed"] = cfg.seed;
    entry["args"] = args;
    if (failed) {
      entry["status"] = "skipped";
      steps_out.push_back(std::move(entry));
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      nlohmann::json result = ops::run_op(step.op, args);
      entry["status"] = "ok";
      entry["outputs"] = detail::digest_outputs(
          result.value("outputs", nlohmann::json::array()));
      result.erase("outputs");
      entry["result"] = std::move(result);
    } catch (const std::exception& e) {
      entry["status"] = "failed";
      entry["error"] = std::string("step ") + step.name + ": " + e.what();
      failed = true;
    }
    const auto end = std::chrono::steady_clock::now();
    entry["millis"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(end - start)
            .count();
    steps_out.push_back(std::move(entry));
  }
  manifest["steps"] = std::move(steps_out);
  manifest["ok"] = !failed;

  if (!manifest_path.empty())
    atomic_write(manifest_path, manifest.dump(2) + "\n");

  return {!failed, std::move(manifest)};
}

}  // namespace csforge
