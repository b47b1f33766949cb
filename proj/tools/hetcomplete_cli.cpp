// Copyright 2026 The hetcomplete Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// hetcomplete: generate | search | oracle | compare | report
//
// Exit status: 0 success, 2 invalid input, 3 runtime failure.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hetcomplete/errors.hpp"
#include "hetcomplete/hetgraph.hpp"
#include "hetcomplete/io.hpp"
#include "hetcomplete/planted.hpp"
#include "hetcomplete/search.hpp"

namespace hc = hetcomplete;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string default_truth_path(const std::string& graph_path) {
  const auto dot = graph_path.rfind(".json");
  return (dot == std::string::npos ? graph_path : graph_path.substr(0, dot)) + ".truth.json";
}

hc::SearchConfig load_config(const std::string& path) {
  return path.empty() ? hc::SearchConfig{} : hc::config_from_json(hc::load_json(path));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute-completion search for heterogeneous graphs"};
  app.require_subcommand(1);

  std::string spec_path, out_path, truth_path, graph_path, config_path, search_path, oracle_path, result_path;
  int repeats = 0;
  int workers = 0;
  long long seed = -1;
  double budget = 0.0;

  auto* gen = app.add_subcommand("generate", "Write a planted synthetic graph and its truth sidecar");
  gen->add_option("--spec", spec_path, "Planted spec (JSON)")->required();
  gen->add_option("--out", out_path, "Graph document to write")->required();
  gen->add_option("--truth", truth_path, "Truth sidecar (default: <out>.truth.json)");

  auto* search = app.add_subcommand("search", "Run the operator search, retrain and evaluate");
  search->add_option("--graph", graph_path, "Graph document")->required();
  search->add_option("--config", config_path, "Search config (JSON key/value)");
  search->add_option("--out", out_path, "Result document to write")->required();
  search->add_option("--truth", truth_path, "Planted truth; required when cluster_mode is fixed");
  search->add_option("--repeats", repeats, "Number of seeds (overrides config)");
  search->add_option("--seed", seed, "Base seed (overrides config)");
  search->add_option("--workers", workers, "Worker threads (0 = all cores)");

  auto* oracle = app.add_subcommand("oracle", "Enumerate every per-group assignment");
  oracle->add_option("--graph", graph_path, "Graph document")->required();
  oracle->add_option("--truth", truth_path, "Planted truth sidecar")->required();
  oracle->add_option("--config", config_path, "Config supplying trainer settings");
  oracle->add_option("--out", out_path, "Oracle document to write")->required();
  oracle->add_option("--seed", seed, "Seed (overrides config)");
  oracle->add_option("--workers", workers, "Worker threads (0 = all cores)");
  oracle->add_option("--budget", budget, "Stop scheduling after this many seconds (0 = none)");

  auto* cmp = app.add_subcommand("compare", "Compare a search result against the oracle");
  cmp->add_option("--search", search_path, "Search result")->required();
  cmp->add_option("--oracle", oracle_path, "Oracle result")->required();
  cmp->add_option("--out", out_path, "Optional report document");

  auto* rep = app.add_subcommand("report", "Print the operator distribution of a search result");
  rep->add_option("--result", result_path, "Search result")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) {
      const hc::PlantedData data = hc::gen_synthetic(hc::planted_spec_from_json(hc::load_json(spec_path)));
      if (truth_path.empty()) truth_path = default_truth_path(out_path);
      hc::write_atomic(out_path, hc::dataset_to_json(data.dataset).dump() + "\n");
      hc::write_atomic(truth_path, hc::truth_to_json(data.truth).dump(2) + "\n");
      std::cerr << "wrote " << out_path << " (" << data.dataset.graph.num_nodes() << " nodes) and " << truth_path
                << "\n";
    } else if (*search) {
      const auto t0 = std::chrono::steady_clock::now();
      const hc::Dataset ds = hc::parse_dataset(hc::load_json(graph_path));
      hc::SearchConfig cfg = load_config(config_path);
      if (repeats > 0) cfg.repeats = repeats;
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (workers > 0) cfg.workers = workers;
      hc::validate(cfg);
      std::optional<std::vector<int>> fixed;
      if (!truth_path.empty()) {
        const hc::PlantedTruth truth = hc::truth_from_json(hc::load_json(truth_path));
        if (truth.fingerprint != ds.graph.fingerprint()) throw hc::ValidationError("truth file belongs to another graph");
        fixed = truth.group_of_missing;
      }
      const nlohmann::json doc = hc::search_repeats(ds, cfg, fixed);
      hc::write_atomic(out_path, doc.dump(2) + "\n");
      const auto& s = doc.at("summary").at("test");
      std::cerr << "search: " << cfg.repeats << " run(s) in " << seconds_since(t0) << " s; test " << s.dump() << "\n";
    } else if (*oracle) {
      const auto t0 = std::chrono::steady_clock::now();
      const hc::Dataset ds = hc::parse_dataset(hc::load_json(graph_path));
      const hc::PlantedTruth truth = hc::truth_from_json(hc::load_json(truth_path));
      if (truth.fingerprint != ds.graph.fingerprint()) throw hc::ValidationError("truth file belongs to another graph");
      hc::SearchConfig cfg = load_config(config_path);
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      const hc::Problem p = hc::make_problem(ds, cfg);
      const hc::OracleResult r = hc::brute_force_search(p, truth.group_of_missing,
                                                        static_cast<int>(truth.group_ops.size()), workers, budget);
      hc::write_atomic(out_path, hc::oracle_to_json(r, p.task).dump(2) + "\n");
      std::cerr << "oracle: " << r.rows.size() << " assignments in " << seconds_since(t0) << " s; argmin "
                << hc::assignment_string(r.rows[r.argmin].ops) << " (val loss " << r.rows[r.argmin].val_loss << ")"
                << (r.complete ? "" : " [partial: time budget exceeded]") << "\n";
    } else if (*cmp) {
      const hc::CompareReport r = hc::compare(hc::load_json(search_path), hc::load_json(oracle_path));
      const std::string text = hc::compare_to_json(r).dump(2) + "\n";
      if (!out_path.empty()) hc::write_atomic(out_path, text);
      std::cout << text;
    } else if (*rep) {
      const nlohmann::json doc = hc::load_json(result_path);
      std::cout << hc::format_distribution(hc::operator_distribution(doc));
      const nlohmann::json& r = doc.contains("runs") ? doc.at("runs").at(0) : doc;
      std::cout << "\ncluster  size  op\n";
      for (const auto& c : r.at("clusters"))
        std::printf("%7d  %4d  %s\n", c.at("id").get<int>(), c.at("size").get<int>(),
                    c.at("op").get<std::string>().c_str());
      if (doc.contains("summary")) std::cout << "\nsummary " << doc.at("summary").dump(2) << "\n";
    }
  } catch (const hc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed document: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
