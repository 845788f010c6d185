// Copyright 2026 The revfocus Authors.
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

#include <CLI11.hpp>

#include <iostream>

#include <spdlog/spdlog.h>

#include "revfocus/pipeline.hpp"

namespace {

using namespace revfocus;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kMissing = 3,
  kLoss = 4,
  kKappaFloor = 5,
};

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::size_t> parallelism;
  bool offline = false;
  bool verbose = false;
  bool quiet = false;
};

RunConfig load_config(const Common& common) {
  std::map<std::string, std::string> overrides;
  for (const auto& s : common.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kConfigError, "--set expects key=value, got '" + s + "'");
    }
    overrides[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (common.parallelism) overrides["parallelism"] = std::to_string(*common.parallelism);
  if (common.offline) overrides["cache.offline"] = "true";
  return RunConfig::load(common.config_path, overrides);
}

std::unique_ptr<Gateway> make_gateway(const RunConfig& config) {
  GatewayOptions options;
  options.cache_dir = config.cache_dir;
  options.offline = config.offline;
  return std::make_unique<Gateway>(config.endpoint_list(), std::make_shared<HttplibTransport>(),
                                   options);
}

void log_gateway(const Gateway& gw) {
  const auto s = gw.stats();
  spdlog::info("llm calls: {} ({} cached, {} http attempts, {} retries)", s.calls, s.cache_hits,
               s.http_attempts, s.retries);
}

int finish(const StageSummary& summary, const RunConfig& config) {
  if (summary.over_threshold(config.loss_threshold)) {
    spdlog::error("{}: lost {:.1f}% of items (threshold {:.1f}%)", summary.stage,
                  100.0 * summary.loss(), 100.0 * config.loss_threshold);
    for (const auto& e : summary.excluded) {
      spdlog::error("  {}: {}: {}", e.id, error_code_name(e.error.code), e.error.message);
    }
    return kLoss;
  }
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfigError:
      return kConfig;
    case ErrorCode::kMissingStage:
      return kMissing;
    default:
      return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"revfocus: compare what human and LLM reviewers focus on"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", common.config_path, "run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", common.sets, "override a configuration key (key=value)");
    cmd->add_option("-j,--parallelism", common.parallelism, "concurrent requests")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--offline", common.offline, "answer from the response cache only");
    cmd->add_flag("-v,--verbose", common.verbose, "debug logging");
    cmd->add_flag("-q,--quiet", common.quiet, "warnings and errors only");
  };

  auto* ingest = app.add_subcommand("ingest", "load exports, filter and sample the corpus");
  auto* extract = app.add_subcommand("extract-expert", "extract expert points from meta-reviews");
  auto* generate = app.add_subcommand("generate", "ask each configured model for a review");
  std::vector<std::string> models;
  generate->add_option("--models", models, "subset of generation.models")->delimiter(',');
  auto* annotate = app.add_subcommand("annotate", "label every point with target and aspect");
  auto* irr = app.add_subcommand("irr", "score the annotator against gold labels");
  auto* evaluate = app.add_subcommand("evaluate", "compute metric_report.json");
  auto* report = app.add_subcommand("report", "render report.txt and radar.csv");
  for (auto* cmd : {ingest, extract, generate, annotate, irr, evaluate, report}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(common.verbose ? spdlog::level::debug
                    : common.quiet ? spdlog::level::warn
                                   : spdlog::level::info);
  try {
    const auto config = load_config(common);
    if (*ingest) return finish(run_ingest(config), config);
    if (*extract) {
      auto gw = make_gateway(config);
      const auto s = run_extract_expert(config, *gw);
      log_gateway(*gw);
      return finish(s, config);
    }
    if (*generate) {
      for (const auto& m : models) {
        if (std::find(config.review_models.begin(), config.review_models.end(), m) ==
            config.review_models.end()) {
          throw Error(ErrorCode::kConfigError, "model '" + m + "' is not in generation.models");
        }
      }
      auto gw = make_gateway(config);
      const auto s = run_generate(config, *gw, models);
      log_gateway(*gw);
      return finish(s, config);
    }
    if (*annotate) {
      auto gw = make_gateway(config);
      const auto s = run_annotate(config, *gw);
      log_gateway(*gw);
      return finish(s, config);
    }
    if (*irr) {
      auto gw = make_gateway(config);
      const auto run = run_irr(config, *gw);
      log_gateway(*gw);
      std::cout << "kappa target " << run.report.kappa_target << ", aspect "
                << run.report.kappa_aspect << " over " << run.report.n_items << " points\n";
      if (config.kappa_floor && (run.report.kappa_target < *config.kappa_floor ||
                                 run.report.kappa_aspect < *config.kappa_floor)) {
        spdlog::error("agreement below the floor of {}", *config.kappa_floor);
        return kKappaFloor;
      }
      return finish(run.summary, config);
    }
    if (*evaluate) {
      const auto r = run_evaluate(config);
      spdlog::info("wrote {} ({} model group(s))", RunPaths{config.run_dir}.metric_report().string(),
                   r.at("models").size());
      return kOk;
    }
    if (*report) {
      run_report(config);
      std::cout << read_file(RunPaths{config.run_dir}.report_text());
      return kOk;
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kFailure;
}
