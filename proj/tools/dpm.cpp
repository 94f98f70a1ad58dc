// Copyright 2026 The Deep Pacejka Authors
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

// dpm: generate data, train models, evaluate them and drive the controller.
//
// Exit codes: 0 ok, 2 configuration or usage error, 3 simulation
// divergence, 4 training divergence, 5 control failure (diverged episode).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpm/checkpoint.hpp"
#include "dpm/config.hpp"
#include "dpm/harness.hpp"
#include "dpm/pipeline.hpp"
#include "dpm/training.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSim = 3;
constexpr int kExitTrain = 4;
constexpr int kExitControl = 5;

// Diagnostics go to stderr as JSON lines so that stdout stays clean.
void Log(const std::string& event, dpm::json fields = dpm::json::object()) {
  fields["event"] = event;
  std::cerr << fields.dump() << '\n';
}

void RequireFile(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw dpm::ConfigError("file not found: " + path);
  }
}

std::string CsvPath(const std::string& prefix) { return prefix + ".csv"; }
std::string MetaPath(const std::string& prefix) { return prefix + ".json"; }

dpm::Dataset LoadDatasetPrefix(const std::string& prefix) {
  RequireFile(CsvPath(prefix));
  RequireFile(MetaPath(prefix));
  return dpm::ReadDataset(CsvPath(prefix), MetaPath(prefix));
}

dpm::Model LoadCheckpoint(const std::string& path) {
  RequireFile(path);
  try {
    return dpm::LoadModel(path);
  } catch (const std::exception& e) {
    throw dpm::ConfigError("invalid checkpoint " + path + ": " + e.what());
  }
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

// Pulls `--section.key value` (and `--seed value`) overrides out of argv.
std::map<std::string, std::string> ExtractOverrides(
    std::vector<std::string>& args) {
  std::map<std::string, std::string> out;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    const bool dotted = a.rfind("--", 0) == 0 &&
                        a.find('.') != std::string::npos &&
                        a.find('.') < a.find('=');
    const bool seed = a == "--seed" || a.rfind("--seed=", 0) == 0;
    if (!dotted && !seed) {
      rest.push_back(a);
      continue;
    }
    std::string key = a.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else if (i + 1 < args.size()) {
      value = args[++i];
    } else {
      throw dpm::ConfigError("missing value for --" + key);
    }
    out[key] = value;
  }
  args = rest;
  return out;
}

struct Options {
  std::string config;
  std::string out;
  std::string split = "train";
  std::string dataset;
  std::string model = "";
  int epochs = -1;
  std::string checkpoint;
  std::string controller;
  int seed_index = 0;
  int seeds = 0;
  std::string baseline_checkpoint;
  std::string eval_dataset;
  std::vector<std::string> pairings = {"risk", "smoothness"};
  std::map<std::string, std::string> overrides;
};

dpm::RunConfig ReadConfig(const Options& o) {
  return dpm::LoadRunConfig(o.config, o.overrides);
}

int CmdGenerate(const Options& o) {
  const dpm::RunConfig c = ReadConfig(o);
  const auto split =
      o.split == "eval" ? dpm::DataSplit::kEval : dpm::DataSplit::kTrain;
  dpm::Dataset ds;
  try {
    ds = dpm::GenerateSplit(c, split);
  } catch (const dpm::NumericalDivergence& e) {
    Log("simulation_diverged", {{"message", e.what()}});
    return kExitSim;
  }
  dpm::WriteDataset(ds, CsvPath(o.out), MetaPath(o.out));
  std::map<double, std::size_t> coverage;
  for (const auto& s : ds.samples) ++coverage[s.mu];
  std::cout << "samples " << ds.size() << '\n';
  for (const auto& [mu, n] : coverage) {
    std::cout << "mu " << mu << " samples " << n << '\n';
  }
  return kExitOk;
}

int CmdTrain(const Options& o) {
  dpm::RunConfig c = ReadConfig(o);
  const dpm::Dataset ds = LoadDatasetPrefix(o.dataset);
  dpm::ModelKind kind = c.model;
  if (!o.model.empty()) kind = dpm::ModelKindFromString(o.model);
  if (o.epochs >= 0) c.train.epochs = o.epochs;
  dpm::TrainResult r;
  try {
    r = dpm::train(kind, ds, c.train);
  } catch (const dpm::DivergedTraining& e) {
    Log("training_diverged", {{"message", e.what()}});
    return kExitTrain;
  }
  dpm::SaveModel(r.model, o.out + ".json");
  dpm::WriteLossCsv(r.history, o.out + "_loss.csv");
  Log("trained", {{"model", dpm::ToString(kind)},
                  {"epochs", r.history.size()},
                  {"best_epoch", r.best_epoch},
                  {"early_stopped", r.early_stopped}});
  return kExitOk;
}

int CmdEval(const Options& o) {
  const dpm::Model m = LoadCheckpoint(o.checkpoint);
  const dpm::Dataset ds = LoadDatasetPrefix(o.dataset);
  if (ds.meta.history != m.history) {
    throw dpm::ConfigError("dataset history length does not match checkpoint");
  }
  std::cout << dpm::MetricsToJson(dpm::evaluate(m, ds)).dump(2) << '\n';
  return kExitOk;
}

int CmdDrive(const Options& o) {
  const dpm::RunConfig c = ReadConfig(o);
  auto model = std::make_shared<const dpm::Model>(LoadCheckpoint(o.checkpoint));
  const std::string arm = o.controller.empty() ? c.scenario.controller
                                               : o.controller;
  const dpm::Scenario sc = dpm::BuildScenario(c);
  const auto ctrl = dpm::MakeDpmArm(arm, model, c.smppi).make(sc);
  const dpm::EpisodeResult r = dpm::run_episode(
      sc, *ctrl, c.vehicle, c.pacejka,
      dpm::DeriveSeed(sc.seed, static_cast<std::uint64_t>(o.seed_index)),
      {c.smppi.rho});
  {
    std::ofstream os(o.out + ".csv");
    if (!os) throw std::runtime_error("cannot write " + o.out + ".csv");
    dpm::WriteEpisodeCsv(os, r.log);
  }
  const std::string metrics = dpm::EpisodeMetricsToJson(r.metrics).dump(2);
  WriteText(o.out + "_metrics.json", metrics + "\n");
  std::cout << metrics << '\n';
  if (r.metrics.diverged) {
    Log("episode_diverged", {{"controller", arm}});
    return kExitControl;
  }
  return kExitOk;
}

int CmdCompare(const Options& o) {
  const dpm::RunConfig c = ReadConfig(o);
  auto model = std::make_shared<const dpm::Model>(LoadCheckpoint(o.checkpoint));
  const int n_seeds = o.seeds > 0 ? o.seeds : c.scenario.seeds;
  if (n_seeds < 5) throw dpm::ConfigError("compare needs at least 5 seeds");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_seeds));
  std::iota(seeds.begin(), seeds.end(), 0);

  std::vector<dpm::ClosedLoopPairing> pairings;
  bool model_pairing = false;
  for (const auto& p : o.pairings) {
    if (p == "risk") {
      pairings.push_back({"risk", dpm::MakeDpmArm("smppi-risk", model, c.smppi),
                          dpm::MakeDpmArm("smppi", model, c.smppi)});
    } else if (p == "smoothness") {
      pairings.push_back({"smoothness",
                          dpm::MakeDpmArm("smppi", model, c.smppi),
                          dpm::MakeDpmArm("mppi", model, c.smppi)});
    } else if (p == "model") {
      model_pairing = true;
    } else {
      throw dpm::ConfigError("unknown pairing: " + p);
    }
  }
  const std::vector<dpm::Scenario> scenarios = {dpm::BuildScenario(c)};
  dpm::ComparisonReport rep =
      dpm::compare(pairings, scenarios, seeds, c.vehicle, c.pacejka,
                   static_cast<unsigned>(c.smppi.threads));
  if (model_pairing) {
    if (o.baseline_checkpoint.empty() || o.eval_dataset.empty()) {
      throw dpm::ConfigError(
          "the model pairing needs --baseline-checkpoint and --eval-dataset");
    }
    const dpm::Model base = LoadCheckpoint(o.baseline_checkpoint);
    const dpm::Dataset ds = LoadDatasetPrefix(o.eval_dataset);
    dpm::ComparisonReport::ModelRow row;
    row.name = "model";
    row.dataset = o.eval_dataset;
    row.rmse_a.push_back(dpm::evaluate(*model, ds).rmse_norm_total);
    row.rmse_b.push_back(dpm::evaluate(base, ds).rmse_norm_total);
    rep.model_rows.push_back(row);
  }
  WriteText(o.out + ".json", dpm::ReportToJson(rep).dump(2) + "\n");
  {
    std::ofstream os(o.out + ".csv");
    if (!os) throw std::runtime_error("cannot write " + o.out + ".csv");
    dpm::WriteReportCsv(rep, os);
  }
  for (const auto& r : rep.rows) {
    std::cout << r.pairing << ' ' << r.scenario << ' ' << r.a.arm
              << " divergence " << dpm::DivergenceRate(r.a.episodes) << ' '
              << r.b.arm << " divergence "
              << dpm::DivergenceRate(r.b.episodes) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  Options o;
  try {
    o.overrides = ExtractOverrides(args);
  } catch (const dpm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  CLI::App app{"Deep Pacejka model training and risk-aware SMPPI control"};
  app.require_subcommand(1);
  app.footer(
      "Any config field can be overridden with --section.key value, "
      "e.g. --smppi.samples 128 or --seed 7.");

  auto* gen = app.add_subcommand("generate", "Simulate an excitation dataset");
  gen->add_option("-c,--config", o.config, "Run configuration (INI)")
      ->required();
  gen->add_option("-o,--out", o.out, "Output prefix (<out>.csv, <out>.json)")
      ->required();
  gen->add_option("--split", o.split, "Friction set to simulate")
      ->check(CLI::IsMember({"train", "eval"}));

  auto* tr = app.add_subcommand("train", "Train a model on a dataset");
  tr->add_option("-c,--config", o.config, "Run configuration (INI)")
      ->required();
  tr->add_option("-d,--dataset", o.dataset, "Dataset prefix")->required();
  tr->add_option("-o,--out", o.out,
                 "Output prefix (<out>.json checkpoint, <out>_loss.csv)")
      ->required();
  tr->add_option("--model", o.model, "Model kind (default: [train] model)")
      ->check(CLI::IsMember({"baseline", "dpm"}));
  tr->add_option("--epochs", o.epochs, "Epoch budget (default: [train] epochs)")
      ->check(CLI::NonNegativeNumber);

  auto* ev = app.add_subcommand("eval", "Print evaluation metrics as JSON");
  ev->add_option("-k,--checkpoint", o.checkpoint, "Model checkpoint")
      ->required();
  ev->add_option("-d,--dataset", o.dataset, "Dataset prefix")->required();

  auto* dr = app.add_subcommand("drive", "Run one closed-loop episode");
  dr->add_option("-c,--config", o.config, "Run configuration (INI)")
      ->required();
  dr->add_option("-k,--checkpoint", o.checkpoint, "DPM checkpoint")
      ->required();
  dr->add_option("-o,--out", o.out,
                 "Output prefix (<out>.csv log, <out>_metrics.json)")
      ->required();
  dr->add_option("--controller", o.controller,
                 "Controller arm (default: [scenario] controller)")
      ->check(CLI::IsMember({"mppi", "smppi", "smppi-risk"}));
  dr->add_option("--seed-index", o.seed_index, "Episode seed index")
      ->check(CLI::NonNegativeNumber);

  auto* cmp = app.add_subcommand("compare", "Run paired closed-loop arms");
  cmp->add_option("-c,--config", o.config, "Run configuration (INI)")
      ->required();
  cmp->add_option("-k,--checkpoint", o.checkpoint, "DPM checkpoint")
      ->required();
  cmp->add_option("-o,--out", o.out, "Output prefix (<out>.json, <out>.csv)")
      ->required();
  cmp->add_option("--seeds", o.seeds,
                  "Paired episodes per arm (default: [scenario] seeds)")
      ->check(CLI::PositiveNumber);
  cmp->add_option("--pairings", o.pairings,
                  "Pairings to run: risk, smoothness, model")
      ->delimiter(',');
  cmp->add_option("--baseline-checkpoint", o.baseline_checkpoint,
                  "Baseline checkpoint for the model pairing");
  cmp->add_option("--eval-dataset", o.eval_dataset,
                  "Dataset prefix for the model pairing");

  auto* cfg = app.add_subcommand("config", "Print the default configuration");

  std::vector<const char*> cargv = {argv[0]};
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()),
              const_cast<char**>(cargv.data()));
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    if (*gen) return CmdGenerate(o);
    if (*tr) return CmdTrain(o);
    if (*ev) return CmdEval(o);
    if (*dr) return CmdDrive(o);
    if (*cmp) return CmdCompare(o);
    if (*cfg) {
      std::cout << dpm::DefaultConfigText();
      return kExitOk;
    }
  } catch (const dpm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dpm::NumericalDivergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSim;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
