// Copyright 2026 The mdpfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdpfuzz/cli.h"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdpfuzz/bridge.h"
#include "mdpfuzz/campaign_io.h"
#include "mdpfuzz/detector.h"
#include "mdpfuzz/envs/registry.h"
#include "mdpfuzz/error.h"

namespace mdpfuzz {

using nlohmann::json;
namespace fs = std::filesystem;

std::unique_ptr<FuzzTarget> MakeTarget(const CampaignConfig& config) {
  if (config.env == "bridge") {
    return std::make_unique<BridgeTarget>(
        BridgeEndpoint{config.bridge_cmd, config.bridge_tcp, config.bridge_timeout_s});
  }
  if (!envs::IsBuiltinEnvironment(config.env)) {
    throw Error(ErrorCode::kInvalidConfig, "unknown environment '" + config.env + "'");
  }
  envs::EnvironmentBundle bundle = envs::MakeEnvironment(config.env, config.env_constants);
  return std::make_unique<LocalTarget>(bundle.env, bundle.policy);
}

ReplayOutcome ReplayCrash(const CrashRecord& record, FuzzTarget& target) {
  ReplayOutcome outcome;
  RolloutResult r = target.Rollout(record.s0, record.horizon, record.rng_seed);
  outcome.crash_step = r.crash_step;
  outcome.length = r.length();
  outcome.reproduced = r.crash_step && *r.crash_step == record.crash_step;
  std::ostringstream msg;
  if (outcome.reproduced) {
    msg << "crash reproduced at step " << record.crash_step;
  } else if (r.crash_step) {
    msg << "diverged: crash at step " << *r.crash_step << ", recorded step "
        << record.crash_step;
  } else {
    msg << "diverged at step " << record.crash_step << ": no crash within "
        << r.length() << " states (recorded crash at step " << record.crash_step << ")";
  }
  outcome.message = msg.str();
  return outcome;
}

namespace {

int ExitCodeFor(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kSnapshotFormat:
      return kExitConfig;
    default:
      return kExitEnvironment;
  }
}

json ReadJsonFile(const fs::path& path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
}

std::string ConstantsHash(const json& constants) {
  // FNV-1a over the canonical dump (keys are sorted).
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : constants.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string UtcTimestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json Manifest(const CampaignConfig& config, const FuzzTarget& target) {
  json constants = json::object();
  if (config.env != "bridge") {
    constants = envs::MakeEnvironment(config.env, config.env_constants).constants;
  } else {
    json bounds = json::array();
    for (const Interval& iv : target.spec().initial_state_bounds) bounds.push_back({iv.lo, iv.hi});
    constants = {{"state_dim", target.spec().state_dim},
                 {"bounds", bounds},
                 {"horizon_max", target.spec().default_horizon}};
  }
  return {{"config", ToJson(config)},
          {"tool_version", kToolVersion},
          {"env", config.env},
          {"env_constants", constants},
          {"constants_hash", ConstantsHash(constants)},
          {"rng_seed", config.rng_seed},
          {"start_timestamp", UtcTimestamp()}};
}

struct RunFlags {
  std::string env;
  std::string config_path;
  std::optional<int64_t> budget_iters;
  std::optional<double> budget_seconds;
  std::optional<int> corpus_size;
  std::optional<int> horizon;
  std::optional<uint64_t> rng_seed;
  std::optional<int> k;
  std::string tau;
  std::optional<double> gamma;
  std::optional<double> delta_sens;
  std::optional<double> beta;
  std::string out;
  std::optional<int> lanes;
  bool no_density_guide = false;
  std::string responsibility_normalization;
  std::string bridge_cmd;
  std::string bridge_tcp;
  std::optional<double> bridge_timeout;
  std::string clock;
  std::optional<int> corpus_cap;
  std::string resume;
};

void AddRunFlags(CLI::App* run, RunFlags& f) {
  run->add_option("--env", f.env, "acas-toy | coopnav-toy | chain | bridge");
  run->add_option("--config", f.config_path, "JSON config file (flags take precedence)");
  run->add_option("--budget-iters", f.budget_iters, "iteration budget");
  run->add_option("--budget-seconds", f.budget_seconds, "wall-clock budget");
  run->add_option("--corpus-size", f.corpus_size, "initial corpus size N");
  run->add_option("--horizon", f.horizon, "rollout horizon M (0: environment default)");
  run->add_option("--rng-seed", f.rng_seed, "root RNG seed");
  run->add_option("--K", f.k, "GMM components");
  run->add_option("--tau", f.tau, "density threshold, or 'always'");
  run->add_option("--gamma", f.gamma, "DynEM update weight");
  run->add_option("--delta-sens", f.delta_sens, "sensitivity perturbation scale");
  run->add_option("--beta", f.beta, "mutation magnitude (fraction of bound width)");
  run->add_option("--out", f.out, "output directory");
  run->add_option("--lanes", f.lanes, "worker lanes (1 is bit-reproducible)");
  run->add_flag("--no-density-guide", f.no_density_guide, "reward-only guidance");
  run->add_option("--responsibility-normalization", f.responsibility_normalization, "on|off")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--bridge-cmd", f.bridge_cmd, "command serving the bridge protocol on stdio");
  run->add_option("--bridge-tcp", f.bridge_tcp, "host:port of a bridge server");
  run->add_option("--bridge-timeout", f.bridge_timeout, "per-request timeout in seconds");
  run->add_option("--clock", f.clock, "wall|logical")->check(CLI::IsMember({"wall", "logical"}));
  run->add_option("--corpus-cap", f.corpus_cap, "corpus capacity (evicts lowest energy)");
  run->add_option("--resume", f.resume, "continue the campaign in this output directory");
}

CampaignConfig ResolveRunConfig(const RunFlags& f) {
  CampaignConfig c;
  bool clock_explicit = false;
  if (!f.resume.empty()) {
    c = ReadSavedConfig(f.resume);
    clock_explicit = true;
  }
  if (!f.config_path.empty()) {
    json j = ReadJsonFile(f.config_path);
    if (j.is_object() && j.contains("clock")) clock_explicit = true;
    c = ConfigFromJson(j, c);
  }
  if (const char* env_out = std::getenv("MDPFUZZ_OUT"); env_out && *env_out) c.out_dir = env_out;
  if (!f.env.empty()) c.env = f.env;
  if (f.budget_iters) c.budget_iters = f.budget_iters;
  if (f.budget_seconds) c.budget_seconds = f.budget_seconds;
  if (f.corpus_size) c.corpus_size = *f.corpus_size;
  if (f.horizon) c.horizon = *f.horizon;
  if (f.rng_seed) c.rng_seed = *f.rng_seed;
  if (f.k) c.k = *f.k;
  if (!f.tau.empty()) c = ConfigFromJson(json{{"tau", f.tau == "always" ? json("always") : json(std::stod(f.tau))}}, c);
  if (f.gamma) c.gamma = *f.gamma;
  if (f.delta_sens) c.delta_sens = *f.delta_sens;
  if (f.beta) c.beta = *f.beta;
  if (!f.out.empty()) c.out_dir = f.out;
  if (!f.resume.empty()) c.out_dir = f.resume;
  if (f.lanes) c.lanes = *f.lanes;
  if (f.no_density_guide) c.density_guidance = false;
  if (!f.responsibility_normalization.empty()) {
    c.normalize_responsibilities = f.responsibility_normalization == "on";
  }
  if (!f.bridge_cmd.empty()) c.bridge_cmd = f.bridge_cmd;
  if (!f.bridge_tcp.empty()) c.bridge_tcp = f.bridge_tcp;
  if (f.bridge_timeout) c.bridge_timeout_s = *f.bridge_timeout;
  if (f.corpus_cap) c.corpus_capacity = f.corpus_cap;
  if (!f.clock.empty()) {
    c.clock = f.clock == "wall" ? ClockMode::kWall : ClockMode::kLogical;
    clock_explicit = true;
  }
  if (!clock_explicit && c.budget_iters) c.clock = ClockMode::kLogical;
  c.Validate();
  return c;
}

int CmdRun(const RunFlags& flags, std::ostream& err) {
  CampaignConfig config;
  try {
    config = ResolveRunConfig(flags);
  } catch (const Error& e) {
    err << "mdpfuzz run: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument&) {
    err << "mdpfuzz run: --tau must be a number or 'always'\n";
    return kExitConfig;
  }
  try {
    std::unique_ptr<FuzzTarget> target = MakeTarget(config);
    const fs::path out = config.out_dir;
    fs::create_directories(out);
    Campaign campaign(*target, config);
    if (!flags.resume.empty()) {
      ResumeCampaign(out, campaign);
      err << "resumed at iteration " << campaign.iteration() << " with "
          << campaign.crashes().size() << " crashes\n";
    } else {
      WriteFileAtomic(out / kManifestFile, Manifest(config, *target).dump(2) + "\n");
      err << "initializing corpus of " << config.corpus_size << " seeds on " << config.env
          << "\n";
      campaign.InitCorpus();
      WriteCampaignOutputs(out, campaign);
    }
    campaign.Run(
        [&](const Campaign& c) {
          WriteCampaignOutputs(out, c);
          err << "iter " << c.iteration() << "  crashes " << c.crashes().size() << "  corpus "
              << c.corpus().size() << "\n";
        },
        [&](const CrashRecord& r) {
          err << "crash #" << campaign.crashes().size() << " at iteration " << r.iteration
              << " (step " << r.crash_step << ")\n";
        });
    WriteCampaignOutputs(out, campaign);
    err << "done: " << campaign.iteration() << " iterations, " << campaign.mutations()
        << " mutations, " << campaign.crashes().size() << " crashes -> " << out.string()
        << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "mdpfuzz run: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    err << "mdpfuzz run: " << e.what() << "\n";
    return kExitEnvironment;
  }
}

struct ReplayFlags {
  std::string crash_file;
  int64_t index = 0;
  std::string env;
  std::string config_path;
  std::string bridge_cmd;
  std::string bridge_tcp;
};

int CmdReplay(const ReplayFlags& f, std::ostream& out, std::ostream& err) {
  std::vector<CrashRecord> crashes;
  try {
    crashes = ReadCrashes(f.crash_file);
  } catch (const Error& e) {
    err << "mdpfuzz replay: " << e.what() << "\n";
    return kExitConfig;
  }
  if (f.index < 0 || static_cast<size_t>(f.index) >= crashes.size()) {
    err << "mdpfuzz replay: index " << f.index << " out of range (" << crashes.size()
        << " records)\n";
    return kExitConfig;
  }
  const CrashRecord& record = crashes[static_cast<size_t>(f.index)];
  if (!f.env.empty() && f.env != record.env) {
    err << "mdpfuzz replay: environment mismatch: record was produced on '" << record.env
        << "', replay requested '" << f.env << "'\n";
    return kExitConfig;
  }
  CampaignConfig config;
  try {
    fs::path cfg = f.config_path;
    if (cfg.empty()) {
      fs::path sibling = fs::path(f.crash_file).parent_path() / kConfigFile;
      if (fs::exists(sibling)) cfg = sibling;
    }
    if (!cfg.empty()) config = ConfigFromJson(ReadJsonFile(cfg));
    if (config.env != record.env) {
      // Constants belong to the recorded environment only.
      config.env_constants = json::object();
    }
    config.env = record.env;
    if (!f.bridge_cmd.empty()) {
      config.bridge_cmd = f.bridge_cmd;
      config.bridge_tcp.clear();
    }
    if (!f.bridge_tcp.empty()) {
      config.bridge_tcp = f.bridge_tcp;
      config.bridge_cmd.clear();
    }
  } catch (const Error& e) {
    err << "mdpfuzz replay: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    std::unique_ptr<FuzzTarget> target = MakeTarget(config);
    ReplayOutcome outcome = ReplayCrash(record, *target);
    out << outcome.message << "\n";
    return outcome.reproduced ? kExitOk : kExitNotReproduced;
  } catch (const Error& e) {
    err << "mdpfuzz replay: " << e.what() << "\n";
    if (e.code() == ErrorCode::kInvalidInitialState) {
      out << "diverged at step 0: recorded s0 is not a valid initial state\n";
      return kExitNotReproduced;
    }
    return ExitCodeFor(e);
  }
}

struct DetectFlags {
  std::string data;
  std::string model;
  std::optional<double> bandwidth;
  std::string roc;
  std::optional<double> threshold;
  std::string out;
};

int CmdDetectFit(const DetectFlags& f, std::ostream& err) {
  LabeledFeatures data = ReadLabeledCsv(fs::path(f.data));
  double h = f.bandwidth ? *f.bandwidth : MedianPairwiseBandwidth(data.points);
  ClusterModel model = FitLabeled(data.points, data.abnormal, h);
  WriteFileAtomic(f.model, ToJson(model).dump(2) + "\n");
  err << "fitted " << model.centers.size() << " centers (" << model.normal_center_ids.size()
      << " normal), bandwidth " << h << "\n";
  return kExitOk;
}

ClusterModel LoadModel(const std::string& path) {
  return ClusterModelFromJson(ReadJsonFile(path));
}

int CmdDetectScore(const DetectFlags& f, std::ostream& out) {
  ClusterModel model = LoadModel(f.model);
  LabeledFeatures data = ReadLabeledCsv(fs::path(f.data));
  std::string csv = f.threshold ? "score,abnormal\n" : "score\n";
  char buf[64];
  for (const Feature& x : data.points) {
    double s = AbnormalityScore(model, x);
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    csv += buf;
    if (f.threshold) csv += s > *f.threshold ? ",true" : ",false";
    csv += "\n";
  }
  if (f.out.empty()) {
    out << csv;
  } else {
    WriteFileAtomic(f.out, csv);
  }
  return kExitOk;
}

int CmdDetectEval(const DetectFlags& f, std::ostream& out) {
  ClusterModel model = LoadModel(f.model);
  LabeledFeatures data = ReadLabeledCsv(fs::path(f.data));
  std::vector<double> scores;
  scores.reserve(data.points.size());
  for (const Feature& x : data.points) scores.push_back(AbnormalityScore(model, x));
  double auc = AucRoc(scores, data.abnormal);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "AUC %.3f", auc);
  out << buf << "\n";
  if (!f.roc.empty()) WriteFileAtomic(f.roc, RocCsv(RocCurve(scores, data.abnormal)));
  return kExitOk;
}

int CmdStats(const std::string& dir, std::ostream& out, std::ostream& err) {
  const fs::path stats_path = fs::path(dir) / kStatsFile;
  if (!fs::is_directory(dir) || !fs::exists(stats_path)) {
    err << "mdpfuzz stats: no " << kStatsFile << " in '" << dir << "'\n";
    return kExitConfig;
  }
  CampaignStats stats;
  try {
    stats = ReadStatsCsv(stats_path);
  } catch (const Error& e) {
    err << "mdpfuzz stats: " << e.what() << "\n";
    return kExitConfig;
  }
  if (stats.rows.empty()) {
    err << "mdpfuzz stats: " << stats_path.string() << " has no rows\n";
    return kExitConfig;
  }
  out << std::left << std::setw(14) << "elapsed_s" << std::setw(12) << "iterations"
      << std::setw(11) << "mutations" << std::setw(9) << "crashes" << std::setw(8) << "corpus"
      << "mean_energy\n";
  for (const StatsRow& r : stats.rows) {
    char elapsed[32], energy[32];
    std::snprintf(elapsed, sizeof(elapsed), "%.3f", r.elapsed_s);
    std::snprintf(energy, sizeof(energy), "%.6g", r.mean_energy);
    out << std::setw(14) << elapsed << std::setw(12) << r.iterations << std::setw(11)
        << r.mutations << std::setw(9) << r.crashes << std::setw(8) << r.corpus_size << energy
        << "\n";
  }
  const StatsRow& last = stats.rows.back();
  err << last.crashes << " crashes in " << last.iterations << " iterations\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fuzzing of MDP-driven policies", "mdpfuzz"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run a fuzzing campaign");
  AddRunFlags(run, run_flags);

  ReplayFlags replay_flags;
  CLI::App* replay = app.add_subcommand("replay", "re-execute a recorded crash");
  replay->add_option("crash_file", replay_flags.crash_file, "crashes.jsonl")->required();
  replay->add_option("--index", replay_flags.index, "record index (0-based)");
  replay->add_option("--env", replay_flags.env, "expected environment name");
  replay->add_option("--config", replay_flags.config_path,
                     "config.json of the run (default: next to the crash file)");
  replay->add_option("--bridge-cmd", replay_flags.bridge_cmd, "bridge server command");
  replay->add_option("--bridge-tcp", replay_flags.bridge_tcp, "bridge server host:port");

  DetectFlags detect_flags;
  CLI::App* detect = app.add_subcommand("detect", "abnormal-behavior detector");
  detect->require_subcommand(1);
  CLI::App* fit = detect->add_subcommand("fit", "fit a model on a labeled CSV");
  fit->add_option("--data", detect_flags.data, "CSV with header label,f0,f1,...")->required();
  fit->add_option("--model", detect_flags.model, "model snapshot to write")->required();
  fit->add_option("--bandwidth", detect_flags.bandwidth, "kernel bandwidth (default: median pairwise distance)");
  CLI::App* score = detect->add_subcommand("score", "score feature rows");
  score->add_option("--data", detect_flags.data, "CSV with header label,f0,f1,...")->required();
  score->add_option("--model", detect_flags.model, "model snapshot")->required();
  score->add_option("--threshold", detect_flags.threshold, "also classify against this threshold");
  score->add_option("--out", detect_flags.out, "write scores here instead of stdout");
  CLI::App* eval = detect->add_subcommand("eval", "AUC-ROC on a labeled CSV");
  eval->add_option("--data", detect_flags.data, "CSV with header label,f0,f1,...")->required();
  eval->add_option("--model", detect_flags.model, "model snapshot")->required();
  eval->add_option("--roc", detect_flags.roc, "write the ROC curve (fpr,tpr,threshold)");

  std::string stats_dir;
  CLI::App* stats = app.add_subcommand("stats", "crashes-over-time table of a run");
  stats->add_option("dir", stats_dir, "run output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) return CmdRun(run_flags, err);
  if (replay->parsed()) return CmdReplay(replay_flags, out, err);
  if (stats->parsed()) return CmdStats(stats_dir, out, err);
  try {
    if (fit->parsed()) return CmdDetectFit(detect_flags, err);
    if (score->parsed()) return CmdDetectScore(detect_flags, out);
    if (eval->parsed()) return CmdDetectEval(detect_flags, out);
  } catch (const Error& e) {
    err << "mdpfuzz detect: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

int RunCli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace mdpfuzz
