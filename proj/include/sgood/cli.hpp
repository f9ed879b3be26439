#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sgood/encoder.hpp"
#include "sgood/synth.hpp"
#include "sgood/training.hpp"

namespace sgood {

inline constexpr const char* kVersion = "0.1.0";

// Flat key = value configuration mirroring the pipeline settings. Any key may
// be omitted; command-line flags override seed, out, detector and score_mode.
struct RunConfig {
  std::filesystem::path id_dir;
  std::string id_name;
  std::filesystem::path ood_dir;
  std::string ood_name;
  std::filesystem::path out = "out";
  std::string detector = "modularity";
  std::string score_mode = "nearest";  // or "literal-max"
  std::uint64_t seed = 1;

  int node_layers = 3;
  int super_layers = 2;
  int hidden = 16;
  bool super_branch = true;

  TrainConfig train;
  int wl_seeds = 100;
  SyntheticSpec synth;

  EncoderConfig encoder_config() const;
  // Sorted key=value lines; input to the config hash.
  std::string canonical() const;
  std::string config_hash() const;
};

RunConfig parse_run_config(const std::filesystem::path& file);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> detector;
  std::optional<std::string> score_mode;
};

void apply_overrides(RunConfig& cfg, const CliOverrides& overrides);

// Pipeline commands. Each writes its artifacts plus a manifest under
// cfg.out and throws std::runtime_error with a message on missing inputs.
void cmd_synth(const RunConfig& cfg);
void cmd_ingest(const RunConfig& cfg);
void cmd_partition(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_analyze_novelty(const RunConfig& cfg);
void cmd_wlbench(const RunConfig& cfg);

}  // namespace sgood
