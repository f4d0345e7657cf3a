#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "trajsmooth/training.hpp"

namespace trajsmooth {

// Single self-describing text archive:
//   TRAJSMOOTH-CKPT 1
//   config <n>          n "key value" lines (flat TrainConfig)
//   standardizer <mean_x> <mean_y> <scale_x> <scale_y> <warn>
//   history <epochs>    one "nll kl smooth total" line per epoch
//   val_loss <v>
//   arrays <count>      per array: "name rows cols" then rows lines of values
//   end
// Floats use 17 significant digits, so save/load round-trips bit-exactly.
// Wall-clock epoch times are deliberately not part of the file; they live in
// the training log so checkpoints stay byte-identical across reruns.
struct Checkpoint {
  int version{1};
  TrainConfig config;
  ParamStore params;
  Standardizer standardizer;
  std::vector<EpochStats> history;  // wall_seconds zeroed on load
  double final_val_loss{0.0};
};

Checkpoint make_checkpoint(const TrainConfig& config, const TrainResult& result);

std::string checkpoint_to_text(const Checkpoint& ckpt);
Checkpoint checkpoint_from_text(const std::string& text);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Flat key-value view of a TrainConfig (also the config-file schema).
std::map<std::string, std::string> train_config_to_kv(const TrainConfig& config);
TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv);

}  // namespace trajsmooth
