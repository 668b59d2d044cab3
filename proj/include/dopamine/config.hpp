#pragma once

#include <filesystem>
#include <string>

#include "dopamine/model.hpp"
#include "dopamine/trainer.hpp"

namespace dopamine {

/// Flat key=value run configuration covering architecture, training and
/// fine-tuning. Unknown keys are rejected; CLI overrides are applied after
/// the file with the same validation.
struct RunConfig {
  ModelConfig arch;
  TrainConfig train;
  FinetuneConfig finetune;
  std::string train_dir;

  /// Applies "key = value". Throws std::invalid_argument on unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Every key in fixed order, as "key = value" lines.
  std::string render() const;
};

/// Parses a config file ('#' starts a comment, blank lines ignored).
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies "key=value" override strings in order.
void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides);

}  // namespace dopamine
