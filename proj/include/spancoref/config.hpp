#ifndef SPANCOREF_CONFIG_HPP
#define SPANCOREF_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "spancoref/model.hpp"

namespace coref {

// Run-level configuration: flat dotted keys from a config file plus
// command-line overrides, with paper-stated defaults baked in. The
// resolved key set is echoed next to every run's outputs.
struct RunConfig {
  // data paths
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string qa_path;
  std::string gap_path;
  std::string output_dir = "out";

  ModelConfig model;  // T=512, L=10, keep 0.2, C=50, lrs 1e-5 / 2e-4
  SpecialTokens markers;  // speaker / mention tag strings
  size_t vocab_max_size = 50000;

  int epochs = 20;
  int pretrain_epochs = 10;
  int qa_epochs = 5;
  bool freeze_encoder = false;
  bool qa_update_encoder = true;
  int eval_every = 1;  // dev evaluation cadence in epochs

  // Resolved key/value view (for echoing); includes defaults.
  std::map<std::string, std::string> resolved() const;
  void echo(const std::string& path) const;
};

// Parses "key = value" lines ('#' comments); later files/overrides win.
// Unknown keys raise ConfigError. The environment variable SPANCOREF_SEED,
// when set, overrides model.seed last.
RunConfig load_run_config(const std::vector<std::string>& config_files,
                          const std::vector<std::string>& overrides);

// Single key=value assignment, shared by file lines and --set flags.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace coref

#endif
