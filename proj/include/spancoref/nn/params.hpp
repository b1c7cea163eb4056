#ifndef SPANCOREF_NN_PARAMS_HPP
#define SPANCOREF_NN_PARAMS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "spancoref/nn/graph.hpp"

namespace coref::nn {

// Ordered, named registry of trainable parameters. Creation order is part
// of the model's identity: checkpoints list parameters in this order.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;

  Parameter* create(const std::string& name, int rows, int cols);
  Parameter* find(const std::string& name) const;
  Parameter* require(const std::string& name) const;
  const std::vector<std::unique_ptr<Parameter>>& params() const {
    return params_;
  }

  void zero_grads();
  size_t total_values() const;

  // Marks every parameter whose name starts with `prefix` as frozen.
  void freeze_prefix(const std::string& prefix, bool frozen = true);

  // Self-describing archive: magic, JSON header (config + shapes), raw
  // little-endian doubles. `config_json` is any JSON text stored verbatim.
  void save(const std::string& path, const std::string& config_json) const;
  // Loads into this store: parameters must already exist with matching
  // shapes (build the model first, then load). Returns the stored config.
  std::string load_into(const std::string& path);
  // Reads only the config header.
  static std::string read_config(const std::string& path);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

struct OptimizerGroup {
  std::string name_prefix;  // parameters whose name starts with this
  double learning_rate = 1e-3;
};

// Adam with bias correction; parameters are partitioned into learning-rate
// groups by name prefix (first matching group wins). Frozen parameters are
// skipped entirely.
class AdamOptimizer {
 public:
  AdamOptimizer(ParamStore& store, std::vector<OptimizerGroup> groups,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step();
  int64_t step_count() const { return t_; }

  void save_state(const std::string& path) const;
  void load_state(const std::string& path);

 private:
  ParamStore* store_;
  std::vector<OptimizerGroup> groups_;
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Matrix> m_, v_;  // parallel to store_->params()
  double lr_for(const std::string& name) const;
};

}  // namespace coref::nn

#endif
