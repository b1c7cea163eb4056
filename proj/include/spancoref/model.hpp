#ifndef SPANCOREF_MODEL_HPP
#define SPANCOREF_MODEL_HPP

#include <memory>
#include <string>

#include "spancoref/doc_context.hpp"
#include "spancoref/encoder.hpp"
#include "spancoref/mention_linking.hpp"
#include "spancoref/mention_proposal.hpp"
#include "spancoref/nn/params.hpp"
#include "spancoref/vocab.hpp"

namespace coref {

struct ModelConfig {
  int window_size = 512;  // T, also the encoder's positional capacity
  EncoderConfig encoder;  // vocab_size/max_positions are filled at build
  ProposalConfig proposal;
  LinkingConfig linking;
  SpeakerStrategy speaker_strategy = SpeakerStrategy::input;
  double aux_proposal_weight = 0.1;  // proposal BCE weight in joint training
  double lr_encoder = 1e-5;
  double lr_heads = 2e-4;
  uint64_t seed = 1;

  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

// The trainable bundle: vocabulary, shared encoder, proposal heads,
// linking head. Parameters live in one store; "enc." and "head." prefixes
// partition them into the two optimizer groups.
class CorefModel {
 public:
  CorefModel(const ModelConfig& cfg, Vocabulary vocab);

  // Checkpoint directory layout: model.bin (parameters + config header),
  // vocab.txt (one piece per line).
  void save(const std::string& dir) const;
  static std::unique_ptr<CorefModel> load(const std::string& dir);

  const ModelConfig& config() const { return cfg_; }
  // Overlays run-time knobs (proposal/linking settings, learning rates,
  // speaker strategy, seed) from `run` while keeping the checkpoint's
  // architecture (encoder dims, window size) intact.
  void set_runtime_config(const ModelConfig& run);
  const Vocabulary& vocab() const { return vocab_; }
  nn::ParamStore& store() { return store_; }
  const nn::ParamStore& store() const { return store_; }
  const TransformerEncoder& encoder() const { return *encoder_; }
  const MentionProposer& proposer() const { return *proposer_; }
  const MentionLinker& linker() const { return *linker_; }

  std::vector<nn::OptimizerGroup> optimizer_groups() const;

 private:
  ModelConfig cfg_;
  Vocabulary vocab_;
  nn::ParamStore store_;
  std::unique_ptr<TransformerEncoder> encoder_;
  std::unique_ptr<MentionProposer> proposer_;
  std::unique_ptr<MentionLinker> linker_;
};

}  // namespace coref

#endif
