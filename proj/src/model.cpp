#include "spancoref/model.hpp"

#include <filesystem>

#include "json.hpp"

namespace coref {

using nlohmann::json;

void ModelConfig::validate() const {
  if (window_size < 2 || window_size % 2 != 0)
    throw ConfigError("model: window_size must be even and >= 2");
  proposal.validate();
  linking.validate();
  if (aux_proposal_weight < 0)
    throw ConfigError("model: aux_proposal_weight must be >= 0");
  if (lr_encoder <= 0 || lr_heads <= 0)
    throw ConfigError("model: learning rates must be positive");
}

std::string ModelConfig::to_json() const {
  json j;
  j["window_size"] = window_size;
  j["encoder"] = json::parse(encoder.to_json());
  j["proposal"] = {{"max_span_length", proposal.max_span_length},
                   {"keep_ratio", proposal.keep_ratio},
                   {"negative_ratio", proposal.negative_ratio},
                   {"cross_sentence_spans", proposal.cross_sentence_spans}};
  j["linking"] = {{"max_span_length", linking.max_span_length},
                  {"antecedent_cap", linking.antecedent_cap},
                  {"lambda_mix", linking.lambda_mix},
                  {"chunk_stride", linking.chunk_stride},
                  {"query_includes_speaker", linking.query_includes_speaker}};
  j["speaker_strategy"] = to_string(speaker_strategy);
  j["aux_proposal_weight"] = aux_proposal_weight;
  j["lr_encoder"] = lr_encoder;
  j["lr_heads"] = lr_heads;
  j["seed"] = seed;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  ModelConfig c;
  c.window_size = j.at("window_size").get<int>();
  c.encoder = EncoderConfig::from_json(j.at("encoder").dump());
  const auto& p = j.at("proposal");
  c.proposal.max_span_length = p.at("max_span_length").get<int>();
  c.proposal.keep_ratio = p.at("keep_ratio").get<double>();
  c.proposal.negative_ratio = p.at("negative_ratio").get<double>();
  c.proposal.cross_sentence_spans = p.at("cross_sentence_spans").get<bool>();
  const auto& l = j.at("linking");
  c.linking.max_span_length = l.at("max_span_length").get<int>();
  c.linking.antecedent_cap = l.at("antecedent_cap").get<int>();
  c.linking.lambda_mix = l.at("lambda_mix").get<double>();
  c.linking.chunk_stride = l.at("chunk_stride").get<int>();
  c.linking.query_includes_speaker = l.at("query_includes_speaker").get<bool>();
  c.speaker_strategy =
      speaker_strategy_from_string(j.at("speaker_strategy").get<std::string>());
  c.aux_proposal_weight = j.at("aux_proposal_weight").get<double>();
  c.lr_encoder = j.at("lr_encoder").get<double>();
  c.lr_heads = j.at("lr_heads").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

CorefModel::CorefModel(const ModelConfig& cfg, Vocabulary vocab)
    : cfg_(cfg), vocab_(std::move(vocab)) {
  cfg_.encoder.vocab_size = vocab_.size();
  cfg_.encoder.max_positions = cfg_.window_size;
  cfg_.validate();
  cfg_.encoder.validate();

  std::mt19937_64 init_rng(cfg_.seed);
  encoder_ = std::make_unique<TransformerEncoder>(cfg_.encoder, store_,
                                                  init_rng, "enc.");
  proposer_ = std::make_unique<MentionProposer>(cfg_.encoder.hidden_dim,
                                                store_, init_rng,
                                                "head.mention.");
  linker_ = std::make_unique<MentionLinker>(cfg_.encoder.hidden_dim, store_,
                                            init_rng, "head.answer.");
}

void CorefModel::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  vocab_.save(dir + "/vocab.txt");
  store_.save(dir + "/model.bin", cfg_.to_json());
}

std::unique_ptr<CorefModel> CorefModel::load(const std::string& dir) {
  Vocabulary vocab = Vocabulary::load(dir + "/vocab.txt");
  const ModelConfig cfg =
      ModelConfig::from_json(nn::ParamStore::read_config(dir + "/model.bin"));
  if (cfg.encoder.vocab_size != vocab.size())
    throw std::runtime_error(
        "checkpoint " + dir + ": vocabulary size " +
        std::to_string(vocab.size()) + " does not match model (" +
        std::to_string(cfg.encoder.vocab_size) + ")");
  auto model = std::make_unique<CorefModel>(cfg, std::move(vocab));
  model->store_.load_into(dir + "/model.bin");
  return model;
}

void CorefModel::set_runtime_config(const ModelConfig& run) {
  cfg_.proposal = run.proposal;
  cfg_.linking = run.linking;
  cfg_.speaker_strategy = run.speaker_strategy;
  cfg_.aux_proposal_weight = run.aux_proposal_weight;
  cfg_.lr_encoder = run.lr_encoder;
  cfg_.lr_heads = run.lr_heads;
  cfg_.seed = run.seed;
  cfg_.validate();
}

std::vector<nn::OptimizerGroup> CorefModel::optimizer_groups() const {
  return {{"enc.", cfg_.lr_encoder}, {"head.", cfg_.lr_heads}};
}

}  // namespace coref
