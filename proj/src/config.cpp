#include "spancoref/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace coref {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key " + key + ": expected a boolean, got '" + v +
                    "'");
}

int parse_int(const std::string& v, const std::string& key) {
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected an integer, got '" +
                      v + "'");
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected a number, got '" + v +
                      "'");
  }
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "data.train") cfg.train_path = value;
  else if (key == "data.dev") cfg.dev_path = value;
  else if (key == "data.test") cfg.test_path = value;
  else if (key == "data.qa") cfg.qa_path = value;
  else if (key == "data.gap") cfg.gap_path = value;
  else if (key == "output.dir") cfg.output_dir = value;
  else if (key == "model.window_size") cfg.model.window_size = parse_int(value, key);
  else if (key == "model.max_span_length") {
    cfg.model.proposal.max_span_length = parse_int(value, key);
    cfg.model.linking.max_span_length = cfg.model.proposal.max_span_length;
  } else if (key == "model.keep_ratio") cfg.model.proposal.keep_ratio = parse_double(value, key);
  else if (key == "model.negative_ratio") cfg.model.proposal.negative_ratio = parse_double(value, key);
  else if (key == "model.cross_sentence_spans") cfg.model.proposal.cross_sentence_spans = parse_bool(value, key);
  else if (key == "model.antecedent_cap") cfg.model.linking.antecedent_cap = parse_int(value, key);
  else if (key == "model.lambda_mix") cfg.model.linking.lambda_mix = parse_double(value, key);
  else if (key == "model.chunk_stride") cfg.model.linking.chunk_stride = parse_int(value, key);
  else if (key == "model.query_includes_speaker") cfg.model.linking.query_includes_speaker = parse_bool(value, key);
  else if (key == "model.speaker_strategy") cfg.model.speaker_strategy = speaker_strategy_from_string(value);
  else if (key == "model.aux_proposal_weight") cfg.model.aux_proposal_weight = parse_double(value, key);
  else if (key == "model.lr_encoder") cfg.model.lr_encoder = parse_double(value, key);
  else if (key == "model.lr_heads") cfg.model.lr_heads = parse_double(value, key);
  else if (key == "model.seed") cfg.model.seed = static_cast<uint64_t>(std::stoull(value));
  else if (key == "encoder.hidden_dim") cfg.model.encoder.hidden_dim = parse_int(value, key);
  else if (key == "encoder.num_layers") cfg.model.encoder.num_layers = parse_int(value, key);
  else if (key == "encoder.num_heads") cfg.model.encoder.num_heads = parse_int(value, key);
  else if (key == "encoder.ffn_dim") cfg.model.encoder.ffn_dim = parse_int(value, key);
  else if (key == "encoder.dropout") cfg.model.encoder.dropout = parse_double(value, key);
  else if (key == "model.speaker_tag_open") cfg.markers.speaker_open = value;
  else if (key == "model.speaker_tag_close") cfg.markers.speaker_close = value;
  else if (key == "model.mention_tag_open") cfg.markers.mention_open = value;
  else if (key == "model.mention_tag_close") cfg.markers.mention_close = value;
  else if (key == "vocab.max_size") cfg.vocab_max_size = static_cast<size_t>(parse_int(value, key));
  else if (key == "train.epochs") cfg.epochs = parse_int(value, key);
  else if (key == "train.pretrain_epochs") cfg.pretrain_epochs = parse_int(value, key);
  else if (key == "train.qa_epochs") cfg.qa_epochs = parse_int(value, key);
  else if (key == "train.freeze_encoder") cfg.freeze_encoder = parse_bool(value, key);
  else if (key == "train.qa_update_encoder") cfg.qa_update_encoder = parse_bool(value, key);
  else if (key == "train.eval_every") cfg.eval_every = parse_int(value, key);
  else throw ConfigError("unknown config key: " + key);
}

RunConfig load_run_config(const std::vector<std::string>& config_files,
                          const std::vector<std::string>& overrides) {
  RunConfig cfg;
  for (const std::string& path : config_files) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
      apply_config_entry(cfg, trim(line.substr(0, eq)),
                         trim(line.substr(eq + 1)));
    }
  }
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must look like key=value: " + ov);
    apply_config_entry(cfg, trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }
  if (const char* env_seed = std::getenv("SPANCOREF_SEED"))
    cfg.model.seed = static_cast<uint64_t>(std::stoull(env_seed));
  return cfg;
}

std::map<std::string, std::string> RunConfig::resolved() const {
  std::map<std::string, std::string> kv;
  auto put = [&kv](const std::string& k, const std::string& v) { kv[k] = v; };
  auto put_d = [&kv](const std::string& k, double v) {
    std::ostringstream os;
    os << v;
    kv[k] = os.str();
  };
  put("data.train", train_path);
  put("data.dev", dev_path);
  put("data.test", test_path);
  put("data.qa", qa_path);
  put("data.gap", gap_path);
  put("output.dir", output_dir);
  put("model.window_size", std::to_string(model.window_size));
  put("model.max_span_length", std::to_string(model.proposal.max_span_length));
  put_d("model.keep_ratio", model.proposal.keep_ratio);
  put_d("model.negative_ratio", model.proposal.negative_ratio);
  put("model.cross_sentence_spans",
      model.proposal.cross_sentence_spans ? "true" : "false");
  put("model.antecedent_cap", std::to_string(model.linking.antecedent_cap));
  put_d("model.lambda_mix", model.linking.lambda_mix);
  put("model.chunk_stride", std::to_string(model.linking.chunk_stride));
  put("model.query_includes_speaker",
      model.linking.query_includes_speaker ? "true" : "false");
  put("model.speaker_strategy", to_string(model.speaker_strategy));
  put_d("model.aux_proposal_weight", model.aux_proposal_weight);
  put_d("model.lr_encoder", model.lr_encoder);
  put_d("model.lr_heads", model.lr_heads);
  put("model.seed", std::to_string(model.seed));
  put("model.speaker_tag_open", markers.speaker_open);
  put("model.speaker_tag_close", markers.speaker_close);
  put("model.mention_tag_open", markers.mention_open);
  put("model.mention_tag_close", markers.mention_close);
  put("encoder.hidden_dim", std::to_string(model.encoder.hidden_dim));
  put("encoder.num_layers", std::to_string(model.encoder.num_layers));
  put("encoder.num_heads", std::to_string(model.encoder.num_heads));
  put("encoder.ffn_dim", std::to_string(model.encoder.ffn_dim));
  put_d("encoder.dropout", model.encoder.dropout);
  put("vocab.max_size", std::to_string(vocab_max_size));
  put("train.epochs", std::to_string(epochs));
  put("train.pretrain_epochs", std::to_string(pretrain_epochs));
  put("train.qa_epochs", std::to_string(qa_epochs));
  put("train.freeze_encoder", freeze_encoder ? "true" : "false");
  put("train.qa_update_encoder", qa_update_encoder ? "true" : "false");
  put("train.eval_every", std::to_string(eval_every));
  return kv;
}

void RunConfig::echo(const std::string& path) const {
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write resolved config: " + path);
  for (const auto& [k, v] : resolved()) out << k << " = " << v << "\n";
}

}  // namespace coref
