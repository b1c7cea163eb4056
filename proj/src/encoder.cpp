#include "spancoref/encoder.hpp"

#include <cmath>

#include "json.hpp"

namespace coref {

using nn::Graph;
using nn::Var;

void EncoderConfig::validate() const {
  if (vocab_size <= 0) throw ConfigError("encoder: vocab_size must be > 0");
  if (hidden_dim <= 0 || num_layers <= 0 || num_heads <= 0 || ffn_dim <= 0)
    throw ConfigError("encoder: dimensions must be positive");
  if (hidden_dim % num_heads != 0)
    throw ConfigError("encoder: hidden_dim must be divisible by num_heads");
  if (max_positions < 2) throw ConfigError("encoder: max_positions too small");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ConfigError("encoder: dropout must be in [0, 1)");
}

std::string EncoderConfig::to_json() const {
  nlohmann::json j;
  j["vocab_size"] = vocab_size;
  j["hidden_dim"] = hidden_dim;
  j["num_layers"] = num_layers;
  j["num_heads"] = num_heads;
  j["ffn_dim"] = ffn_dim;
  j["max_positions"] = max_positions;
  j["dropout"] = dropout;
  return j.dump();
}

EncoderConfig EncoderConfig::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EncoderConfig c;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.num_layers = j.at("num_layers").get<int>();
  c.num_heads = j.at("num_heads").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.max_positions = j.at("max_positions").get<int>();
  c.dropout = j.at("dropout").get<double>();
  return c;
}

PackedSequence make_packed(const std::vector<int>& query_ids,
                           const std::vector<int>& context_ids, int sep_id,
                           int max_positions) {
  PackedSequence p;
  const int total =
      static_cast<int>(query_ids.size()) + 1 + static_cast<int>(context_ids.size());
  if (total > max_positions)
    throw ContractViolation(
        "make_packed: packed length " + std::to_string(total) +
        " exceeds max_positions " + std::to_string(max_positions) +
        "; chunk the context first");
  p.piece_ids.reserve(total);
  p.segment_ids.reserve(total);
  for (int id : query_ids) {
    p.piece_ids.push_back(id);
    p.segment_ids.push_back(0);
  }
  p.piece_ids.push_back(sep_id);
  p.segment_ids.push_back(1);
  p.context_offset = static_cast<int>(p.piece_ids.size());
  for (int id : context_ids) {
    p.piece_ids.push_back(id);
    p.segment_ids.push_back(1);
  }
  return p;
}

TransformerEncoder::TransformerEncoder(const EncoderConfig& cfg,
                                       nn::ParamStore& store,
                                       std::mt19937_64& init_rng,
                                       const std::string& prefix)
    : cfg_(cfg), prefix_(prefix) {
  cfg_.validate();
  const int d = cfg_.hidden_dim;
  const double w_std = 0.02;

  auto weight = [&](const std::string& name, int rows, int cols) {
    nn::Parameter* p = store.create(prefix_ + name, rows, cols);
    nn::init_normal(p->value, init_rng, w_std);
    return p;
  };
  auto zeros = [&](const std::string& name, int rows, int cols) {
    return store.create(prefix_ + name, rows, cols);
  };
  auto ones = [&](const std::string& name, int cols) {
    nn::Parameter* p = store.create(prefix_ + name, 1, cols);
    p->value.fill(1.0);
    return p;
  };

  tok_emb_ = weight("tok_emb", cfg_.vocab_size, d);
  pos_emb_ = weight("pos_emb", cfg_.max_positions, d);
  seg_emb_ = weight("seg_emb", 2, d);
  emb_ln_g_ = ones("emb_ln.g", d);
  emb_ln_b_ = zeros("emb_ln.b", 1, d);

  for (int l = 0; l < cfg_.num_layers; ++l) {
    const std::string lp = "layer" + std::to_string(l) + ".";
    Layer layer;
    layer.wq = weight(lp + "attn.wq", d, d);
    layer.bq = zeros(lp + "attn.bq", 1, d);
    layer.wk = weight(lp + "attn.wk", d, d);
    layer.bk = zeros(lp + "attn.bk", 1, d);
    layer.wv = weight(lp + "attn.wv", d, d);
    layer.bv = zeros(lp + "attn.bv", 1, d);
    layer.wo = weight(lp + "attn.wo", d, d);
    layer.bo = zeros(lp + "attn.bo", 1, d);
    layer.ln1_g = ones(lp + "ln1.g", d);
    layer.ln1_b = zeros(lp + "ln1.b", 1, d);
    layer.w1 = weight(lp + "ffn.w1", d, cfg_.ffn_dim);
    layer.b1 = zeros(lp + "ffn.b1", 1, cfg_.ffn_dim);
    layer.w2 = weight(lp + "ffn.w2", cfg_.ffn_dim, d);
    layer.b2 = zeros(lp + "ffn.b2", 1, d);
    layer.ln2_g = ones(lp + "ln2.g", d);
    layer.ln2_b = zeros(lp + "ln2.b", 1, d);
    layers_.push_back(layer);
  }
}

Var TransformerEncoder::encode(Graph& g,
                               const std::vector<int>& piece_ids) const {
  return encode(g, piece_ids, std::vector<int>(piece_ids.size(), 0));
}

Var TransformerEncoder::encode(Graph& g, const std::vector<int>& piece_ids,
                               const std::vector<int>& segment_ids) const {
  const int n = static_cast<int>(piece_ids.size());
  if (n == 0) throw ContractViolation("encode: empty input");
  if (n > cfg_.max_positions)
    throw ContractViolation(
        "encode: input length " + std::to_string(n) + " exceeds max_positions " +
        std::to_string(cfg_.max_positions) + "; window the sequence first");
  if (segment_ids.size() != piece_ids.size())
    throw ContractViolation("encode: segment_ids length mismatch");

  std::vector<int> positions(n);
  for (int i = 0; i < n; ++i) positions[i] = i;

  Var h = g.add(g.add(g.gather_rows(g.param(tok_emb_), piece_ids),
                      g.gather_rows(g.param(pos_emb_), positions)),
                g.gather_rows(g.param(seg_emb_), segment_ids));
  h = g.layer_norm(h, g.param(emb_ln_g_), g.param(emb_ln_b_));
  h = g.dropout(h, cfg_.dropout);

  const int d = cfg_.hidden_dim;
  const int dh = d / cfg_.num_heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  for (const Layer& layer : layers_) {
    Var q = g.add_bias(g.matmul(h, g.param(layer.wq)), g.param(layer.bq));
    Var k = g.add_bias(g.matmul(h, g.param(layer.wk)), g.param(layer.bk));
    Var v = g.add_bias(g.matmul(h, g.param(layer.wv)), g.param(layer.bv));

    std::vector<Var> head_outputs;
    for (int hd = 0; hd < cfg_.num_heads; ++hd) {
      Var qh = g.slice_cols(q, hd * dh, dh);
      Var kh = g.slice_cols(k, hd * dh, dh);
      Var vh = g.slice_cols(v, hd * dh, dh);
      Var attn = g.softmax_rows(
          g.scale(g.matmul(qh, g.transpose(kh)), inv_sqrt_dh));
      attn = g.dropout(attn, cfg_.dropout);
      head_outputs.push_back(g.matmul(attn, vh));
    }
    Var attn_out = g.add_bias(
        g.matmul(g.concat_cols(head_outputs), g.param(layer.wo)),
        g.param(layer.bo));
    attn_out = g.dropout(attn_out, cfg_.dropout);
    h = g.layer_norm(g.add(h, attn_out), g.param(layer.ln1_g),
                     g.param(layer.ln1_b));

    Var f = g.gelu(
        g.add_bias(g.matmul(h, g.param(layer.w1)), g.param(layer.b1)));
    f = g.add_bias(g.matmul(f, g.param(layer.w2)), g.param(layer.b2));
    f = g.dropout(f, cfg_.dropout);
    h = g.layer_norm(g.add(h, f), g.param(layer.ln2_g), g.param(layer.ln2_b));
  }
  return h;
}

Var TransformerEncoder::encode_packed(Graph& g,
                                      const PackedSequence& p) const {
  return encode(g, p.piece_ids, p.segment_ids);
}

DocumentEncoding encode_document(Graph& g, const TransformerEncoder& enc,
                                 const TokenizedSequence& toks, int window_T) {
  DocumentEncoding out;
  out.windows = make_windows(toks.size(), window_T);

  std::vector<Var> window_vars;
  window_vars.reserve(out.windows.size());
  for (const Window& w : out.windows) {
    // Windows that own nothing still get encoded for contract simplicity;
    // their rows are never merged so they contribute no gradient.
    std::vector<int> ids(toks.piece_ids.begin() + w.start,
                         toks.piece_ids.begin() + w.end());
    window_vars.push_back(enc.encode(g, ids));
  }
  std::vector<std::pair<int, int>> picks;
  picks.reserve(toks.size());
  for (size_t wi = 0; wi < out.windows.size(); ++wi) {
    const Window& w = out.windows[wi];
    for (int p = w.owned_begin; p < w.owned_end; ++p)
      picks.push_back({static_cast<int>(wi), p - w.start});
  }
  out.merged = g.merge_rows(window_vars, std::move(picks));
  return out;
}

}  // namespace coref
