#ifndef SPANCOREF_ENCODER_HPP
#define SPANCOREF_ENCODER_HPP

#include <random>
#include <string>
#include <vector>

#include "spancoref/nn/graph.hpp"
#include "spancoref/nn/params.hpp"
#include "spancoref/preprocess.hpp"
#include "spancoref/types.hpp"
#include "spancoref/vocab.hpp"

namespace coref {

struct EncoderConfig {
  int vocab_size = 0;
  int hidden_dim = 64;
  int num_layers = 2;
  int num_heads = 4;
  int ffn_dim = 128;
  int max_positions = 512;
  double dropout = 0.0;

  void validate() const;
  std::string to_json() const;
  static EncoderConfig from_json(const std::string& text);
};

// Query + context as one packed sequence: query pieces, one separator,
// context pieces; segment 0 on the query side, 1 from the separator on.
struct PackedSequence {
  std::vector<int> piece_ids;
  std::vector<int> segment_ids;
  int context_offset = 0;  // flat position of the first context piece

  int size() const { return static_cast<int>(piece_ids.size()); }
};

PackedSequence make_packed(const std::vector<int>& query_ids,
                           const std::vector<int>& context_ids, int sep_id,
                           int max_positions);

// A small trainable transformer encoder: token + position + segment
// embeddings, then post-norm self-attention blocks. All parameters live in
// the ParamStore under the given prefix so proposal and linking share one
// storage identity.
class TransformerEncoder {
 public:
  TransformerEncoder(const EncoderConfig& cfg, nn::ParamStore& store,
                     std::mt19937_64& init_rng,
                     const std::string& prefix = "enc.");

  // One hidden_dim vector per piece. Throws ContractViolation for inputs
  // longer than max_positions (callers must window first).
  nn::Var encode(nn::Graph& g, const std::vector<int>& piece_ids) const;
  nn::Var encode(nn::Graph& g, const std::vector<int>& piece_ids,
                 const std::vector<int>& segment_ids) const;
  nn::Var encode_packed(nn::Graph& g, const PackedSequence& p) const;

  const EncoderConfig& config() const { return cfg_; }
  const std::string& prefix() const { return prefix_; }
  nn::Parameter* token_embeddings() const { return tok_emb_; }

 private:
  EncoderConfig cfg_;
  std::string prefix_;
  nn::Parameter* tok_emb_;
  nn::Parameter* pos_emb_;
  nn::Parameter* seg_emb_;
  nn::Parameter* emb_ln_g_;
  nn::Parameter* emb_ln_b_;
  struct Layer {
    nn::Parameter *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
    nn::Parameter *ln1_g, *ln1_b;
    nn::Parameter *w1, *b1, *w2, *b2;
    nn::Parameter *ln2_g, *ln2_b;
  };
  std::vector<Layer> layers_;
};

// Windowed encoding of a full tokenized sequence with max-context merging:
// each window is encoded independently and every flat position takes its
// vectors from the window that owns it. Row order of the result follows
// flat positions.
struct DocumentEncoding {
  nn::Var merged;                // flat_len x hidden_dim
  std::vector<Window> windows;   // the windows that were encoded
};

DocumentEncoding encode_document(nn::Graph& g, const TransformerEncoder& enc,
                                 const TokenizedSequence& toks, int window_T);

}  // namespace coref

#endif
