#ifndef SPANCOREF_CONLL_HPP
#define SPANCOREF_CONLL_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "spancoref/types.hpp"

namespace coref {

// Reader/writer for the CoNLL-2012 *_conll column format. The reader keeps
// only the columns the coreference task needs (doc id, part, word, speaker,
// coreference); the writer emits the standard 12-column layout with
// placeholder values so the files stay readable by the official scorer.
//
// Singleton clusters in the input are dropped with a warning (CoNLL-2012
// never annotates singletons). A span annotated in two different clusters
// keeps its first cluster, with a warning.

std::vector<Document> parse_conll(const std::string& path,
                                  std::vector<std::string>* warnings = nullptr);
std::vector<Document> parse_conll_stream(std::istream& in,
                                         const std::string& source_name,
                                         std::vector<std::string>* warnings = nullptr);

// Writes one predicted (or gold) cluster set per document. Throws
// ContractViolation if a span is out of bounds or the same span is assigned
// to two clusters.
void write_conll(const std::vector<Document>& docs,
                 const std::vector<ClusterSet>& clusters,
                 const std::string& path);
void write_conll_stream(const std::vector<Document>& docs,
                        const std::vector<ClusterSet>& clusters,
                        std::ostream& out);

// Splits a doc_key of the form "name_part" back into its pieces; the part
// suffix must be all digits, otherwise part 0 is assumed and the whole key
// is the name.
std::pair<std::string, int> split_doc_key(const std::string& doc_key);

}  // namespace coref

#endif
