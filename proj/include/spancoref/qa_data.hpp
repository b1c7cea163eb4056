#ifndef SPANCOREF_QA_DATA_HPP
#define SPANCOREF_QA_DATA_HPP

#include <string>
#include <vector>

#include "spancoref/types.hpp"

namespace coref {

// Reader for SQuAD-v2-style JSON (also the Quoref layout):
// data -> paragraphs -> qas, with answers carrying text + answer_start.
// Unanswerable questions ("is_impossible": true) yield an empty answer
// list; multi-answer questions yield all spans. Duplicate (start, text)
// answers are collapsed.
std::vector<QaExample> parse_qa(const std::string& path);
std::vector<QaExample> parse_qa_string(const std::string& json_text,
                                       const std::string& source_name);

}  // namespace coref

#endif
