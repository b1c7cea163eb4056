#include "spancoref/qa_data.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace coref {

using nlohmann::json;

std::vector<QaExample> parse_qa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open QA file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_qa_string(buf.str(), path);
}

std::vector<QaExample> parse_qa_string(const std::string& json_text,
                                       const std::string& source_name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(source_name + ": invalid JSON: " + e.what());
  }
  if (!root.contains("data") || !root["data"].is_array())
    throw ParseError(source_name + ": missing top-level 'data' array");

  std::vector<QaExample> out;
  for (const auto& article : root["data"]) {
    if (!article.contains("paragraphs")) continue;
    for (const auto& para : article["paragraphs"]) {
      const std::string context = para.value("context", std::string());
      if (!para.contains("qas")) continue;
      for (const auto& qa : para["qas"]) {
        QaExample ex;
        ex.id = qa.contains("id") && qa["id"].is_string()
                    ? qa["id"].get<std::string>()
                    : (qa.contains("id") ? qa["id"].dump() : "?");
        ex.context = context;
        ex.question = qa.value("question", std::string());
        const bool impossible = qa.value("is_impossible", false);
        if (!impossible && qa.contains("answers")) {
          std::set<std::pair<int, std::string>> seen;
          for (const auto& ans : qa["answers"]) {
            QaExample::CharAnswer a;
            a.start = ans.value("answer_start", -1);
            a.text = ans.value("text", std::string());
            if (a.start < 0 ||
                a.start + static_cast<int>(a.text.size()) >
                    static_cast<int>(context.size()) ||
                context.compare(a.start, a.text.size(), a.text) != 0)
              throw ParseError(source_name + ": question " + ex.id +
                               ": answer_start/text mismatch");
            if (seen.insert({a.start, a.text}).second)
              ex.answers.push_back(std::move(a));
          }
        }
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

}  // namespace coref
