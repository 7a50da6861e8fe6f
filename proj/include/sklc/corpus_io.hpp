#pragma once

// JSONL ({"label": ..., "text": ...} per line) and TSV (label<TAB>text)
// corpus readers.

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sklc/corpus.hpp"
#include "sklc/error.hpp"

namespace sklc {

enum class CorpusFormat { Jsonl, Tsv };

inline CorpusFormat corpus_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") return CorpusFormat::Jsonl;
  if (ext == ".tsv" || ext == ".txt") return CorpusFormat::Tsv;
  throw Error(ErrorCode::InvalidConfig,
              "cannot infer corpus format from '" + path.string() + "'; pass --format");
}

inline CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::Jsonl;
  if (name == "tsv") return CorpusFormat::Tsv;
  throw Error(ErrorCode::InvalidConfig, "unknown corpus format '" + name + "'");
}

/// Blank lines are skipped; anything else that does not parse aborts with
/// the 1-based line number.
inline std::vector<LabeledDocument> read_corpus(std::istream& in, CorpusFormat format) {
  std::vector<LabeledDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    LabeledDocument doc;
    if (format == CorpusFormat::Jsonl) {
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        fail(std::string("invalid JSON (") + e.what() + ")");
      }
      if (!record.is_object()) fail("record is not a JSON object");
      auto label = record.find("label");
      auto text = record.find("text");
      if (label == record.end() || !label->is_string()) fail("missing string field \"label\"");
      if (text == record.end() || !text->is_string()) fail("missing string field \"text\"");
      doc.label = label->get<std::string>();
      doc.text = text->get<std::string>();
    } else {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) fail("expected label<TAB>text");
      doc.label = line.substr(0, tab);
      doc.text = line.substr(tab + 1);
    }
    if (doc.label.empty()) fail("empty label");
    docs.push_back(std::move(doc));
  }
  return docs;
}

inline std::vector<LabeledDocument> read_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "': file not found or unreadable");
  try {
    return read_corpus(in, format);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

inline std::vector<LabeledDocument> read_corpus(const std::filesystem::path& path) {
  return read_corpus(path, corpus_format_from_path(path));
}

}  // namespace sklc
