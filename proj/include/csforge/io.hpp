#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "csforge/corpus.hpp"
#include "csforge/error.hpp"

namespace csforge {

using json = nlohmann::json;

// All file outputs go through write-temp-then-rename so a crashed run
// never leaves a half-written file behind.
inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One JSON object per line: {"id", "text", "tags"?, "source"?}. When tags
// are absent they are recomputed from the surfaces via tag_language.
inline TaggedSentence sentence_from_json(const json& j) {
  TaggedSentence s;
  s.id = j.at("id").get<std::string>();
  s.source = j.contains("source")
                 ? source_from_string(j.at("source").get<std::string>())
                 : Source::REAL;
  auto surfaces = tokenize(j.at("text").get<std::string>());
  if (j.contains("tags") && !j.at("tags").is_null()) {
    const auto& tags = j.at("tags");
    if (tags.size() != surfaces.size())
      throw IoError("sentence " + s.id + ": " + std::to_string(tags.size()) +
                    " tags for " + std::to_string(surfaces.size()) + " tokens");
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
      Lang lang = lang_from_string(tags[i].get<std::string>());
      // NE is reserved for the literal mask surface, in both directions.
      if ((lang == Lang::NE) != (surfaces[i] == kNeMask))
        throw IoError("sentence " + s.id + ": token '" + surfaces[i] +
                      "' and tag " + tags[i].get<std::string>() +
                      " violate the NE mask convention");
      s.tokens.push_back({surfaces[i], lang});
    }
  } else {
    for (auto& surf : surfaces) s.tokens.push_back({surf, tag_language(surf)});
  }
  return s;
}

inline json sentence_to_json(const TaggedSentence& s) {
  json j;
  j["id"] = s.id;
  j["text"] = s.text();
  json tags = json::array();
  for (const auto& t : s.tokens) tags.push_back(to_string(t.lang));
  j["tags"] = std::move(tags);
  j["source"] = to_string(s.source);
  return j;
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path);
  Corpus c;
  c.name = std::filesystem::path(path).stem().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      c.sentences.push_back(sentence_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.check_ids();
  return c;
}

inline void save_corpus(const Corpus& c, const std::string& path) {
  std::string out;
  for (const auto& s : c.sentences) {
    out += sentence_to_json(s).dump();
    out += '\n';
  }
  atomic_write(path, out);
}

// Parallel JSONL: {"id", "src_text", "tgt_text"}.
inline ParallelCorpus load_parallel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open parallel corpus: " + path);
  ParallelCorpus pc;
  pc.name = std::filesystem::path(path).stem().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      std::string id = j.at("id").get<std::string>();
      auto src = make_sentence(id, j.at("src_text").get<std::string>());
      auto tgt = make_sentence(id, j.at("tgt_text").get<std::string>());
      pc.pairs.emplace_back(std::move(src), std::move(tgt));
    } catch (const json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pc;
}

inline void save_parallel(const ParallelCorpus& pc, const std::string& path) {
  std::string out;
  for (const auto& [src, tgt] : pc.pairs) {
    json j;
    j["id"] = src.id;
    j["src_text"] = src.text();
    j["tgt_text"] = tgt.text();
    out += j.dump();
    out += '\n';
  }
  atomic_write(path, out);
}

// Plain text, one NE surface per line; blank lines ignored.
inline std::set<std::string> load_ne_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open NE list: " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

}  // namespace csforge
