#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskstream/errors.hpp"
#include "riskstream/rng.hpp"
#include "riskstream/timestamp.hpp"
#include "riskstream/util.hpp"

namespace riskstream {

inline constexpr const char* kPadToken = "<PAD>";
inline constexpr const char* kUnkToken = "<UNK>";
inline constexpr const char* kMaskToken = "[mask]";
inline constexpr std::size_t kImageFeatureDim = 512;

using TokenSeq = std::vector<std::string>;

// Emoji -> replacement word, keyed by the emoji's UTF-8 bytes.
using EmojiMap = std::map<std::string, std::string>;

inline const EmojiMap& default_emoji_map() {
  static const EmojiMap map = {
      {"\U0001F622", "cry"},     {"\U0001F62D", "sob"},    {"\U0001F60A", "happy"},
      {"\U0001F602", "laugh"},   {"\U0001F494", "heartbroken"}, {"\U0001F621", "angry"},
      {"\U0001F62B", "exhausted"}, {"\U0001F644", "eyeroll"}, {"\U0001F319", "moon"},
      {"\U0001F327", "rain"},
  };
  return map;
}

inline EmojiMap load_emoji_map(const std::string& path) {
  EmojiMap map;
  std::istringstream in(read_text_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected emoji<TAB>word");
    map[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return map;
}

namespace detail {

// Decodes one UTF-8 codepoint at `i`, advancing it. Malformed bytes are
// treated as Latin-1 so preprocessing never throws.
inline std::uint32_t next_codepoint(const std::string& s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  std::uint32_t cp = b0;
  if (b0 >= 0xF0) {
    len = 4;
    cp = b0 & 0x07u;
  } else if (b0 >= 0xE0) {
    len = 3;
    cp = b0 & 0x0Fu;
  } else if (b0 >= 0xC0) {
    len = 2;
    cp = b0 & 0x1Fu;
  }
  if (len == 1 || i + len > s.size()) {
    ++i;
    return cp;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0u) != 0x80u) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3Fu);
  }
  i += len;
  return cp;
}

inline std::string encode_utf8(std::uint32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

inline bool is_emoji_codepoint(std::uint32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FFFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
         (cp >= 0x2B00 && cp <= 0x2BFF) || cp == 0xFE0F || cp == 0x200D;
}

inline std::string strip_urls(const std::string& raw) {
  std::string out;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw.compare(i, 7, "http://") == 0 || raw.compare(i, 8, "https://") == 0) {
      while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      continue;
    }
    out += raw[i++];
  }
  return out;
}

}  // namespace detail

// Emoji replaced per map (unknown emoji dropped), URLs removed, then
// whitespace/punctuation segmentation with ASCII lowercasing. Degenerate
// input yields an empty sequence.
inline TokenSeq preprocess_text(const std::string& raw, const EmojiMap& emoji_map = default_emoji_map()) {
  const std::string text = detail::strip_urls(raw);
  TokenSeq tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    const std::uint32_t cp = detail::next_codepoint(text, i);
    if (cp < 0x80) {
      const char c = static_cast<char>(cp);
      if (std::isalnum(static_cast<unsigned char>(c))) {
        cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      } else {
        flush();
      }
      continue;
    }
    const std::string bytes = text.substr(start, i - start);
    if (auto it = emoji_map.find(bytes); it != emoji_map.end()) {
      flush();
      tokens.push_back(it->second);
    } else if (detail::is_emoji_codepoint(cp)) {
      flush();  // unknown emoji are dropped
    } else {
      cur += bytes;  // non-ASCII letters stay token characters
    }
  }
  flush();
  return tokens;
}

// Appends <PAD> up to length n. Truncation is forbidden; the caller must
// raise n instead.
inline TokenSeq pad_to(const TokenSeq& tokens, std::size_t n) {
  if (tokens.size() > n)
    throw ValidationError("pad_to: sequence of length " + std::to_string(tokens.size()) +
                          " exceeds target " + std::to_string(n) + " (truncation forbidden)");
  TokenSeq out = tokens;
  out.resize(n, kPadToken);
  return out;
}

struct Post {
  std::string text;
  TokenSeq tokens;
  std::optional<std::vector<Real>> image_feature;  // present iff has_image
  Timestamp timestamp;
  bool has_image = false;
};

enum class Gender { male, female, unknown };

inline std::string gender_code(Gender g) {
  switch (g) {
    case Gender::male: return "m";
    case Gender::female: return "f";
    default: return "u";
  }
}

inline Gender gender_from_code(const std::string& s) {
  if (s == "m") return Gender::male;
  if (s == "f") return Gender::female;
  if (s == "u") return Gender::unknown;
  throw ValidationError("bad gender code '" + s + "' (expected m|f|u)");
}

enum class Label { not_at_risk = 0, at_risk = 1 };

struct UserRecord {
  std::string user_id;
  Gender gender = Gender::unknown;
  std::string screen_name;
  std::int64_t follower_count = 0;
  std::int64_t following_count = 0;
  std::vector<Post> posts;  // ascending by timestamp
  Label label = Label::not_at_risk;
  std::optional<std::vector<Post>> hidden_posts;
};

struct CorpusSplit {
  std::vector<UserRecord> train;
  std::vector<UserRecord> validation;
  std::vector<UserRecord> test;

  std::vector<const UserRecord*> all_users() const {
    std::vector<const UserRecord*> out;
    for (const auto* split : {&train, &validation, &test})
      for (const auto& u : *split) out.push_back(&u);
    return out;
  }
};

namespace detail {

inline nlohmann::ordered_json post_to_json(const Post& p) {
  nlohmann::ordered_json j;
  j["text"] = p.text;
  j["ts"] = p.timestamp.to_string();
  if (p.has_image)
    j["img"] = *p.image_feature;
  else
    j["img"] = nullptr;
  return j;
}

inline Post post_from_json(const nlohmann::json& j, const EmojiMap& emoji_map, int lineno) {
  auto fail = [&](const std::string& field, const std::string& why) -> ValidationError {
    return ValidationError("line " + std::to_string(lineno) + ": post field '" + field + "': " + why);
  };
  Post p;
  if (!j.contains("text") || !j["text"].is_string()) throw fail("text", "missing or not a string");
  if (!j.contains("ts") || !j["ts"].is_string()) throw fail("ts", "missing or not a string");
  p.text = j["text"].get<std::string>();
  p.timestamp = Timestamp::parse(j["ts"].get<std::string>());
  if (j.contains("img") && !j["img"].is_null()) {
    auto feat = j["img"].get<std::vector<Real>>();
    if (feat.size() != kImageFeatureDim)
      throw fail("img", "expected " + std::to_string(kImageFeatureDim) + " values, got " +
                            std::to_string(feat.size()));
    p.image_feature = std::move(feat);
    p.has_image = true;
  }
  p.tokens = preprocess_text(p.text, emoji_map);
  return p;
}

inline void sort_posts(std::vector<Post>& posts) {
  std::stable_sort(posts.begin(), posts.end(),
                   [](const Post& a, const Post& b) { return a.timestamp < b.timestamp; });
}

}  // namespace detail

inline nlohmann::ordered_json user_to_json(const UserRecord& u, const std::string& split_name) {
  nlohmann::ordered_json j;
  j["user_id"] = u.user_id;
  j["gender"] = gender_code(u.gender);
  j["screen_name"] = u.screen_name;
  j["followers"] = u.follower_count;
  j["following"] = u.following_count;
  j["label"] = static_cast<int>(u.label);
  j["split"] = split_name;
  auto posts = nlohmann::ordered_json::array();
  for (const auto& p : u.posts) posts.push_back(detail::post_to_json(p));
  j["posts"] = std::move(posts);
  if (u.hidden_posts) {
    auto hidden = nlohmann::ordered_json::array();
    for (const auto& p : *u.hidden_posts) hidden.push_back(detail::post_to_json(p));
    j["hidden_posts"] = std::move(hidden);
  } else {
    j["hidden_posts"] = nullptr;
  }
  return j;
}

// One UserRecord per line. Posts whose token sequence is empty after
// preprocessing are dropped; posts are kept sorted by timestamp.
inline void save_corpus(const CorpusSplit& split, const std::string& path) {
  std::ostringstream out;
  for (const auto& u : split.train) out << user_to_json(u, "train").dump() << '\n';
  for (const auto& u : split.validation) out << user_to_json(u, "val").dump() << '\n';
  for (const auto& u : split.test) out << user_to_json(u, "test").dump() << '\n';
  write_text_file(path, out.str());
}

inline CorpusSplit load_corpus(const std::string& path, const EmojiMap& emoji_map = default_emoji_map()) {
  std::istringstream in(read_text_file(path));
  CorpusSplit split;
  std::map<std::string, std::string> seen_ids;  // user_id -> split name
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    auto require = [&](const char* field) {
      if (!j.contains(field))
        throw ValidationError("line " + std::to_string(lineno) + ": missing field '" + field + "'");
      return j[field];
    };
    UserRecord u;
    try {
      u.user_id = require("user_id").get<std::string>();
      u.gender = gender_from_code(require("gender").get<std::string>());
      u.screen_name = require("screen_name").get<std::string>();
      u.follower_count = require("followers").get<std::int64_t>();
      u.following_count = require("following").get<std::int64_t>();
      const int label = require("label").get<int>();
      if (label != 0 && label != 1)
        throw ValidationError("field 'label': expected 0 or 1, got " + std::to_string(label));
      u.label = static_cast<Label>(label);
      for (const auto& pj : require("posts")) {
        Post p = detail::post_from_json(pj, emoji_map, lineno);
        if (!p.tokens.empty()) u.posts.push_back(std::move(p));
      }
      if (j.contains("hidden_posts") && !j["hidden_posts"].is_null()) {
        std::vector<Post> hidden;
        for (const auto& pj : j["hidden_posts"]) {
          Post p = detail::post_from_json(pj, emoji_map, lineno);
          if (!p.tokens.empty()) hidden.push_back(std::move(p));
        }
        detail::sort_posts(hidden);
        u.hidden_posts = std::move(hidden);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw ValidationError("line " + std::to_string(lineno) + ": " + msg);
    }
    if (u.follower_count < 0 || u.following_count < 0)
      throw ValidationError("line " + std::to_string(lineno) + ": negative follower/following count");
    detail::sort_posts(u.posts);
    if (auto [it, fresh] = seen_ids.emplace(u.user_id, ""); !fresh)
      throw ValidationError("line " + std::to_string(lineno) + ": duplicate user_id '" + u.user_id + "'");
    const std::string split_name = require("split").get<std::string>();
    if (split_name == "train")
      split.train.push_back(std::move(u));
    else if (split_name == "val")
      split.validation.push_back(std::move(u));
    else if (split_name == "test")
      split.test.push_back(std::move(u));
    else
      throw ValidationError("line " + std::to_string(lineno) + ": field 'split': expected train|val|test, got '" +
                            split_name + "'");
  }
  return split;
}

}  // namespace riskstream
