#pragma once

#include <array>
#include <cstddef>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskstream/corpus.hpp"
#include "riskstream/errors.hpp"
#include "riskstream/rng.hpp"
#include "riskstream/util.hpp"

namespace riskstream {

// The 13 category names entries may carry. The source dictionary publishes
// five representative categories; the rest complete the taxonomy.
inline const std::array<std::string, 13>& lexicon_categories() {
  static const std::array<std::string, 13> cats = {
      "suicide_ideation", "suicide_behavior", "psychache",   "mental_illness", "hopelessness",
      "self_harm",        "death_mention",    "burden",      "loneliness",     "insomnia",
      "farewell",         "numbness",         "worthlessness"};
  return cats;
}

struct LexiconEntry {
  TokenSeq phrase;  // already tokenized, lowercase
  std::string category;
  int weight = 1;  // 1..3
};

struct LexiconHit {
  std::size_t start = 0;
  std::size_t length = 0;
  int weight = 1;
};

// Weighted, categorized term list with longest-match lookup.
class Lexicon {
 public:
  static Lexicon from_entries(std::vector<LexiconEntry> entries) {
    Lexicon lex;
    std::set<std::string> seen;
    for (auto& e : entries) {
      if (e.phrase.empty()) throw ValidationError("lexicon: empty phrase");
      if (e.weight < 1 || e.weight > 3)
        throw ValidationError("lexicon: weight " + std::to_string(e.weight) + " outside [1,3] for '" +
                              join(e.phrase) + "'");
      bool known = false;
      for (const auto& c : lexicon_categories()) known = known || c == e.category;
      if (!known) throw ValidationError("lexicon: unknown category '" + e.category + "'");
      if (!seen.insert(join(e.phrase)).second)
        throw ValidationError("lexicon: duplicate phrase '" + join(e.phrase) + "'");
      lex.by_first_[e.phrase[0]].push_back(lex.entries_.size());
      lex.entries_.push_back(std::move(e));
    }
    for (auto& [tok, idxs] : lex.by_first_) {
      std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
        if (lex.entries_[a].phrase.size() != lex.entries_[b].phrase.size())
          return lex.entries_[a].phrase.size() > lex.entries_[b].phrase.size();
        return a < b;
      });
    }
    return lex;
  }

  // TSV: phrase<TAB>category<TAB>weight, '#' comments, UTF-8.
  static Lexicon load(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<LexiconEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto t1 = line.find('\t');
      const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
      if (t2 == std::string::npos)
        throw ValidationError(path + ":" + std::to_string(lineno) +
                              ": expected phrase<TAB>category<TAB>weight");
      LexiconEntry e;
      e.phrase = preprocess_text(line.substr(0, t1), EmojiMap{});
      e.category = line.substr(t1 + 1, t2 - t1 - 1);
      try {
        e.weight = std::stoi(line.substr(t2 + 1));
      } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(lineno) + ": bad weight");
      }
      entries.push_back(std::move(e));
    }
    try {
      return from_entries(std::move(entries));
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Longest entry matching tokens at position `pos`, or npos.
  std::size_t match_at(const TokenSeq& tokens, std::size_t pos) const {
    const auto it = by_first_.find(tokens[pos]);
    if (it == by_first_.end()) return npos;
    for (std::size_t idx : it->second) {
      const TokenSeq& phrase = entries_[idx].phrase;
      if (pos + phrase.size() > tokens.size()) continue;
      bool ok = true;
      for (std::size_t k = 1; k < phrase.size() && ok; ++k) ok = tokens[pos + k] == phrase[k];
      if (ok) return idx;
    }
    return npos;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  static std::string join(const TokenSeq& phrase) {
    std::string out;
    for (std::size_t i = 0; i < phrase.size(); ++i) {
      if (i) out += ' ';
      out += phrase[i];
    }
    return out;
  }

 private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_;
};

// Built-in copy of data/lexicon_sample.tsv so the generator and tests run
// without a path; the shipped file is the editable version of the same table.
inline const char* sample_lexicon_tsv() {
  return
      "want to die\tsuicide_ideation\t3\n"
      "die\tsuicide_ideation\t2\n"
      "end my life\tsuicide_ideation\t3\n"
      "disappear forever\tsuicide_ideation\t2\n"
      "no reason to live\tsuicide_ideation\t3\n"
      "escape\tsuicide_ideation\t1\n"
      "seppuku\tsuicide_behavior\t3\n"
      "hypnotics\tsuicide_behavior\t2\n"
      "overdose\tsuicide_behavior\t3\n"
      "jump off\tsuicide_behavior\t3\n"
      "charcoal fire\tsuicide_behavior\t2\n"
      "want to cry\tpsychache\t1\n"
      "loneliness\tpsychache\t1\n"
      "so much pain\tpsychache\t2\n"
      "hurting inside\tpsychache\t2\n"
      "unbearable pain\tpsychache\t2\n"
      "depression\tmental_illness\t2\n"
      "hallucination\tmental_illness\t2\n"
      "anxiety disorder\tmental_illness\t1\n"
      "dead end\thopelessness\t2\n"
      "despair\thopelessness\t2\n"
      "hopeless\thopelessness\t2\n"
      "no way out\thopelessness\t2\n"
      "give up\thopelessness\t1\n"
      "cut myself\tself_harm\t3\n"
      "self harm\tself_harm\t2\n"
      "razor blade\tself_harm\t2\n"
      "funeral\tdeath_mention\t1\n"
      "grave\tdeath_mention\t1\n"
      "death\tdeath_mention\t1\n"
      "burden to everyone\tburden\t2\n"
      "better off without me\tburden\t3\n"
      "all alone\tloneliness\t1\n"
      "nobody cares\tloneliness\t2\n"
      "sleepless nights\tinsomnia\t1\n"
      "awake at 3am\tinsomnia\t1\n"
      "goodbye world\tfarewell\t3\n"
      "last words\tfarewell\t2\n"
      "feel nothing\tnumbness\t1\n"
      "worthless\tworthlessness\t2\n";
}

inline Lexicon sample_lexicon() {
  std::istringstream in(sample_lexicon_tsv());
  std::vector<LexiconEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    LexiconEntry e;
    e.phrase = preprocess_text(line.substr(0, t1), EmojiMap{});
    e.category = line.substr(t1 + 1, t2 - t1 - 1);
    e.weight = std::stoi(line.substr(t2 + 1));
    entries.push_back(std::move(e));
  }
  return Lexicon::from_entries(std::move(entries));
}

// All non-overlapping matches, longest-match-first, left-to-right.
inline std::vector<LexiconHit> find_hits(const TokenSeq& tokens, const Lexicon& lexicon) {
  std::vector<LexiconHit> hits;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t idx = lexicon.match_at(tokens, i);
    if (idx == Lexicon::npos) {
      ++i;
      continue;
    }
    const auto& e = lexicon.entries()[idx];
    hits.push_back({i, e.phrase.size(), e.weight});
    i += e.phrase.size();
  }
  return hits;
}

// Up to k sentences, in corpus order, each with at least `min_hits` lexicon
// hits. Warns on stderr when fewer than k qualify.
inline std::vector<TokenSeq> select_sentences(const std::vector<TokenSeq>& sentences,
                                              const Lexicon& lexicon, std::size_t k,
                                              std::size_t min_hits = 1) {
  std::vector<TokenSeq> out;
  for (const auto& s : sentences) {
    if (out.size() == k) break;
    if (find_hits(s, lexicon).size() >= min_hits) out.push_back(s);
  }
  if (out.size() < k)
    std::cerr << "warning: only " << out.size() << " of " << k
              << " requested sentences contain a lexicon term\n";
  return out;
}

struct MaskedExample {
  TokenSeq tokens;
  int label = 0;  // 0 = term-free after masking, 1 = terms kept + 2 inserted masks
};

// Masked-set construction: a seeded uniform 50% of sentences get every hit
// span collapsed to a single [mask] (label 0); the rest get two [mask]
// tokens inserted at uniform positions, restricted to slots that do not
// split a hit span so at least one term survives (label 1). Per-epoch
// re-randomization is the caller's duty.
inline std::vector<MaskedExample> build_masked_set(const std::vector<TokenSeq>& sentences,
                                                   const Lexicon& lexicon, std::uint64_t seed) {
  for (const auto& s : sentences)
    if (find_hits(s, lexicon).empty())
      throw ValidationError("build_masked_set: sentence without lexicon hit: '" + Lexicon::join(s) + "'");
  Rng rng(seed);
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<bool> mask_all(sentences.size(), false);
  for (std::size_t i = 0; i < sentences.size() / 2; ++i) mask_all[order[i]] = true;

  std::vector<MaskedExample> out;
  out.reserve(sentences.size());
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const TokenSeq& src = sentences[si];
    MaskedExample ex;
    if (mask_all[si]) {
      ex.label = 0;
      const auto hits = find_hits(src, lexicon);
      std::size_t h = 0;
      for (std::size_t i = 0; i < src.size();) {
        if (h < hits.size() && hits[h].start == i) {
          ex.tokens.push_back(kMaskToken);
          i += hits[h].length;
          ++h;
        } else {
          ex.tokens.push_back(src[i]);
          ++i;
        }
      }
    } else {
      ex.label = 1;
      ex.tokens = src;
      for (int ins = 0; ins < 2; ++ins) {
        const auto hits = find_hits(ex.tokens, lexicon);
        std::vector<std::size_t> slots;
        for (std::size_t j = 0; j <= ex.tokens.size(); ++j) {
          bool inside = false;
          for (const auto& hit : hits)
            if (j > hit.start && j < hit.start + hit.length) inside = true;
          if (!inside) slots.push_back(j);
        }
        const std::size_t at = slots[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(slots.size()) - 1))];
        ex.tokens.insert(ex.tokens.begin() + static_cast<std::ptrdiff_t>(at), kMaskToken);
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace riskstream
