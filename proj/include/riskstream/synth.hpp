#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskstream/corpus.hpp"
#include "riskstream/errors.hpp"
#include "riskstream/lexicon.hpp"
#include "riskstream/rng.hpp"

namespace riskstream {

// Deterministic synthetic corpus. The planted signal s in [0,1] scales every
// class-conditional difference, so s = 0 collapses both classes onto the same
// distribution. At-risk users come in three roles:
//   - "correlation" users carry per-month visible/hidden hit series planted
//     with a known Pearson coupling (drives the correlation analysis);
//   - "concealers" show no lexicon term in visible posts (hidden stream only);
//   - the rest drop terms into visible posts at a sparse per-post rate.
struct SynthConfig {
  std::size_t users_per_class = 50;
  std::size_t posts_per_user = 20;
  double signal = 1.0;
  std::size_t vocab_size = 200;
  std::uint64_t seed = 1;

  std::size_t hidden_posts_per_user = 0;  // 0 -> same as posts_per_user
  double image_prob = 0.5;
  int window_start_year = 2018;
  int window_start_month = 5;
  double train_frac = 0.7;
  double val_frac = 0.15;
  double emoji_rate = 0.08;
  double url_rate = 0.05;
  std::vector<double> rho_targets = {0.85, 0.6, 0.3, 0.0, -0.3, -0.6};
  std::string lexicon_path;  // empty -> built-in sample table

  std::size_t hidden_count() const {
    return hidden_posts_per_user ? hidden_posts_per_user : posts_per_user;
  }

  static SynthConfig from_json(const nlohmann::json& j) {
    SynthConfig c;
    for (const char* key : {"users_per_class", "posts_per_user", "signal", "vocab_size", "seed"})
      if (!j.contains(key)) throw ValidationError(std::string("synth config: missing key '") + key + "'");
    c.users_per_class = j["users_per_class"].get<std::size_t>();
    c.posts_per_user = j["posts_per_user"].get<std::size_t>();
    c.signal = j["signal"].get<double>();
    c.vocab_size = j["vocab_size"].get<std::size_t>();
    c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("hidden_posts_per_user")) c.hidden_posts_per_user = j["hidden_posts_per_user"].get<std::size_t>();
    if (j.contains("image_prob")) c.image_prob = j["image_prob"].get<double>();
    if (j.contains("window_start")) {
      const auto s = j["window_start"].get<std::string>();
      if (std::sscanf(s.c_str(), "%d-%d", &c.window_start_year, &c.window_start_month) != 2)
        throw ValidationError("synth config: window_start must be YYYY-MM");
    }
    if (j.contains("train_frac")) c.train_frac = j["train_frac"].get<double>();
    if (j.contains("val_frac")) c.val_frac = j["val_frac"].get<double>();
    if (j.contains("emoji_rate")) c.emoji_rate = j["emoji_rate"].get<double>();
    if (j.contains("url_rate")) c.url_rate = j["url_rate"].get<double>();
    if (j.contains("rho_targets")) c.rho_targets = j["rho_targets"].get<std::vector<double>>();
    if (j.contains("lexicon")) c.lexicon_path = j["lexicon"].get<std::string>();
    return c;
  }

  static SynthConfig load(const std::string& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ": " + e.what());
    }
    return from_json(j);
  }

  Lexicon resolve_lexicon() const {
    return lexicon_path.empty() ? sample_lexicon() : Lexicon::load(lexicon_path);
  }

  void validate() const {
    if (signal < 0.0 || signal > 1.0)
      throw ValidationError("synth config: signal must be in [0,1], got " + std::to_string(signal));
    if (users_per_class == 0 || posts_per_user == 0 || vocab_size == 0)
      throw ValidationError("synth config: users_per_class, posts_per_user and vocab_size must be positive");
    if (train_frac < 0 || val_frac < 0 || train_frac + val_frac > 1.0)
      throw ValidationError("synth config: bad split fractions");
    if (rho_targets.empty()) throw ValidationError("synth config: rho_targets must be non-empty");
  }
};

namespace synth_detail {

enum class Role { regular, correlation, concealer };

inline Role role_of(std::size_t class_index) {
  if (class_index % 25 == 12) return Role::concealer;
  if (class_index % 4 == 1) return Role::correlation;
  return Role::regular;
}

inline double rho_target_of(const SynthConfig& cfg, std::size_t class_index) {
  std::size_t rank = 0;
  for (std::size_t i = 0; i < class_index; ++i)
    if (role_of(i) == Role::correlation) ++rank;
  return cfg.rho_targets[rank % cfg.rho_targets.size()];
}

// Centered unit 12-vector with bounded entries (keeps count rounding from
// distorting the planted correlation).
inline std::array<double, 12> pattern_vector(Rng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::array<double, 12> u{};
    double mean = 0;
    for (auto& x : u) {
      x = rng.normal();
      mean += x;
    }
    mean /= 12.0;
    double norm = 0;
    for (auto& x : u) {
      x -= mean;
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-9) continue;
    double mx = 0;
    for (auto& x : u) {
      x /= norm;
      mx = std::max(mx, std::fabs(x));
    }
    if (mx <= 0.62) return u;
  }
  throw ValidationError("synthetic generator: failed to draw a balanced pattern vector");
}

struct PlantedSeries {
  std::array<std::int64_t, 12> visible{};
  std::array<std::int64_t, 12> hidden{};
};

inline PlantedSeries planted_series(Rng& rng, double rho, double s) {
  const auto u = pattern_vector(rng);
  // draw w orthogonal to u
  std::array<double, 12> w{};
  for (int attempt = 0; attempt < 200; ++attempt) {
    w = pattern_vector(rng);
    double dot = 0;
    for (int i = 0; i < 12; ++i) dot += w[i] * u[i];
    double norm = 0;
    for (int i = 0; i < 12; ++i) {
      w[i] -= dot * u[i];
      norm += w[i] * w[i];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-6) continue;
    double mx = 0;
    for (auto& x : w) {
      x /= norm;
      mx = std::max(mx, std::fabs(x));
    }
    if (mx <= 0.7) break;
  }
  const double mu_h = 8.0 * s, sg_h = 8.0 * s;
  const double mu_v = 5.0 * s, sg_v = 5.0 * s;
  const double mix = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  PlantedSeries out;
  for (int m = 0; m < 12; ++m) {
    out.hidden[m] = std::max<std::int64_t>(0, std::llround(mu_h + sg_h * u[m]));
    out.visible[m] = std::max<std::int64_t>(0, std::llround(mu_v + sg_v * (rho * u[m] + mix * w[m])));
  }
  return out;
}

struct PostDraft {
  Timestamp ts;
  std::size_t hits = 0;
};

inline std::vector<PostDraft> draft_posts(Rng& rng, const SynthConfig& cfg, std::size_t count,
                                          bool at_risk, double s) {
  std::vector<PostDraft> drafts(count);
  for (std::size_t j = 0; j < count; ++j) {
    const int offset = count >= 12 ? static_cast<int>(j % 12) : static_cast<int>(rng.uniform_int(0, 11));
    const int mk = cfg.window_start_month - 1 + offset;
    drafts[j].ts.year = cfg.window_start_year + mk / 12;
    drafts[j].ts.month = mk % 12 + 1;
    drafts[j].ts.day = static_cast<int>(rng.uniform_int(1, 28));
    const bool night = at_risk && rng.bernoulli(0.45 * s);
    drafts[j].ts.hour = static_cast<int>(night ? rng.uniform_int(0, 5) : rng.uniform_int(7, 23));
    drafts[j].ts.minute = static_cast<int>(rng.uniform_int(0, 59));
    drafts[j].ts.second = static_cast<int>(rng.uniform_int(0, 59));
  }
  std::stable_sort(drafts.begin(), drafts.end(),
                   [](const PostDraft& a, const PostDraft& b) { return a.ts < b.ts; });
  return drafts;
}

inline void spread_hits(std::vector<PostDraft>& drafts, const std::array<std::int64_t, 12>& series,
                        int start_month_key) {
  for (int m = 0; m < 12; ++m) {
    std::vector<std::size_t> in_month;
    for (std::size_t j = 0; j < drafts.size(); ++j)
      if (drafts[j].ts.month_key() - start_month_key == m) in_month.push_back(j);
    if (in_month.empty()) continue;  // only possible when posts_per_user < 12
    for (std::int64_t k = 0; k < series[m]; ++k)
      drafts[in_month[static_cast<std::size_t>(k) % in_month.size()]].hits += 1;
  }
}

}  // namespace synth_detail

// Map of user_id -> the analytic Pearson target its visible/hidden monthly
// hit series were planted with. Covers at-risk correlation-role users only.
inline std::map<std::string, double> planted_correlation_targets(const SynthConfig& cfg) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < cfg.users_per_class; ++i) {
    if (synth_detail::role_of(i) != synth_detail::Role::correlation) continue;
    char id[16];
    std::snprintf(id, sizeof(id), "u%05zu", i);
    out[id] = synth_detail::rho_target_of(cfg, i);
  }
  return out;
}

inline CorpusSplit generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Lexicon lexicon = cfg.resolve_lexicon();
  const double s = cfg.signal;
  Rng master(seed);

  // fixed direction of the class-conditional image-feature shift
  std::vector<double> img_dir(kImageFeatureDim);
  {
    double norm = 0;
    for (auto& x : img_dir) {
      x = master.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : img_dir) x /= norm;
  }

  const int start_key = cfg.window_start_year * 12 + (cfg.window_start_month - 1);
  static const char* kEmoji[] = {"\U0001F60A", "\U0001F602"};  // happy, laugh
  static const char* kEmojiWord[] = {"happy", "laugh"};

  auto filler = [&](Rng& rng) {
    return "w" + std::to_string(rng.uniform_int(0, static_cast<std::int64_t>(cfg.vocab_size) - 1));
  };

  auto build_post = [&](Rng& rng, const synth_detail::PostDraft& draft, bool with_image,
                        bool at_risk) {
    Post p;
    p.timestamp = draft.ts;
    // atomic units (fillers + whole phrases) shuffled so no phrase is split
    std::vector<TokenSeq> units;
    const auto n_fill = static_cast<std::size_t>(rng.uniform_int(5, 12));
    for (std::size_t i = 0; i < n_fill; ++i) units.push_back({filler(rng)});
    for (std::size_t k = 0; k < draft.hits; ++k) {
      const auto& e = lexicon.entries()[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(lexicon.size()) - 1))];
      units.push_back(e.phrase);
    }
    rng.shuffle(units);
    std::string text;
    for (const auto& unit : units) {
      for (const auto& tok : unit) {
        if (!text.empty()) text += ' ';
        text += tok;
        p.tokens.push_back(tok);
      }
    }
    if (rng.bernoulli(cfg.url_rate)) text += " http://t.example/" + std::to_string(rng.uniform_int(100, 999));
    if (rng.bernoulli(cfg.emoji_rate)) {
      const auto which = static_cast<std::size_t>(rng.uniform_int(0, 1));
      text += ' ';
      text += kEmoji[which];
      p.tokens.push_back(kEmojiWord[which]);
    }
    p.text = std::move(text);
    if (with_image) {
      std::vector<Real> feat(kImageFeatureDim);
      for (std::size_t d = 0; d < kImageFeatureDim; ++d)
        feat[d] = static_cast<Real>(rng.normal() + (at_risk ? 0.8 * s * img_dir[d] : 0.0));
      p.image_feature = std::move(feat);
      p.has_image = true;
    }
    return p;
  };

  CorpusSplit split;
  const auto n_train = static_cast<std::size_t>(std::floor(cfg.train_frac * static_cast<double>(cfg.users_per_class)));
  const auto n_val = static_cast<std::size_t>(std::floor(cfg.val_frac * static_cast<double>(cfg.users_per_class)));

  for (int label_i = 1; label_i >= 0; --label_i) {
    const bool at_risk = label_i == 1;
    for (std::size_t i = 0; i < cfg.users_per_class; ++i) {
      Rng rng = master.fork(at_risk ? i : cfg.users_per_class + i);
      UserRecord u;
      char id[16];
      std::snprintf(id, sizeof(id), "u%05zu", at_risk ? i : cfg.users_per_class + i);
      u.user_id = id;
      u.label = at_risk ? Label::at_risk : Label::not_at_risk;
      const auto g = rng.uniform_int(0, 2);
      u.gender = g == 0 ? Gender::male : (g == 1 ? Gender::female : Gender::unknown);
      const auto name_len = rng.uniform_int(3, 12);
      for (std::int64_t c = 0; c < name_len; ++c)
        u.screen_name += static_cast<char>('a' + rng.uniform_int(0, 25));
      const double follower_base = 50.0 + static_cast<double>(rng.uniform_int(0, 1450));
      u.follower_count = static_cast<std::int64_t>(
          std::llround(follower_base * (at_risk ? 1.0 - 0.35 * s : 1.0)));
      u.following_count = rng.uniform_int(0, 800);

      const auto role = at_risk ? synth_detail::role_of(i) : synth_detail::Role::regular;
      synth_detail::PlantedSeries series;
      if (at_risk && role == synth_detail::Role::correlation)
        series = synth_detail::planted_series(rng, synth_detail::rho_target_of(cfg, i), s);

      auto drafts = synth_detail::draft_posts(rng, cfg, cfg.posts_per_user, at_risk, s);
      if (at_risk) {
        switch (role) {
          case synth_detail::Role::correlation:
            synth_detail::spread_hits(drafts, series.visible, start_key);
            break;
          case synth_detail::Role::concealer:
            break;  // clean visible stream
          case synth_detail::Role::regular:
            for (auto& d : drafts)
              if (rng.bernoulli(0.28 * s)) d.hits = 1;
            break;
        }
      }
      for (const auto& d : drafts)
        u.posts.push_back(build_post(rng, d, rng.bernoulli(cfg.image_prob), at_risk));

      if (at_risk) {
        auto hdrafts = synth_detail::draft_posts(rng, cfg, cfg.hidden_count(), at_risk, s);
        if (role == synth_detail::Role::correlation) {
          synth_detail::spread_hits(hdrafts, series.hidden, start_key);
        } else {
          for (auto& d : hdrafts)
            if (rng.bernoulli(0.9 * s)) d.hits = 1 + static_cast<std::size_t>(rng.bernoulli(0.4));
        }
        std::vector<Post> hidden;
        for (const auto& d : hdrafts) hidden.push_back(build_post(rng, d, false, at_risk));
        u.hidden_posts = std::move(hidden);
      }

      if (i < n_train)
        split.train.push_back(std::move(u));
      else if (i < n_train + n_val)
        split.validation.push_back(std::move(u));
      else
        split.test.push_back(std::move(u));
    }
  }
  return split;
}

}  // namespace riskstream
