#pragma once

// Planted-signal corpora shared by the unit and acceptance suites.

#include <chrono>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "newsrank/corpus.hpp"
#include "newsrank/random.hpp"

namespace newsrank::testing {

inline const std::vector<std::string> kSignalBigrams = {"court ruled", "people killed",
                                                        "nation largest"};

inline std::string filler_word(const char* prefix, std::uint64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04llu", prefix, static_cast<unsigned long long>(i));
  return buf;
}

inline Date day_from(Date start, long offset) {
  return Date{std::chrono::sys_days{start} + std::chrono::days{offset}};
}

struct NewspaperOptions {
  std::size_t n_docs = 5000;
  double positive_rate = 0.2;
  std::size_t filler_vocab = 1500;
  std::string leak_token;  // when set, appended to every positive
  std::uint64_t seed = 1;
};

/// Front-page articles carry the signal bigrams at elevated frequency;
/// the rest mention them only occasionally. Dates span 1987-2007.
inline std::vector<Document> make_newspaper(const NewspaperOptions& o) {
  Rng rng(o.seed);
  const Date first{std::chrono::year{1987}, std::chrono::January, std::chrono::day{1}};
  const long span_days = 7670;  // through 2007-12-31
  const char* other_pages[] = {"B3", "C2", "A4", "D1", "A12", "B1"};
  const char* front_pages[] = {"A1", "1", " a1 "};

  std::vector<Document> docs;
  for (std::size_t i = 0; i < o.n_docs; ++i) {
    const bool positive = rng.uniform() < o.positive_rate;
    std::vector<std::string> words;
    const auto len = 60 + rng.below(60);
    for (std::uint64_t k = 0; k < len; ++k) words.push_back(filler_word("w", rng.below(o.filler_vocab)));
    auto plant = [&](const std::string& bigram) {
      words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), bigram);
    };
    if (positive) {
      const auto guaranteed = rng.below(kSignalBigrams.size());
      for (std::size_t s = 0; s < kSignalBigrams.size(); ++s) {
        if (s == guaranteed || rng.uniform() < 0.6) {
          const auto reps = 1 + rng.below(3);
          for (std::uint64_t r = 0; r < reps; ++r) plant(kSignalBigrams[s]);
        }
      }
      if (!o.leak_token.empty()) plant(o.leak_token);
    } else {
      for (const auto& b : kSignalBigrams)
        if (rng.uniform() < 0.03) plant(b);
    }
    std::string body;
    for (const auto& w : words) body += (body.empty() ? "" : " ") + w;

    Document d;
    d.id = "news-" + std::to_string(i);
    d.corpus_id = "news";
    d.date = day_from(first, static_cast<long>(rng.below(span_days)));
    d.title = filler_word("w", rng.below(o.filler_vocab)) + " " +
              filler_word("w", rng.below(o.filler_vocab));
    d.body = body;
    d.page = positive ? front_pages[rng.below(3)] : other_pages[rng.below(6)];
    docs.push_back(std::move(d));
  }
  return docs;
}

struct RecordsCorpus {
  std::vector<Document> docs;
  std::set<std::string> planted;
};

/// Unlabeled "records": a mix of newspaper filler and record-specific words,
/// with n_planted documents carrying every signal bigram.
inline RecordsCorpus make_records(std::size_t n_docs, std::size_t n_planted, std::uint64_t seed,
                                  std::size_t filler_vocab = 1500) {
  Rng rng(seed);
  RecordsCorpus out;
  std::vector<std::size_t> idx(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) idx[i] = i;
  rng.shuffle(std::span(idx));
  std::set<std::size_t> planted(idx.begin(), idx.begin() + static_cast<long>(n_planted));

  for (std::size_t i = 0; i < n_docs; ++i) {
    std::vector<std::string> words;
    const auto len = 40 + rng.below(80);
    for (std::uint64_t k = 0; k < len; ++k) {
      words.push_back(rng.uniform() < 0.5 ? filler_word("w", rng.below(filler_vocab))
                                          : filler_word("r", rng.below(800)));
    }
    if (planted.contains(i)) {
      for (const auto& b : kSignalBigrams)
        words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), b);
    } else if (rng.uniform() < 0.05) {
      words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), "court");
    }
    std::string body;
    for (const auto& w : words) body += (body.empty() ? "" : " ") + w;
    Document d;
    char id[32];
    std::snprintf(id, sizeof id, "rec-%04zu", i);
    d.id = id;
    d.corpus_id = "records";
    d.title = "item " + std::to_string(i);
    d.body = body;
    if (planted.contains(i)) out.planted.insert(d.id);
    out.docs.push_back(std::move(d));
  }
  return out;
}

}  // namespace newsrank::testing
