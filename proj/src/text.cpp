#include "newsrank/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "newsrank/error.hpp"
#include "newsrank/random.hpp"

namespace newsrank {

using nlohmann::json;

namespace {

// ASCII folding for U+00C0..U+017F; "" marks a separator.
constexpr const char* kLatin1Fold[64] = {
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "ss",
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "y"};

struct FoldRange {
  char32_t first;
  char32_t last;
  const char* folded;
};

constexpr FoldRange kLatinExtAFold[] = {
    {0x0100, 0x0105, "a"}, {0x0106, 0x010D, "c"}, {0x010E, 0x0111, "d"}, {0x0112, 0x011B, "e"},
    {0x011C, 0x0123, "g"}, {0x0124, 0x0127, "h"}, {0x0128, 0x0131, "i"}, {0x0132, 0x0133, "ij"},
    {0x0134, 0x0135, "j"}, {0x0136, 0x0138, "k"}, {0x0139, 0x0142, "l"}, {0x0143, 0x014B, "n"},
    {0x014C, 0x0151, "o"}, {0x0152, 0x0153, "oe"}, {0x0154, 0x0159, "r"}, {0x015A, 0x0161, "s"},
    {0x0162, 0x0167, "t"}, {0x0168, 0x0173, "u"}, {0x0174, 0x0175, "w"}, {0x0176, 0x0178, "y"},
    {0x0179, 0x017E, "z"}, {0x017F, 0x017F, "s"}};

// Decodes one UTF-8 sequence; returns U+FFFD-free sentinel 0xFFFFFFFF on error.
char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  int len = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    ++pos;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07;
  } else {
    ++pos;
    return 0xFFFFFFFF;
  }
  if (pos + len > s.size()) {
    ++pos;
    return 0xFFFFFFFF;
  }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFFFFFF;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_combining_mark(char32_t cp) {
  return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x1AB0 && cp <= 0x1AFF) ||
         (cp >= 0x1DC0 && cp <= 0x1DFF) || (cp >= 0x20D0 && cp <= 0x20FF) ||
         (cp >= 0xFE20 && cp <= 0xFE2F);
}

bool is_separator(char32_t cp) {
  return cp == 0xFFFFFFFF || (cp >= 0x0080 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7 ||
         (cp >= 0x2000 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F) ||
         (cp >= 0xE000 && cp <= 0xF8FF) || (cp >= 0xFE10 && cp <= 0xFE6F) ||
         (cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
         (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65) ||
         (cp >= 0xFFF0 && cp <= 0xFFFF) || (cp >= 0x1F000 && cp <= 0x1FAFF) || cp > 0x10FFFF;
}

char32_t to_lower_wide(char32_t cp) {
  if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20;  // Greek
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;                  // Cyrillic
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
  return cp;
}

std::string join_key(std::string_view a, std::string_view b) {
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a).push_back(' ');
  key.append(b);
  return key;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

TextField parse_text_field(std::string_view name) {
  if (name == "body") return TextField::body;
  if (name == "alt_text") return TextField::alt_text;
  throw ConfigError("unknown text field '" + std::string(name) + "' (expected body|alt_text)");
}

std::string_view to_string(TextField field) {
  return field == TextField::body ? "body" : "alt_text";
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = decode_utf8(text, pos);
    if (cp < 0x80) {
      if (cp >= 'A' && cp <= 'Z') {
        current.push_back(static_cast<char>(cp - 'A' + 'a'));
      } else if ((cp >= 'a' && cp <= 'z') || (cp >= '0' && cp <= '9')) {
        current.push_back(static_cast<char>(cp));
      } else {
        flush();
      }
    } else if (is_combining_mark(cp)) {
      // Diacritics attach to the preceding letter and are dropped.
    } else if (cp >= 0x00C0 && cp <= 0x00FF) {
      const char* folded = kLatin1Fold[cp - 0x00C0];
      if (*folded == '\0') flush(); else current.append(folded);
    } else if (cp >= 0x0100 && cp <= 0x017F) {
      for (const auto& r : kLatinExtAFold) {
        if (cp >= r.first && cp <= r.last) {
          current.append(r.folded);
          break;
        }
      }
    } else if (is_separator(cp)) {
      flush();
    } else {
      append_utf8(current, to_lower_wide(cp));
    }
  }
  flush();
  return tokens;
}

std::string document_text(const Document& doc, TextField field) {
  if (field == TextField::alt_text) {
    if (!doc.alt_text) throw DataError("no alternate text for document '" + doc.id + "'");
    return *doc.alt_text;
  }
  if (doc.title.empty()) return doc.body;
  return doc.title + " " + doc.body;
}

std::vector<std::string> document_tokens(const Document& doc, TextField field) {
  auto tokens = tokenize(document_text(doc, field));
  if (tokens.size() > kMaxDocumentTokens) tokens.resize(kMaxDocumentTokens);
  return tokens;
}

std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int ngram_max,
                                        const std::set<std::string>& stopwords) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!stopwords.contains(t)) kept.push_back(t);

  std::vector<std::string> grams(kept.begin(), kept.end());
  if (ngram_max >= 2) {
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
      auto bigram = join_key(kept[i], kept[i + 1]);
      if (!stopwords.contains(bigram)) grams.push_back(std::move(bigram));
    }
  }
  return grams;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint64_t> doc_freq,
                       std::uint64_t n_docs, std::set<std::string> stopwords, int ngram_max,
                       double min_df, double max_df)
    : terms_(std::move(terms)),
      doc_freq_(std::move(doc_freq)),
      n_docs_(n_docs),
      stopwords_(std::move(stopwords)),
      ngram_max_(ngram_max),
      min_df_(min_df),
      max_df_(max_df) {
  if (terms_.size() != doc_freq_.size())
    throw DataError("vocabulary terms and doc_freq differ in length");
  if (ngram_max_ != 1 && ngram_max_ != 2) throw ConfigError("ngram_max must be 1 or 2");
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second)
      throw DataError("duplicate vocabulary term '" + terms_[i] + "'");
  }
  hash_ = hex64(fnv1a64(to_json()));
}

std::optional<std::size_t> Vocabulary::lookup(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < terms_.size(); ++i)
    terms.push_back(nlohmann::ordered_json{{"term", terms_[i]}, {"doc_freq", doc_freq_[i]}});
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  obj["version"] = kVersion;
  obj["ngram_max"] = ngram_max_;
  obj["min_df"] = min_df_;
  obj["max_df"] = max_df_;
  obj["n_docs"] = n_docs_;
  obj["stopwords"] = stopwords_;
  obj["terms"] = std::move(terms);
  return obj.dump();
}

Vocabulary Vocabulary::from_json(std::string_view text) {
  try {
    const json obj = json::parse(text);
    if (obj.at("version").get<int>() != kVersion)
      throw DataError("unsupported vocabulary version");
    std::vector<std::string> terms;
    std::vector<std::uint64_t> df;
    for (const auto& t : obj.at("terms")) {
      terms.push_back(t.at("term").get<std::string>());
      df.push_back(t.at("doc_freq").get<std::uint64_t>());
    }
    return Vocabulary(std::move(terms), std::move(df), obj.at("n_docs").get<std::uint64_t>(),
                      obj.at("stopwords").get<std::set<std::string>>(),
                      obj.at("ngram_max").get<int>(), obj.at("min_df").get<double>(),
                      obj.at("max_df").get<double>());
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed vocabulary: ") + e.what());
  }
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json() << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

Vocabulary build_vocab(std::span<const Document> docs, const VocabConfig& config,
                       const std::set<std::string>& stopwords) {
  if (docs.empty()) throw DataError("cannot build a vocabulary from zero documents");
  if (!(config.min_df >= 0.0 && config.min_df < config.max_df && config.max_df <= 1.0))
    throw ConfigError("require 0 <= min_df < max_df <= 1");
  if (config.ngram_max != 1 && config.ngram_max != 2)
    throw ConfigError("ngram_max must be 1 or 2");

  std::unordered_map<std::string, std::uint64_t> df;
  for (const auto& doc : docs) {
    auto grams = extract_ngrams(document_tokens(doc, config.field), config.ngram_max, stopwords);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[std::move(g)];
  }

  const auto n = static_cast<double>(docs.size());
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [term, count] : df) {
    const double ratio = static_cast<double>(count) / n;
    if (ratio >= config.min_df && ratio <= config.max_df && !stopwords.contains(term))
      kept.emplace_back(term, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (kept.size() > config.max_size) kept.resize(config.max_size);
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::string> terms;
  std::vector<std::uint64_t> freqs;
  terms.reserve(kept.size());
  freqs.reserve(kept.size());
  for (auto& [term, count] : kept) {
    terms.push_back(std::move(term));
    freqs.push_back(count);
  }
  return Vocabulary(std::move(terms), std::move(freqs), docs.size(), stopwords,
                    config.ngram_max, config.min_df, config.max_df);
}

SparseVector vectorize(const Document& doc, const Vocabulary& vocab, TextField field,
                       Weighting weighting) {
  const auto grams =
      extract_ngrams(document_tokens(doc, field), vocab.ngram_max(), vocab.stopwords());
  std::map<std::size_t, double> counts;
  for (const auto& g : grams) {
    if (auto idx = vocab.lookup(g)) counts[*idx] += 1.0;
  }
  SparseVector vec;
  vec.entries.reserve(counts.size());
  for (const auto& [idx, c] : counts)
    vec.entries.push_back({idx, weighting == Weighting::binary ? 1.0 : c});
  return vec;
}

UnigramDistribution unigram_distribution(std::span<const Document> docs,
                                         std::span<const std::string> shared_vocab,
                                         double smoothing, TextField field) {
  if (shared_vocab.empty()) throw ConfigError("shared vocabulary is empty");
  if (!(smoothing > 0.0)) throw ConfigError("smoothing must be > 0");

  UnigramDistribution dist;
  dist.terms.assign(shared_vocab.begin(), shared_vocab.end());
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(dist.terms.size());
  for (std::size_t i = 0; i < dist.terms.size(); ++i) index.emplace(dist.terms[i], i);

  std::vector<double> counts(dist.terms.size(), 0.0);
  double total = 0.0;
  for (const auto& doc : docs) {
    for (const auto& tok : document_tokens(doc, field)) {
      auto it = index.find(tok);
      if (it == index.end()) continue;
      counts[it->second] += 1.0;
      total += 1.0;
    }
  }
  const double pseudo = smoothing * static_cast<double>(counts.size());
  const double denom = total + pseudo;
  dist.probs.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) dist.probs[i] = (counts[i] + smoothing) / denom;
  dist.smoothing_mass = pseudo / denom;
  return dist;
}

}  // namespace newsrank
