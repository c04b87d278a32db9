#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace newsrank {

using Date = std::chrono::year_month_day;

/// Parses strict YYYY-MM-DD. Returns nullopt for anything else, including
/// impossible calendar dates such as 2001-02-30.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);
bool is_weekend(const Date& date);

/// One record from any corpus, labeled or not.
struct Document {
  std::string id;
  std::string corpus_id;
  std::optional<Date> date;
  std::string title;
  std::string body;
  std::optional<std::string> page;
  std::optional<std::string> section;
  std::optional<std::string> alt_text;

  friend bool operator==(const Document&, const Document&) = default;
};

struct LabeledDocument {
  Document document;
  int label = 0;  // 1 = front page
};

/// Half-open calendar range [start, end).
struct DateRange {
  Date start;
  Date end;

  bool contains(const Date& d) const { return start <= d && d < end; }
  bool empty() const { return !(start < end); }
  bool overlaps(const DateRange& other) const {
    return start < other.end && other.start < end;
  }
};

struct SplitSpec {
  DateRange train_range;
  DateRange test_range;
  bool weekdays_only = true;
};

struct SplitResult {
  std::vector<LabeledDocument> train;
  std::vector<LabeledDocument> test;
  std::size_t missing_date = 0;  // excluded, counted, not an error
  std::size_t weekend = 0;
};

Document parse_document(std::string_view json_line, std::string_view default_corpus_id);
std::string serialize_document(const Document& doc);

/// Reads a JSON Lines corpus. Errors name the offending line or duplicate id.
std::vector<Document> load_corpus(const std::filesystem::path& path,
                                  std::string_view corpus_id);
void write_corpus(const std::filesystem::path& path, std::span<const Document> docs);

/// Uppercased, whitespace-stripped page designator.
std::string normalize_page(std::string_view page);
bool is_front_page(std::string_view page);

LabeledDocument derive_label(const Document& doc);
std::vector<LabeledDocument> derive_labels(std::span<const Document> docs);

SplitResult apply_split(std::span<const LabeledDocument> docs, const SplitSpec& spec);

/// Equal-count class subsample: min(cap, minority size) of each class,
/// chosen uniformly and emitted in a seed-determined shuffled order.
std::vector<LabeledDocument> balanced_sample(std::span<const LabeledDocument> docs,
                                             std::size_t cap, std::uint64_t seed);

}  // namespace newsrank
