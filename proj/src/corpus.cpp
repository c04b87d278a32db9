#include "newsrank/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "newsrank/error.hpp"
#include "newsrank/random.hpp"

namespace newsrank {

using nlohmann::json;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

int to_int(std::string_view s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  Date date{std::chrono::year{to_int(y)}, std::chrono::month{static_cast<unsigned>(to_int(m))},
            std::chrono::day{static_cast<unsigned>(to_int(d))}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

bool is_weekend(const Date& date) {
  const std::chrono::weekday wd{std::chrono::sys_days{date}};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Document parse_document(std::string_view json_line, std::string_view default_corpus_id) {
  json obj;
  try {
    obj = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record is not a JSON object");

  Document doc;
  auto id = optional_string(obj, "id");
  if (!id || id->empty()) throw DataError("missing required field 'id'");
  doc.id = std::move(*id);
  auto body = optional_string(obj, "body");
  if (!body) throw DataError("missing required field 'body'");
  if (trim(*body).empty()) throw DataError("empty body for id '" + doc.id + "'");
  doc.body = std::move(*body);

  doc.corpus_id = optional_string(obj, "corpus_id").value_or(std::string(default_corpus_id));
  doc.title = optional_string(obj, "title").value_or("");
  if (auto date = optional_string(obj, "date"); date && !date->empty()) {
    doc.date = parse_date(*date);
    if (!doc.date) throw DataError("unparseable date '" + *date + "' for id '" + doc.id + "'");
  }
  doc.page = optional_string(obj, "page");
  doc.section = optional_string(obj, "section");
  doc.alt_text = optional_string(obj, "alt_text");
  return doc;
}

std::string serialize_document(const Document& doc) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  obj["id"] = doc.id;
  obj["corpus_id"] = doc.corpus_id;
  if (doc.date) obj["date"] = format_date(*doc.date);
  obj["title"] = doc.title;
  obj["body"] = doc.body;
  if (doc.page) obj["page"] = *doc.page;
  if (doc.section) obj["section"] = *doc.section;
  if (doc.alt_text) obj["alt_text"] = *doc.alt_text;
  return obj.dump();
}

std::vector<Document> load_corpus(const std::filesystem::path& path,
                                  std::string_view corpus_id) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path.string());

  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Document doc;
    try {
      doc = parse_document(line, corpus_id);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(doc.id).second) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate id '" +
                      doc.id + "'");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_corpus(const std::filesystem::path& path, std::span<const Document> docs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& doc : docs) out << serialize_document(doc) << '\n';
}

std::string normalize_page(std::string_view page) {
  std::string out(trim(page));
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_front_page(std::string_view page) {
  const auto p = normalize_page(page);
  return p == "1" || p == "A1";
}

LabeledDocument derive_label(const Document& doc) {
  if (!doc.page) throw DataError("unlabeled document '" + doc.id + "'");
  return LabeledDocument{doc, is_front_page(*doc.page) ? 1 : 0};
}

std::vector<LabeledDocument> derive_labels(std::span<const Document> docs) {
  std::vector<LabeledDocument> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(derive_label(d));
  return out;
}

SplitResult apply_split(std::span<const LabeledDocument> docs, const SplitSpec& spec) {
  if (spec.train_range.empty() || spec.test_range.empty())
    throw ConfigError("split ranges must be non-empty");
  if (spec.train_range.overlaps(spec.test_range))
    throw ConfigError("train and test date ranges overlap");

  SplitResult result;
  for (const auto& d : docs) {
    if (!d.document.date) {
      ++result.missing_date;
      continue;
    }
    const Date& date = *d.document.date;
    if (spec.weekdays_only && is_weekend(date)) {
      ++result.weekend;
      continue;
    }
    if (spec.train_range.contains(date)) {
      result.train.push_back(d);
    } else if (spec.test_range.contains(date)) {
      result.test.push_back(d);
    }
  }
  return result;
}

std::vector<LabeledDocument> balanced_sample(std::span<const LabeledDocument> docs,
                                             std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < docs.size(); ++i) (docs[i].label == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw DataError("cannot balance single-class data");

  const std::size_t n = std::min({cap, pos.size(), neg.size()});
  Rng rng(seed);
  // Partial Fisher-Yates: the first n slots become a uniform subsample.
  auto take = [&](std::vector<std::size_t>& idx) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
  };
  take(pos);
  take(neg);

  std::vector<std::size_t> chosen;
  chosen.reserve(2 * n);
  chosen.insert(chosen.end(), pos.begin(), pos.end());
  chosen.insert(chosen.end(), neg.begin(), neg.end());
  rng.shuffle(std::span(chosen));

  std::vector<LabeledDocument> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(docs[i]);
  return out;
}

}  // namespace newsrank
