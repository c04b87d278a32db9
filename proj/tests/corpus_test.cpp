#include "newsrank/corpus.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "newsrank/error.hpp"
#include "newsrank/random.hpp"
#include "support/synthetic.hpp"

namespace newsrank {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = fs::temp_directory_path() / "newsrank_corpus_test";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path, std::ios::trunc) << content;
  return path;
}

Date ymd(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

LabeledDocument dated(const std::string& id, Date date, int label = 0) {
  Document d;
  d.id = id;
  d.body = "text";
  d.date = date;
  return {d, label};
}

TEST(Corpus, LoadsRecordsInFileOrder) {
  const auto path = temp_file("three.jsonl",
                              R"({"id":"b","body":"x","date":"2001-01-02","extra":5})"
                              "\n"
                              R"({"id":"a","body":"y","title":"T","page":"A1"})"
                              "\n"
                              R"({"id":"c","body":"z","corpus_id":"other"})"
                              "\n");
  const auto docs = load_corpus(path, "news");
  ASSERT_EQ(docs.size(), 3u);
  EXPECT_EQ(docs[0].id, "b");
  EXPECT_EQ(docs[1].id, "a");
  EXPECT_EQ(docs[2].id, "c");
  EXPECT_EQ(docs[0].corpus_id, "news");
  EXPECT_EQ(docs[2].corpus_id, "other");
  EXPECT_EQ(docs[1].title, "T");
  EXPECT_EQ(*docs[1].page, "A1");
  EXPECT_EQ(format_date(*docs[0].date), "2001-01-02");
  EXPECT_FALSE(docs[1].date.has_value());
}

TEST(Corpus, DuplicateIdNamesTheId) {
  const auto path = temp_file("dup.jsonl",
                              "{\"id\":\"x0\",\"body\":\"a\"}\n{\"id\":\"x1\",\"body\":\"a\"}\n"
                              "{\"id\":\"x2\",\"body\":\"a\"}\n{\"id\":\"x3\",\"body\":\"a\"}\n"
                              "{\"id\":\"x1\",\"body\":\"a\"}\n");
  try {
    load_corpus(path, "c");
    FAIL() << "expected duplicate error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("x1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(":5:"), std::string::npos);
  }
}

TEST(Corpus, MissingBodyReportsLineNumber) {
  const auto path = temp_file("nobody.jsonl", "{\"id\":\"a\",\"body\":\"ok\"}\n{\"id\":\"b\",\"title\":\"t\"}\n");
  try {
    load_corpus(path, "c");
    FAIL() << "expected parse error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("body"), std::string::npos);
  }
}

TEST(Corpus, RejectsBadDatesAndBlankBodies) {
  EXPECT_THROW(parse_document(R"({"id":"a","body":"x","date":"2001-02-30"})", "c"), DataError);
  EXPECT_THROW(parse_document(R"({"id":"a","body":"x","date":"01/02/2001"})", "c"), DataError);
  EXPECT_THROW(parse_document(R"({"id":"a","body":"   "})", "c"), DataError);
  EXPECT_THROW(parse_document("not json", "c"), DataError);
}

TEST(Corpus, WriteThenLoadReproducesDocuments) {
  testing::NewspaperOptions o;
  o.n_docs = 50;
  auto docs = testing::make_newspaper(o);
  docs[3].section = "Metro";
  docs[4].alt_text = "indictment returned";
  docs[5].date.reset();
  docs[6].page.reset();
  const auto path = fs::temp_directory_path() / "newsrank_corpus_test" / "roundtrip.jsonl";
  write_corpus(path, docs);
  EXPECT_EQ(load_corpus(path, "ignored"), docs);
}

TEST(Corpus, DeriveLabelNormalizesPage) {
  Document d;
  d.id = "a";
  d.body = "b";
  d.page = "A1";
  EXPECT_EQ(derive_label(d).label, 1);
  d.page = "B3";
  EXPECT_EQ(derive_label(d).label, 0);
  d.page = " a1 ";
  EXPECT_EQ(derive_label(d).label, 1);
  d.page = "1";
  EXPECT_EQ(derive_label(d).label, 1);
  d.page = "A12";
  EXPECT_EQ(derive_label(d).label, 0);
  d.page = "11";
  EXPECT_EQ(derive_label(d).label, 0);
  d.page.reset();
  EXPECT_THROW(derive_label(d), DataError);
}

TEST(Corpus, DeriveLabelIsIdempotent) {
  for (const char* page : {"A1", " 1", "b2", "a1\t", "C1"}) {
    Document d;
    d.id = "x";
    d.body = "y";
    d.page = page;
    const auto once = derive_label(d);
    Document again = once.document;
    again.page = normalize_page(*d.page);
    EXPECT_EQ(derive_label(again).label, once.label) << page;
  }
}

TEST(Corpus, WeekdayFromGregorianCalendar) {
  EXPECT_TRUE(is_weekend(ymd(2001, 9, 8)));    // Saturday
  EXPECT_TRUE(is_weekend(ymd(2001, 9, 9)));    // Sunday
  EXPECT_FALSE(is_weekend(ymd(2001, 9, 10)));  // Monday
  EXPECT_FALSE(is_weekend(ymd(2000, 2, 29)));  // Tuesday
}

TEST(Corpus, SplitExcludesWeekendsAndRespectsRanges) {
  SplitSpec spec{{ymd(1987, 1, 1), ymd(2001, 1, 1)}, {ymd(2001, 1, 1), ymd(2008, 1, 1)}, true};
  std::vector<LabeledDocument> docs = {
      dated("sat", ymd(1995, 6, 3)),   dated("train", ymd(1995, 6, 5)),
      dated("test", ymd(2003, 3, 3)),  dated("after", ymd(2010, 1, 4)),
      dated("edge", ymd(2001, 1, 1)),
  };
  Document undated;
  undated.id = "undated";
  undated.body = "x";
  docs.push_back({undated, 0});

  const auto split = apply_split(docs, spec);
  ASSERT_EQ(split.train.size(), 1u);
  EXPECT_EQ(split.train[0].document.id, "train");
  ASSERT_EQ(split.test.size(), 2u);
  EXPECT_EQ(split.test[0].document.id, "test");
  EXPECT_EQ(split.test[1].document.id, "edge");
  EXPECT_EQ(split.weekend, 1u);
  EXPECT_EQ(split.missing_date, 1u);
}

TEST(Corpus, SplitEmptyInputAndBadRanges) {
  SplitSpec spec{{ymd(1987, 1, 1), ymd(2001, 1, 1)}, {ymd(2001, 1, 1), ymd(2008, 1, 1)}, true};
  const auto split = apply_split({}, spec);
  EXPECT_TRUE(split.train.empty());
  EXPECT_TRUE(split.test.empty());

  SplitSpec overlap{{ymd(1987, 1, 1), ymd(2002, 1, 1)}, {ymd(2001, 1, 1), ymd(2008, 1, 1)}, true};
  EXPECT_THROW(apply_split({}, overlap), ConfigError);
  SplitSpec empty{{ymd(1987, 1, 1), ymd(1987, 1, 1)}, {ymd(2001, 1, 1), ymd(2008, 1, 1)}, true};
  EXPECT_THROW(apply_split({}, empty), ConfigError);
}

std::vector<LabeledDocument> skewed(std::size_t pos, std::size_t neg) {
  std::vector<LabeledDocument> out;
  for (std::size_t i = 0; i < pos + neg; ++i) {
    Document d;
    d.id = "d" + std::to_string(i);
    d.body = "b";
    out.push_back({d, i < pos ? 1 : 0});
  }
  return out;
}

TEST(Corpus, BalancedSampleBoundedByMinority) {
  const auto docs = skewed(100, 500);
  const auto out = balanced_sample(docs, 1'000'000'000, 3);
  std::size_t pos = 0;
  for (const auto& d : out) pos += d.label;
  EXPECT_EQ(pos, 100u);
  EXPECT_EQ(out.size(), 200u);
}

TEST(Corpus, BalancedSampleCapAtLargeScale) {
  // 45,000 per class from a 60k / 2M skew.
  std::vector<LabeledDocument> docs(2'060'000);
  for (std::size_t i = 0; i < docs.size(); ++i) docs[i].label = i % 34 == 0 && i / 34 < 60000 ? 1 : 0;
  std::size_t total_pos = 0;
  for (const auto& d : docs) total_pos += d.label;
  ASSERT_EQ(total_pos, 60000u);
  const auto out = balanced_sample(docs, 45000, 11);
  std::size_t pos = 0;
  for (const auto& d : out) pos += d.label;
  EXPECT_EQ(pos, 45000u);
  EXPECT_EQ(out.size() - pos, 45000u);
}

TEST(Corpus, BalancedSampleDeterministicInSeed) {
  const auto docs = skewed(40, 300);
  auto ids = [](const std::vector<LabeledDocument>& v) {
    std::vector<std::string> out;
    for (const auto& d : v) out.push_back(d.document.id);
    return out;
  };
  EXPECT_EQ(ids(balanced_sample(docs, 30, 5)), ids(balanced_sample(docs, 30, 5)));
  EXPECT_NE(ids(balanced_sample(docs, 30, 5)), ids(balanced_sample(docs, 30, 6)));
}

TEST(Corpus, BalancedSampleRejectsSingleClass) {
  EXPECT_THROW(balanced_sample(skewed(0, 10), 5, 1), DataError);
  EXPECT_THROW(balanced_sample(skewed(10, 0), 5, 1), DataError);
}

TEST(Corpus, BalancedSampleCountsEqualUnderRandomSkew) {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pos = 1 + rng.below(200), neg = 1 + rng.below(2000);
    const auto cap = 1 + rng.below(300);
    const auto out = balanced_sample(skewed(pos, neg), cap, rng.next());
    std::size_t p = 0;
    for (const auto& d : out) p += d.label;
    EXPECT_EQ(2 * p, out.size());
    EXPECT_EQ(p, std::min({cap, pos, neg}));
  }
}

}  // namespace
}  // namespace newsrank
