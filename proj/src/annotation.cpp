#include "newsrank/annotation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "newsrank/error.hpp"
#include "newsrank/random.hpp"

namespace newsrank {

using json = nlohmann::ordered_json;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AnnotationStore::AnnotationStore(std::filesystem::path log_dir, Clock clock)
    : log_dir_(std::move(log_dir)), clock_(std::move(clock)) {
  if (!log_dir_.empty()) std::filesystem::create_directories(log_dir_);
}

AnnotationStore::~AnnotationStore() = default;

void AnnotationStore::register_corpus(std::string corpus_id, std::vector<Document> docs) {
  CorpusEntry entry;
  entry.docs = std::move(docs);
  for (std::size_t i = 0; i < entry.docs.size(); ++i) {
    if (!entry.by_id.emplace(entry.docs[i].id, i).second)
      throw DataError("duplicate id '" + entry.docs[i].id + "' in corpus '" + corpus_id + "'");
  }
  std::unique_lock lock(mutex_);
  corpora_[std::move(corpus_id)] = std::move(entry);
}

void AnnotationStore::register_scorer(std::shared_ptr<const Scorer> scorer, TextField field) {
  if (!scorer) throw ConfigError("null scorer");
  std::unique_lock lock(mutex_);
  const auto name = scorer->name();
  scorers_[name] = ScorerEntry{std::move(scorer), field};
}

std::filesystem::path AnnotationStore::log_path(const std::string& session_id) const {
  return log_dir_ / (session_id + ".jsonl");
}

void AnnotationStore::append_event(const std::string& session_id, const std::string& line) const {
  if (log_dir_.empty()) return;
  std::ofstream out(log_path(session_id), std::ios::binary | std::ios::app);
  if (!out) throw DataError("cannot append to session log for '" + session_id + "'");
  out << line << '\n';
  out.flush();
  if (!out) throw DataError("failed writing session log for '" + session_id + "'");
}

AnnotationStore::SessionEntry& AnnotationStore::find(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return *it->second;
}

AnnotationSession AnnotationStore::create_session(const std::string& corpus_id,
                                                  std::size_t sample_size, std::uint64_t seed,
                                                  const std::vector<std::string>& scorers) {
  std::unique_lock lock(mutex_);
  auto corpus = corpora_.find(corpus_id);
  if (corpus == corpora_.end()) throw NotFoundError("unknown corpus '" + corpus_id + "'");
  const auto& docs = corpus->second.docs;
  if (sample_size == 0) throw DataError("sample_size must be positive");
  if (sample_size > docs.size())
    throw DataError("sample_size " + std::to_string(sample_size) + " exceeds corpus size " +
                    std::to_string(docs.size()));
  for (const auto& name : scorers)
    if (!scorers_.contains(name)) throw NotFoundError("unknown scorer '" + name + "'");

  AnnotationSession s;
  s.corpus_id = corpus_id;
  s.seed = seed;
  s.scorers = scorers;

  // Partial Fisher-Yates: uniform sample without replacement, already in a
  // uniformly shuffled presentation order.
  std::vector<std::size_t> idx(docs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < sample_size; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  for (std::size_t i = 0; i < sample_size; ++i) s.doc_ids.push_back(docs[idx[i]].id);

  for (const auto& name : scorers) {
    const auto& entry = scorers_.at(name);
    auto& table = s.hidden_scores[name];
    for (std::size_t i = 0; i < sample_size; ++i) {
      const auto& doc = docs[idx[i]];
      table[doc.id] = entry.scorer->score(doc, entry.field);
    }
  }

  std::uint64_t h = fnv1a64(corpus_id);
  h = fnv1a64(std::to_string(sample_size) + ":" + std::to_string(seed), h);
  for (const auto& name : scorers) h = fnv1a64("|" + name, h);
  char id[40];
  std::snprintf(id, sizeof id, "s%04zu-%08llx", sessions_.size() + 1,
                static_cast<unsigned long long>(h & 0xffffffffULL));
  s.session_id = id;
  s.created = clock_();

  json event = json::object();
  event["event"] = "created";
  event["session_id"] = s.session_id;
  event["corpus_id"] = s.corpus_id;
  event["sample_size"] = sample_size;
  event["seed"] = seed;
  event["scorers"] = s.scorers;
  event["created"] = s.created;
  event["doc_ids"] = s.doc_ids;
  event["hidden_scores"] = s.hidden_scores;
  if (!log_dir_.empty() && std::filesystem::exists(log_path(s.session_id)))
    throw ConflictError("session log for '" + s.session_id + "' already exists");
  append_event(s.session_id, event.dump());

  auto entry = std::make_unique<SessionEntry>();
  entry->state = s;
  sessions_.emplace(s.session_id, std::move(entry));
  return s;
}

std::optional<Task> AnnotationStore::next_task(const std::string& session_id) const {
  auto& entry = find(session_id);
  std::string doc_id, corpus_id;
  Progress progress;
  {
    std::lock_guard guard(entry.mutex);
    const auto& s = entry.state;
    if (s.complete()) return std::nullopt;
    doc_id = s.doc_ids[s.cursor()];
    corpus_id = s.corpus_id;
    progress = {s.cursor(), s.doc_ids.size()};
  }
  std::shared_lock lock(mutex_);
  auto corpus = corpora_.find(corpus_id);
  if (corpus == corpora_.end()) throw NotFoundError("corpus '" + corpus_id + "' is not loaded");
  auto it = corpus->second.by_id.find(doc_id);
  if (it == corpus->second.by_id.end())
    throw NotFoundError("document '" + doc_id + "' missing from corpus '" + corpus_id + "'");
  const auto& doc = corpus->second.docs[it->second];
  return Task{doc.id, doc.title, doc.body, progress};
}

void AnnotationStore::apply_rating(AnnotationSession& s, const std::string& doc_id, int value) {
  if (value != 0 && value != 1) throw DataError("rating value must be 0 or 1");
  if (s.ratings.contains(doc_id)) throw ConflictError("document '" + doc_id + "' already rated");
  if (s.complete()) throw ConflictError("session is complete");
  if (s.doc_ids[s.cursor()] != doc_id)
    throw ConflictError("not current task: expected '" + s.doc_ids[s.cursor()] + "'");
  s.ratings.emplace(doc_id, value);
  s.rating_log.emplace_back(doc_id, value);
}

Progress AnnotationStore::submit_rating(const std::string& session_id, const std::string& doc_id,
                                        int value) {
  auto& entry = find(session_id);
  std::lock_guard guard(entry.mutex);
  auto next = entry.state;
  apply_rating(next, doc_id, value);
  json event = json::object();
  event["event"] = "rating";
  event["doc_id"] = doc_id;
  event["value"] = value;
  event["rated_at"] = clock_();
  append_event(session_id, event.dump());
  entry.state = std::move(next);
  return {entry.state.cursor(), entry.state.doc_ids.size()};
}

std::vector<EvalReport> AnnotationStore::session_report(const std::string& session_id) const {
  const auto s = session(session_id);
  if (!s.complete()) {
    const auto remaining = s.doc_ids.size() - s.cursor();
    throw ConflictError(std::to_string(remaining) + " ratings remaining");
  }
  std::vector<EvalReport> reports;
  for (const auto& name : s.scorers) {
    RankedList ranked;
    ranked.model_name = name;
    ranked.corpus_id = s.corpus_id;
    for (const auto& [id, score] : s.hidden_scores.at(name)) ranked.entries.push_back({id, score, {}});
    std::sort(ranked.entries.begin(), ranked.entries.end(), [](const auto& a, const auto& b) {
      return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    reports.push_back(evaluate_annotations(ranked, s.ratings, s.corpus_id));
  }
  return reports;
}

std::string AnnotationStore::session_report_json(const std::string& session_id) const {
  const auto reports = session_report(session_id);
  json list = json::array();
  for (const auto& r : reports) {
    list.push_back(json{{"model_name", r.model_name},
                        {"dataset_name", r.dataset_name},
                        {"auc", r.auc},
                        {"n_pos", r.n_pos},
                        {"n_neg", r.n_neg}});
  }
  const auto s = session(session_id);
  json obj = json::object();
  obj["session_id"] = s.session_id;
  obj["corpus_id"] = s.corpus_id;
  obj["reports"] = std::move(list);
  return obj.dump();
}

AnnotationSession AnnotationStore::session(const std::string& session_id) const {
  auto& entry = find(session_id);
  std::lock_guard guard(entry.mutex);
  return entry.state;
}

std::vector<std::string> AnnotationStore::session_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, e] : sessions_) ids.push_back(id);
  return ids;
}

std::size_t AnnotationStore::restore() {
  if (log_dir_.empty() || !std::filesystem::exists(log_dir_)) return 0;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(log_dir_))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::size_t restored = 0;
  for (const auto& path : files) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) lines.push_back(line);
    if (lines.empty()) continue;

    AnnotationSession s;
    bool torn = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      json event;
      try {
        event = json::parse(lines[i]);
      } catch (const json::parse_error&) {
        // A torn final line means the process died mid-append.
        if (i + 1 == lines.size()) {
          std::cerr << "warning: dropping truncated last event in " << path.string() << "\n";
          torn = true;
          break;
        }
        throw DataError("corrupt session log " + path.string() + " at line " +
                        std::to_string(i + 1));
      }
      try {
        const auto kind = event.at("event").get<std::string>();
        if (i == 0) {
          if (kind != "created") throw DataError("session log must start with a created event");
          s.session_id = event.at("session_id").get<std::string>();
          s.corpus_id = event.at("corpus_id").get<std::string>();
          s.seed = event.at("seed").get<std::uint64_t>();
          s.created = event.at("created").get<std::string>();
          s.doc_ids = event.at("doc_ids").get<std::vector<std::string>>();
          s.scorers = event.at("scorers").get<std::vector<std::string>>();
          s.hidden_scores =
              event.at("hidden_scores").get<std::map<std::string, std::map<std::string, double>>>();
        } else if (kind == "rating") {
          apply_rating(s, event.at("doc_id").get<std::string>(), event.at("value").get<int>());
        } else {
          throw DataError("unknown event '" + kind + "'");
        }
      } catch (const json::exception& e) {
        throw DataError("malformed event in " + path.string() + ": " + e.what());
      }
    }
    if (s.session_id.empty()) continue;
    if (torn) {
      lines.pop_back();
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      for (const auto& l : lines) out << l << '\n';
    }
    auto entry = std::make_unique<SessionEntry>();
    entry->state = std::move(s);
    std::unique_lock lock(mutex_);
    const auto id = entry->state.session_id;
    sessions_[id] = std::move(entry);
    ++restored;
  }
  return restored;
}

}  // namespace newsrank
