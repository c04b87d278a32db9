#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "newsrank/corpus.hpp"
#include "newsrank/eval.hpp"
#include "newsrank/models.hpp"

namespace newsrank {

struct Progress {
  std::size_t rated = 0;
  std::size_t total = 0;
};

/// One blind-trial item. Deliberately carries no score, label or model.
struct Task {
  std::string doc_id;
  std::string title;
  std::string body;
  Progress progress;
};

struct AnnotationSession {
  std::string session_id;
  std::string corpus_id;
  std::uint64_t seed = 0;
  std::string created;
  std::vector<std::string> doc_ids;  // presentation order
  std::vector<std::string> scorers;
  std::map<std::string, std::map<std::string, double>> hidden_scores;  // scorer -> id -> score
  std::vector<std::pair<std::string, int>> rating_log;
  std::map<std::string, int> ratings;

  std::size_t cursor() const { return ratings.size(); }
  bool complete() const { return ratings.size() == doc_ids.size(); }
};

std::string utc_timestamp();

/// Blind annotation trials over registered corpora and scorers. Each session
/// persists as an append-only JSON Lines event log in log_dir (in memory
/// only when log_dir is empty). Mutations of one session are serialized;
/// distinct sessions proceed independently.
class AnnotationStore {
 public:
  using Clock = std::function<std::string()>;

  explicit AnnotationStore(std::filesystem::path log_dir = {}, Clock clock = utc_timestamp);
  ~AnnotationStore();

  void register_corpus(std::string corpus_id, std::vector<Document> docs);
  void register_scorer(std::shared_ptr<const Scorer> scorer, TextField field = TextField::body);

  /// Replays every session log under log_dir. Returns the number restored.
  std::size_t restore();

  AnnotationSession create_session(const std::string& corpus_id, std::size_t sample_size,
                                   std::uint64_t seed, const std::vector<std::string>& scorers);
  /// nullopt once every sampled document has been rated.
  std::optional<Task> next_task(const std::string& session_id) const;
  Progress submit_rating(const std::string& session_id, const std::string& doc_id, int value);
  std::vector<EvalReport> session_report(const std::string& session_id) const;
  std::string session_report_json(const std::string& session_id) const;

  AnnotationSession session(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;
  std::filesystem::path log_path(const std::string& session_id) const;

 private:
  struct CorpusEntry {
    std::vector<Document> docs;
    std::unordered_map<std::string, std::size_t> by_id;
  };
  struct ScorerEntry {
    std::shared_ptr<const Scorer> scorer;
    TextField field;
  };
  struct SessionEntry {
    mutable std::mutex mutex;
    AnnotationSession state;
  };

  SessionEntry& find(const std::string& session_id) const;
  void append_event(const std::string& session_id, const std::string& line) const;
  static void apply_rating(AnnotationSession& s, const std::string& doc_id, int value);

  std::filesystem::path log_dir_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, CorpusEntry> corpora_;
  std::map<std::string, ScorerEntry> scorers_;
  std::map<std::string, std::unique_ptr<SessionEntry>> sessions_;
};

}  // namespace newsrank
