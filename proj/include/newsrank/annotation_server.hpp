#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "newsrank/annotation.hpp"

namespace newsrank {

/// HTTP+JSON front end for an AnnotationStore:
///   POST /sessions                 {corpus_id, sample_size, seed, scorers}
///   GET  /sessions/{id}/next       task or {"done": true}
///   POST /sessions/{id}/ratings    {doc_id, value}
///   GET  /sessions/{id}/report     per-scorer AUC
/// Errors are {"error": message}. The UI bundle, when given, is served at /.
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationStore& store,
                            std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace newsrank
