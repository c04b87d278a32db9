#include "newsrank/annotation_server.hpp"

#include <httplib.h>

#include <json.hpp>

#include "newsrank/error.hpp"

namespace newsrank {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>newsrank annotation</title>"
    "</head><body><p>Annotation service is running. Start a UI bundle with --ui-dir to "
    "annotate in the browser.</p></body></html>";

json progress_json(const Progress& p) { return json{{"rated", p.rated}, {"total", p.total}}; }

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

template <typename Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, e.what());
    } catch (const Error& e) {
      send_error(res, 400, e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("invalid request body: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body);
  if (!body.is_object()) throw DataError("request body must be a JSON object");
  return body;
}

}  // namespace

struct AnnotationServer::Impl {
  explicit Impl(AnnotationStore& s) : store(s) {}
  AnnotationStore& store;
  httplib::Server server;
};

AnnotationServer::AnnotationServer(AnnotationStore& store,
                                   std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>(store)) {
  auto& server = impl_->server;
  auto& st = impl_->store;

  server.Post("/sessions", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto& size = body.at("sample_size");
    const auto& seed = body.at("seed");
    if (!size.is_number_unsigned() || !seed.is_number_unsigned())
      throw DataError("sample_size and seed must be non-negative integers");
    std::vector<std::string> scorers;
    if (body.contains("scorers")) scorers = body.at("scorers").get<std::vector<std::string>>();
    const auto s = st.create_session(body.at("corpus_id").get<std::string>(),
                                     size.get<std::size_t>(), seed.get<std::uint64_t>(), scorers);
    send_json(res, 201,
              json{{"session_id", s.session_id},
                   {"corpus_id", s.corpus_id},
                   {"sample_size", s.doc_ids.size()},
                   {"progress", progress_json({0, s.doc_ids.size()})}});
  }));

  server.Get(R"(/sessions/([^/]+)/next)",
             guarded([&st](const httplib::Request& req, httplib::Response& res) {
               const auto task = st.next_task(req.matches[1]);
               if (!task) {
                 send_json(res, 200, json{{"done", true}});
                 return;
               }
               send_json(res, 200,
                         json{{"doc_id", task->doc_id},
                              {"title", task->title},
                              {"body", task->body},
                              {"progress", progress_json(task->progress)}});
             }));

  server.Post(R"(/sessions/([^/]+)/ratings)",
              guarded([&st](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const auto& value = body.at("value");
                if (!value.is_number_integer() || (value.get<long long>() != 0 && value.get<long long>() != 1))
                  throw DataError("value must be 0 or 1");
                const auto p = st.submit_rating(req.matches[1], body.at("doc_id").get<std::string>(),
                                                value.get<int>());
                send_json(res, 200, json{{"progress", progress_json(p)}});
              }));

  server.Get(R"(/sessions/([^/]+)/report)",
             guarded([&st](const httplib::Request& req, httplib::Response& res) {
               res.status = 200;
               res.set_content(st.session_report_json(req.matches[1]), "application/json");
             }));

  if (ui_dir && server.set_mount_point("/", ui_dir->string())) {
    // Static bundle mounted.
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html");
    });
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port))
    throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

void AnnotationServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace newsrank
