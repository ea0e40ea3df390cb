#include "elue/http_server.hpp"

#include <httplib.h>

#include "elue/error.hpp"

namespace elue {

namespace {

int http_status(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (!err) return 500;
  switch (err->code()) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kIo:
    case ErrorCode::kDivergence: return 500;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, const std::exception& e) {
  send_json(res, http_status(e), error_to_json(e));
}

nlohmann::json parse_json_field(const std::string& text, const std::string& field) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kSchema, "field '" + field + "' is not valid JSON");
  return j;
}

SubmissionBundle bundle_from_multipart(const httplib::Request& req) {
  SubmissionBundle bundle;
  nlohmann::json paper;
  for (const auto& [name, file] : req.files) {
    if (name == "spec") {
      bundle.spec_text = file.content;
    } else if (name == "metadata") {
      nlohmann::json j{{"metadata", parse_json_field(file.content, name)}};
      bundle.metadata = bundle_from_json(j).metadata;
    } else if (name == "paper_entry") {
      paper = parse_json_field(file.content, name);
    } else if (name.rfind("trace:", 0) == 0) {
      TraceUpload up;
      up.dataset_id = name.substr(6);
      up.text = file.content;
      if (!file.filename.empty()) up.label = file.filename;
      bundle.traces.push_back(std::move(up));
    } else {
      throw Error(ErrorCode::kSchema, "unexpected form field '" + name + "'");
    }
  }
  if (!paper.is_null()) bundle.paper = bundle_from_json({{"paper_entry", paper}}).paper;
  return bundle;
}

}  // namespace

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    server.Post("/api/submissions", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto bundle = req.is_multipart_form_data()
                                ? bundle_from_multipart(req)
                                : bundle_from_json(parse_json_field(req.body, "body"));
        const auto result = service.submit(bundle);
        auto body = to_json(result.record);
        body["created"] = result.created;
        send_json(res, result.created ? 201 : 200, body);
      } catch (const std::exception& e) {
        send_error(res, e);
      }
    });
    server.Get(R"(/api/submissions/([0-9a-fA-F]+))", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto record = service.get(req.matches[1]);
        if (!record) throw Error(ErrorCode::kNotFound, "no submission '" + std::string(req.matches[1]) + "'");
        send_json(res, 200, to_json(*record));
      } catch (const std::exception& e) {
        send_error(res, e);
      }
    });
    server.Get("/api/leaderboard", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const std::string track = req.has_param("track") ? req.get_param_value("track") : "";
        const auto board = service.leaderboard(track);
        send_json(res, 200, leaderboard_json(board, track.empty() ? std::nullopt : parse_track(track)));
      } catch (const std::exception& e) {
        send_error(res, e);
      }
    });
    server.Get("/api/datasets", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, service.datasets_json());
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      const Error err(res.status == 404 ? ErrorCode::kNotFound : ErrorCode::kUsage,
                      "no route for " + req.method + " " + req.path);
      res.set_content(error_to_json(err).dump(2) + "\n", "application/json");
    });
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace elue
