#pragma once

#include <memory>
#include <string>

#include "elue/service.hpp"

namespace elue {

// Routes:
//   POST /api/submissions        multipart (spec, trace:<dataset>..., metadata, paper_entry)
//                                or a JSON bundle
//   GET  /api/submissions/{id}
//   GET  /api/leaderboard?track=
//   GET  /api/datasets
// All responses are JSON; failures carry {"error": {"code", "status", "message", ...}}.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  void serve();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace elue
