#pragma once

// HTTP/JSON API and the /stream WebSocket over a MissionService.
//
//   GET    /units               snapshot (units, boundaries, recent records)
//   GET    /units/{id}
//   POST   /units/{id}/recall
//   GET    /boundaries
//   POST   /boundaries          {"name": ..., "vertices": [{"lat","lon"}, ...]}
//   DELETE /boundaries/{id}
//   GET    /log?since=SEQ       records with seq > SEQ
//   GET    /config
//   GET    /stream              WebSocket: snapshot, then live messages

#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fireline/mission_service.hpp"

namespace fireline::api {

struct Response {
  unsigned status = 200;
  nlohmann::json body;
};

// Socket-free request handling, shared by the server and tests.
Response handle(mission::MissionService& svc, std::string_view method, std::string_view target,
                std::string_view body);

// "host:port", ":port" or "port".
struct Endpoint {
  std::string host = "127.0.0.1";
  unsigned short port = 0;
};
Endpoint parse_endpoint(std::string_view text);

class Server {
 public:
  Server(mission::MissionService& svc, Endpoint endpoint);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts serving on a background thread.
  void start();
  void stop();
  unsigned short port() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace fireline::api
