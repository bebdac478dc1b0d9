#pragma once

// cpp-httplib binding for SessionService.

#include <string>

#include "cchain/api.hpp"
#include "httplib.h"

namespace cchain {

inline void mount_session_api(httplib::Server& server, SessionService& service) {
  auto bridge = [&service](const httplib::Request& req, httplib::Response& res) {
    bool strict = true;
    if (req.has_param("strict")) strict = req.get_param_value("strict") != "false";
    auto out = service.handle(req.method, req.path, req.body, strict);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json; charset=utf-8");
  };
  server.Get("/anomalies", bridge);
  server.Post("/sessions", bridge);
  server.Get(R"(/sessions/[^/]+)", bridge);
  server.Post(R"(/sessions/[^/]+/(answers|undo|finalize))", bridge);
}

}  // namespace cchain
