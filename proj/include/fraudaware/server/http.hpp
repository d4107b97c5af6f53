#pragma once

#include <string>

// Eigen first: <resolv.h>, pulled in by httplib, defines a `_res` macro
// that collides with Eigen parameter names.
#include "fraudaware/error.hpp"
#include "fraudaware/io.hpp"
#include "fraudaware/server/service.hpp"

#include <httplib.h>

namespace fraudaware::server {

/// HTTP status for a library error code: 400 bad input, 404 unknown id,
/// 409 trade preconditions or no model yet, 422 telemetry nesting.
int http_status(ErrorCode code);

/// {"error": {"code", "message"}} plus "orphans" for telemetry errors.
json error_body(const Error& e);

/// Client event as sent over the API: v, seq, session and tick may be
/// omitted since the server assigns them.
session::SessionEvent event_from_request(json doc);

/// Mounts every /v1 route on `http`. The service must outlive the server.
void register_routes(httplib::Server& http, Service& service);

}  // namespace fraudaware::server
