#include "fraudaware/server/http.hpp"

namespace fraudaware::server {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::InsufficientFunds:
    case ErrorCode::InsufficientShares:
    case ErrorCode::StockDelisted:
    case ErrorCode::NoModel:
      return 409;
    case ErrorCode::Telemetry: return 422;
    case ErrorCode::ContractViolation: return 500;
    default: return 400;
  }
}

json error_body(const Error& e) {
  json err = {{"code", to_string(e.code())}, {"message", e.what()}};
  if (const auto* t = dynamic_cast<const TelemetryError*>(&e)) err["orphans"] = t->orphan_ids();
  return {{"error", err}};
}

session::SessionEvent event_from_request(json doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Validation, "event must be an object");
  if (!doc.contains("v")) doc["v"] = session::kEventLogVersion;
  if (!doc.contains("seq")) doc["seq"] = 0;
  if (!doc.contains("session")) doc["session"] = "";
  if (!doc.contains("tick")) doc["tick"] = 0;
  try {
    return session::event_from_json(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("event: ") + e.what());
  }
}

namespace {

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto doc = parse_json(req.body, "request body");
  if (!doc.is_object()) throw Error(ErrorCode::Validation, "request body must be a JSON object");
  return doc;
}

template <typename T>
T field(const json& body, const char* key) {
  const auto v = require_field<T>(body, key, "request");
  return v;
}

// Wraps a handler so library errors become typed JSON responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send(res, http_status(e.code()), error_body(e));
    } catch (const json::exception& e) {
      send(res, 400, {{"error", {{"code", "Validation"}, {"message", e.what()}}}});
    } catch (const std::exception& e) {
      send(res, 500, {{"error", {{"code", "Internal"}, {"message", e.what()}}}});
    }
  };
}

int tick_param(const httplib::Request& req, const Service& service) {
  if (req.has_param("tick")) {
    try {
      return std::stoi(req.get_param_value("tick"));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Validation, "tick must be an integer");
    }
  }
  if (req.has_param("session")) return service.get_session(req.get_param_value("session")).current_tick;
  return 0;
}

std::optional<double> wall_time_of(const json& body) {
  if (!body.contains("wall_time")) return std::nullopt;
  return field<double>(body, "wall_time");
}

}  // namespace

void register_routes(httplib::Server& http, Service& service) {
  Service* svc = &service;

  http.Get("/v1/health", guarded([svc](const auto&, auto& res) { send(res, 200, svc->health()); }));

  http.Post("/v1/sessions", guarded([svc](const auto& req, auto& res) {
              const auto body = body_of(req);
              const auto meta = svc->create_session(field<double>(body, "age"));
              json out = to_json(meta);
              out["portfolio"] = session::to_json(svc->portfolio(meta.id));
              send(res, 201, out);
            }));

  http.Get(R"(/v1/sessions/([^/]+))", guarded([svc](const auto& req, auto& res) {
             send(res, 200, to_json(svc->get_session(req.matches[1])));
           }));

  http.Post(R"(/v1/sessions/([^/]+)/advance)", guarded([svc](const auto& req, auto& res) {
              const auto body = body_of(req);
              send(res, 200, to_json(svc->advance(req.matches[1], body.value("ticks", 1))));
            }));

  http.Get("/v1/market", guarded([svc](const auto& req, auto& res) {
             send(res, 200, svc->market_view(tick_param(req, *svc)));
           }));
  http.Get(R"(/v1/stocks/([^/]+))", guarded([svc](const auto& req, auto& res) {
             send(res, 200, svc->stock_view(req.matches[1], tick_param(req, *svc)));
           }));
  http.Get("/v1/news", guarded([svc](const auto& req, auto& res) {
             send(res, 200, svc->news_view(tick_param(req, *svc)));
           }));
  http.Get("/v1/chat", guarded([svc](const auto& req, auto& res) {
             send(res, 200, svc->chat_view(tick_param(req, *svc)));
           }));

  http.Post(R"(/v1/sessions/([^/]+)/events)", guarded([svc](const auto& req, auto& res) {
              const auto body = body_of(req);
              const auto list = require_field<json>(body, "events", "request");
              if (!list.is_array()) throw Error(ErrorCode::Validation, "'events' must be an array");
              std::vector<session::SessionEvent> batch;
              for (const auto& e : list) batch.push_back(event_from_request(e));
              const auto stored = svc->append_events(req.matches[1], std::move(batch));
              json out = json::array();
              for (const auto& e : stored) out.push_back(session::to_json(e));
              send(res, 200, {{"accepted", stored.size()}, {"events", out}});
            }));

  http.Post(R"(/v1/sessions/([^/]+)/trades)", guarded([svc](const auto& req, auto& res) {
              const auto body = body_of(req);
              const auto side_name = field<std::string>(body, "side");
              session::Side side;
              if (side_name == "Buy" || side_name == "buy") {
                side = session::Side::Buy;
              } else if (side_name == "Sell" || side_name == "sell") {
                side = session::Side::Sell;
              } else {
                throw Error(ErrorCode::Validation, "side must be Buy or Sell");
              }
              const auto out = svc->trade(req.matches[1], field<std::string>(body, "stock"), side,
                                          field<std::int64_t>(body, "shares"), wall_time_of(body));
              send(res, 200, {{"event", session::to_json(out.event)}, {"portfolio", session::to_json(out.portfolio)}});
            }));

  http.Post(R"(/v1/sessions/([^/]+)/report-fraud)", guarded([svc](const auto& req, auto& res) {
              const auto body = body_of(req);
              const auto out = svc->report_fraud(req.matches[1], field<std::string>(body, "stock"), wall_time_of(body));
              send(res, 200, {{"event", session::to_json(out.event)}, {"portfolio", session::to_json(out.portfolio)}});
            }));

  http.Get(R"(/v1/sessions/([^/]+)/portfolio)", guarded([svc](const auto& req, auto& res) {
             send(res, 200, session::to_json(svc->portfolio(req.matches[1])));
           }));
  http.Get(R"(/v1/sessions/([^/]+)/analytics)", guarded([svc](const auto& req, auto& res) {
             send(res, 200, svc->session_analytics(req.matches[1]));
           }));
  http.Get(R"(/v1/sessions/([^/]+)/feedback)", guarded([svc](const auto& req, auto& res) {
             send(res, 200, personalize::to_json(svc->feedback(req.matches[1])));
           }));

  http.Post("/v1/admin/train", guarded([svc](const auto& req, auto& res) {
              const auto body = body_of(req);
              std::optional<std::uint64_t> seed;
              std::optional<int> splits;
              if (body.contains("seed")) seed = field<std::uint64_t>(body, "seed");
              if (body.contains("splits")) splits = field<int>(body, "splits");
              const auto m = svc->train(seed, splits);
              json acc = json::object();
              for (const auto& ev : m->evaluation) acc[std::string(mlcore::to_string(ev.kind))] = ev.mean_accuracy;
              send(res, 200, {{"selected_features", m->selected_names()}, {"mean_accuracy", acc}});
            }));
  http.Get("/v1/admin/report", guarded([svc](const auto& req, auto& res) {
             const auto source = req.has_param("source") ? req.get_param_value("source") : "cohort";
             ReportSource src;
             if (source == "cohort") {
               src = ReportSource::Cohort;
             } else if (source == "sessions") {
               src = ReportSource::Sessions;
             } else {
               throw Error(ErrorCode::Validation, "source must be cohort or sessions");
             }
             const auto report = svc->report(src);
             if (req.has_param("format") && req.get_param_value("format") == "text") {
               res.status = 200;
               res.set_content(analytics::render_text(report), "text/plain");
               return;
             }
             send(res, 200, analytics::to_json(report));
           }));

  http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string code = res.status == 404 ? "NotFound" : "Http";
    send(res, res.status, {{"error", {{"code", code}, {"message", "no such route"}}}});
  });
}

}  // namespace fraudaware::server
