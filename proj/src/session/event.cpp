#include "fraudaware/session/event.hpp"

#include <array>
#include <cmath>

#include "fraudaware/error.hpp"

namespace fraudaware::session {

namespace {

constexpr std::array kKinds = {EventKind::PageEnter,        EventKind::PageLeave,      EventKind::Buy,
                               EventKind::Sell,             EventKind::ReadArticleStart, EventKind::ReadArticleEnd,
                               EventKind::ReportFraud,      EventKind::ChatReply};
constexpr std::array kPages = {PageKind::Market, PageKind::Portfolio, PageKind::News,
                               PageKind::StockDetail, PageKind::Analytics, PageKind::Chat};

Error invalid(const SessionEvent& e, const std::string& what) {
  return Error(ErrorCode::Validation,
               "event " + std::to_string(e.seq) + " (" + std::string(to_string(e.kind)) + "): " + what);
}

}  // namespace

std::string_view to_string(EventKind v) {
  switch (v) {
    case EventKind::PageEnter: return "PageEnter";
    case EventKind::PageLeave: return "PageLeave";
    case EventKind::Buy: return "Buy";
    case EventKind::Sell: return "Sell";
    case EventKind::ReadArticleStart: return "ReadArticleStart";
    case EventKind::ReadArticleEnd: return "ReadArticleEnd";
    case EventKind::ReportFraud: return "ReportFraud";
    case EventKind::ChatReply: return "ChatReply";
  }
  return "?";
}

std::string_view to_string(PageKind v) {
  switch (v) {
    case PageKind::Market: return "Market";
    case PageKind::Portfolio: return "Portfolio";
    case PageKind::News: return "News";
    case PageKind::StockDetail: return "StockDetail";
    case PageKind::Analytics: return "Analytics";
    case PageKind::Chat: return "Chat";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view s) {
  for (auto k : kKinds) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::Schema, "unknown event kind '" + std::string(s) + "'");
}

PageKind parse_page_kind(std::string_view s) {
  for (auto p : kPages) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorCode::Schema, "unknown page '" + std::string(s) + "'");
}

void validate_event(const SessionEvent& e) {
  if (e.tick < 0) throw invalid(e, "negative tick");
  if (!std::isfinite(e.wall_time)) throw invalid(e, "non-finite wall_time");
  if (e.duration && !(std::isfinite(*e.duration) && *e.duration >= 0.0)) throw invalid(e, "bad duration");
  switch (e.kind) {
    case EventKind::PageEnter:
    case EventKind::PageLeave:
      if (!e.page) throw invalid(e, "missing page");
      if (*e.page == PageKind::StockDetail) {
        if (e.stock_id.empty()) throw invalid(e, "stock page without stock_id");
        if (!e.authenticity) throw invalid(e, "stock page without authenticity");
      }
      break;
    case EventKind::ReadArticleStart:
    case EventKind::ReadArticleEnd:
      if (e.article_id.empty()) throw invalid(e, "missing article_id");
      if (!e.sentiment || !e.source_trust) throw invalid(e, "article event without sentiment/source");
      break;
    case EventKind::Buy:
    case EventKind::Sell:
      if (e.stock_id.empty() || !e.authenticity) throw invalid(e, "trade without stock");
      if (e.shares < 1) throw invalid(e, "trade needs shares >= 1");
      if (e.price < Money{}) throw invalid(e, "negative price");
      break;
    case EventKind::ReportFraud:
      if (e.stock_id.empty() || !e.authenticity) throw invalid(e, "report without stock");
      break;
    case EventKind::ChatReply:
      if (e.message_id.empty()) throw invalid(e, "reply without message_id");
      break;
  }
}

json to_json(const SessionEvent& e) {
  json j = {{"v", kEventLogVersion},
            {"seq", e.seq},
            {"session", e.session_id},
            {"tick", e.tick},
            {"wall_time", e.wall_time},
            {"kind", to_string(e.kind)}};
  if (e.page) j["page"] = to_string(*e.page);
  if (!e.stock_id.empty()) j["stock"] = e.stock_id;
  if (!e.article_id.empty()) j["article"] = e.article_id;
  if (e.kind == EventKind::Buy || e.kind == EventKind::Sell) {
    j["shares"] = e.shares;
    j["price"] = e.price.to_string();
  }
  if (e.kind == EventKind::Sell) j["realized_pnl"] = e.realized_pnl.to_string();
  if (e.authenticity) j["authenticity"] = simkit::to_string(*e.authenticity);
  if (e.sentiment) j["sentiment"] = simkit::to_string(*e.sentiment);
  if (e.source_trust) j["source"] = simkit::to_string(*e.source_trust);
  if (!e.message_id.empty()) j["message"] = e.message_id;
  if (!e.reply.empty()) j["reply"] = e.reply;
  if (e.duration) j["duration"] = *e.duration;
  return j;
}

SessionEvent event_from_json(const json& j) {
  const std::string what = "session event";
  const int v = require_field<int>(j, "v", what);
  if (v != kEventLogVersion) throw Error(ErrorCode::Schema, "session event: unsupported version " + std::to_string(v));
  SessionEvent e;
  e.seq = require_field<std::uint64_t>(j, "seq", what);
  e.session_id = require_field<std::string>(j, "session", what);
  e.tick = require_field<int>(j, "tick", what);
  e.wall_time = require_field<double>(j, "wall_time", what);
  e.kind = parse_event_kind(require_field<std::string>(j, "kind", what));
  if (j.contains("page")) e.page = parse_page_kind(j.at("page").get<std::string>());
  e.stock_id = j.value("stock", "");
  e.article_id = j.value("article", "");
  e.shares = j.value("shares", std::int64_t{0});
  if (j.contains("price")) e.price = Money::parse(j.at("price").get<std::string>());
  if (j.contains("realized_pnl")) e.realized_pnl = Money::parse(j.at("realized_pnl").get<std::string>());
  if (j.contains("authenticity")) e.authenticity = simkit::parse_authenticity(j.at("authenticity").get<std::string>());
  if (j.contains("sentiment")) e.sentiment = simkit::parse_sentiment(j.at("sentiment").get<std::string>());
  if (j.contains("source")) e.source_trust = simkit::parse_source_trust(j.at("source").get<std::string>());
  e.message_id = j.value("message", "");
  e.reply = j.value("reply", "");
  if (j.contains("duration")) e.duration = j.at("duration").get<double>();
  return e;
}

std::string encode_event_line(const SessionEvent& event) { return to_json(event).dump(); }

SessionEvent decode_event_line(std::string_view line) { return event_from_json(parse_json(line, "event log line")); }

EventLogWriter::EventLogWriter(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::Config, "cannot open event log " + path.string());
}

void EventLogWriter::append(const SessionEvent& event) {
  out_ << encode_event_line(event) << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::Config, "event log write failed");
}

std::vector<SessionEvent> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open event log " + path.string());
  std::vector<SessionEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    events.push_back(decode_event_line(line));
  }
  return events;
}

}  // namespace fraudaware::session
