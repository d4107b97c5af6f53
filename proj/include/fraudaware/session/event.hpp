#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/money.hpp"
#include "fraudaware/simkit/scenario.hpp"

namespace fraudaware::session {

enum class EventKind { PageEnter, PageLeave, Buy, Sell, ReadArticleStart, ReadArticleEnd, ReportFraud, ChatReply };
enum class PageKind { Market, Portfolio, News, StockDetail, Analytics, Chat };

std::string_view to_string(EventKind v);
std::string_view to_string(PageKind v);
EventKind parse_event_kind(std::string_view s);
PageKind parse_page_kind(std::string_view s);

/// One platform event. The payload fields that matter depend on `kind`;
/// validate_event() checks that they are present.
///
///   PageEnter / PageLeave      page (+ stock_id and authenticity for StockDetail)
///   ReadArticleStart / End     article_id, sentiment, source_trust
///   Buy / Sell                 stock_id, authenticity, shares, price (+ realized_pnl on Sell)
///   ReportFraud                stock_id, authenticity
///   ChatReply                  message_id, reply
///
/// `duration` on PageLeave / ReadArticleEnd is a client-measured dwell in
/// seconds; when present it is used instead of the wall_time delta.
struct SessionEvent {
  std::uint64_t seq = 0;
  std::string session_id;
  int tick = 0;
  double wall_time = 0.0;  // seconds
  EventKind kind = EventKind::PageEnter;

  std::optional<PageKind> page;
  std::string stock_id;
  std::string article_id;
  std::int64_t shares = 0;
  Money price;
  Money realized_pnl;
  std::optional<simkit::Authenticity> authenticity;
  std::optional<simkit::Sentiment> sentiment;
  std::optional<simkit::SourceTrust> source_trust;
  std::string message_id;
  std::string reply;
  std::optional<double> duration;

  bool operator==(const SessionEvent&) const = default;
};

/// Throws Validation when a payload field required by the kind is missing.
void validate_event(const SessionEvent& event);

inline constexpr int kEventLogVersion = 1;

json to_json(const SessionEvent& event);
SessionEvent event_from_json(const json& doc);

/// One line of the append-only log (no trailing newline).
std::string encode_event_line(const SessionEvent& event);
SessionEvent decode_event_line(std::string_view line);

/// Append-only line-delimited log; each append is flushed.
class EventLogWriter {
 public:
  explicit EventLogWriter(const std::filesystem::path& path);
  void append(const SessionEvent& event);

 private:
  std::ofstream out_;
};

std::vector<SessionEvent> read_event_log(const std::filesystem::path& path);

}  // namespace fraudaware::session
