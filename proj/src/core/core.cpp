#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "fraudaware/error.hpp"
#include "fraudaware/investor_type.hpp"
#include "fraudaware/io.hpp"
#include "fraudaware/money.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::Validation: return "ValidationError";
    case ErrorCode::InsufficientFunds: return "InsufficientFunds";
    case ErrorCode::InsufficientShares: return "InsufficientShares";
    case ErrorCode::StockDelisted: return "StockDelisted";
    case ErrorCode::Telemetry: return "TelemetryError";
    case ErrorCode::Schema: return "SchemaError";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::PoolValidation: return "PoolValidationError";
    case ErrorCode::NoModel: return "NoModel";
  }
  return "Unknown";
}

// ---- Money -----------------------------------------------------------------

Money Money::from_units(double units) {
  if (!std::isfinite(units)) {
    throw Error(ErrorCode::Domain, "non-finite currency amount");
  }
  return Money(static_cast<std::int64_t>(std::llround(units * 100.0)));
}

Money Money::parse(std::string_view text) {
  auto fail = [&] { return Error(ErrorCode::Schema, "invalid currency amount '" + std::string(text) + "'"); };
  bool negative = false;
  std::string_view rest = text;
  if (!rest.empty() && rest.front() == '-') {
    negative = true;
    rest.remove_prefix(1);
  }
  const auto dot = rest.find('.');
  const auto whole = rest.substr(0, dot);
  const auto frac = dot == std::string_view::npos ? std::string_view{} : rest.substr(dot + 1);
  if (whole.empty() || frac.size() > 2 || (dot != std::string_view::npos && frac.empty())) throw fail();
  std::int64_t units = 0;
  auto [p1, e1] = std::from_chars(whole.data(), whole.data() + whole.size(), units);
  if (e1 != std::errc{} || p1 != whole.data() + whole.size()) throw fail();
  std::int64_t cents = 0;
  if (!frac.empty()) {
    auto [p2, e2] = std::from_chars(frac.data(), frac.data() + frac.size(), cents);
    if (e2 != std::errc{} || p2 != frac.data() + frac.size()) throw fail();
    if (frac.size() == 1) cents *= 10;
  }
  const std::int64_t total = units * 100 + cents;
  return Money(negative ? -total : total);
}

std::string Money::to_string() const {
  const std::int64_t abs = cents_ < 0 ? -cents_ : cents_;
  std::string out = cents_ < 0 ? "-" : "";
  out += std::to_string(abs / 100);
  out += '.';
  const auto frac = abs % 100;
  if (frac < 10) out += '0';
  out += std::to_string(frac);
  return out;
}

// ---- RNG -------------------------------------------------------------------

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SplitMix64::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SplitMix64::normal(double mean, double sd) { return mean + sd * normal(); }

std::uint64_t SplitMix64::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::Domain, "below(0)");
  // Rejection keeps the draw unbiased for any n.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (stream * 0x9E3779B97F4A7C15ULL));
  return g.next();
}

double normal_at(std::uint64_t seed, std::uint64_t counter) {
  SplitMix64 g(mix_seed(seed, counter));
  return g.normal();
}

// ---- InvestorType ----------------------------------------------------------

std::string_view to_string(ExperiencedSubtype subtype) {
  switch (subtype) {
    case ExperiencedSubtype::RiskIntolerant: return "RiskIntolerant";
    case ExperiencedSubtype::Confident: return "Confident";
    case ExperiencedSubtype::LossAverseYoung: return "LossAverseYoung";
    case ExperiencedSubtype::ConservativeLongTerm: return "ConservativeLongTerm";
  }
  return "?";
}

std::string_view to_string(InvestorCategory category) {
  return category == InvestorCategory::Novice ? "Novice" : "Experienced";
}

InvestorType InvestorType::from_class_id(int id) {
  if (id == 0) return novice();
  if (id == 1) return experienced();
  throw Error(ErrorCode::Domain, "unknown investor class id " + std::to_string(id));
}

InvestorType InvestorType::parse(std::string_view text) {
  if (text == "Novice") return novice();
  if (text == "Experienced") return experienced();
  constexpr std::string_view prefix = "Experienced/";
  if (text.starts_with(prefix)) {
    const auto rest = text.substr(prefix.size());
    for (auto s : kAllSubtypes) {
      if (fraudaware::to_string(s) == rest) return experienced(s);
    }
  }
  throw Error(ErrorCode::Schema, "unknown investor type '" + std::string(text) + "'");
}

std::string InvestorType::to_string() const {
  std::string out(fraudaware::to_string(category_));
  if (subtype_) {
    out += '/';
    out += fraudaware::to_string(*subtype_);
  }
  return out;
}

// ---- IO --------------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error(ErrorCode::Domain, "format_double failed");
  return std::string(buf, end);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Config, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Config, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, std::string(what) + ": " + e.what());
  }
}

json load_json_file(const std::filesystem::path& path) {
  return parse_json(read_text_file(path), path.string());
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

void require_version(const json& doc, int expected, std::string_view what) {
  const auto v = require_field<int>(doc, "version", what);
  if (v != expected) {
    throw Error(ErrorCode::Config, std::string(what) + ": unsupported version " + std::to_string(v) +
                                       " (expected " + std::to_string(expected) + ")");
  }
}

}  // namespace fraudaware
