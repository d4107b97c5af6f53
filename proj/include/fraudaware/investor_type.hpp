#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace fraudaware {

enum class InvestorCategory { Novice, Experienced };

enum class ExperiencedSubtype { RiskIntolerant, Confident, LossAverseYoung, ConservativeLongTerm };

inline constexpr std::array<ExperiencedSubtype, 4> kAllSubtypes = {
    ExperiencedSubtype::RiskIntolerant, ExperiencedSubtype::Confident,
    ExperiencedSubtype::LossAverseYoung, ExperiencedSubtype::ConservativeLongTerm};

/// Two-level investor taxonomy. A subtype exists only for Experienced.
class InvestorType {
 public:
  static InvestorType novice() { return InvestorType(InvestorCategory::Novice, std::nullopt); }
  static InvestorType experienced(std::optional<ExperiencedSubtype> subtype = std::nullopt) {
    return InvestorType(InvestorCategory::Experienced, subtype);
  }
  /// Binary class id used by the classifiers: Novice = 0, Experienced = 1.
  static InvestorType from_class_id(int id);
  /// Parses "Novice", "Experienced" or "Experienced/<Subtype>".
  static InvestorType parse(std::string_view text);

  InvestorCategory category() const { return category_; }
  const std::optional<ExperiencedSubtype>& subtype() const { return subtype_; }
  bool is_novice() const { return category_ == InvestorCategory::Novice; }
  int class_id() const { return category_ == InvestorCategory::Novice ? 0 : 1; }

  std::string to_string() const;

  bool operator==(const InvestorType&) const = default;
  auto operator<=>(const InvestorType&) const = default;

 private:
  InvestorType(InvestorCategory c, std::optional<ExperiencedSubtype> s) : category_(c), subtype_(s) {}

  InvestorCategory category_;
  std::optional<ExperiencedSubtype> subtype_;
};

std::string_view to_string(ExperiencedSubtype subtype);
std::string_view to_string(InvestorCategory category);

}  // namespace fraudaware
