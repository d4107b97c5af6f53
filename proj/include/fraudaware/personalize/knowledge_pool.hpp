#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fraudaware/investor_type.hpp"
#include "fraudaware/io.hpp"
#include "fraudaware/simkit/scenario.hpp"

namespace fraudaware::personalize {

enum class GameDesignElement {
  Badges,
  Collections,
  ContentUnlocking,
  Leaderboards,
  Quests,
  Points,
  SocialGraph,
  Teams,
  VirtualGoods,
  PerformanceContingentRewards,
  CompetenceRelatedAwards,
  UnexpectedAwards,
};

inline constexpr std::array<GameDesignElement, 12> kAllElements = {
    GameDesignElement::Badges,       GameDesignElement::Collections,
    GameDesignElement::ContentUnlocking, GameDesignElement::Leaderboards,
    GameDesignElement::Quests,       GameDesignElement::Points,
    GameDesignElement::SocialGraph,  GameDesignElement::Teams,
    GameDesignElement::VirtualGoods, GameDesignElement::PerformanceContingentRewards,
    GameDesignElement::CompetenceRelatedAwards, GameDesignElement::UnexpectedAwards};

enum class Motivation { Extrinsic, Intrinsic, Both };

std::string_view to_string(GameDesignElement e);
std::string_view to_string(Motivation m);
/// Throws PoolValidation on an unknown name.
GameDesignElement parse_element(std::string_view s);
/// Elements on both the extrinsic and intrinsic lists report Both.
Motivation motivation_of(GameDesignElement e);

/// Every InvestorType the pool must cover: Novice, Experienced, and the
/// four Experienced subtypes.
std::vector<InvestorType> all_investor_types();

struct PoolEntry {
  std::vector<GameDesignElement> elements;
  std::vector<simkit::ScamTag> scams;
  simkit::Difficulty difficulty = simkit::Difficulty::Easy;

  bool operator==(const PoolEntry&) const = default;
};

struct KnowledgePool {
  std::string version;
  std::map<InvestorType, PoolEntry> entries;

  bool operator==(const KnowledgePool&) const = default;
};

inline constexpr int kPoolFormatVersion = 1;

/// Throws PoolValidation when a type is missing, an entry names an unknown
/// element or scam, or lists one twice.
void validate(const KnowledgePool& pool);

json to_json(const KnowledgePool& pool);
KnowledgePool knowledge_pool_from_json(const json& doc);
KnowledgePool load_knowledge_pool(const std::filesystem::path& path);
KnowledgePool default_knowledge_pool();

/// The entry for t, verbatim. A pool that passed validate() covers every type.
const PoolEntry& select_resources(const KnowledgePool& pool, const InvestorType& t);

}  // namespace fraudaware::personalize
