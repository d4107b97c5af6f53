#include "fraudaware/personalize/knowledge_pool.hpp"

#include <algorithm>
#include <set>

#include "fraudaware/defaults.hpp"
#include "fraudaware/error.hpp"

namespace fraudaware::personalize {

std::string_view to_string(GameDesignElement e) {
  switch (e) {
    case GameDesignElement::Badges: return "Badges";
    case GameDesignElement::Collections: return "Collections";
    case GameDesignElement::ContentUnlocking: return "ContentUnlocking";
    case GameDesignElement::Leaderboards: return "Leaderboards";
    case GameDesignElement::Quests: return "Quests";
    case GameDesignElement::Points: return "Points";
    case GameDesignElement::SocialGraph: return "SocialGraph";
    case GameDesignElement::Teams: return "Teams";
    case GameDesignElement::VirtualGoods: return "VirtualGoods";
    case GameDesignElement::PerformanceContingentRewards: return "PerformanceContingentRewards";
    case GameDesignElement::CompetenceRelatedAwards: return "CompetenceRelatedAwards";
    case GameDesignElement::UnexpectedAwards: return "UnexpectedAwards";
  }
  return "?";
}

std::string_view to_string(Motivation m) {
  switch (m) {
    case Motivation::Extrinsic: return "Extrinsic";
    case Motivation::Intrinsic: return "Intrinsic";
    case Motivation::Both: return "Both";
  }
  return "?";
}

GameDesignElement parse_element(std::string_view s) {
  for (auto e : kAllElements) {
    if (to_string(e) == s) return e;
  }
  throw Error(ErrorCode::PoolValidation, "unknown game-design element '" + std::string(s) + "'");
}

Motivation motivation_of(GameDesignElement e) {
  switch (e) {
    case GameDesignElement::Quests:
    case GameDesignElement::ContentUnlocking:
    case GameDesignElement::PerformanceContingentRewards:
      return Motivation::Both;
    case GameDesignElement::CompetenceRelatedAwards:
    case GameDesignElement::UnexpectedAwards:
      return Motivation::Intrinsic;
    default:
      return Motivation::Extrinsic;
  }
}

std::vector<InvestorType> all_investor_types() {
  std::vector<InvestorType> out{InvestorType::novice(), InvestorType::experienced()};
  for (auto s : kAllSubtypes) out.push_back(InvestorType::experienced(s));
  return out;
}

void validate(const KnowledgePool& pool) {
  for (const auto& t : all_investor_types()) {
    const auto it = pool.entries.find(t);
    if (it == pool.entries.end()) {
      throw Error(ErrorCode::PoolValidation, "knowledge pool has no entry for " + t.to_string());
    }
    const auto& e = it->second;
    if (std::set<GameDesignElement>(e.elements.begin(), e.elements.end()).size() != e.elements.size()) {
      throw Error(ErrorCode::PoolValidation, "knowledge pool entry " + t.to_string() + " repeats an element");
    }
    if (std::set<simkit::ScamTag>(e.scams.begin(), e.scams.end()).size() != e.scams.size()) {
      throw Error(ErrorCode::PoolValidation, "knowledge pool entry " + t.to_string() + " repeats a scam");
    }
  }
}

json to_json(const KnowledgePool& pool) {
  json entries = json::object();
  for (const auto& [t, e] : pool.entries) {
    json elements = json::array();
    for (auto el : e.elements) elements.push_back(to_string(el));
    json scams = json::array();
    for (auto s : e.scams) scams.push_back(simkit::to_string(s));
    entries[t.to_string()] = {{"elements", elements}, {"scams", scams}, {"difficulty", simkit::to_string(e.difficulty)}};
  }
  return {{"version", kPoolFormatVersion}, {"pool_version", pool.version}, {"entries", entries}};
}

KnowledgePool knowledge_pool_from_json(const json& doc) {
  require_version(doc, kPoolFormatVersion, "knowledge pool");
  KnowledgePool pool;
  pool.version = require_field<std::string>(doc, "pool_version", "knowledge pool");
  const auto entries = require_field<json>(doc, "entries", "knowledge pool");
  if (!entries.is_object()) throw Error(ErrorCode::Schema, "knowledge pool: 'entries' must be an object");
  for (const auto& [key, value] : entries.items()) {
    InvestorType t = InvestorType::novice();
    try {
      t = InvestorType::parse(key);
    } catch (const Error&) {
      throw Error(ErrorCode::PoolValidation, "knowledge pool: unknown investor type '" + key + "'");
    }
    const std::string what = "knowledge pool entry " + key;
    PoolEntry e;
    for (const auto& name : require_field<std::vector<std::string>>(value, "elements", what)) {
      e.elements.push_back(parse_element(name));
    }
    for (const auto& name : require_field<std::vector<std::string>>(value, "scams", what)) {
      try {
        e.scams.push_back(simkit::parse_scam_tag(name));
      } catch (const Error&) {
        throw Error(ErrorCode::PoolValidation, what + ": unknown scam '" + name + "'");
      }
    }
    const auto difficulty = require_field<std::string>(value, "difficulty", what);
    try {
      e.difficulty = simkit::parse_difficulty(difficulty);
    } catch (const Error&) {
      throw Error(ErrorCode::PoolValidation, what + ": unknown difficulty '" + difficulty + "'");
    }
    pool.entries[t] = std::move(e);
  }
  validate(pool);
  return pool;
}

KnowledgePool load_knowledge_pool(const std::filesystem::path& path) {
  return knowledge_pool_from_json(load_json_file(path));
}

KnowledgePool default_knowledge_pool() {
  return knowledge_pool_from_json(parse_json(defaults::knowledge_pool_json(), "default knowledge pool"));
}

const PoolEntry& select_resources(const KnowledgePool& pool, const InvestorType& t) {
  const auto it = pool.entries.find(t);
  if (it == pool.entries.end()) {
    throw Error(ErrorCode::PoolValidation, "knowledge pool has no entry for " + t.to_string());
  }
  return it->second;
}

}  // namespace fraudaware::personalize
