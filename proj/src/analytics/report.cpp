#include "fraudaware/analytics/report.hpp"

#include <algorithm>
#include <cstdio>

#include "fraudaware/analytics/stats.hpp"
#include "fraudaware/error.hpp"

namespace fraudaware::analytics {

using session::Metric;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sig(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr std::string_view kFraudTrapTemplate =
    "{fraction} of novice investors ({trapped} of {n}) bought at least one fraud stock.";
constexpr std::string_view kMarketRatioTemplate =
    "Experienced investors spent {ratio} times as long on the market page as novice investors.";
constexpr std::string_view kDifferenceTemplate =
    "{metric} differs between groups: Experienced mean {exp_mean}, Novice mean {nov_mean} "
    "(Welch t = {t}, df = {df}, p = {p}).";

}  // namespace

std::string fill_template(std::string_view text, const std::vector<std::pair<std::string, std::string>>& bindings) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      out += text[i++];
      continue;
    }
    const auto close = text.find('}', i);
    if (close == std::string_view::npos) throw Error(ErrorCode::ContractViolation, "unterminated template placeholder");
    const auto key = text.substr(i + 1, close - i - 1);
    const auto it = std::find_if(bindings.begin(), bindings.end(), [&](const auto& b) { return b.first == key; });
    if (it == bindings.end()) {
      throw Error(ErrorCode::ContractViolation, "unbound template placeholder {" + std::string(key) + "}");
    }
    out += it->second;
    i = close + 1;
  }
  return out;
}

const DescriptiveEntry* InsightReport::find_descriptive(std::string_view id) const {
  for (const auto& e : descriptive) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const InferentialEntry* InsightReport::find_inferential(std::string_view id) const {
  for (const auto& e : inferential) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

InsightReport build_report(std::span<const session::DigitalFootprint> input, const personalize::PipelineModel* model,
                           const ReportOptions& options) {
  std::vector<session::DigitalFootprint> fps(input.begin(), input.end());
  InsightReport r;
  r.cohort_id = options.cohort_id;
  r.generated_at = options.generated_at;

  if (model) {
    ModelSummary ms;
    ms.selected_features = model->selected_names();
    for (const auto& ev : model->evaluation) ms.mean_accuracy.emplace_back(mlcore::to_string(ev.kind), ev.mean_accuracy);
    for (auto& fp : fps) {
      if (fp.label) continue;
      fp.label = personalize::predict_type(*model, fp, options.classifier).type;
      ++ms.predicted_labels;
    }
    r.model = std::move(ms);
  }

  const auto stats = descriptive_stats(fps);
  for (const auto& g : stats.groups) {
    const std::string prefix = "desc." + g.group + ".";
    r.descriptive.push_back({prefix + "n", "n", g.group, static_cast<double>(g.n)});
    for (std::size_t c = 0; c < session::kMetricCount; ++c) {
      const std::string metric(session::kMetricNames[c]);
      const auto& s = g.metrics[c];
      r.descriptive.push_back({prefix + metric + ".mean", "mean(" + metric + ")", g.group, s.mean});
      r.descriptive.push_back({prefix + metric + ".median", "median(" + metric + ")", g.group, s.median});
      r.descriptive.push_back({prefix + metric + ".std", "std(" + metric + ")", g.group, s.std});
    }
    r.descriptive.push_back({prefix + "trapped", "count(n_fraud_bought >= 1)", g.group, static_cast<double>(g.trapped)});
    r.descriptive.push_back(
        {prefix + "fraud_trap_fraction", "fraction(n_fraud_bought >= 1)", g.group, g.fraud_trap_fraction});
  }
  for (std::size_t c = 0; c < session::kMetricCount; ++c) {
    if (!stats.dwell_ratio[c]) continue;
    const std::string metric(session::kMetricNames[c]);
    r.descriptive.push_back(
        {"desc.ratio." + metric, "mean ratio(" + metric + ")", "Experienced/Novice", *stats.dwell_ratio[c]});
  }

  const auto* nov = stats.find("Novice");
  const auto* exp = stats.find("Experienced");
  if (nov && exp && nov->n >= 2 && exp->n >= 2) {
    for (std::size_t c = 0; c < session::kMetricCount; ++c) {
      const auto m = session::metric_at(c);
      const auto a = metric_values(fps, m, InvestorCategory::Experienced);
      const auto b = metric_values(fps, m, InvestorCategory::Novice);
      WelchResult w;
      try {
        w = welch_t_test(a, b);
      } catch (const Error&) {
        continue;  // both groups constant and different: no test to report
      }
      const std::string metric(session::kMetricNames[c]);
      r.inferential.push_back({"inf.welch." + metric, "welch_t", metric, w.t, w.df, w.p_value, {"Experienced", "Novice"}});
    }
  }

  if (nov) {
    const auto* e = r.find_descriptive(kFraudTrapId);
    r.narrative.push_back({"fraud_trap_fraction",
                           fill_template(kFraudTrapTemplate, {{"fraction", fixed(e->value, 2)},
                                                              {"trapped", std::to_string(nov->trapped)},
                                                              {"n", std::to_string(nov->n)}}),
                           {std::string(kFraudTrapId), "desc.Novice.trapped", "desc.Novice.n"}});
  }
  if (const auto* e = r.find_descriptive(kMarketRatioId)) {
    r.narrative.push_back({"market_dwell_ratio", fill_template(kMarketRatioTemplate, {{"ratio", fixed(e->value, 2)}}),
                           {std::string(kMarketRatioId)}});
  }
  for (const auto& inf : r.inferential) {
    if (inf.p_value >= options.alpha) continue;
    const std::string exp_id = "desc.Experienced." + inf.metric + ".mean";
    const std::string nov_id = "desc.Novice." + inf.metric + ".mean";
    r.narrative.push_back({"group_difference",
                           fill_template(kDifferenceTemplate, {{"metric", inf.metric},
                                                               {"exp_mean", fixed(r.find_descriptive(exp_id)->value, 2)},
                                                               {"nov_mean", fixed(r.find_descriptive(nov_id)->value, 2)},
                                                               {"t", fixed(inf.statistic, 3)},
                                                               {"df", fixed(inf.df, 1)},
                                                               {"p", sig(inf.p_value)}}),
                           {inf.id, exp_id, nov_id}});
  }
  return r;
}

json to_json(const InsightReport& r) {
  json desc = json::array();
  for (const auto& e : r.descriptive) desc.push_back({{"id", e.id}, {"name", e.name}, {"group", e.group}, {"value", e.value}});
  json inf = json::array();
  for (const auto& e : r.inferential) {
    inf.push_back({{"id", e.id},
                   {"test", e.test},
                   {"metric", e.metric},
                   {"statistic", e.statistic},
                   {"df", e.df},
                   {"p_value", e.p_value},
                   {"groups", e.groups}});
  }
  json nar = json::array();
  for (const auto& s : r.narrative) nar.push_back({{"template", s.template_id}, {"text", s.text}, {"refs", s.refs}});
  json doc = {{"version", kReportVersion},
              {"cohort_id", r.cohort_id},
              {"generated_at", r.generated_at},
              {"descriptive", desc},
              {"inferential", inf},
              {"narrative", nar}};
  if (r.model) {
    json acc = json::object();
    for (const auto& [k, v] : r.model->mean_accuracy) acc[k] = v;
    doc["model"] = {{"selected_features", r.model->selected_features},
                    {"mean_accuracy", acc},
                    {"predicted_labels", r.model->predicted_labels}};
  }
  return doc;
}

InsightReport insight_report_from_json(const json& doc) {
  require_version(doc, kReportVersion, "insight report");
  InsightReport r;
  try {
    r.cohort_id = doc.at("cohort_id").get<std::string>();
    r.generated_at = doc.at("generated_at").get<std::string>();
    for (const auto& e : doc.at("descriptive")) {
      r.descriptive.push_back({e.at("id"), e.at("name"), e.at("group"), e.at("value")});
    }
    for (const auto& e : doc.at("inferential")) {
      r.inferential.push_back({e.at("id"), e.at("test"), e.at("metric"), e.at("statistic"), e.at("df"), e.at("p_value"),
                               e.at("groups").get<std::vector<std::string>>()});
    }
    for (const auto& s : doc.at("narrative")) {
      r.narrative.push_back({s.at("template"), s.at("text"), s.at("refs").get<std::vector<std::string>>()});
    }
    if (doc.contains("model")) {
      ModelSummary ms;
      const auto& m = doc.at("model");
      ms.selected_features = m.at("selected_features").get<std::vector<std::string>>();
      for (const auto& [k, v] : m.at("mean_accuracy").items()) ms.mean_accuracy.emplace_back(k, v.get<double>());
      ms.predicted_labels = m.at("predicted_labels").get<std::size_t>();
      r.model = std::move(ms);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("insight report: ") + e.what());
  }
  return r;
}

std::string render_text(const InsightReport& r) {
  std::string out = "Insight report: " + r.cohort_id + "\n";
  out += "Generated: " + r.generated_at + "\n\nFindings\n";
  for (const auto& s : r.narrative) out += "  - " + s.text + "\n";
  if (r.model) {
    out += "\nModel\n  selected features:";
    for (const auto& f : r.model->selected_features) out += " " + f;
    out += "\n";
    for (const auto& [k, v] : r.model->mean_accuracy) out += "  " + k + " mean accuracy " + fixed(v, 3) + "\n";
  }
  out += "\nGroup sizes\n";
  for (const auto& e : r.descriptive) {
    if (e.name == "n") out += "  " + e.group + ": " + fixed(e.value, 0) + "\n";
  }
  if (!r.inferential.empty()) {
    out += "\nWelch tests (Experienced vs Novice)\n";
    for (const auto& e : r.inferential) {
      char line[160];
      std::snprintf(line, sizeof line, "  %-22s t = %8.3f  df = %6.1f  p = %.3g\n", e.metric.c_str(), e.statistic, e.df,
                    e.p_value);
      out += line;
    }
  }
  return out;
}

std::string report_id(const InsightReport& report) { return report.cohort_id + "@" + report.generated_at; }

}  // namespace fraudaware::analytics
