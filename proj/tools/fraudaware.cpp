#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "fraudaware/analytics/cohort.hpp"
#include "fraudaware/analytics/report.hpp"
#include "fraudaware/error.hpp"
#include "fraudaware/mlcore/kmeans.hpp"
#include "fraudaware/rng.hpp"
#include "fraudaware/personalize/pipeline.hpp"
#include "fraudaware/server/bots.hpp"
#include "fraudaware/server/http.hpp"
#include "fraudaware/server/service.hpp"
#include "fraudaware/simkit/scenario.hpp"

using namespace fraudaware;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
};

void add_common(CLI::App* cmd, Common& c, const std::string& config_help) {
  cmd->add_option("--seed", c.seed, "Seed for every random draw of this command");
  cmd->add_option("--config", c.config, config_help)->check(CLI::ExistingFile);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
    std::cerr << "wrote " << out << "\n";
  }
}

// A cohort spec file, or "default" for the shipped one.
const CLI::Validator kCohortRef(
    [](std::string& v) { return v == "default" || fs::exists(v) ? std::string() : "no cohort spec file '" + v + "'"; },
    "FILE|default");

bool is_csv(const std::string& path) { return fs::path(path).extension() == ".csv"; }

std::string footprints_text(const std::string& out, const std::string& cohort_id,
                            const std::vector<session::DigitalFootprint>& fps) {
  if (is_csv(out)) return mlcore::to_csv(personalize::build_training_table(fps));
  return dump_json(analytics::footprints_to_json(cohort_id, fps)) + "\n";
}

analytics::CohortSpec cohort_spec(const std::string& path, std::optional<std::uint64_t> seed) {
  auto spec = path.empty() || path == "default" ? analytics::default_cohort_spec() : analytics::cohort_spec_from_json(load_json_file(path));
  if (seed) spec.seed = *seed;
  return spec;
}

// Footprints from --input when given, else a generated cohort.
std::vector<session::DigitalFootprint> load_footprints(const std::string& input, const std::string& cohort,
                                                       std::optional<std::uint64_t> seed, std::string& cohort_id) {
  if (!input.empty()) {
    const auto doc = load_json_file(input);
    cohort_id = doc.value("cohort", fs::path(input).stem().string());
    return analytics::footprints_from_json(doc);
  }
  const auto spec = cohort_spec(cohort, seed);
  cohort_id = spec.id;
  return analytics::generate_cohort(spec);
}

personalize::PipelineConfig pipeline_config(const std::string& path, std::optional<int> splits) {
  auto cfg = path.empty() ? personalize::default_pipeline_config()
                          : personalize::pipeline_config_from_json(load_json_file(path));
  if (splits) {
    if (*splits < 1) throw Error(ErrorCode::Config, "--splits must be >= 1");
    cfg.split_seeds.clear();
    for (int i = 0; i < *splits; ++i) cfg.split_seeds.push_back(static_cast<std::uint64_t>(i));
  }
  return cfg;
}

std::string evaluation_table(const personalize::PipelineModel& m) {
  std::ostringstream os;
  os << "selected features: ";
  const auto names = m.selected_names();
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? ", " : "") << names[i];
  os << "\n\nclassifier            splits  mean     min      max\n";
  for (const auto& ev : m.evaluation) {
    double lo = 1, hi = 0;
    for (double a : ev.split_accuracy) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    char line[128];
    std::snprintf(line, sizeof line, "%-21s %6zu  %.4f   %.4f   %.4f\n", std::string(mlcore::to_string(ev.kind)).c_str(),
                  ev.split_accuracy.size(), ev.mean_accuracy, lo, hi);
    os << line;
  }
  return os.str();
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::atomic<httplib::Server*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fraud-aware investor game: simulation, analytics and personalization"};
  app.require_subcommand(1);

  // scenario generate
  auto* scenario = app.add_subcommand("scenario", "Market scenarios");
  scenario->require_subcommand(1);
  Common scen_c;
  std::string scen_out;
  auto* scen_gen = scenario->add_subcommand("generate", "Generate a scenario (prices, news, chat) as JSON");
  add_common(scen_gen, scen_c, "Scenario config JSON (defaults to the shipped one)");
  scen_gen->add_option("-o,--out", scen_out, "Output file (stdout when omitted)");

  // bots run
  auto* bots = app.add_subcommand("bots", "Simulated players");
  bots->require_subcommand(1);
  Common bot_c;
  int bot_n = 10;
  std::string bot_arch = "mixed", bot_out, bot_scenario, bot_data;
  auto* bots_run = bots->add_subcommand("run", "Play bot sessions through the service and write their footprints");
  add_common(bots_run, bot_c, "Bot policy JSON (defaults to the shipped one)");
  bots_run->add_option("-n,--n", bot_n, "Number of sessions")->check(CLI::Range(1, 100000));
  bots_run->add_option("--archetype", bot_arch, "NoviceBot, ExperiencedBot or mixed (alternating)")
      ->check(CLI::IsMember({"NoviceBot", "ExperiencedBot", "mixed"}));
  bots_run->add_option("--scenario", bot_scenario, "Scenario config JSON")->check(CLI::ExistingFile);
  bots_run->add_option("--data-dir", bot_data, "Persist session logs here instead of in memory");
  bots_run->add_option("-o,--out", bot_out, "Output file; .csv writes a feature table, anything else JSON");

  // cohort generate
  auto* cohort = app.add_subcommand("cohort", "Synthetic labeled cohorts");
  cohort->require_subcommand(1);
  Common coh_c;
  std::string coh_out;
  auto* coh_gen = cohort->add_subcommand("generate", "Draw a labeled cohort of footprints");
  add_common(coh_gen, coh_c, "Cohort spec JSON (defaults to the shipped one)");
  coh_gen->add_option("-o,--out", coh_out, "Output file; .csv writes a feature table, anything else JSON");

  // train / evaluate / elbow share their inputs
  Common train_c, eval_c, elbow_c, rep_c;
  std::string train_input, train_cohort, train_out, eval_input, eval_cohort, eval_model, elbow_input;
  std::optional<int> train_splits, eval_splits;

  auto* train = app.add_subcommand("train", "Fit the pipeline (PCA, feature selection, classifiers)");
  add_common(train, train_c, "Pipeline config JSON");
  train->add_option("--input", train_input, "Footprint JSON file (generated cohort when omitted)")->check(CLI::ExistingFile);
  train->add_option("--cohort", train_cohort, "Cohort spec JSON used when no --input")->check(kCohortRef);
  train->add_option("--splits", train_splits, "Number of stratified splits (seeds 0..n-1)");
  train->add_option("-o,--out", train_out, "Model file to write")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Print per-classifier accuracy over the splits");
  add_common(evaluate, eval_c, "Pipeline config JSON (ignored with --model)");
  evaluate->add_option("--model", eval_model, "Trained model JSON; trains afresh when omitted")->check(CLI::ExistingFile);
  evaluate->add_option("--input", eval_input, "Footprint JSON file")->check(CLI::ExistingFile);
  evaluate->add_option("--cohort", eval_cohort, "Cohort spec JSON or default")->check(kCohortRef);
  evaluate->add_option("--splits", eval_splits, "Number of stratified splits");

  int k_min = 1, k_max = 8;
  auto* elbow = app.add_subcommand("elbow", "K-means inertia curve on the standardized cohort");
  add_common(elbow, elbow_c, "Cohort spec JSON (ignored with --input)");
  elbow->add_option("--input", elbow_input, "Footprint JSON file")->check(CLI::ExistingFile);
  elbow->add_option("--k-min", k_min, "Smallest k")->check(CLI::PositiveNumber);
  elbow->add_option("--k-max", k_max, "Largest k")->check(CLI::PositiveNumber);
  std::string k_range;
  elbow->add_option("--k", k_range, "Range of k as MIN..MAX (overrides --k-min/--k-max)");

  // report build
  auto* report = app.add_subcommand("report", "Insight reports");
  report->require_subcommand(1);
  std::string rep_input, rep_cohort, rep_model, rep_out, rep_format = "json", rep_generated, rep_classifier = "Perceptron";
  double rep_alpha = 0.05;
  auto* rep_build = report->add_subcommand("build", "Descriptive and inferential statistics with narrative");
  add_common(rep_build, rep_c, "Pipeline config JSON used when training for the report");
  rep_build->add_option("--input", rep_input, "Footprint JSON file")->check(CLI::ExistingFile);
  rep_build->add_option("--cohort", rep_cohort, "Cohort spec JSON or default")->check(kCohortRef);
  rep_build->add_option("--model", rep_model, "Trained model JSON; trains on the footprints when omitted")
      ->check(CLI::ExistingFile);
  rep_build->add_option("--format", rep_format, "json or text")->check(CLI::IsMember({"json", "text"}));
  rep_build->add_option("--generated-at", rep_generated, "Timestamp recorded in the report (now when omitted)");
  rep_build->add_option("--alpha", rep_alpha, "Significance level for narrated group differences");
  rep_build->add_option("--classifier", rep_classifier, "Classifier whose predictions label the report");
  rep_build->add_option("-o,--out", rep_out, "Output file (stdout when omitted)");

  // serve
  Common srv_c;
  int port = 8080;
  std::string host = "127.0.0.1", srv_data;
  double tick_seconds = 0;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  add_common(serve, srv_c, "Server config JSON");
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--data-dir", srv_data, std::string("Data directory (overrides $") + server::kDataDirEnv + ")");
  serve->add_option("--tick-seconds", tick_seconds, "Advance every session one tick this often; 0 leaves the clock to clients");

  CLI11_PARSE(app, argc, argv);

  try {
    if (scen_gen->parsed()) {
      const auto cfg = scen_c.config.empty() ? simkit::default_scenario_config() : simkit::load_scenario_config(scen_c.config);
      const auto sc = simkit::generate_scenario(cfg, scen_c.seed.value_or(42));
      emit(scen_out, dump_json(simkit::to_json(sc)) + "\n");
    } else if (bots_run->parsed()) {
      const auto policies = bot_c.config.empty() ? server::default_bot_policies()
                                                 : server::bot_policies_from_json(load_json_file(bot_c.config));
      server::ServiceOptions opts;
      opts.train_on_start = false;
      if (!bot_scenario.empty()) opts.scenario_config = simkit::load_scenario_config(bot_scenario);
      if (!bot_data.empty()) opts.data_dir = bot_data;
      server::Service svc(opts);
      const auto seed = bot_c.seed.value_or(0);
      std::vector<session::DigitalFootprint> fps;
      std::size_t rejected = 0;
      for (int i = 0; i < bot_n; ++i) {
        const auto arch = bot_arch == "mixed" ? (i % 2 ? server::BotArchetype::ExperiencedBot : server::BotArchetype::NoviceBot)
                                              : server::parse_bot_archetype(bot_arch);
        auto run = server::run_bot_session(svc, policies.get(arch), mix_seed(seed, static_cast<std::uint64_t>(i)));
        run.footprint.label = arch == server::BotArchetype::NoviceBot ? InvestorType::novice() : InvestorType::experienced();
        rejected += run.rejected_trades;
        fps.push_back(std::move(run.footprint));
      }
      emit(bot_out, footprints_text(bot_out, "bots", fps));
      std::cerr << bot_n << " sessions, " << rejected << " trades refused by the server\n";
    } else if (coh_gen->parsed()) {
      const auto spec = cohort_spec(coh_c.config, coh_c.seed);
      emit(coh_out, footprints_text(coh_out, spec.id, analytics::generate_cohort(spec)));
    } else if (train->parsed()) {
      std::string id;
      const auto fps = load_footprints(train_input, train_cohort, train_c.seed, id);
      const auto model = personalize::train_pipeline(personalize::build_training_table(fps),
                                                     pipeline_config(train_c.config, train_splits));
      write_text_file(train_out, dump_json(personalize::to_json(model)) + "\n");
      std::cout << evaluation_table(model);
      std::cerr << "wrote " << train_out << "\n";
    } else if (evaluate->parsed()) {
      if (!eval_model.empty()) {
        std::cout << evaluation_table(personalize::pipeline_model_from_json(load_json_file(eval_model)));
      } else {
        std::string id;
        const auto fps = load_footprints(eval_input, eval_cohort, eval_c.seed, id);
        std::cout << evaluation_table(personalize::train_pipeline(personalize::build_training_table(fps),
                                                                  pipeline_config(eval_c.config, eval_splits)));
      }
    } else if (elbow->parsed()) {
      std::string id;
      const auto fps = load_footprints(elbow_input, elbow_c.config, elbow_c.seed, id);
      if (!k_range.empty()) {
        const auto dots = k_range.find("..");
        try {
          if (dots == std::string::npos) throw std::invalid_argument(k_range);
          k_min = std::stoi(k_range.substr(0, dots));
          k_max = std::stoi(k_range.substr(dots + 2));
        } catch (const std::exception&) {
          throw Error(ErrorCode::Config, "--k expects MIN..MAX, got '" + k_range + "'");
        }
      }
      const auto z = mlcore::standardize(personalize::build_training_table(fps));
      const auto r = mlcore::elbow_select(z.matrix.values, k_min, k_max, elbow_c.seed.value_or(42));
      std::cout << "k,inertia,chosen\n";
      for (std::size_t i = 0; i < r.ks.size(); ++i) {
        std::cout << r.ks[i] << "," << format_double(r.inertia[i]) << "," << (r.ks[i] == r.chosen_k ? 1 : 0) << "\n";
      }
      std::cerr << "chosen_k=" << r.chosen_k << "\n";
    } else if (rep_build->parsed()) {
      std::string id;
      const auto fps = load_footprints(rep_input, rep_cohort, rep_c.seed, id);
      std::optional<personalize::PipelineModel> model;
      if (!rep_model.empty()) {
        model = personalize::pipeline_model_from_json(load_json_file(rep_model));
      } else if (fps.front().label) {
        model = personalize::train_pipeline(personalize::build_training_table(fps), pipeline_config(rep_c.config, {}));
      }
      analytics::ReportOptions ro;
      ro.cohort_id = id;
      ro.generated_at = rep_generated.empty() ? utc_now() : rep_generated;
      ro.alpha = rep_alpha;
      ro.classifier = mlcore::parse_classifier_kind(rep_classifier);
      const auto r = analytics::build_report(fps, model ? &*model : nullptr, ro);
      emit(rep_out, rep_format == "text" ? analytics::render_text(r) : dump_json(analytics::to_json(r)) + "\n");
    } else if (serve->parsed()) {
      server::ServiceOptions opts;
      if (!srv_c.config.empty()) {
        opts = server::service_options_from_json(load_json_file(srv_c.config), fs::path(srv_c.config).parent_path());
      }
      if (srv_c.seed) opts.scenario_seed = *srv_c.seed;
      if (!srv_data.empty()) {
        opts.data_dir = srv_data;
      } else if (const char* env = std::getenv(server::kDataDirEnv); env && *env) {
        opts.data_dir = env;
      }
      server::Service svc(opts);
      httplib::Server http;
      server::register_routes(http, svc);
      g_server = &http;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::atomic<bool> running{true};
      std::thread clock;
      if (tick_seconds > 0) {
        clock = std::thread([&] {
          auto next = std::chrono::steady_clock::now();
          while (running) {
            next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(tick_seconds));
            while (running && std::chrono::steady_clock::now() < next) std::this_thread::sleep_for(std::chrono::milliseconds(50));
            if (running) svc.advance_all(1);
          }
        });
      }
      std::cerr << "listening on " << host << ":" << port << " (scenario " << svc.scenario().id << ", data "
                << (opts.data_dir.empty() ? std::string("in memory") : opts.data_dir.string()) << ")\n";
      const bool ok = http.listen(host, port);
      running = false;
      if (clock.joinable()) clock.join();
      g_server = nullptr;
      if (!ok) throw Error(ErrorCode::Config, "could not listen on " + host + ":" + std::to_string(port));
    }
  } catch (const Error& e) {
    std::cerr << "fraudaware: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fraudaware: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
