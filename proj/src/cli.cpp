#include "panelcause/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "panelcause/advisor.hpp"
#include "panelcause/error.hpp"
#include "panelcause/panel.hpp"
#include "panelcause/report.hpp"
#include "panelcause/rng.hpp"
#include "panelcause/sim.hpp"

namespace panelcause::cli {

using nlohmann::json;
using advisor::MethodId;

namespace {

struct RunConfig {
  std::string subcommand;
  std::string data;
  std::string unit_col = "unit";
  std::string time_col = "time";
  std::string outcome_col = "outcome";
  std::string policy_col = "policy";
  std::vector<std::string> covariates;
  std::vector<std::string> methods;
  std::vector<std::string> options;
  std::uint64_t seed = 20240501;
  bool seed_given = false;
  std::size_t reps = 0;
  std::string out;
  std::string format = "json";
  bool force = false;
  double ci_level = 0.95;
};

json config_json(const RunConfig& c) {
  json doc{{"subcommand", c.subcommand},
           {"data", c.data},
           {"columns", {{"unit", c.unit_col}, {"time", c.time_col}, {"outcome", c.outcome_col}, {"policy", c.policy_col}}},
           {"covariates", c.covariates},
           {"format", c.format},
           {"ci_level", c.ci_level},
           {"seed", c.seed}};
  if (c.subcommand == "fit") {
    doc["method"] = c.methods.empty() ? "" : c.methods.front();
    doc["options"] = c.options;
    doc["force"] = c.force;
  }
  if (c.subcommand == "simulate") {
    doc["methods"] = c.methods;
    doc["reps"] = c.reps;
    doc["out"] = c.out;
  }
  return doc;
}

json envelope(const RunConfig& c) {
  return {{"tool", "panelcause"}, {"version", kVersion}, {"command", c.subcommand}, {"config", config_json(c)},
          {"seed", c.seed}};
}

void require_format(const RunConfig& c, std::initializer_list<const char*> allowed) {
  for (const char* f : allowed) {
    if (c.format == f) return;
  }
  fail(ErrorCode::kConfigError, "format '" + c.format + "' is not available for " + c.subcommand);
}

PanelDataset load(const RunConfig& c) {
  if (c.data.empty()) fail(ErrorCode::kConfigError, "--data is required");
  ColumnMapping mapping;
  mapping.unit = c.unit_col;
  mapping.time = c.time_col;
  mapping.outcome = c.outcome_col;
  mapping.policy = c.policy_col;
  if (!c.covariates.empty()) mapping.covariates = c.covariates;
  return load_panel_file(c.data, mapping);
}

MethodId method_of(const std::string& text) {
  auto id = advisor::parse_method(text);
  if (!id) fail(ErrorCode::kConfigError, "unknown method '" + text + "'");
  return *id;
}

std::map<std::string, std::string> parse_options(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      fail(ErrorCode::kConfigError, "option '" + item + "' must look like key=value");
    }
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

void emit(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

int cmd_describe(const RunConfig& c, std::ostream& out) {
  require_format(c, {"json", "text"});
  const auto panel = load(c);
  const auto schedule = derive_adoption(panel);
  json doc = envelope(c);
  doc["report"] = report::describe(panel);
  doc["features"] = report::features(panel, advisor::derive_features(panel, schedule));
  if (c.format == "text") {
    out << report::describe_text(doc["report"]);
  } else {
    emit(out, doc);
  }
  return 0;
}

int cmd_recommend(const RunConfig& c, std::ostream& out) {
  require_format(c, {"json", "text"});
  const auto panel = load(c);
  const auto features = advisor::derive_features(panel, derive_adoption(panel));
  const auto rec = advisor::recommend(features);
  json doc = envelope(c);
  doc["features"] = report::features(panel, features);
  doc["recommendation"] = report::recommendation(features, rec);
  if (c.format == "text") {
    out << report::recommend_text(doc);
  } else {
    emit(out, doc);
  }
  return 0;
}

bool single_cohort_method(MethodId id) {
  switch (id) {
    case MethodId::kIts:
    case MethodId::kScm:
    case MethodId::kAscm:
    case MethodId::kDidTwfe:
    case MethodId::kEventStudy:
    case MethodId::kCits:
      return true;
    default:
      return false;
  }
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
  require_format(c, {"json", "csv", "text"});
  if (c.methods.size() != 1) fail(ErrorCode::kConfigError, "fit needs exactly one --method");
  const MethodId id = method_of(c.methods.front());
  const auto panel = load(c);
  const auto features = advisor::derive_features(panel, derive_adoption(panel));
  const auto rec = advisor::recommend(features);
  const auto& advice = rec.advice(id);
  if (!advice.viable && !c.force) {
    std::string why;
    for (const auto& r : advice.reasons) why += (why.empty() ? "" : "; ") + r;
    const std::string msg = std::string(advisor::to_string(id)) + " is not viable for this design: " + why +
                            " (use --force to run anyway)";
    if (single_cohort_method(id) && features.timing_class == TimingClass::kStaggered) {
      fail(ErrorCode::kStaggeredInput, msg);
    }
    if (features.n_control == 0 && id != MethodId::kIts && id != MethodId::kItsMultiBaseline) {
      fail(ErrorCode::kNoControl, msg);
    }
    fail(ErrorCode::kMethodNotViable, msg);
  }

  report::FitRequest req;
  req.method = id;
  req.covariates = c.covariates;
  req.options = parse_options(c.options);
  req.ci_level = c.ci_level;
  req.seed = c.seed;

  json doc = envelope(c);
  doc["method"] = advisor::to_string(id);
  doc["forced"] = !advice.viable;
  doc["assumptions"] = advice.assumptions;
  doc["cautions"] = advice.cautions;
  doc["result"] = report::fit(panel, req);
  if (c.format == "csv") {
    out << report::fit_csv(doc);
  } else if (c.format == "text") {
    out << report::fit_text(doc);
  } else {
    emit(out, doc);
  }
  return 0;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfigError, "cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kConfigError, path + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kConfigError, "cannot write '" + path.string() + "'");
  f << content;
}

int cmd_simulate(RunConfig c, std::ostream& out) {
  require_format(c, {"json", "csv"});
  if (c.data.empty()) fail(ErrorCode::kConfigError, "--data must name a simulation config (JSON)");
  const json plan = read_json_file(c.data);

  std::vector<sim::DgpConfig> configs;
  std::vector<std::string> methods = c.methods;
  std::size_t reps = 100;
  if (plan.is_object() && plan.contains("configs")) {
    for (const auto& [key, value] : plan.items()) {
      if (key != "configs" && key != "methods" && key != "reps") {
        fail(ErrorCode::kConfigError, "unknown simulation key '" + key + "'");
      }
    }
    for (const auto& item : plan.at("configs")) configs.push_back(sim::config_from_json(item));
    if (methods.empty() && plan.contains("methods")) methods = plan.at("methods").get<std::vector<std::string>>();
    if (plan.contains("reps")) reps = plan.at("reps").get<std::size_t>();
  } else {
    configs.push_back(sim::config_from_json(plan));
  }
  if (configs.empty()) fail(ErrorCode::kConfigError, "simulation config lists no DGPs");
  if (c.reps > 0) reps = c.reps;
  if (c.seed_given) {
    for (std::size_t i = 0; i < configs.size(); ++i) configs[i].seed = rng::substream_key(c.seed, {i});
  }

  std::vector<MethodId> ids;
  if (methods.empty()) {
    ids.assign(advisor::kAllMethods.begin(), advisor::kAllMethods.end());
  } else {
    for (const auto& m : methods) ids.push_back(method_of(m));
  }
  c.reps = reps;
  c.methods.clear();
  for (auto id : ids) c.methods.emplace_back(advisor::to_string(id));

  sim::EvalOptions eo;
  eo.ci_level = c.ci_level;
  const auto eval = sim::evaluate(configs, ids, reps, eo);

  std::ostringstream reps_csv, metrics_csv, runtime_csv;
  sim::write_replications(reps_csv, eval.records);
  sim::write_metrics(metrics_csv, eval.metrics);
  sim::write_runtime(runtime_csv, eval.metrics);

  json doc = envelope(c);
  json cfgs = json::array();
  for (const auto& cfg : configs) cfgs.push_back(sim::config_to_json(cfg));
  doc["dgp_configs"] = cfgs;
  doc["skipped"] = eval.skipped;
  json metrics = json::array();
  for (const auto& m : eval.metrics) {
    metrics.push_back({{"config", m.config},
                       {"method", advisor::to_string(m.method)},
                       {"null_config", m.null_config},
                       {"reps", m.reps},
                       {"failures", m.failures},
                       {"mean_estimate", m.mean_estimate},
                       {"mean_truth", m.mean_truth},
                       {"bias", m.bias},
                       {"sd", m.sd},
                       {"rmse", m.rmse},
                       {"mean_se", m.mean_se},
                       {"coverage", m.coverage},
                       {"type_i", m.type_i}});
  }
  doc["metrics"] = metrics;

  if (!c.out.empty()) {
    std::filesystem::path dir(c.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::kConfigError, "cannot create output directory '" + c.out + "'");
    write_file(dir / "replications.csv", reps_csv.str());
    write_file(dir / "metrics.csv", metrics_csv.str());
    write_file(dir / "runtime.csv", runtime_csv.str());
    write_file(dir / "run.json", doc.dump(2) + "\n");
  }
  if (c.format == "csv") {
    out << metrics_csv.str();
  } else {
    emit(out, doc);
  }
  return 0;
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--data", c.data, "input file");
  sub->add_option("--unit-col", c.unit_col, "unit column");
  sub->add_option("--time-col", c.time_col, "time column");
  sub->add_option("--outcome-col", c.outcome_col, "outcome column");
  sub->add_option("--policy-col", c.policy_col, "policy column");
  sub->add_option("--covariates", c.covariates, "covariate columns")->delimiter(',');
  sub->add_option("--format", c.format, "json, csv or text");
  sub->add_option("--ci-level", c.ci_level, "confidence level")->check(CLI::Range(0.5, 0.9999));
  sub->add_option("--seed", c.seed, "random seed");
}

int error_record(std::ostream& out, std::string_view code, const std::string& message) {
  json doc{{"error", {{"code", code}, {"message", message}}}};
  out << doc.dump(2) << '\n';
  return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Policy evaluation for state-level panel data", "panelcause"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto* describe = app.add_subcommand("describe", "panel structure and adoption timing");
  auto* recommend = app.add_subcommand("recommend", "viable methods for the design");
  auto* fit = app.add_subcommand("fit", "run one estimator");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of estimators");
  for (auto* sub : {describe, recommend, fit, simulate}) add_common(sub, c);
  fit->add_option("--method", c.methods, "method id")->expected(1);
  fit->add_option("--option", c.options, "method option key=value (repeatable)");
  fit->add_flag("--force", c.force, "run even when the advisor rules the method out");
  simulate->add_option("--method", c.methods, "method ids")->delimiter(',');
  simulate->add_option("--reps", c.reps, "replications per configuration");
  simulate->add_option("--out", c.out, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    return error_record(out, to_string(ErrorCode::kConfigError), e.what());
  }

  for (auto* sub : {describe, recommend, fit, simulate}) {
    if (sub->parsed()) {
      c.subcommand = sub->get_name();
      c.seed_given = sub->count("--seed") > 0;
    }
  }
  try {
    if (c.subcommand == "describe") return cmd_describe(c, out);
    if (c.subcommand == "recommend") return cmd_recommend(c, out);
    if (c.subcommand == "fit") return cmd_fit(c, out);
    return cmd_simulate(c, out);
  } catch (const Error& e) {
    return error_record(out, to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return error_record(out, "INTERNAL_ERROR", e.what());
  }
}

}  // namespace panelcause::cli
