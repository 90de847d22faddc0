#include "tabeval/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "tabeval/analysis.hpp"
#include "tabeval/corpus.hpp"
#include "tabeval/error.hpp"
#include "tabeval/fs.hpp"
#include "tabeval/llm.hpp"
#include "tabeval/log.hpp"

namespace tabeval::cli {

using nlohmann::json;

namespace {

struct RunConfig {
  std::string unroller = "deterministic";
  std::string llm_url = "https://api.openai.com/v1/chat/completions";
  std::string model;
  int max_attempts = 3;
  std::string scorer = "exact";
  std::string scorer_url;
  std::size_t batch_size = 32;
  std::string record_mode = "triple";
  std::vector<std::string> baselines{"exact", "chrf"};
  std::string embed_url;
  std::optional<double> embed_rescale;
  std::string direction = "per_metric";
  std::size_t parallelism = 1;
  std::string cache_dir = ".tabeval-cache";
  bool strict_attribution = false;
  long timeout_ms = 60'000;
};

void merge_json(RunConfig& c, const json& j) {
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  take("unroller", c.unroller);
  take("llm_url", c.llm_url);
  take("model", c.model);
  take("max_attempts", c.max_attempts);
  take("scorer", c.scorer);
  take("scorer_url", c.scorer_url);
  take("batch_size", c.batch_size);
  take("record_mode", c.record_mode);
  take("baselines", c.baselines);
  take("embed_url", c.embed_url);
  if (j.contains("embed_rescale") && !j.at("embed_rescale").is_null()) c.embed_rescale = j.at("embed_rescale").get<double>();
  take("direction", c.direction);
  take("parallelism", c.parallelism);
  take("cache_dir", c.cache_dir);
  take("strict_attribution", c.strict_attribution);
  take("timeout_ms", c.timeout_ms);
}

// Options shared by the unroll and evaluate commands. Values land in a
// scratch copy and are applied over the config file only when given.
struct CommonFlags {
  std::string config_path;
  RunConfig flags;
  std::vector<CLI::Option*> opts;
  std::optional<double> rescale;

  void attach(CLI::App* app, bool scoring) {
    app->add_option("--config", config_path, "JSON config file; flags override it");
    opts.push_back(app->add_option("--unroller", flags.unroller, "deterministic | llm")
                       ->check(CLI::IsMember({"deterministic", "llm"})));
    opts.push_back(app->add_option("--llm-url", flags.llm_url, "chat-completions endpoint"));
    opts.push_back(app->add_option("--model", flags.model, "LLM model id"));
    opts.push_back(app->add_option("--max-attempts", flags.max_attempts, "LLM attempts per table"));
    opts.push_back(app->add_option("--parallelism", flags.parallelism, "worker threads")->check(CLI::PositiveNumber));
    opts.push_back(app->add_option("--cache-dir", flags.cache_dir, "unroll response cache"));
    opts.push_back(app->add_flag("--strict-attribution", flags.strict_attribution,
                                 "drop statements not supported by the table"));
    opts.push_back(app->add_option("--timeout-ms", flags.timeout_ms, "HTTP timeout"));
    if (!scoring) return;
    opts.push_back(app->add_option("--scorer", flags.scorer, "exact | lexical | nli_remote")
                       ->check(CLI::IsMember({"exact", "lexical", "nli_remote"})));
    opts.push_back(app->add_option("--scorer-url", flags.scorer_url, "NLI service base URL"));
    opts.push_back(app->add_option("--batch-size", flags.batch_size, "pairs per NLI request")->check(CLI::PositiveNumber));
    opts.push_back(app->add_option("--record-mode", flags.record_mode, "pair | triple")
                       ->check(CLI::IsMember({"pair", "triple"})));
    opts.push_back(app->add_option("--baselines", flags.baselines, "exact chrf embedding")->delimiter(','));
    opts.push_back(app->add_option("--embed-url", flags.embed_url, "embedding service base URL"));
    opts.push_back(app->add_option("--embed-rescale", rescale, "baseline constant for rescaled similarity"));
    opts.push_back(app->add_option("--direction", flags.direction,
                                   "per_metric | gold_premise | pred_premise | max_both"));
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config_path.empty()) {
      try {
        merge_json(c, json::parse(read_file(config_path)));
      } catch (const json::exception& e) {
        throw ConfigError("config " + config_path + ": " + e.what());
      }
    }
    for (auto* o : opts) {
      if (o->count() == 0) continue;
      const auto& n = o->get_name();
      if (n == "--unroller") c.unroller = flags.unroller;
      else if (n == "--llm-url") c.llm_url = flags.llm_url;
      else if (n == "--model") c.model = flags.model;
      else if (n == "--max-attempts") c.max_attempts = flags.max_attempts;
      else if (n == "--parallelism") c.parallelism = flags.parallelism;
      else if (n == "--cache-dir") c.cache_dir = flags.cache_dir;
      else if (n == "--strict-attribution") c.strict_attribution = flags.strict_attribution;
      else if (n == "--timeout-ms") c.timeout_ms = flags.timeout_ms;
      else if (n == "--scorer") c.scorer = flags.scorer;
      else if (n == "--scorer-url") c.scorer_url = flags.scorer_url;
      else if (n == "--batch-size") c.batch_size = flags.batch_size;
      else if (n == "--record-mode") c.record_mode = flags.record_mode;
      else if (n == "--baselines") c.baselines = flags.baselines;
      else if (n == "--embed-url") c.embed_url = flags.embed_url;
      else if (n == "--embed-rescale") c.embed_rescale = rescale;
      else if (n == "--direction") c.direction = flags.direction;
    }
    if (c.parallelism < 1) throw ConfigError("parallelism must be at least 1");
    return c;
  }
};

// Owns whichever unroller the config selects.
struct UnrollerStack {
  std::unique_ptr<CompletionClient> client;
  std::unique_ptr<UnrollCache> cache;
  std::unique_ptr<Unroller> unroller;

  explicit UnrollerStack(const RunConfig& c) {
    if (c.unroller == "deterministic") {
      unroller = std::make_unique<DeterministicUnroller>();
      return;
    }
    if (c.unroller != "llm") throw ConfigError("unknown unroller: " + c.unroller);
    if (c.model.empty()) throw ConfigError("the llm unroller needs --model");
    const char* key = std::getenv(kLlmKeyEnv);
    if (!key || !*key) throw ConfigError(std::string("the llm unroller needs ") + kLlmKeyEnv + " to be set");
    client = std::make_unique<HttpCompletionClient>(c.llm_url, key, std::chrono::milliseconds(c.timeout_ms));
    if (!c.cache_dir.empty()) cache = std::make_unique<UnrollCache>(c.cache_dir);
    unroller = std::make_unique<LlmUnroller>(*client, cache.get(), LlmOptions{c.model, c.max_attempts});
  }
};

json statements_json(const std::string& id, const StatementSet& set) {
  json statements = json::array();
  for (const auto& s : set.statements) statements.push_back({{"text", s.text}, {"supporting_rows", s.supporting_rows}});
  return {{"id", id}, {"statements", statements}};
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") out << content;
  else write_file_atomic(path, content);
}

template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& body) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  workers = std::min(workers, std::max<std::size_t>(1, n));
  if (workers <= 1) {
    loop();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(loop);
}

int cmd_unroll(const std::string& input, const std::string& output, const RunConfig& c, std::ostream& out,
               std::ostream& err) {
  const auto records = read_dataset(input);
  UnrollerStack stack(c);
  std::vector<std::optional<std::string>> lines(records.size());
  std::mutex err_mu;
  parallel_for(records.size(), c.parallelism, [&](std::size_t i) {
    const auto& rec = records[i];
    try {
      auto table = parse_table(rec.table, rec.intent);
      auto set = stack.unroller->unroll(table);
      auto report = validate_attribution(set, table);
      if (!report.clean()) {
        std::lock_guard lock(err_mu);
        err << "warning: " << rec.id << ": " << report.flagged.size() << " unsupported statement(s)\n";
      }
      if (c.strict_attribution) set = drop_unsupported(set, report);
      lines[i] = statements_json(rec.id, set).dump();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      std::lock_guard lock(err_mu);
      err << "error: " << rec.id << ": " << e.what() << "\n";
    }
  });
  std::string content;
  bool partial = false;
  for (const auto& l : lines) {
    if (l) content += *l + "\n";
    else partial = true;
  }
  emit(output, content, out);
  return partial ? kExitPartial : kExitOk;
}

json config_json(const RunConfig& c) {
  json j = {{"unroller", c.unroller},
            {"scorer", c.scorer},
            {"record_mode", c.record_mode},
            {"baselines", c.baselines},
            {"direction", c.direction},
            {"strict_attribution", c.strict_attribution}};
  if (c.unroller == "llm") j["model"] = c.model;
  if (c.embed_rescale) j["embed_rescale"] = *c.embed_rescale;
  return j;
}

int cmd_evaluate(const std::string& refs, const std::string& preds, const std::string& output, const RunConfig& c,
                 std::ostream& out) {
  const auto gold = read_dataset(refs);
  const auto predictions = read_predictions(preds);

  CorpusConfig cc;
  cc.record_mode = record_mode_from_string(c.record_mode);
  cc.baselines.clear();
  for (const auto& b : c.baselines) cc.baselines.push_back(baseline_metric_from_string(b));
  cc.embedding.rescale_baseline = c.embed_rescale;
  cc.parallelism = c.parallelism;
  cc.tabeval.direction = direction_policy_from_string(c.direction);
  cc.tabeval.strict_attribution = c.strict_attribution;

  ScorerConfig sc;
  sc.backend = scorer_backend_from_string(c.scorer);
  sc.endpoint_url = c.scorer_url;
  sc.batch_size = c.batch_size;
  sc.timeout = std::chrono::milliseconds(c.timeout_ms);
  auto scorer = make_scorer(sc);

  std::unique_ptr<Embedder> embedder;
  if (std::find(cc.baselines.begin(), cc.baselines.end(), BaselineMetric::embedding) != cc.baselines.end()) {
    if (c.embed_url.empty()) throw ConfigError("the embedding baseline needs --embed-url");
    embedder = std::make_unique<RemoteEmbedder>(c.embed_url, std::chrono::milliseconds(c.timeout_ms));
  }
  UnrollerStack stack(c);

  std::map<std::string, std::vector<PredictionRecord>> by_model;
  for (const auto& p : predictions) by_model[p.model_id].push_back(p);
  if (by_model.empty()) by_model["default"] = {};

  json models = json::array();
  std::size_t failures = 0;
  for (const auto& [model, preds_for_model] : by_model) {
    auto report = evaluate_corpus(gold, preds_for_model, cc, *stack.unroller, *scorer, embedder.get());
    report.model_id = model;
    failures += report.failures();
    const auto& m = report.macro;
    out << model << "\ttabeval\tP=" << m.tabeval.precision << "\tR=" << m.tabeval.recall
        << "\tF1=" << m.tabeval.f1 << "\n";
    for (const auto& [key, v] : m.baselines)
      out << model << "\t" << key << "\tP=" << v.precision << "\tR=" << v.recall << "\tF1=" << v.f1 << "\n";
    models.push_back(to_json(report));
  }
  json doc = {{"schema", "tabeval-report/1"}, {"config", config_json(c)}, {"models", models}};
  write_file_atomic(output, doc.dump(2) + "\n");
  return failures ? kExitPartial : kExitOk;
}

std::vector<MetricReport> load_reports(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("report " + path + ": " + e.what());
  }
  std::vector<MetricReport> reports;
  if (!doc.contains("models")) throw ConfigError("report " + path + " has no models");
  for (const auto& m : doc.at("models")) reports.push_back(report_from_json(m));
  return reports;
}

int cmd_correlate(const std::string& report_path, const std::string& ratings_path, const std::string& output,
                  const std::string& level, std::ostream& out) {
  const auto reports = load_reports(report_path);
  const auto ratings = read_ratings(ratings_path);
  const auto table = correlate_report(reports, ratings);
  const auto agreement = rater_agreement(ratings, alpha_level_from_string(level));

  out << format_table(table);
  json alpha = json::object();
  out << "\nKrippendorff alpha (" << level << ")\n";
  for (const auto& [dim, a] : agreement) {
    alpha[std::string(to_string(dim))] = a ? json(*a) : json(nullptr);
    out << "  " << to_string(dim) << ": ";
    if (a) out << *a;
    else out << "n/a";
    out << "\n";
  }
  json doc = to_json(table);
  doc["agreement"] = {{"level", level}, {"alpha", alpha}};
  if (output.empty()) out << "\n" << doc.dump(2) << "\n";
  else write_file_atomic(output, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_compare(const std::string& report_path, const std::string& output, std::ostream& out) {
  std::map<std::string, MetricReport> by_model;
  for (auto& r : load_reports(report_path)) by_model.emplace(r.model_id, std::move(r));
  const auto table = model_comparison(by_model);
  out << format_table(table);
  if (!output.empty()) write_file_atomic(output, to_json(table).dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Table evaluation by unrolling tables into statements and scoring entailment", "tabeval"};
  app.require_subcommand(1);

  std::string input, output, refs, preds, report, ratings, level = "ordinal";

  auto* unroll = app.add_subcommand("unroll", "Unroll dataset tables into statements (JSONL)");
  unroll->add_option("--input", input, "dataset JSONL")->required();
  unroll->add_option("--out", output, "statements JSONL (stdout when omitted)");
  CommonFlags unroll_flags;
  unroll_flags.attach(unroll, false);

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against references");
  evaluate->add_option("--refs", refs, "reference dataset JSONL")->required();
  evaluate->add_option("--preds", preds, "prediction JSONL")->required();
  evaluate->add_option("--out", output, "report JSON")->required();
  CommonFlags eval_flags;
  eval_flags.attach(evaluate, true);

  auto* correlate = app.add_subcommand("correlate", "Correlate a report with human ratings");
  correlate->add_option("--report", report, "report JSON from evaluate")->required();
  correlate->add_option("--ratings", ratings, "ratings JSONL")->required();
  correlate->add_option("--out", output, "correlation JSON");
  correlate->add_option("--alpha-level", level, "ordinal | interval")->check(CLI::IsMember({"ordinal", "interval"}));

  auto* compare = app.add_subcommand("compare", "Summarise models side by side (x100)");
  compare->add_option("--report", report, "report JSON from evaluate")->required();
  compare->add_option("--out", output, "summary JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*unroll) return cmd_unroll(input, output, unroll_flags.resolve(), out, err);
    if (*evaluate) return cmd_evaluate(refs, preds, output, eval_flags.resolve(), out);
    if (*correlate) return cmd_correlate(report, ratings, output, level, out);
    if (*compare) return cmd_compare(report, output, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tabeval::cli
