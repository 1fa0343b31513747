#include "pathsql/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "pathsql/benchmark.hpp"
#include "pathsql/cdd.hpp"
#include "pathsql/dbm_json.hpp"
#include "pathsql/ddl.hpp"
#include "pathsql/describe.hpp"
#include "pathsql/pipeline.hpp"
#include "pathsql/schema_graph.hpp"

namespace pathsql {

namespace {

struct Options {
  std::string model;  // DDL file
  std::string dbm;    // DBM directory
  std::string mock;
  std::string record;
  std::string endpoint;
  std::string llm_model = "gpt-4o";
  std::string api_key_env = "OPENAI_API_KEY";
  int samples = 20;
  int retrieve_samples = 5;
  double temperature = 0.2;
  std::optional<int> max_len;
  std::string run_dir;
  int jobs = 1;
  std::string dialect = "ansi";
  std::string view_name = "v";
};

// Thrown for failures that map onto the one-line error report.
struct CliFailure {
  std::string phase;
  std::string kind;
  std::string message;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw CliFailure{"cli", "io", "cannot write '" + p.string() + "'"};
  out << text;
}

bool uses_default_model(const Options& o) { return o.model.empty() && o.dbm.empty(); }

DatabaseModel load(const Options& o) {
  try {
    if (uses_default_model(o)) return load_cdd().model;
    std::optional<std::filesystem::path> ddl, dir;
    if (!o.model.empty()) ddl = o.model;
    if (!o.dbm.empty()) dir = o.dbm;
    return load_model(ddl, dir).model;
  } catch (const DdlError& e) {
    throw CliFailure{"model", "ddl", e.what()};
  } catch (const DbmError& e) {
    throw CliFailure{"model", "dbm", e.what()};
  }
}

// Mock (script or transcript) or live client, optionally wrapped in a recorder.
class LlmSetup {
 public:
  explicit LlmSetup(const Options& o) : record_(o.record) {
    if (!o.mock.empty()) {
      base_ = load_mock(o.mock);
    } else {
      HttpLlmConfig cfg;
      if (!o.endpoint.empty()) cfg.endpoint = o.endpoint;
      cfg.model = o.llm_model;
      cfg.api_key_env = o.api_key_env;
      base_ = std::make_unique<HttpLlm>(cfg);
    }
    if (!record_.empty()) recorder_ = std::make_unique<RecordingLlm>(*base_);
  }
  LlmSetup(const LlmSetup&) = delete;
  LlmSetup& operator=(const LlmSetup&) = delete;
  ~LlmSetup() {
    try {
      save();
    } catch (...) {
    }
  }

  LlmClient& client() { return recorder_ ? static_cast<LlmClient&>(*recorder_) : *base_; }

  void save() {
    if (recorder_ && !saved_) {
      recorder_->transcript().save(record_);
      saved_ = true;
    }
  }

 private:
  std::string record_;
  std::unique_ptr<LlmClient> base_;
  std::unique_ptr<RecordingLlm> recorder_;
  bool saved_ = false;
};

PipelineConfig pipeline_config(const Options& o) {
  PipelineConfig c;
  c.retrieve.samples = o.retrieve_samples;
  c.retrieve.temperature = o.temperature;
  c.tosql.samples = o.samples;
  c.tosql.temperature = o.temperature;
  c.max_len = o.max_len;
  c.view_name = o.view_name;
  c.dialect = parse_dialect(o.dialect);
  if (!o.run_dir.empty()) c.run_dir = o.run_dir;
  return c;
}

// "table" or "table.attr" items.
RelevanceSet relevance_from_list(const std::vector<std::string>& items, const DatabaseModel& model) {
  RelevanceSet r;
  for (const auto& item : items) {
    auto dot = item.find('.');
    if (dot == std::string::npos) r.add(item);
    else r.add(item.substr(0, dot), {item.substr(dot + 1)});
  }
  for (const auto& t : r.relevant_tables())
    if (!model.has_table(t)) throw CliFailure{"solve", "unknown_table", "unknown table '" + t + "'"};
  r.normalize(model);
  return r;
}

void print_walk_report(const Walk& w, const PathProblem& p, const SolveStats& stats, std::ostream& out) {
  out << "walk: " << to_string(w) << "\n";
  out << "cost: " << w.cost << "\n";
  const auto violations = check_walk(w, p);
  for (const char* rule : {"C1", "C2", "C3", "C4", "cost"}) {
    std::string verdict = "ok";
    for (const auto& v : violations)
      if (v.rule == rule) verdict = "violated: " + v.message;
    out << "check " << rule << ": " << verdict << "\n";
  }
  out << "stats: states_expanded=" << stats.states_expanded << " depth_reached=" << stats.depth_reached
      << " horizon=" << stats.horizon << "\n";
}

std::vector<std::string> walk_tables(const PipelineResult& r) {
  std::vector<std::string> out;
  if (!r.plan) return out;
  out = r.plan->core_walk.steps;
  for (const auto& b : r.plan->branches) out.insert(out.end(), b.tables.begin(), b.tables.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CliFailure pipeline_failure(const PipelineError& e) { return {e.phase(), e.kind(), e.what()}; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Text-to-SQL over a database model: relevance retrieval, join-path solving, view generation"};
  app.name("pathsql");
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file; flags given on the command line win");

  app.add_option("--model", o.model, "DDL file (CREATE TABLE statements)");
  app.add_option("--dbm", o.dbm, "DBM directory (tables/relationships/patterns JSON)");
  auto* mock_opt = app.add_option("--mock", o.mock, "script (JSON array) or recorded transcript instead of a live LLM");
  app.add_option("--record", o.record, "write a digest transcript of every LLM exchange");
  auto* endpoint_opt = app.add_option("--endpoint", o.endpoint, "chat-completions endpoint URL");
  app.add_option("--llm-model", o.llm_model, "model name sent to the endpoint")->capture_default_str();
  app.add_option("--api-key-env", o.api_key_env, "environment variable holding the API key")->capture_default_str();
  mock_opt->excludes(endpoint_opt);
  app.add_option("--samples", o.samples, "query samples per question")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--retrieve-samples", o.retrieve_samples, "samples per retrieval prompt")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--temperature", o.temperature, "sampling temperature")->capture_default_str()->check(CLI::Range(0.0, 2.0));
  app.add_option("--max-len", o.max_len, "walk length bound (default: deepen until feasible)")->check(CLI::PositiveNumber);
  app.add_option("--run-dir", o.run_dir, "directory for phase artifacts");
  app.add_option("--jobs", o.jobs, "parallel questions in eval")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--dialect", o.dialect, "view SQL dialect")->capture_default_str()->check(CLI::IsMember({"ansi", "mysql"}));
  app.add_option("--view-name", o.view_name, "name of the generated view")->capture_default_str();

  // dbm
  auto* dbm = app.add_subcommand("dbm", "database model ingestion");
  dbm->require_subcommand(1);
  dbm->fallthrough();
  std::string dbm_out;
  bool describe = false;
  auto* dbm_build = dbm->add_subcommand("build", "load DDL and DBM documents and write the merged model");
  dbm_build->fallthrough();
  dbm_build->add_option("--out", dbm_out, "output directory for tables/relationships/patterns JSON");
  dbm_build->add_flag("--describe", describe, "ask the LLM for missing table descriptions");
  auto* dbm_validate = dbm->add_subcommand("validate", "report model diagnostics");
  dbm_validate->fallthrough();

  // solve
  auto* solve = app.add_subcommand("solve", "find the join walk covering a set of tables");
  solve->fallthrough();
  std::string tables;
  bool decompose = false;
  solve->add_option("--tables", tables, "comma-separated target tables")->required();
  solve->add_flag("--decompose", decompose, "solve the core walk and attach pattern branches");

  // view
  auto* view = app.add_subcommand("view", "emit the view for a relevance set");
  view->fallthrough();
  std::string view_tables, relta_file;
  auto* vt = view->add_option("--tables", view_tables, "comma-separated table or table.attribute items");
  auto* vr = view->add_option("--relta", relta_file, "relevance set JSON file");
  vt->excludes(vr);

  // ask
  auto* ask = app.add_subcommand("ask", "answer one question");
  ask->fallthrough();
  std::string question, evidence;
  ask->add_option("question", question, "natural-language question")->required();
  ask->add_option("--evidence", evidence, "additional knowledge passed to the query prompt");

  // eval
  auto* eval = app.add_subcommand("eval", "run a question set and score EX/ESX and coverage");
  eval->fallthrough();
  std::string dataset, db, seed, report_file;
  int threshold = 5;
  eval->add_option("--dataset", dataset, "JSON lines: id, question, evidence, gt_sql");
  auto* db_opt = eval->add_option("--db", db, "SQLite database file (opened read-only)");
  auto* seed_opt = eval->add_option("--seed", seed, "SQL script loaded into an in-memory copy of the model");
  db_opt->excludes(seed_opt);
  eval->add_option("--threshold", threshold, "solved iff more than this many samples match")->capture_default_str();
  eval->add_option("--report", report_file, "write the JSON report here");

  // explain
  auto* explain = app.add_subcommand("explain", "print phase artifacts and the schema graph");
  explain->fallthrough();
  std::string explain_q;
  explain->add_option("question", explain_q, "question to run; omitted: graph only");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
    err << "error: phase=cli kind=usage msg=" << one_line(e.what()) << "\n";
    err << "usage: pathsql [options] {dbm build|dbm validate|solve|view|ask|eval|explain} ... (see --help)\n";
    return 2;
  }

  try {
    if (dbm_validate->parsed()) {
      DatabaseModel model = load(o);
      const auto diags = validate_model(model);
      for (const auto& d : diags) out << d.entity << ": " << d.rule << ": " << d.message << "\n";
      out << diags.size() << " diagnostics\n";
      return diags.empty() ? 0 : 1;
    }

    if (dbm_build->parsed()) {
      DatabaseModel model = load(o);
      const auto diags = validate_model(model);
      if (!diags.empty())
        throw CliFailure{"model", "invalid", diags.front().entity + ": " + diags.front().rule + " (" +
                                                std::to_string(diags.size()) + " diagnostics)"};
      if (describe) {
        LlmSetup llm(o);
        model = build_descriptions(model, llm.client(), o.temperature);
        llm.save();
      }
      for (const auto& t : model.tables) {
        const auto roles = classify_table(model, t.name).names();
        std::string joined;
        for (const auto& r : roles) joined += (joined.empty() ? "" : ",") + r;
        out << t.name << ": " << joined << "\n";
      }
      out << model.tables.size() << " tables, " << model.constraints.size() << " constraints, " << model.m2m.size()
          << " m2m, " << model.patterns.size() << " patterns\n";
      if (!dbm_out.empty()) {
        const auto docs = to_documents(model);
        const std::filesystem::path dir = dbm_out;
        write_file(dir / "tables.json", docs.tables + "\n");
        write_file(dir / "relationships.json", docs.relationships + "\n");
        write_file(dir / "patterns.json", docs.patterns + "\n");
        for (const auto& [name, text] : docs.files) write_file(dir / name, text);
      }
      return 0;
    }

    if (solve->parsed()) {
      DatabaseModel model = load(o);
      SchemaGraph graph = build_graph(model);
      const auto targets = split_list(tables);
      if (targets.empty()) throw CliFailure{"solve", "usage", "--tables is empty"};
      try {
        if (decompose) {
          const auto plan = decompose_solve(relevance_from_list(targets, model), model, o.max_len);
          out << format_plan(plan);
        } else {
          for (const auto& t : targets)
            if (!graph.has_node(t)) throw CliFailure{"solve", "unknown_table", "unknown table '" + t + "'"};
          const auto problem = formulate_csp(targets, graph, model, o.max_len);
          SolveStats stats;
          const auto w = solve_path(problem, &stats);
          print_walk_report(w, problem, stats, out);
        }
      } catch (const Infeasible& e) {
        throw CliFailure{"solve", "infeasible", e.what()};
      }
      return 0;
    }

    if (view->parsed()) {
      DatabaseModel model = load(o);
      RelevanceSet relta;
      if (!relta_file.empty()) {
        relta = relevance_from_json(read_text_file(relta_file));
        relta.normalize(model);
      } else if (!view_tables.empty()) {
        relta = relevance_from_list(split_list(view_tables), model);
      } else {
        throw CliFailure{"cli", "usage", "view needs --tables or --relta"};
      }
      try {
        const auto plan = decompose_solve(relta, model, o.max_len);
        const auto vp = plan_view(plan, relta, model);
        out << emit_view_sql(vp, o.view_name, parse_dialect(o.dialect)).sql_text;
      } catch (const Infeasible& e) {
        throw CliFailure{"solve", "infeasible", e.what()};
      }
      return 0;
    }

    if (ask->parsed()) {
      DatabaseModel model = load(o);
      LlmSetup llm(o);
      Question q{question, evidence.empty() ? std::nullopt : std::optional<std::string>(evidence)};
      try {
        const auto r = answer_question(q, model, llm.client(), pipeline_config(o));
        llm.save();
        out << r.view->sql_text << "\n" << r.query->sql_text << "\n";
      } catch (const PipelineError& e) {
        llm.save();
        throw pipeline_failure(e);
      }
      return 0;
    }

    if (eval->parsed()) {
      DatabaseModel model = load(o);
      std::vector<DatasetItem> items;
      std::string seed_sql;
      if (uses_default_model(o)) {
        const auto fx = load_cdd();
        items = fx.questions;
        seed_sql = fx.seed_sql;
      }
      if (!dataset.empty()) items = read_dataset_jsonl(read_text_file(dataset));
      if (!seed.empty()) seed_sql = read_text_file(seed);
      if (items.empty()) throw CliFailure{"cli", "usage", "eval needs --dataset"};
      if (db.empty() && seed_sql.empty()) throw CliFailure{"cli", "usage", "eval needs --db or --seed"};

      ExecutorFactory factory;
      if (!db.empty())
        factory = [db] { return std::unique_ptr<Executor>(new SqliteExecutor(db, true)); };
      else
        factory = [&model, seed_sql] { return std::unique_ptr<Executor>(make_seeded_engine(model, seed_sql)); };

      LlmSetup llm(o);
      BenchmarkSettings bs;
      bs.pipeline = pipeline_config(o);
      bs.threshold = threshold;
      bs.jobs = o.jobs;
      const auto report = run_benchmark(items, model, llm.client(), factory, bs);
      llm.save();
      out << report.to_table();
      if (!report_file.empty()) write_file(report_file, report.to_json() + "\n");
      return 0;
    }

    if (explain->parsed()) {
      DatabaseModel model = load(o);
      SchemaGraph graph = build_graph(model);
      if (explain_q.empty()) {
        out << graph.to_dot();
        return 0;
      }
      LlmSetup llm(o);
      auto print = [&](const PipelineResult& r) {
        out << "== relta.json ==\n" << relevance_to_json(r.relevance) << "\n";
        if (r.plan) out << "== walk.txt ==\n" << format_plan(*r.plan);
        if (r.view) out << "== view.sql ==\n" << r.view->sql_text;
        if (r.query) out << "== final.sql ==\n" << r.query->sql_text << "\n";
        out << "== phase_log.txt ==\n";
        for (const auto& e : r.phase_log) out << "[" << e.phase << "] " << e.message << "\n";
        const auto dot = graph.to_dot(walk_tables(r));
        out << "== graph.dot ==\n" << dot;
        if (!o.run_dir.empty()) write_file(std::filesystem::path(o.run_dir) / "graph.dot", dot);
      };
      Question q{explain_q, std::nullopt};
      try {
        print(answer_question(q, model, llm.client(), pipeline_config(o)));
        llm.save();
      } catch (const PipelineError& e) {
        llm.save();
        print(e.partial());
        throw pipeline_failure(e);
      }
      return 0;
    }
  } catch (const CliFailure& f) {
    err << "error: phase=" << f.phase << " kind=" << f.kind << " msg=" << one_line(f.message) << "\n";
    return f.kind == "usage" ? 2 : 1;
  } catch (const LlmError& e) {
    err << "error: phase=llm kind=llm_" << e.kind() << " msg=" << one_line(e.what()) << "\n";
    return 1;
  } catch (const DbmError& e) {
    err << "error: phase=model kind=dbm msg=" << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: phase=cli kind=error msg=" << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace pathsql
