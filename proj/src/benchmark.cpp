#include "pathsql/benchmark.hpp"

#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pathsql/eval.hpp"

namespace pathsql {

using ojson = nlohmann::ordered_json;

std::vector<DatasetItem> read_dataset_jsonl(const std::string& text) {
  std::vector<DatasetItem> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = ojson::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error("dataset line " + std::to_string(lineno) + ": invalid JSON");
    if (!j.contains("question") || !j.contains("gt_sql"))
      throw Error("dataset line " + std::to_string(lineno) + ": needs \"question\" and \"gt_sql\"");
    DatasetItem item;
    item.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                               : "q" + std::to_string(out.size() + 1);
    item.question.text = j["question"].get<std::string>();
    if (j.contains("evidence") && j["evidence"].is_string() && !j["evidence"].get<std::string>().empty())
      item.question.evidence = j["evidence"].get<std::string>();
    item.gt_sql = j["gt_sql"].get<std::string>();
    out.push_back(std::move(item));
  }
  return out;
}

namespace {

QuestionRecord evaluate(const DatasetItem& item, const DatabaseModel& model, LlmClient& llm, Executor& exec,
                        const BenchmarkSettings& settings) {
  QuestionRecord rec;
  rec.id = item.id;
  rec.question = item.question.text;
  auto fail = [&](std::string phase, std::string msg) {
    rec.errored = true;
    rec.error_phase = std::move(phase);
    rec.error = std::move(msg);
    return rec;
  };

  ResultSet truth;
  try {
    truth = exec.query(item.gt_sql);
  } catch (const std::exception& e) {
    return fail("ground-truth", e.what());
  }

  PipelineConfig cfg = settings.pipeline;
  if (cfg.run_dir) cfg.run_dir = *cfg.run_dir / item.id;
  PipelineResult result;
  try {
    result = answer_question(item.question, model, llm, cfg);
  } catch (const PipelineError& e) {
    if (e.partial().view) rec.view_sql = e.partial().view->sql_text;
    return fail(e.phase(), e.what());
  } catch (const std::exception& e) {
    return fail("pipeline", e.what());
  }
  rec.view_sql = result.view->sql_text;
  rec.final_sql = result.query->sql_text;

  try {
    const auto c = coverage(sql_footprint(rec.view_sql, &model), sql_footprint(item.gt_sql, &model));
    rec.cover_t = c.cover_t;
    rec.cover_a = c.cover_a;
  } catch (const std::exception&) {
    // coverage stays unset; execution metrics are still meaningful
  }

  try {
    exec.install_view(result.view->view_name, rec.view_sql);
  } catch (const std::exception& e) {
    return fail("execute", e.what());
  }
  rec.samples = static_cast<int>(result.query->samples.size());
  for (const auto& s : result.query->samples) {
    if (!s) continue;
    try {
      const auto got = exec.query(*s);
      rec.ex_votes += execution_match(got, truth) ? 1 : 0;
      rec.esx_votes += subset_match(got, truth) ? 1 : 0;
    } catch (const std::exception&) {
      // a sample that does not run counts as a miss
    }
  }
  rec.ex = rec.ex_votes > settings.threshold;
  rec.esx = rec.esx_votes > settings.threshold;
  return rec;
}

std::string fixed3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

}  // namespace

BenchmarkReport summarize(std::vector<QuestionRecord> records) {
  BenchmarkReport r;
  r.records = std::move(records);
  r.total = static_cast<int>(r.records.size());
  int covered = 0;
  double st = 0, sa = 0;
  for (const auto& q : r.records) {
    if (q.errored) {
      ++r.errored;
      continue;
    }
    r.ex_solved += q.ex;
    r.esx_solved += q.esx;
    if (q.cover_t && q.cover_a) {
      ++covered;
      st += *q.cover_t;
      sa += *q.cover_a;
    }
  }
  if (covered) {
    r.mean_cover_t = st / covered;
    r.mean_cover_a = sa / covered;
  }
  return r;
}

BenchmarkReport run_benchmark(const std::vector<DatasetItem>& dataset, const DatabaseModel& model, LlmClient& llm,
                              const ExecutorFactory& executors, const BenchmarkSettings& settings) {
  std::vector<QuestionRecord> records(dataset.size());
  const int jobs = std::max(1, std::min<int>(settings.jobs, static_cast<int>(dataset.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::unique_ptr<Executor> exec;
    for (std::size_t i; (i = next++) < dataset.size();) {
      if (!exec) {
        try {
          exec = executors();
        } catch (const std::exception& e) {
          records[i].id = dataset[i].id;
          records[i].question = dataset[i].question.text;
          records[i].errored = true;
          records[i].error_phase = "execute";
          records[i].error = e.what();
          continue;
        }
      }
      records[i] = evaluate(dataset[i], model, llm, *exec, settings);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return summarize(std::move(records));
}

std::string BenchmarkReport::to_json() const {
  ojson j;
  j["total"] = total;
  j["ex_solved"] = ex_solved;
  j["ex_unsolved"] = ex_unsolved();
  j["esx_solved"] = esx_solved;
  j["errored"] = errored;
  j["cover_t"] = mean_cover_t;
  j["cover_a"] = mean_cover_a;
  j["records"] = ojson::array();
  for (const auto& q : records) {
    ojson r;
    r["id"] = q.id;
    r["question"] = q.question;
    r["status"] = q.errored ? "error" : (q.ex ? "solved" : "unsolved");
    if (q.errored) {
      r["error_phase"] = q.error_phase;
      r["error"] = q.error;
    }
    r["cover_t"] = q.cover_t ? ojson(*q.cover_t) : ojson(nullptr);
    r["cover_a"] = q.cover_a ? ojson(*q.cover_a) : ojson(nullptr);
    r["ex"] = q.ex;
    r["esx"] = q.esx;
    r["ex_votes"] = q.ex_votes;
    r["esx_votes"] = q.esx_votes;
    r["samples"] = q.samples;
    r["final_sql"] = q.final_sql;
    j["records"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

std::string BenchmarkReport::to_table() const {
  std::ostringstream os;
  auto row = [&](const std::string& k, const std::string& v) {
    os << k;
    for (std::size_t i = k.size(); i < 10; ++i) os << ' ';
    os << v << "\n";
  };
  auto ratio = [&](int n) { return std::to_string(n) + "/" + std::to_string(total); };
  row("metric", "value");
  row("cover_t", fixed3(mean_cover_t));
  row("cover_a", fixed3(mean_cover_a));
  row("EX", ratio(ex_solved));
  row("ESX", ratio(esx_solved));
  row("errored", std::to_string(errored));
  if (!records.empty()) {
    os << "\n";
    os << "id        status    ex_votes  esx_votes  cover_t  cover_a\n";
    for (const auto& q : records) {
      char buf[160];
      const std::string status = q.errored ? "error" : (q.ex ? "solved" : "unsolved");
      std::snprintf(buf, sizeof buf, "%-9s %-9s %8d  %9d  %7s  %7s\n", q.id.c_str(), status.c_str(), q.ex_votes,
                    q.esx_votes, q.cover_t ? fixed3(*q.cover_t).c_str() : "-",
                    q.cover_a ? fixed3(*q.cover_a).c_str() : "-");
      os << buf;
    }
  }
  return os.str();
}

}  // namespace pathsql
