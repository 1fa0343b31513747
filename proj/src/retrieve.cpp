#include "pathsql/retrieve.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <set>

#include "json.hpp"

namespace pathsql {

using ojson = nlohmann::ordered_json;

std::vector<std::string> RelevanceSet::relevant_tables() const {
  std::vector<std::string> out;
  for (const auto& [t, _] : entries) out.push_back(t);
  return out;
}

void RelevanceSet::add(const std::string& table, const std::vector<std::string>& attributes) {
  auto& attrs = entries[table];
  for (const auto& a : attributes)
    if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(a);
}

void RelevanceSet::normalize(const DatabaseModel& model) {
  for (auto& [table, attrs] : entries) {
    const auto& def = model.table(table);
    for (const auto& a : attrs)
      if (!def.has_attribute(a)) throw Error("unknown attribute '" + table + "." + a + "'");
    std::vector<std::string> ordered;
    for (const auto& a : def.attributes)
      if (std::find(attrs.begin(), attrs.end(), a.name) != attrs.end()) ordered.push_back(a.name);
    attrs = std::move(ordered);
  }
}

std::string relevance_to_json(const RelevanceSet& r) {
  ojson j = ojson::object();
  for (const auto& [t, attrs] : r.entries) j[t] = attrs;
  return j.dump(2) + "\n";
}

RelevanceSet relevance_from_json(const std::string& text) {
  const auto j = ojson::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error("relevance set: expected a JSON object of table -> [attributes]");
  RelevanceSet r;
  for (const auto& [t, attrs] : j.items()) r.add(t, attrs.get<std::vector<std::string>>());
  return r;
}

std::string render_prompt_a(const Question& q, const std::vector<std::pair<std::string, std::string>>& tables,
                            const std::vector<std::pair<std::string, std::string>>& attributes) {
  if (tables.empty() && attributes.empty()) throw Error("Prompt A needs tables or attributes");
  ojson schema = ojson::object();
  std::string elements;
  auto append = [&](const std::string& item) {
    if (!elements.empty()) elements += ", ";
    elements += item;
  };
  for (const auto& [name, summary] : tables) {
    schema[name] = summary;
    append("'" + name + "'");
  }
  for (const auto& [name, description] : attributes) {
    schema[name] = description;
    if (name != "DescriptionField") append(name);
  }
  return "Here is a json schema. Please treat json schema objects as a description of tables in a database " +
         schema.dump(5) + ".\nThe user has a query to answer " + q.text +
         ". What are all relevant json elements to a user query from the list [" + elements +
         "]?\nOutput is a list of elements, [element, element,  element,...]. Do not explain.";
}

std::string table_summary(const DatabaseModel& model, const std::string& table) {
  const auto& def = model.table(table);
  std::vector<std::string> props = def.attribute_names();

  const TreePattern* p = model.pattern_rooted_at(table);
  if (!p) p = model.pattern_containing_inner(table);
  if (p) {
    std::function<void(const std::string&, const std::string&)> walk = [&](const std::string& node,
                                                                            const std::string& prefix) {
      for (const auto& child : p->children_of(node)) {
        const auto path = prefix.empty() ? child : prefix + "." + child;
        props.push_back(path);
        if (const auto* c = model.find_table(child))
          for (const auto& a : c->attributes) props.push_back(path + "." + a.name);
        walk(child, path);
      }
    };
    walk(table, "");
  }

  std::string out = def.description;
  if (!out.empty()) out += " ";
  out += "Properties of " + table + ": ";
  for (std::size_t i = 0; i < props.size(); ++i) out += (i ? ", " : "") + props[i];
  out += ". ";
  return out;
}

std::vector<std::pair<std::string, std::string>> attribute_sheet(const DatabaseModel& model, const std::string& table) {
  const auto& def = model.table(table);
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("DescriptionField", def.description);
  for (const auto& a : def.attributes) out.emplace_back(a.name, a.description);
  return out;
}

SampleAggregate aggregate_samples(const std::vector<std::vector<std::string>>& samples, std::size_t cap) {
  SampleAggregate agg;
  agg.cap = cap;
  for (const auto& sample : samples) {
    std::set<std::string> seen(sample.begin(), sample.end());
    for (const auto& item : seen) ++agg.counts[item];
  }
  for (const auto& [item, _] : agg.counts) agg.ranked.push_back(item);
  std::stable_sort(agg.ranked.begin(), agg.ranked.end(), [&](const std::string& a, const std::string& b) {
    return agg.counts.at(a) > agg.counts.at(b);  // map order already gives name ascending
  });
  if (agg.ranked.size() > cap) agg.ranked.resize(cap);
  return agg;
}

namespace {

std::string trim_item(std::string s) {
  auto strip = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == '\'' || c == '"' || c == '`'; };
  while (!s.empty() && strip(s.front())) s.erase(s.begin());
  while (!s.empty() && strip(s.back())) s.pop_back();
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::vector<std::string> parse_element_list(const std::string& text) {
  std::string body = text;
  const auto open = text.find('[');
  if (open != std::string::npos) {
    const auto close = text.find(']', open);
    body = text.substr(open + 1, close == std::string::npos ? std::string::npos : close - open - 1);
  }
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto item = trim_item(cur);
    if (!item.empty()) out.push_back(std::move(item));
    cur.clear();
  };
  for (char c : body) {
    if (c == ',' || c == '\n') flush();
    else cur.push_back(c);
  }
  flush();
  return out;
}

namespace {

class Prompter {
 public:
  Prompter(const Question& q, LlmClient& llm, const RetrieveSettings& s, RetrieveLog* log)
      : q_(q), llm_(llm), s_(s), log_(log) {}

  // Returns the aggregated selection, restricted to `known` names.
  std::vector<std::string> ask(const std::string& what, const std::vector<std::pair<std::string, std::string>>& tables,
                               const std::vector<std::pair<std::string, std::string>>& attributes) {
    std::vector<std::string> known;
    for (const auto& [t, _] : tables) known.push_back(t);
    for (const auto& [a, _] : attributes)
      if (a != "DescriptionField") known.push_back(a);

    const auto prompt = render_prompt_a(q_, tables, attributes);
    std::vector<std::string> answers;
    try {
      answers = llm_.complete({prompt, s_.samples, s_.temperature});
    } catch (const LlmError& e) {
      throw e.with_context(what);
    }
    std::vector<std::vector<std::string>> samples;
    for (const auto& a : answers) {
      std::vector<std::string> items;
      for (const auto& raw : parse_element_list(a)) {
        if (auto m = match(raw, known)) items.push_back(*m);
        else note(what + ": dropped unknown element '" + raw + "'");
      }
      samples.push_back(std::move(items));
    }
    auto agg = aggregate_samples(samples, s_.cap);
    std::string line = what + ": selected [";
    for (std::size_t i = 0; i < agg.ranked.size(); ++i)
      line += (i ? ", " : "") + agg.ranked[i] + "(" + std::to_string(agg.counts[agg.ranked[i]]) + ")";
    note(line + "]");
    return agg.ranked;
  }

  void note(std::string line) {
    if (log_) log_->push_back(std::move(line));
  }

 private:
  static std::optional<std::string> match(const std::string& item, const std::vector<std::string>& known) {
    for (const auto& k : known)
      if (k == item) return k;
    std::optional<std::string> found;
    for (const auto& k : known) {
      if (lower(k) != lower(item)) continue;
      if (found) return std::nullopt;  // ambiguous
      found = k;
    }
    return found;
  }

  const Question& q_;
  LlmClient& llm_;
  const RetrieveSettings& s_;
  RetrieveLog* log_;
};

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

RelevanceSet dive(const Question& q, const std::string& root, LlmClient& llm, const DatabaseModel& model,
                  const RetrieveSettings& settings, RetrieveLog* log) {
  const auto* p = model.pattern_rooted_at(root);
  if (!p) throw Error("dive: '" + root + "' is not a pattern root");
  Prompter prompter(q, llm, settings, log);
  RelevanceSet relta;
  std::deque<std::string> queue{root};
  while (!queue.empty()) {
    const auto r = queue.front();
    queue.pop_front();
    if (p->is_leaf(r)) {
      relta.add(r, prompter.ask("dive " + r + " attributes", {}, attribute_sheet(model, r)));
      continue;
    }
    std::vector<std::pair<std::string, std::string>> kids;
    for (const auto& c : p->children_of(r))
      if (model.has_table(c)) kids.emplace_back(c, table_summary(model, c));
    const auto selected = prompter.ask("dive " + r, kids, attribute_sheet(model, r));
    std::vector<std::string> attrs;
    for (const auto& s : selected)
      if (!contains(p->children_of(r), s)) attrs.push_back(s);
    if (r == root || !attrs.empty()) relta.add(r, attrs);
    for (const auto& c : p->children_of(r))
      if (contains(selected, c)) queue.push_back(c);
  }
  relta.normalize(model);
  return relta;
}

RelevanceSet retrieve_relevant(const Question& q, const DatabaseModel& model, LlmClient& llm,
                               const RetrieveSettings& settings, RetrieveLog* log) {
  Prompter prompter(q, llm, settings, log);
  std::vector<std::pair<std::string, std::string>> core;
  for (const auto& t : core_tables(model)) core.emplace_back(t, table_summary(model, t));
  if (core.empty()) throw RetrievalEmpty(q.text);

  RelevanceSet relta;
  for (const auto& t : prompter.ask("core tables", core, {})) {
    if (model.pattern_rooted_at(t)) {
      for (const auto& [table, attrs] : dive(q, t, llm, model, settings, log).entries) relta.add(table, attrs);
    } else {
      relta.add(t, prompter.ask(t + " attributes", {}, attribute_sheet(model, t)));
    }
  }
  if (relta.empty()) throw RetrievalEmpty(q.text);
  relta.normalize(model);
  return relta;
}

}  // namespace pathsql
