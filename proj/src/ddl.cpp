#include "pathsql/ddl.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <sstream>

#include "pathsql/error.hpp"

namespace pathsql {

namespace {

enum class Tok { ident, string, number, symbol, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t offset = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_trivia();
    Token t;
    t.offset = pos_;
    t.line = line_;
    t.column = column_;
    if (pos_ >= text_.size()) return t;
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Tok::ident;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '$'))
        t.text += advance();
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Tok::number;
      while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
        t.text += advance();
    } else if (c == '\'' ) {
      t.kind = Tok::string;
      advance();
      for (;;) {
        if (pos_ >= text_.size()) throw DdlError("unterminated string literal", t.line, t.column);
        char ch = advance();
        if (ch == '\'') {
          if (pos_ < text_.size() && text_[pos_] == '\'') {
            t.text += advance();
            continue;
          }
          break;
        }
        t.text += ch;
      }
    } else if (c == '`' || c == '"' || c == '[') {
      const char close = c == '[' ? ']' : c;
      t.kind = Tok::ident;
      advance();
      while (pos_ < text_.size() && text_[pos_] != close) t.text += advance();
      if (pos_ >= text_.size()) throw DdlError("unterminated quoted identifier", t.line, t.column);
      advance();
    } else {
      t.kind = Tok::symbol;
      t.text = std::string(1, advance());
    }
    return t;
  }

  std::string_view remaining_line() const {
    const auto nl = text_.find('\n', pos_);
    return text_.substr(pos_, (nl == std::string_view::npos ? text_.size() : nl) - pos_);
  }

  void skip(std::size_t n) {
    while (n-- > 0 && pos_ < text_.size()) advance();
  }

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
        const auto line = line_, col = column_;
        advance();
        advance();
        while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= text_.size()) throw DdlError("unterminated comment", line, col);
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { shift(); }

  DatabaseModel parse() {
    DatabaseModel model;
    std::set<std::string> names;
    std::vector<std::pair<FkConstraint, Token>> pending_fks;
    while (cur_.kind != Tok::end) {
      if (is_symbol(";")) {
        shift();
        continue;
      }
      const Token start = cur_;
      if (!is_keyword("CREATE")) fail("unsupported statement '" + cur_.text + "'; only CREATE TABLE is accepted");
      shift();
      if (!is_keyword("TABLE")) fail("unsupported statement 'CREATE " + cur_.text + "'; only CREATE TABLE is accepted");
      shift();
      if (is_keyword("IF")) {
        shift();
        expect_keyword("NOT");
        expect_keyword("EXISTS");
      }
      TableDef table;
      table.name = expect_ident("table name");
      if (!names.insert(table.name).second)
        throw DdlError("duplicate table '" + table.name + "'", start.line, start.column);
      expect_symbol("(");
      std::vector<std::pair<FkConstraint, Token>> fks;
      parse_body(table, fks);
      parse_table_options(table);
      for (auto& [fk, tok] : fks) pending_fks.emplace_back(std::move(fk), tok);
      model.tables.push_back(std::move(table));
    }
    for (auto& [fk, tok] : pending_fks) {
      const auto* from = model.find_table(fk.from_table);
      fk.kind = infer_fk_kind(*from, fk.fk_columns);
      model.constraints.push_back(std::move(fk));
    }
    return model;
  }

 private:
  void parse_body(TableDef& table, std::vector<std::pair<FkConstraint, Token>>& fks) {
    for (;;) {
      if (is_keyword("CONSTRAINT")) {
        shift();
        expect_ident("constraint name");
      }
      if (is_keyword("PRIMARY")) {
        shift();
        expect_keyword("KEY");
        if (!table.primary_key.empty()) fail("table '" + table.name + "' declares two primary keys");
        table.primary_key = column_list();
      } else if (is_keyword("FOREIGN")) {
        const Token at = cur_;
        shift();
        expect_keyword("KEY");
        FkConstraint fk;
        fk.from_table = table.name;
        fk.fk_columns = column_list();
        expect_keyword("REFERENCES");
        fk.to_table = expect_ident("referenced table");
        fk.pk_columns = column_list();
        if (fk.fk_columns.size() != fk.pk_columns.size())
          throw DdlError("foreign key column count does not match referenced columns", at.line, at.column);
        skip_referential_actions();
        fks.emplace_back(std::move(fk), at);
      } else if (is_keyword("UNIQUE") || is_keyword("INDEX") || is_keyword("KEY") || is_keyword("CHECK")) {
        fail("unsupported table element '" + cur_.text + "'");
      } else {
        parse_column(table);
      }
      if (is_symbol(",")) {
        shift();
        continue;
      }
      if (is_symbol(")")) {
        shift();
        return;
      }
      fail("expected ',' or ')' in table '" + table.name + "'");
    }
  }

  void parse_column(TableDef& table) {
    AttributeDef attr;
    attr.name = expect_ident("column name");
    if (table.has_attribute(attr.name)) fail("duplicate column '" + attr.name + "' in table '" + table.name + "'");
    attr.sql_type = expect_ident("column type");
    if (is_symbol("(")) {
      attr.sql_type += "(";
      shift();
      bool first = true;
      while (!is_symbol(")")) {
        if (cur_.kind == Tok::end) fail("unterminated type arguments");
        if (!first && is_symbol(",")) {
          attr.sql_type += ",";
          shift();
          continue;
        }
        attr.sql_type += cur_.text;
        first = false;
        shift();
      }
      attr.sql_type += ")";
      shift();
    }
    while (cur_.kind == Tok::ident && is_keyword("UNSIGNED")) {
      attr.sql_type += " unsigned";
      shift();
    }
    std::vector<std::string> modifiers;
    bool inline_pk = false;
    for (;;) {
      if (is_keyword("NOT")) {
        shift();
        expect_keyword("NULL");
        modifiers.emplace_back("NOT NULL");
      } else if (is_keyword("NULL")) {
        shift();
        modifiers.emplace_back("NULL");
      } else if (is_keyword("DEFAULT")) {
        shift();
        if (cur_.kind == Tok::end || is_symbol(",") || is_symbol(")")) fail("DEFAULT without a value");
        std::string value = cur_.kind == Tok::string ? "'" + cur_.text + "'" : cur_.text;
        if (cur_.kind == Tok::ident) value = upper(value);
        modifiers.push_back("DEFAULT " + value);
        shift();
      } else if (is_keyword("PRIMARY")) {
        shift();
        expect_keyword("KEY");
        inline_pk = true;
      } else if (is_keyword("COMMENT")) {
        attr.description = parse_comment();
        break;
      } else {
        break;
      }
    }
    if (inline_pk) {
      if (!table.primary_key.empty()) fail("table '" + table.name + "' declares two primary keys");
      table.primary_key = {attr.name};
    }
    std::string joined;
    for (const auto& m : modifiers) joined += (joined.empty() ? "" : " ") + m;
    attr.nullability_default = joined;
    table.attributes.push_back(std::move(attr));
  }

  // Cursor sits on the COMMENT keyword; the lexer is positioned right after it.
  std::string parse_comment() {
    const Token kw = cur_;
    const std::string_view line = lex_.remaining_line();
    std::size_t i = 0;
    auto skip_blank = [&] {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    };
    skip_blank();
    if (i < line.size() && line[i] == '=') {
      ++i;
      skip_blank();
    }
    if (i < line.size() && line[i] == '\'') {
      std::string value;
      bool closed = false;
      for (++i; i < line.size(); ++i) {
        if (line[i] == '\'') {
          if (i + 1 < line.size() && line[i + 1] == '\'') {
            value += '\'';
            ++i;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        value += line[i];
      }
      if (!closed)
        throw DdlError("unterminated COMMENT string (quoted comments must fit on one line)", kw.line, kw.column);
      lex_.skip(i);
      shift();
      return value;
    }
    // Unquoted: the comment runs to the end of the line; a trailing comma is
    // the element separator and an unbalanced trailing ')' closes the table.
    std::size_t end = line.size();
    while (end > i && std::isspace(static_cast<unsigned char>(line[end - 1]))) --end;
    std::size_t stop = end;
    if (end > i && line[end - 1] == ',') {
      stop = end - 1;
    } else if (end > i && line[end - 1] == ')') {
      const auto body = line.substr(i, end - i);
      if (std::count(body.begin(), body.end(), ')') > std::count(body.begin(), body.end(), '(')) stop = end - 1;
    }
    std::string text = trim(std::string(line.substr(i, stop - i)));
    lex_.skip(stop);
    shift();
    return text;
  }

  void parse_table_options(TableDef& table) {
    while (cur_.kind == Tok::ident && !is_keyword("CREATE")) {
      if (is_keyword("COMMENT")) {
        table.description = parse_comment();
      } else {
        fail("unsupported table option '" + cur_.text + "'");
      }
    }
  }

  void skip_referential_actions() {
    while (is_keyword("ON")) {
      shift();
      if (!is_keyword("DELETE") && !is_keyword("UPDATE")) fail("expected DELETE or UPDATE after ON");
      shift();
      if (is_keyword("NO")) {
        shift();
        expect_keyword("ACTION");
      } else if (is_keyword("SET")) {
        shift();
        if (!is_keyword("NULL") && !is_keyword("DEFAULT")) fail("expected NULL or DEFAULT");
        shift();
      } else if (is_keyword("CASCADE") || is_keyword("RESTRICT")) {
        shift();
      } else {
        fail("unsupported referential action");
      }
    }
  }

  std::vector<std::string> column_list() {
    expect_symbol("(");
    std::vector<std::string> cols;
    for (;;) {
      cols.push_back(expect_ident("column name"));
      if (is_keyword("ASC") || is_keyword("DESC")) shift();
      if (is_symbol(",")) {
        shift();
        continue;
      }
      expect_symbol(")");
      return cols;
    }
  }

  void shift() { cur_ = lex_.next(); }

  bool is_symbol(const char* s) const { return cur_.kind == Tok::symbol && cur_.text == s; }
  bool is_keyword(const char* k) const { return cur_.kind == Tok::ident && upper(cur_.text) == k; }

  void expect_symbol(const char* s) {
    if (!is_symbol(s)) fail(std::string("expected '") + s + "'");
    shift();
  }
  void expect_keyword(const char* k) {
    if (!is_keyword(k)) fail(std::string("expected ") + k);
    shift();
  }
  std::string expect_ident(const char* what) {
    if (cur_.kind != Tok::ident) fail(std::string("expected ") + what);
    std::string s = cur_.text;
    shift();
    return s;
  }

  [[noreturn]] void fail(const std::string& message) const {
    const std::string found = cur_.kind == Tok::end ? "end of input" : "'" + cur_.text + "'";
    throw DdlError(message + " (found " + found + ")", cur_.line, cur_.column);
  }

  Lexer lex_;
  Token cur_;
};

std::string quote_comment(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "''";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out + "'";
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

FkKind infer_fk_kind(const TableDef& from, const std::vector<std::string>& fk_columns) {
  auto a = from.primary_key, b = fk_columns;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return (!a.empty() && a == b) ? FkKind::one_to_one : FkKind::many_to_one;
}

DatabaseModel parse_ddl(std::string_view ddl_text) {
  return Parser(ddl_text).parse();
}

std::string emit_ddl(const DatabaseModel& model, const DdlEmitOptions& options) {
  std::ostringstream out;
  for (const auto& t : model.tables) {
    out << "CREATE TABLE " << t.name << "\n(\n";
    std::vector<std::string> lines;
    for (const auto& a : t.attributes) {
      std::string line = "  " + a.name + " " + a.sql_type;
      if (!a.nullability_default.empty()) line += " " + a.nullability_default;
      if (options.comments && !a.description.empty()) line += " COMMENT " + quote_comment(a.description);
      lines.push_back(line);
    }
    if (!t.primary_key.empty()) lines.push_back("  PRIMARY KEY (" + join(t.primary_key) + ")");
    for (const auto& c : model.constraints)
      if (c.from_table == t.name)
        lines.push_back("  FOREIGN KEY (" + join(c.fk_columns) + ") REFERENCES " + c.to_table + "(" +
                        join(c.pk_columns) + ")");
    for (std::size_t i = 0; i < lines.size(); ++i) out << lines[i] << (i + 1 < lines.size() ? ",\n" : "\n");
    out << ")";
    if (options.comments && !t.description.empty()) out << " COMMENT " << quote_comment(t.description);
    out << ";\n\n";
  }
  return out.str();
}

}  // namespace pathsql
