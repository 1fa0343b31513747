#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pathsql {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DdlError : public Error {
 public:
  DdlError(const std::string& message, std::size_t line, std::size_t column)
      : Error("ddl:" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class DbmError : public Error {
 public:
  using Error::Error;
};

class UnknownTable : public Error {
 public:
  explicit UnknownTable(const std::string& table) : Error("unknown table '" + table + "'"), table_(table) {}
  const std::string& table() const { return table_; }

 private:
  std::string table_;
};

class SqlParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathsql
