#pragma once

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace forge {

using Json = nlohmann::ordered_json;

/// Parses every non-final line of a JSONL file into an object. A trailing LF
/// is expected but not required; blank lines are malformed.
std::vector<Json> read_json_lines(const std::filesystem::path& path);

/// Writes one compact object per line, LF-terminated, UTF-8.
void write_json_lines(const std::filesystem::path& path, const std::vector<Json>& lines);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// Field access with line-aware diagnostics. `line_no` 0 means "not from a
/// file" and is omitted from messages.
class FieldReader {
 public:
  FieldReader(const Json& obj, std::size_t line_no);

  /// Fails with SchemaViolation if the object carries any field not listed.
  void only(std::initializer_list<std::string_view> allowed) const;

  std::string string(std::string_view field) const;
  std::optional<std::string> optional_string(std::string_view field) const;
  double number(std::string_view field) const;
  std::int64_t integer(std::string_view field) const;
  std::vector<std::string> string_list(std::string_view field) const;
  std::vector<double> number_list(std::string_view field) const;
  const Json& raw(std::string_view field) const;

  [[noreturn]] void fail(std::string_view field, std::string_view why) const;

 private:
  const Json& obj_;
  std::size_t line_no_;
};

}  // namespace forge
