#include "forge/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "forge/error.hpp"

namespace forge {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::IoFailure, path.string());
}

std::vector<Json> read_json_lines(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<Json> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') {
      throw LineError(ErrorCode::MalformedLine, line_no, "CRLF line ending");
    }
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw LineError(ErrorCode::MalformedLine, line_no, e.what());
    }
    if (!obj.is_object()) throw LineError(ErrorCode::MalformedLine, line_no, "not an object");
    out.push_back(std::move(obj));
    pos = end + 1;
  }
  return out;
}

void write_json_lines(const std::filesystem::path& path, const std::vector<Json>& lines) {
  std::string text;
  for (const auto& obj : lines) {
    text += obj.dump();
    text += '\n';
  }
  write_text_file(path, text);
}

FieldReader::FieldReader(const Json& obj, std::size_t line_no) : obj_(obj), line_no_(line_no) {}

void FieldReader::fail(std::string_view field, std::string_view why) const {
  const std::string detail = std::string(field) + ": " + std::string(why);
  if (line_no_ == 0) throw Error(ErrorCode::SchemaViolation, detail);
  throw LineError(ErrorCode::SchemaViolation, line_no_, detail);
}

void FieldReader::only(std::initializer_list<std::string_view> allowed) const {
  for (const auto& item : obj_.items()) {
    bool known = false;
    for (auto name : allowed) known = known || item.key() == name;
    if (!known) fail(item.key(), "unknown field");
  }
}

const Json& FieldReader::raw(std::string_view field) const {
  auto it = obj_.find(std::string(field));
  if (it == obj_.end()) fail(field, "missing");
  return *it;
}

std::string FieldReader::string(std::string_view field) const {
  const Json& v = raw(field);
  if (!v.is_string()) fail(field, "expected string");
  return v.get<std::string>();
}

std::optional<std::string> FieldReader::optional_string(std::string_view field) const {
  auto it = obj_.find(std::string(field));
  if (it == obj_.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(field, "expected string");
  return it->get<std::string>();
}

double FieldReader::number(std::string_view field) const {
  const Json& v = raw(field);
  if (!v.is_number()) fail(field, "expected number");
  return v.get<double>();
}

std::int64_t FieldReader::integer(std::string_view field) const {
  const Json& v = raw(field);
  if (!v.is_number_integer()) fail(field, "expected integer");
  return v.get<std::int64_t>();
}

std::vector<std::string> FieldReader::string_list(std::string_view field) const {
  const Json& v = raw(field);
  if (!v.is_array()) fail(field, "expected array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) fail(field, "expected array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> FieldReader::number_list(std::string_view field) const {
  const Json& v = raw(field);
  if (!v.is_array()) fail(field, "expected array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) fail(field, "expected array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace forge
