#include <fstream>

#include <gtest/gtest.h>

#include "forge/error.hpp"
#include "forge/jsonl.hpp"
#include "forge/position.hpp"
#include "support.hpp"

namespace forge {
namespace {

using testing::TempDir;

void write_raw(const std::filesystem::path& p, std::string_view bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TEST(ErrorCodes, ValidationVersusRuntime) {
  EXPECT_TRUE(is_validation_error(ErrorCode::MalformedLine));
  EXPECT_TRUE(is_validation_error(ErrorCode::MissingDependency));
  EXPECT_FALSE(is_validation_error(ErrorCode::IoFailure));
  EXPECT_FALSE(is_validation_error(ErrorCode::DigestMismatch));
  EXPECT_EQ(error_code_name(ErrorCode::CacheMiss), "CacheMiss");
}

TEST(ErrorCodes, LineErrorCarriesLine) {
  const LineError e(ErrorCode::SchemaViolation, 7, "x");
  EXPECT_EQ(e.line_no(), 7u);
  EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
  EXPECT_NE(std::string(e.what()).find('7'), std::string::npos);
}

TEST(Positions, OrdinalsAndDistance) {
  EXPECT_EQ(ordinal(Position::PL), 1);
  EXPECT_EQ(ordinal(Position::CR), 5);
  EXPECT_EQ(position_from_ordinal(3), Position::C);
  EXPECT_FALSE(position_from_ordinal(0));
  EXPECT_FALSE(position_from_ordinal(6));
  EXPECT_EQ(distance(Position::PL, Position::CR), 4);
  EXPECT_EQ(distance(Position::RW, Position::LW), 2);
}

TEST(Positions, LabelsRoundTrip) {
  for (Position p : kAllPositions) EXPECT_EQ(parse_position(to_string(p)), p);
  EXPECT_FALSE(parse_position("XX"));
  for (Leaning l : {Leaning::Left, Leaning::Center, Leaning::Right}) {
    EXPECT_EQ(parse_leaning(to_string(l)), l);
  }
  EXPECT_EQ(parent_leaning(Position::LW), Leaning::Left);
  EXPECT_EQ(parent_leaning(Position::C), Leaning::Center);
  EXPECT_EQ(parent_leaning(Position::CR), Leaning::Right);
}

TEST(JsonLines, RoundTrip) {
  TempDir dir;
  const std::vector<Json> lines = {{{"a", 1}}, {{"b", "two"}, {"c", {1, 2}}}};
  write_json_lines(dir / "x.jsonl", lines);
  EXPECT_EQ(read_text_file(dir / "x.jsonl"), "{\"a\":1}\n{\"b\":\"two\",\"c\":[1,2]}\n");
  EXPECT_EQ(read_json_lines(dir / "x.jsonl"), lines);
}

TEST(JsonLines, MissingTrailingNewlineAccepted) {
  TempDir dir;
  write_raw(dir / "x.jsonl", "{\"a\":1}\n{\"a\":2}");
  EXPECT_EQ(read_json_lines(dir / "x.jsonl").size(), 2u);
}

TEST(JsonLines, RejectsCrlfBlankAndNonObjects) {
  TempDir dir;
  const std::vector<std::pair<std::string, std::size_t>> cases = {
      {"{\"a\":1}\r\n", 1}, {"{\"a\":1}\n\n{\"a\":2}\n", 2}, {"{\"a\":1}\n[1,2]\n", 2},
      {"{\"a\":\n", 1}};
  for (const auto& [bytes, line] : cases) {
    write_raw(dir / "x.jsonl", bytes);
    try {
      read_json_lines(dir / "x.jsonl");
      ADD_FAILURE() << "accepted: " << bytes;
    } catch (const LineError& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedLine);
      EXPECT_EQ(e.line_no(), line);
    }
  }
}

TEST(JsonLines, MissingFileIsIoFailure) {
  TempDir dir;
  EXPECT_FORGE_ERROR(read_json_lines(dir / "absent.jsonl"), ErrorCode::IoFailure);
}

TEST(FieldReader, TypedAccess) {
  const Json obj = {{"s", "x"}, {"n", 1.5}, {"i", 3}, {"l", {"a", "b"}}, {"v", {1, 2.5}}};
  const FieldReader r(obj, 4);
  EXPECT_EQ(r.string("s"), "x");
  EXPECT_DOUBLE_EQ(r.number("n"), 1.5);
  EXPECT_EQ(r.integer("i"), 3);
  EXPECT_EQ(r.string_list("l"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(r.number_list("v"), (std::vector<double>{1.0, 2.5}));
  EXPECT_FALSE(r.optional_string("absent"));
}

TEST(FieldReader, FailuresAreSchemaViolations) {
  const Json obj = {{"s", "x"}, {"n", 1.5}};
  const FieldReader r(obj, 9);
  EXPECT_FORGE_ERROR(r.string("n"), ErrorCode::SchemaViolation);
  EXPECT_FORGE_ERROR(r.integer("n"), ErrorCode::SchemaViolation);
  EXPECT_FORGE_ERROR(r.number("missing"), ErrorCode::SchemaViolation);
  EXPECT_FORGE_ERROR(r.only({"s"}), ErrorCode::SchemaViolation);
  try {
    r.string("missing");
  } catch (const LineError& e) {
    EXPECT_EQ(e.line_no(), 9u);
  }
  EXPECT_NO_THROW(r.only({"s", "n"}));
}

}  // namespace
}  // namespace forge
