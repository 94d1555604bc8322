#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/jsonl.hpp"
#include "forge/position.hpp"

namespace forge {

enum class ChatTask { QA, Cloze, Ranking, BillComprehension, BillVote, PositioningAnswer };

std::string_view to_string(ChatTask t) noexcept;
std::optional<ChatTask> parse_chat_task(std::string_view text) noexcept;

/// A five-way position for stage two, or a three-way leaning for stage one.
using StageTag = std::variant<Position, Leaning>;

std::string tag_string(const StageTag& tag);
std::optional<StageTag> parse_stage_tag(std::string_view text) noexcept;

/// The system message shared by every task.
extern const std::string_view kSystemMessage;

struct ChatRecord {
  std::string system;
  std::string user;
  std::string assistant;  // empty for inference records
  ChatTask task = ChatTask::QA;
  StageTag tag = Position::C;

  bool is_inference() const { return assistant.empty(); }

  /// "<|system|>\n...\n<|user|>\n...\n<|assistant|>\n..." with a trailing LF.
  std::string render() const;

  bool operator==(const ChatRecord&) const = default;
};

/// Extra instruction appended to the system message, for explicit-ideology
/// runs. Empty leaves the fixed message untouched.
struct PromptOptions {
  std::string explicit_ideology;
};

ChatRecord build_qa_record(std::string_view question, std::string_view answer, Position position,
                           const PromptOptions& opts = {});

// Cloze construction.

enum class WordClass { Other, Verb, Adverb, Modal };

class Tagger {
 public:
  virtual ~Tagger() = default;
  /// `word` is a single token stripped of surrounding punctuation, original case.
  virtual WordClass classify(std::string_view word) const = 0;
};

/// Word lists plus suffix rules: -ly adverbs, -ize/-ify/-ed verbs, and
/// -s/-es inflections of listed verbs.
class LexiconTagger final : public Tagger {
 public:
  WordClass classify(std::string_view word) const override;
};

const Tagger& default_tagger();

struct Cloze {
  std::string cloze;     // sentence with each span replaced by "____"
  std::string sentence;  // the original
  std::vector<std::string> blanks;
};

inline constexpr std::string_view kBlank = "____";

/// Blanks each verb/adverb span that starts within two tokens after "we",
/// "our" or "I". A span opened by an adverb or modal runs through the
/// following verb/adverb tokens; a main verb is blanked alone. Returns none
/// when nothing matches or the sentence already contains a blank.
std::optional<Cloze> cloze_from_sentence(std::string_view sentence, const Tagger* tagger = &default_tagger());

/// Substitutes `blanks` into the "____" slots in order.
std::string fill_cloze(std::string_view cloze, std::span<const std::string> blanks);

/// Drops control characters, bullets and markup symbols, straightens quotes
/// and collapses whitespace.
std::string clean_sentence(std::string_view raw);

ChatRecord build_cloze_record(const Cloze& cloze, Leaning leaning, const PromptOptions& opts = {});

/// Prompt for generating center-leaning sentences externally, per policy.
std::string center_cloze_prompt(std::string_view policy);
extern const std::array<std::string_view, 25> kPolicyList;

/// `ranked` is the position's preferred order, best first. The user message
/// lists the statements in a seeded shuffle.
ChatRecord build_ranking_record(std::string_view topic, std::span<const std::string> ranked,
                                Position position, std::uint64_t seed, const PromptOptions& opts = {});

enum class BillMode { Comprehension, Vote };

/// D sponsors tag Left, R sponsors Right, anything else Center.
Leaning leaning_for_party(std::string_view party);

ChatRecord build_bill_record(const Bill& bill, BillMode mode, const PromptOptions& opts = {});

/// Reads COSPONSOR or DECLINE out of a model answer.
VoteDecision parse_vote_answer(std::string_view answer);

/// Positioning-test question; choices are numbered from 1.
ChatRecord build_positioning_record(std::string_view question, std::span<const std::string> choices,
                                    Position position, const PromptOptions& opts = {});

/// {"task","tag","system","user","assistant","text"} plus a sampling block
/// with temperature 0 on inference records.
Json to_json(const ChatRecord& r);
/// Rejects records whose "text" differs from the render of their fields.
ChatRecord chat_record_from_json(const Json& obj, std::size_t line_no = 0);
std::vector<ChatRecord> load_chat_records(const std::filesystem::path& path);

// Two-stage fine-tuning plan.

struct DatasetRef {
  ChatTask task = ChatTask::QA;
  std::string path;
  std::vector<std::string> tags;  // records whose tag is listed
  bool operator==(const DatasetRef&) const = default;
};

struct StageTwoEntry {
  Leaning parent = Leaning::Center;
  std::vector<DatasetRef> datasets;
  bool operator==(const StageTwoEntry&) const = default;
};

struct TuningConfig {
  int rank = 16;
  int alpha = 16;
  double learning_rate = 2e-4;
  std::string schedule = "cosine";
  int epochs = 2;
  std::string quantization = "4-bit";
  bool operator==(const TuningConfig&) const = default;
};

struct StagePlan {
  std::map<Leaning, std::vector<DatasetRef>> stage1;
  std::map<Position, StageTwoEntry> stage2;
  TuningConfig tuning;
  bool operator==(const StagePlan&) const = default;
};

/// Needs QA, Cloze, BillComprehension and Ranking datasets. Writes
/// `out_dir/plan.json` and returns the plan.
StagePlan emit_stage_plan(const std::map<ChatTask, std::string>& datasets,
                          const std::filesystem::path& out_dir);

Json to_json(const StagePlan& plan);

}  // namespace forge
