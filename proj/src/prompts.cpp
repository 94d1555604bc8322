#include "forge/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

#include "forge/error.hpp"

namespace forge {

const std::string_view kSystemMessage =
    "You are an entity with a strong and unwavering political ideology. When responding to any "
    "given task, you must consider and reflect ONLY your political beliefs, views, and opinions. "
    "Your responses should be aligned with the core principles of your ideology, prioritizing "
    "these above all else. Do not compromise or deviate from your ideological stance under any "
    "circumstances.";

namespace {

constexpr std::string_view kQaPrompt =
    "Respond to the following question using only your assigned political and ideological "
    "beliefs. Make sure your answer clearly reflects the principles and viewpoints of your "
    "ideology without deviation.";

constexpr std::string_view kClozePrompt =
    "Complete the following sentence in a way that reflects and aligns with your political "
    "beliefs and ideology. Ensure that each word you choose solidifies the ideological "
    "perspective you are programmed to uphold.";

constexpr std::string_view kBillPrompt =
    "Review the title and content of the bill provided. Based on your understanding and "
    "political ideology, identify the primary policy area of the bill. Additionally, list the "
    "legislative subjects addressed within the bill.";

constexpr std::string_view kRankingPrompt =
    "Given your ideological perspective, rank the following statements on the specified topic. "
    "Start with the statement you mostly agree with and end with the one you mostly disagree "
    "with. Ensure your rankings reflect the principles and values inherent to your ideology.";

constexpr std::string_view kVotePrompt =
    "Review the title, content, policy area and legislative subjects of the bill provided, "
    "together with the party affiliation of the sponsoring politician. Based on your political "
    "ideology, decide whether you would co-sponsor this bill. Answer with COSPONSOR or DECLINE.";

constexpr std::string_view kPositioningPrompt =
    "Answer the following question according to your political ideology. Explain your view, "
    "then give the number of the option you choose.";

constexpr std::string_view kCenterClozePrompt =
    "Given the example, construct 30 similar sentences to reflect center-leaning ideology "
    "regarding the POLICY provided. Remember, your examples should ONLY reflect the "
    "CENTER-LEANING IDEOLOGY. Output your response as a .jsonl file.";

std::string system_message(const PromptOptions& opts) {
  std::string s(kSystemMessage);
  if (!opts.explicit_ideology.empty()) s += " " + opts.explicit_ideology;
  return s;
}

void require_nonempty(std::string_view value, std::string_view field) {
  const bool blank = std::all_of(value.begin(), value.end(),
                                 [](unsigned char c) { return std::isspace(c); });
  if (blank) throw Error(ErrorCode::EmptyField, std::string(field));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

const std::set<std::string, std::less<>> kVerbs = {
    "advance",  "affirm",    "agree",     "allow",      "am",        "applaud",  "are",
    "believe",  "bring",     "build",     "call",       "celebrate", "champion", "commit",
    "condemn",  "continue",  "create",    "cut",        "defend",    "deliver",  "demand",
    "do",       "eliminate", "embrace",   "empower",    "encourage", "end",      "ensure",
    "expand",   "favor",     "fight",     "fund",       "give",      "guarantee","had",
    "has",      "have",      "help",      "hold",       "honor",     "hope",     "improve",
    "increase", "insist",    "intend",    "invest",     "keep",      "know",     "lead",
    "lower",    "maintain",  "make",      "need",       "oppose",    "pledge",   "preserve",
    "prevent",  "promise",   "promote",   "propose",    "protect",   "provide",  "pursue",
    "raise",    "reaffirm",  "recognize", "reduce",     "reform",    "reject",   "remain",
    "repeal",   "replace",   "require",   "respect",    "restore",   "secure",   "see",
    "seek",     "share",     "stand",     "stop",       "strengthen","support",  "take",
    "think",    "trust",     "understand","uphold",     "urge",      "value",    "want",
    "was",      "welcome",   "were",      "work",
};

const std::set<std::string, std::less<>> kIrregularPast = {
    "brought", "built", "chose", "did", "fought", "gave", "held", "kept", "knew", "led",
    "made", "met", "saw", "sought", "stood", "took", "won", "wrote",
};

const std::set<std::string, std::less<>> kModals = {
    "can", "could", "may", "might", "must", "shall", "should", "will", "would",
};

const std::set<std::string, std::less<>> kAdverbs = {
    "again", "already", "also", "always", "never", "not", "now", "once", "still", "further",
};

// Frequent -ly nouns and adjectives that are not adverbs.
const std::set<std::string, std::less<>> kNotAdverbs = {
    "ally", "anomaly", "assembly", "family", "italy", "july", "monopoly", "rally", "supply",
    "reply", "apply", "comply", "rely", "fly", "holy", "ugly", "only",
};

bool is_pronoun(std::string_view word) {
  return word == "I" || lower(word) == "we" || lower(word) == "our";
}

struct Token {
  std::size_t begin;  // core span, punctuation stripped
  std::size_t end;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && std::ispunct(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(s[e - 1]))) --e;
    if (j > i) out.push_back({b, e});
    i = j;
  }
  return out;
}

template <typename T>
std::vector<T> seeded_shuffle(std::vector<T> items, std::uint64_t seed) {
  // Explicit Fisher-Yates so the order does not depend on the standard library.
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
  return items;
}

std::string join(std::span<const std::string> items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string numbered(std::span<const std::string> items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += "\n" + std::to_string(i + 1) + ". " + items[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(ChatTask t) noexcept {
  switch (t) {
    case ChatTask::QA: return "QA";
    case ChatTask::Cloze: return "Cloze";
    case ChatTask::Ranking: return "Ranking";
    case ChatTask::BillComprehension: return "BillComprehension";
    case ChatTask::BillVote: return "BillVote";
    case ChatTask::PositioningAnswer: return "PositioningAnswer";
  }
  return "QA";
}

std::optional<ChatTask> parse_chat_task(std::string_view text) noexcept {
  for (ChatTask t : {ChatTask::QA, ChatTask::Cloze, ChatTask::Ranking, ChatTask::BillComprehension,
                     ChatTask::BillVote, ChatTask::PositioningAnswer}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::string tag_string(const StageTag& tag) {
  return std::visit([](auto v) { return std::string(to_string(v)); }, tag);
}

std::optional<StageTag> parse_stage_tag(std::string_view text) noexcept {
  if (auto p = parse_position(text)) return StageTag{*p};
  if (auto l = parse_leaning(text)) return StageTag{*l};
  return std::nullopt;
}

std::string ChatRecord::render() const {
  std::string out = "<|system|>\n" + system + "\n<|user|>\n" + user + "\n<|assistant|>\n";
  if (!assistant.empty()) out += assistant + "\n";
  return out;
}

ChatRecord build_qa_record(std::string_view question, std::string_view answer, Position position,
                           const PromptOptions& opts) {
  require_nonempty(question, "question");
  require_nonempty(answer, "answer");
  ChatRecord r;
  r.system = system_message(opts);
  r.user = std::string(kQaPrompt) + "\n\n## Question: " + std::string(question);
  r.assistant = "## Output: " + std::string(answer);
  r.task = ChatTask::QA;
  r.tag = position;
  return r;
}

WordClass LexiconTagger::classify(std::string_view word) const {
  const std::string w = lower(word);
  if (w.empty()) return WordClass::Other;
  if (kModals.contains(w)) return WordClass::Modal;
  if (kAdverbs.contains(w)) return WordClass::Adverb;
  if (kVerbs.contains(w)) return WordClass::Verb;
  if (ends_with(w, "ly") && w.size() > 4 && !kNotAdverbs.contains(w)) return WordClass::Adverb;
  if (ends_with(w, "es") && kVerbs.contains(std::string_view(w).substr(0, w.size() - 2))) {
    return WordClass::Verb;
  }
  if (ends_with(w, "s") && kVerbs.contains(std::string_view(w).substr(0, w.size() - 1))) {
    return WordClass::Verb;
  }
  if (w.size() > 5 && (ends_with(w, "ize") || ends_with(w, "ify"))) return WordClass::Verb;
  if (w.size() > 4 && ends_with(w, "ed") && !ends_with(w, "eed")) return WordClass::Verb;
  if (kIrregularPast.contains(w)) return WordClass::Verb;
  return WordClass::Other;
}

const Tagger& default_tagger() {
  static const LexiconTagger tagger;
  return tagger;
}

std::optional<Cloze> cloze_from_sentence(std::string_view sentence, const Tagger* tagger) {
  if (tagger == nullptr) throw Error(ErrorCode::TaggerUnavailable, "no tagger configured");
  require_nonempty(sentence, "sentence");
  if (sentence.find(kBlank) != std::string_view::npos) return std::nullopt;

  const std::vector<Token> tokens = tokenize(sentence);
  auto word = [&](std::size_t i) {
    return sentence.substr(tokens[i].begin, tokens[i].end - tokens[i].begin);
  };
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // token index ranges, inclusive
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!is_pronoun(word(i))) {
      ++i;
      continue;
    }
    std::optional<std::size_t> start;
    for (std::size_t k = i + 1; k <= i + 2 && k < tokens.size(); ++k) {
      if (is_pronoun(word(k))) break;
      if (tagger->classify(word(k)) != WordClass::Other) {
        start = k;
        break;
      }
    }
    if (!start) {
      ++i;
      continue;
    }
    std::size_t end = *start;
    if (tagger->classify(word(*start)) != WordClass::Verb) {
      while (end + 1 < tokens.size() && tagger->classify(word(end + 1)) != WordClass::Other &&
             !is_pronoun(word(end + 1))) {
        ++end;
      }
    }
    spans.emplace_back(*start, end);
    i = end + 1;
  }
  if (spans.empty()) return std::nullopt;

  Cloze out;
  out.sentence = std::string(sentence);
  std::size_t cursor = 0;
  for (const auto& [a, b] : spans) {
    const std::size_t from = tokens[a].begin;
    const std::size_t to = tokens[b].end;
    out.cloze += sentence.substr(cursor, from - cursor);
    out.cloze += kBlank;
    out.blanks.emplace_back(sentence.substr(from, to - from));
    cursor = to;
  }
  out.cloze += sentence.substr(cursor);
  return out;
}

std::string fill_cloze(std::string_view cloze, std::span<const std::string> blanks) {
  std::string out;
  std::size_t cursor = 0;
  for (const auto& b : blanks) {
    const std::size_t at = cloze.find(kBlank, cursor);
    if (at == std::string_view::npos) throw Error(ErrorCode::LengthMismatch, "more answers than blanks");
    out += cloze.substr(cursor, at - cursor);
    out += b;
    cursor = at + kBlank.size();
  }
  if (cloze.find(kBlank, cursor) != std::string_view::npos) {
    throw Error(ErrorCode::LengthMismatch, "more blanks than answers");
  }
  out += cloze.substr(cursor);
  return out;
}

std::string clean_sentence(std::string_view raw) {
  static const std::vector<std::pair<std::string_view, std::string_view>> kReplace = {
      {"\xE2\x80\x98", "'"}, {"\xE2\x80\x99", "'"}, {"\xE2\x80\x9C", "\""}, {"\xE2\x80\x9D", "\""},
      {"\xE2\x80\x93", "-"}, {"\xE2\x80\x94", "-"}, {"\xE2\x80\xA2", " "},  {"\xC2\xA0", " "},
  };
  std::string s;
  for (std::size_t i = 0; i < raw.size();) {
    bool replaced = false;
    for (const auto& [from, to] : kReplace) {
      if (raw.substr(i, from.size()) == from) {
        s += to;
        i += from.size();
        replaced = true;
        break;
      }
    }
    if (replaced) continue;
    const unsigned char c = static_cast<unsigned char>(raw[i]);
    if (c < 0x20 || c == 0x7F) {
      s += ' ';
    } else if (std::string_view("*#|[]{}<>_~^`").find(static_cast<char>(c)) == std::string_view::npos) {
      s += static_cast<char>(c);
    }
    ++i;
  }

  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  // Leading list markers such as "-", "1." or "a)".
  std::size_t start = 0;
  while (start < out.size() && (out[start] == '-' || out[start] == ' ')) ++start;
  std::size_t digits = start;
  while (digits < out.size() && std::isdigit(static_cast<unsigned char>(out[digits]))) ++digits;
  if (digits > start && digits + 1 < out.size() && (out[digits] == '.' || out[digits] == ')') &&
      out[digits + 1] == ' ') {
    start = digits + 2;
  }
  return out.substr(start);
}

ChatRecord build_cloze_record(const Cloze& cloze, Leaning leaning, const PromptOptions& opts) {
  require_nonempty(cloze.cloze, "cloze");
  require_nonempty(cloze.sentence, "sentence");
  ChatRecord r;
  r.system = system_message(opts);
  r.user = std::string(kClozePrompt) + "\n\n## Input: " + cloze.cloze;
  r.assistant = "## Output: " + cloze.sentence;
  r.task = ChatTask::Cloze;
  r.tag = leaning;
  return r;
}

const std::array<std::string_view, 25> kPolicyList = {
    "Abortion",        "Budget & Economy",   "Civil Rights",       "Corporations",
    "Crime",           "Death Penalty",      "Drugs",              "Education",
    "Energy & Oil",    "Environment",        "Families & Children","Foreign Policy",
    "Free Trade",      "Government Reform",  "Gun Control",        "Health Care",
    "Homeland Security","Immigration",       "Jobs",               "Principles & Values",
    "Social Security", "Tax Reform",         "Technology",         "War & Peace",
    "Welfare & Poverty",
};

std::string center_cloze_prompt(std::string_view policy) {
  require_nonempty(policy, "policy");
  Json example;
  example["input"] =
      "We ____ amending the Antiquities Act of 1906 to establish Congress' ____ to ____ the "
      "designation of national monuments.";
  example["output"] =
      "We support amending the Antiquities Act of 1906 to establish Congress' right to approve "
      "the designation of national monuments.";
  return std::string(kCenterClozePrompt) + "\n\n## Example:\n" + example.dump() +
         "\n\n## Policy: \"" + std::string(policy) + "\"\n\n## Output:";
}

ChatRecord build_ranking_record(std::string_view topic, std::span<const std::string> ranked,
                                Position position, std::uint64_t seed, const PromptOptions& opts) {
  if (ranked.size() != 5) throw Error(ErrorCode::WrongArity, std::to_string(ranked.size()) + " statements");
  require_nonempty(topic, "topic");
  for (const auto& s : ranked) require_nonempty(s, "statement");
  const std::vector<std::string> shown = seeded_shuffle(std::vector<std::string>(ranked.begin(), ranked.end()), seed);
  ChatRecord r;
  r.system = system_message(opts);
  r.user = std::string(kRankingPrompt) + "\n\n## Topic: " + std::string(topic) + "\n## Statements:" +
           numbered(shown);
  r.assistant = "## Ranking:" + numbered(ranked);
  r.task = ChatTask::Ranking;
  r.tag = position;
  return r;
}

Leaning leaning_for_party(std::string_view party) {
  const std::string p = lower(party);
  if (p == "d" || p == "democrat" || p == "democratic") return Leaning::Left;
  if (p == "r" || p == "republican") return Leaning::Right;
  return Leaning::Center;
}

ChatRecord build_bill_record(const Bill& bill, BillMode mode, const PromptOptions& opts) {
  require_nonempty(bill.title, "title");
  require_nonempty(bill.text, "text");
  require_nonempty(bill.policy_area, "policy_area");
  ChatRecord r;
  r.system = system_message(opts);
  r.tag = leaning_for_party(bill.sponsor_party);
  const std::string subjects = join(bill.legislative_subjects, ", ");
  if (mode == BillMode::Comprehension) {
    if (bill.legislative_subjects.empty()) throw Error(ErrorCode::EmptyField, "legislative_subjects");
    r.user = std::string(kBillPrompt) + "\n\n## Title: " + bill.title + "\n## Policy Area: " +
             bill.policy_area + "\n## Text: " + bill.text;
    r.assistant = "## Legislative Subjects: " + subjects;
    r.task = ChatTask::BillComprehension;
  } else {
    require_nonempty(bill.sponsor_party, "sponsor_party");
    r.user = std::string(kVotePrompt) + "\n\n## Title: " + bill.title + "\n## Policy Area: " +
             bill.policy_area + "\n## Legislative Subjects: " + subjects +
             "\n## Sponsor Party: " + bill.sponsor_party + "\n## Text: " + bill.text;
    r.task = ChatTask::BillVote;
  }
  return r;
}

VoteDecision parse_vote_answer(std::string_view answer) {
  std::string up(answer);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  const auto co = up.find("COSPONSOR");
  const auto de = up.find("DECLINE");
  if (co == std::string::npos && de == std::string::npos) {
    throw Error(ErrorCode::SchemaViolation, "answer names neither COSPONSOR nor DECLINE");
  }
  if (de == std::string::npos || (co != std::string::npos && co < de)) return VoteDecision::Cosponsor;
  return VoteDecision::Decline;
}

ChatRecord build_positioning_record(std::string_view question, std::span<const std::string> choices,
                                    Position position, const PromptOptions& opts) {
  require_nonempty(question, "question");
  if (choices.size() < 2) throw Error(ErrorCode::WrongArity, "need at least 2 choices");
  std::string q = "## Question: " + std::string(question) + " Choose your answer from:";
  for (std::size_t i = 0; i < choices.size(); ++i) {
    require_nonempty(choices[i], "choice");
    q += " " + std::to_string(i + 1) + ") " + choices[i] + ";";
  }
  ChatRecord r;
  r.system = system_message(opts);
  r.user = std::string(kPositioningPrompt) + "\n\n" + q;
  r.task = ChatTask::PositioningAnswer;
  r.tag = position;
  return r;
}

Json to_json(const ChatRecord& r) {
  Json j;
  j["task"] = std::string(to_string(r.task));
  j["tag"] = tag_string(r.tag);
  j["system"] = r.system;
  j["user"] = r.user;
  j["assistant"] = r.assistant;
  j["text"] = r.render();
  if (r.is_inference()) j["sampling"] = Json{{"temperature", 0}};
  return j;
}

ChatRecord chat_record_from_json(const Json& obj, std::size_t line_no) {
  FieldReader f(obj, line_no);
  f.only({"task", "tag", "system", "user", "assistant", "text", "sampling"});
  ChatRecord r;
  auto task = parse_chat_task(f.string("task"));
  if (!task) f.fail("task", "unknown task");
  r.task = *task;
  auto tag = parse_stage_tag(f.string("tag"));
  if (!tag) f.fail("tag", "unknown position or leaning");
  r.tag = *tag;
  r.system = f.string("system");
  r.user = f.string("user");
  r.assistant = f.string("assistant");
  if (r.user.empty()) f.fail("user", "empty");
  if (f.string("text") != r.render()) f.fail("text", "does not match the rendered fields");
  return r;
}

std::vector<ChatRecord> load_chat_records(const std::filesystem::path& path) {
  std::vector<ChatRecord> out;
  std::size_t line_no = 0;
  for (const Json& obj : read_json_lines(path)) out.push_back(chat_record_from_json(obj, ++line_no));
  return out;
}

StagePlan emit_stage_plan(const std::map<ChatTask, std::string>& datasets,
                          const std::filesystem::path& out_dir) {
  for (ChatTask t : {ChatTask::Cloze, ChatTask::BillComprehension, ChatTask::QA, ChatTask::Ranking}) {
    auto it = datasets.find(t);
    if (it == datasets.end() || it->second.empty()) {
      throw Error(ErrorCode::MissingDataset, std::string(to_string(t)));
    }
  }
  const auto& path = [&](ChatTask t) { return datasets.at(t); };

  StagePlan plan;
  for (Leaning l : {Leaning::Left, Leaning::Center, Leaning::Right}) {
    std::vector<std::string> qa_tags;
    for (Position p : kAllPositions) {
      if (parent_leaning(p) == l) qa_tags.emplace_back(to_string(p));
    }
    const std::string leaning(to_string(l));
    plan.stage1[l] = {
        {ChatTask::Cloze, path(ChatTask::Cloze), {leaning}},
        {ChatTask::BillComprehension, path(ChatTask::BillComprehension), {leaning}},
        {ChatTask::QA, path(ChatTask::QA), qa_tags},
    };
  }
  for (Position p : kAllPositions) {
    const std::string tag(to_string(p));
    plan.stage2[p] = {parent_leaning(p),
                      {{ChatTask::QA, path(ChatTask::QA), {tag}},
                       {ChatTask::Ranking, path(ChatTask::Ranking), {tag}}}};
  }
  write_text_file(out_dir / "plan.json", to_json(plan).dump(2) + "\n");
  return plan;
}

Json to_json(const StagePlan& plan) {
  auto refs = [](const std::vector<DatasetRef>& list) {
    Json arr = Json::array();
    for (const auto& d : list) {
      arr.push_back({{"task", std::string(to_string(d.task))}, {"path", d.path}, {"tags", d.tags}});
    }
    return arr;
  };
  Json j;
  Json s1 = Json::object();
  for (const auto& [l, list] : plan.stage1) s1[std::string(to_string(l))] = refs(list);
  Json s2 = Json::object();
  for (const auto& [p, entry] : plan.stage2) {
    s2[std::string(to_string(p))] = {{"parent", std::string(to_string(entry.parent))},
                                     {"datasets", refs(entry.datasets)}};
  }
  j["stage1"] = s1;
  j["stage2"] = s2;
  j["tuning"] = {{"rank", plan.tuning.rank},
                 {"alpha", plan.tuning.alpha},
                 {"learning_rate", plan.tuning.learning_rate},
                 {"schedule", plan.tuning.schedule},
                 {"epochs", plan.tuning.epochs},
                 {"quantization", plan.tuning.quantization},
                 {"target_modules", "all-linear"}};
  return j;
}

}  // namespace forge
