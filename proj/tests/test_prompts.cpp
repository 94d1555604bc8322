#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "forge/error.hpp"
#include "forge/prompts.hpp"
#include "support.hpp"

namespace forge {
namespace {

using testing::TempDir;

std::string golden(const std::string& name) {
  return read_text_file(std::filesystem::path(FORGE_TEST_DIR) / "golden" / name);
}

const std::vector<std::string> kRanked = {
    "We must raise the minimum wage.", "Wages should rise with productivity.",
    "Wage policy belongs to the states.", "Mandated wages cost jobs.",
    "The minimum wage should be abolished."};

TEST(Golden, QaTemplate) {
  const ChatRecord r = build_qa_record("Should the minimum wage be raised?",
                                       "Yes. Every worker deserves a wage they can live on.",
                                       Position::PL);
  EXPECT_EQ(r.render(), golden("qa.txt"));
  EXPECT_NE(r.system.find("strong and unwavering political ideology"), std::string::npos);
}

TEST(Golden, ClozeTemplate) {
  const auto c = cloze_from_sentence("We support amending the Antiquities Act of 1906.");
  ASSERT_TRUE(c);
  EXPECT_EQ(build_cloze_record(*c, Leaning::Center).render(), golden("cloze.txt"));
}

TEST(Golden, BillTemplate) {
  const Bill b{"B1", "Clean Water Act Amendments", "To amend the Federal Water Pollution Control Act.",
               "Environmental Protection", {"Water quality", "Wetlands"}, "L1", "D"};
  const ChatRecord r = build_bill_record(b, BillMode::Comprehension);
  EXPECT_EQ(r.render(), golden("bill.txt"));
  EXPECT_EQ(std::get<Leaning>(r.tag), Leaning::Left);
}

TEST(Golden, RankingTemplate) {
  const ChatRecord r = build_ranking_record("Minimum Wage", kRanked, Position::LW, 1);
  EXPECT_EQ(r.render(), golden("ranking.txt"));
}

TEST(Render, InferenceRecordsEndAtAssistantTag) {
  const std::vector<std::string> choices = {"Agree", "Disagree"};
  const ChatRecord r = build_positioning_record("Taxes are too high.", choices, Position::C);
  EXPECT_TRUE(r.is_inference());
  EXPECT_TRUE(r.render().ends_with("<|assistant|>\n"));
  EXPECT_NE(r.user.find("## Question: Taxes are too high. Choose your answer from: 1) Agree; 2) Disagree;"),
            std::string::npos);
  const Json j = to_json(r);
  EXPECT_EQ(j["sampling"]["temperature"], 0);
}

TEST(Render, ExplicitIdeologyExtendsSystemMessage) {
  const ChatRecord r = build_qa_record("q", "a", Position::RW, {"You are right-wing."});
  EXPECT_EQ(r.system, std::string(kSystemMessage) + " You are right-wing.");
}

TEST(Cloze, AntiquitiesActExample) {
  const auto c = cloze_from_sentence(
      "We support amending the Antiquities Act of 1906 to establish Congress' right to approve "
      "the designation of national monuments.");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->blanks, std::vector<std::string>{"support"});
  EXPECT_EQ(c->cloze.substr(0, 13), "We ____ amend");
}

TEST(Cloze, SpansAfterPronouns) {
  auto c = cloze_from_sentence("Our plan protects families.");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->cloze, "Our plan ____ families.");
  c = cloze_from_sentence("I will strongly oppose new taxes, and we reject cuts.");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->cloze, "I ____ new taxes, and we ____ cuts.");
  EXPECT_EQ(c->blanks, (std::vector<std::string>{"will strongly oppose", "reject"}));
  EXPECT_FALSE(cloze_from_sentence("The weather is mild."));
  EXPECT_FALSE(cloze_from_sentence("We ____ it."));
}

TEST(Cloze, Errors) {
  EXPECT_FORGE_ERROR(cloze_from_sentence("We support it.", nullptr), ErrorCode::TaggerUnavailable);
  EXPECT_FORGE_ERROR(cloze_from_sentence("   "), ErrorCode::EmptyField);
  const std::vector<std::string> one = {"x"};
  EXPECT_FORGE_ERROR(fill_cloze("a ____ b ____", one), ErrorCode::LengthMismatch);
  EXPECT_FORGE_ERROR(fill_cloze("a b", one), ErrorCode::LengthMismatch);
}

TEST(Cloze, RoundTripOnGeneratedSentences) {
  const std::vector<std::string> subjects = {"We", "I", "Our party", "Together we", "Our members"};
  const std::vector<std::string> verbs = {"support", "oppose", "will defend", "strongly reject",
                                          "must protect", "firmly believe in", "fought for"};
  const std::vector<std::string> objects = {"lower taxes", "clean energy", "secure borders",
                                            "public schools", "affordable care"};
  const std::vector<std::string> tails = {".", " for every family.", ", and we will not back down.",
                                          " because our values demand it."};
  std::mt19937_64 rng(21);
  auto pick = [&rng](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  int produced = 0;
  for (int i = 0; i < 100; ++i) {
    const std::string s = pick(subjects) + " " + pick(verbs) + " " + pick(objects) + pick(tails);
    const auto c = cloze_from_sentence(s);
    ASSERT_TRUE(c) << s;
    ++produced;
    EXPECT_EQ(fill_cloze(c->cloze, c->blanks), s);
    EXPECT_EQ(std::count(c->blanks.begin(), c->blanks.end(), std::string()), 0);
  }
  EXPECT_EQ(produced, 100);
}

TEST(Cloze, CleanSentence) {
  EXPECT_EQ(clean_sentence("  1. We \xE2\x80\x9Csupport\xE2\x80\x9D **reform**\t now  "),
            "We \"support\" reform now");
  EXPECT_EQ(clean_sentence("- Our plan\xE2\x80\x94" "bold."), "Our plan-bold.");
}

TEST(Cloze, CenterPrompt) {
  const std::string p = center_cloze_prompt("Immigration");
  EXPECT_NE(p.find("CENTER-LEANING IDEOLOGY"), std::string::npos);
  EXPECT_NE(p.find("\"Immigration\""), std::string::npos);
  EXPECT_EQ(kPolicyList.size(), 25u);
}

TEST(Ranking, SeedChangesOnlyTheShuffle) {
  const ChatRecord a = build_ranking_record("Wages", kRanked, Position::LW, 1);
  const ChatRecord b = build_ranking_record("Wages", kRanked, Position::LW, 2);
  EXPECT_EQ(a.assistant, b.assistant);
  EXPECT_EQ(a.system, b.system);
  EXPECT_EQ(a, build_ranking_record("Wages", kRanked, Position::LW, 1));
  for (const auto& s : kRanked) EXPECT_NE(a.user.find(s), std::string::npos);
  bool differs = false;
  for (std::uint64_t seed = 2; seed < 10 && !differs; ++seed) {
    differs = build_ranking_record("Wages", kRanked, Position::LW, seed).user != a.user;
  }
  EXPECT_TRUE(differs);
}

TEST(Ranking, Errors) {
  const std::vector<std::string> four(kRanked.begin(), kRanked.begin() + 4);
  EXPECT_FORGE_ERROR(build_ranking_record("Wages", four, Position::C, 0), ErrorCode::WrongArity);
  EXPECT_FORGE_ERROR(build_qa_record("", "a", Position::C), ErrorCode::EmptyField);
  EXPECT_FORGE_ERROR(build_qa_record("q", " ", Position::C), ErrorCode::EmptyField);
}

TEST(Bill, VoteModeAndParties) {
  const Bill b{"B1", "T", "X", "Health", {"Medicare"}, "L1", "R"};
  const ChatRecord r = build_bill_record(b, BillMode::Vote);
  EXPECT_TRUE(r.is_inference());
  EXPECT_NE(r.user.find("## Sponsor Party: R"), std::string::npos);
  EXPECT_EQ(std::get<Leaning>(r.tag), Leaning::Right);
  EXPECT_EQ(leaning_for_party("I"), Leaning::Center);
  Bill no_subjects = b;
  no_subjects.legislative_subjects.clear();
  EXPECT_FORGE_ERROR(build_bill_record(no_subjects, BillMode::Comprehension), ErrorCode::EmptyField);
  EXPECT_EQ(parse_vote_answer("I would cosponsor this."), VoteDecision::Cosponsor);
  EXPECT_EQ(parse_vote_answer("DECLINE, not COSPONSOR"), VoteDecision::Decline);
  EXPECT_FORGE_ERROR(parse_vote_answer("maybe"), ErrorCode::SchemaViolation);
}

TEST(Codec, ChatRecordRoundTrip) {
  const ChatRecord r = build_qa_record("q?", "a.", Position::CR);
  EXPECT_EQ(chat_record_from_json(to_json(r)), r);
  Json bad = to_json(r);
  bad["text"] = "tampered";
  EXPECT_FORGE_ERROR(chat_record_from_json(bad), ErrorCode::SchemaViolation);
  EXPECT_EQ(parse_chat_task(to_string(ChatTask::BillVote)), ChatTask::BillVote);
  EXPECT_EQ(tag_string(*parse_stage_tag("Left")), "Left");
  EXPECT_EQ(tag_string(*parse_stage_tag("RW")), "RW");
}

TEST(Plan, TwoStages) {
  TempDir dir;
  const std::map<ChatTask, std::string> datasets = {{ChatTask::QA, "qa.jsonl"},
                                                    {ChatTask::Cloze, "cloze.jsonl"},
                                                    {ChatTask::BillComprehension, "bill.jsonl"},
                                                    {ChatTask::Ranking, "ranking.jsonl"}};
  const StagePlan plan = emit_stage_plan(datasets, dir.path());
  EXPECT_EQ(plan.stage1.size(), 3u);
  EXPECT_EQ(plan.stage2.size(), 5u);
  EXPECT_EQ(plan.stage2.at(Position::LW).parent, Leaning::Left);
  EXPECT_EQ(plan.stage2.at(Position::C).parent, Leaning::Center);
  EXPECT_EQ(plan.stage1.at(Leaning::Right)[2].tags, (std::vector<std::string>{"RW", "CR"}));
  EXPECT_EQ(plan.tuning, TuningConfig{});
  const Json written = Json::parse(read_text_file(dir / "plan.json"));
  EXPECT_EQ(written, to_json(plan));
  EXPECT_EQ(written["tuning"]["rank"], 16);
  EXPECT_EQ(written["tuning"]["quantization"], "4-bit");

  auto missing = datasets;
  missing.erase(ChatTask::Ranking);
  EXPECT_FORGE_ERROR(emit_stage_plan(missing, dir.path()), ErrorCode::MissingDataset);
}

}  // namespace
}  // namespace forge
