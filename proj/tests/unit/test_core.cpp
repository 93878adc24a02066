#include <doctest.h>

#include <algorithm>

#include "xscreen/core.hpp"
#include "xscreen/rng.hpp"

using namespace xscreen;

namespace {

const char* kSmallCsv =
    "id,split,treated,treat_time,cov:educ@18,cov:ses,out:depression\n"
    "s1,catholic,1,18,12,0.5,3.2\n"
    "s2,catholic,0,,12,0.4,2.1\n"
    "s3,other,1,22,14,-0.1,4\n"
    "s4,other,0,,13,0.2,\n";

}  // namespace

TEST_SUITE_BEGIN("core");

TEST_CASE("ingest: four-row round trip") {
  const core::Dataset ds = core::ingest_string(kSmallCsv);
  CHECK(ds.subjects.size() == 4);
  CHECK(ds.subjects[0].treated);
  CHECK(*ds.subjects[0].treatment_time == 18.0);
  CHECK(!ds.subjects[1].treated);
  CHECK(!ds.subjects[1].treatment_time.has_value());
  CHECK(ds.covariate_order == std::vector<std::string>{"educ", "ses"});
  CHECK(*ds.covariate_times.at("educ") == 18.0);
  CHECK(!ds.covariate_times.at("ses").has_value());  // baseline
  CHECK(!ds.subjects[3].outcomes.at("depression").has_value());
}

TEST_CASE("ingest: treated subject without a time is rejected") {
  const std::string bad =
      "id,split,treated,treat_time,out:y\n"
      "s1,a,1,,3\n";
  CHECK_THROWS_WITH_AS(core::ingest_string(bad),
                       doctest::Contains("treated subject s1"), Error);
  try {
    core::ingest_string(bad);
  } catch (const Error& e) {
    CHECK(e.code() == ErrCode::treated_without_time);
  }
}

TEST_CASE("ingest: error identities") {
  CHECK_THROWS_AS(core::ingest_string("id,split,treated,treat_time,bogus\n"), Error);
  try {
    core::ingest_string("id,split,treated,treat_time,bogus\ns,a,0,,1\n");
  } catch (const Error& e) {
    CHECK(e.code() == ErrCode::unknown_column);
  }
  try {
    core::ingest_string(
        "id,split,treated,treat_time\n"
        "s1,a,0,\n"
        "s1,a,0,\n");
  } catch (const Error& e) {
    CHECK(e.code() == ErrCode::duplicate_id);
  }
  try {
    core::ingest_string(
        "id,split,treated,treat_time\n"
        "s1,a,2,\n");
  } catch (const Error& e) {
    CHECK(e.code() == ErrCode::malformed_row);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("ingest: fallback merge fills missing outcomes only when requested") {
  const std::string csv =
      "id,split,treated,treat_time,out:depression,out:depression#fallback\n"
      "s1,a,0,,2.5,9\n"
      "s2,a,0,,,7.5\n"
      "s3,a,1,20,,\n";
  const core::Dataset plain = core::ingest_string(csv);
  CHECK(!plain.subjects[1].outcomes.at("depression").has_value());

  core::IngestOptions opts;
  opts.merge_fallback = {"depression"};
  const core::Dataset merged = core::ingest_string(csv, opts);
  CHECK(*merged.subjects[0].outcomes.at("depression") == 2.5);  // primary wins
  CHECK(*merged.subjects[1].outcomes.at("depression") == 7.5);  // fallback fills
  CHECK(!merged.subjects[2].outcomes.at("depression").has_value());
  CHECK(merged.fallback_merged == std::vector<std::string>{"depression"});
  CHECK(core::dataset_digest(merged) != core::dataset_digest(plain));
}

TEST_CASE("blind: serialized view carries no outcome tokens") {
  const core::Dataset ds = core::ingest_string(kSmallCsv);
  const core::BlindedView view = core::blind(ds);
  const std::string emitted = core::emit(view);
  CHECK(emitted.find("out:") == std::string::npos);
  CHECK(emitted.find("depression") == std::string::npos);
  CHECK(emitted.find("educ") != std::string::npos);
  CHECK(view.subjects.size() == 4);
}

TEST_CASE("blind: empty dataset gives empty view") {
  const core::Dataset ds = core::ingest_string("id,split,treated,treat_time\n");
  CHECK(core::blind(ds).subjects.empty());
}

TEST_CASE("split: parts partition the id set and row order is irrelevant") {
  const core::Dataset ds = core::ingest_string(kSmallCsv);
  const core::SplitAssignment a = core::split(ds, "split");
  CHECK(a.parts.size() == 2);
  CHECK(a.parts.at("catholic") == std::set<std::string>{"s1", "s2"});
  CHECK(a.parts.at("other") == std::set<std::string>{"s3", "s4"});

  // permuted rows -> identical assignment
  const std::string permuted =
      "id,split,treated,treat_time,cov:educ@18,cov:ses,out:depression\n"
      "s4,other,0,,13,0.2,\n"
      "s2,catholic,0,,12,0.4,2.1\n"
      "s3,other,1,22,14,-0.1,4\n"
      "s1,catholic,1,18,12,0.5,3.2\n";
  const core::SplitAssignment b = core::split(core::ingest_string(permuted), "split");
  CHECK(a.parts == b.parts);
}

TEST_CASE("split: missing levels are rejected with the offending ids") {
  const std::string csv =
      "id,split,treated,treat_time\n"
      "s1,,0,\n"
      "s2,a,0,\n";
  const core::Dataset ds = core::ingest_string(csv);
  CHECK_THROWS_WITH_AS(core::split(ds, "split"), doctest::Contains("s1"), Error);
}

TEST_CASE("split: wrong factor name violates the precondition") {
  const core::Dataset ds = core::ingest_string(kSmallCsv);
  CHECK_THROWS_AS(core::split(ds, "religion"), Error);
}

TEST_CASE("random_split: largest-remainder sizes and reproducibility") {
  std::string csv = "id,split,treated,treat_time\n";
  for (int i = 1; i <= 100; ++i) {
    csv += "s" + std::to_string(i) + ",a,0,\n";
  }
  const core::Dataset ds = core::ingest_string(csv);
  const auto a = core::random_split(ds, {0.2, 0.2, 0.6}, 7);
  CHECK(a.parts.at("part1").size() == 20);
  CHECK(a.parts.at("part2").size() == 20);
  CHECK(a.parts.at("part3").size() == 60);

  const auto again = core::random_split(ds, {0.2, 0.2, 0.6}, 7);
  CHECK(a.parts == again.parts);
  const auto other = core::random_split(ds, {0.2, 0.2, 0.6}, 8);
  CHECK(a.parts != other.parts);

  std::set<std::string> all;
  for (const auto& [label, ids] : a.parts) all.insert(ids.begin(), ids.end());
  CHECK(all.size() == 100);

  const auto whole = core::random_split(ds, {1.0}, 3);
  CHECK(whole.parts.at("part1").size() == 100);
  CHECK_THROWS_AS(core::random_split(ds, {0.5, 0.6}, 1), Error);
  CHECK_THROWS_AS(core::random_split(ds, {-0.5, 1.5}, 1), Error);
}

TEST_CASE("emit/ingest: idempotent on the canonical form") {
  core::IngestOptions opts;
  const std::string with_fallback =
      "id,split,treated,treat_time,out:y,out:y#fallback\n"
      "s1,a,0,,,4.25\n"
      "s2,b,1,30,1.5,\n";
  opts.merge_fallback = {"y"};
  const core::Dataset first = core::ingest_string(with_fallback, opts);
  const std::string canonical = core::emit(first);
  const core::Dataset second = core::ingest_string(canonical);
  CHECK(core::emit(second) == canonical);
  CHECK(*second.subjects[0].outcomes.at("y") == 4.25);
}

TEST_SUITE_END();
