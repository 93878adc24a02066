#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "../support/fixtures.hpp"
#include "xscreen/match.hpp"
#include "xscreen/rng.hpp"

using namespace xscreen;

namespace {

core::Dataset tiny(const std::string& csv) { return core::ingest_string(csv); }

match::MatchConfig config_for(std::vector<std::string> covs) {
  match::MatchConfig c;
  c.covariates = std::move(covs);
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("match");

TEST_CASE("nearest eligible control wins") {
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x\n"
      "t1,a,1,18,0\n"
      "c1,a,0,,0.1\n"
      "c2,a,0,,0.9\n");
  auto config = config_for({"x"});
  config.distance = match::DistanceKind::normalized_euclidean;
  const auto result = match::risk_set_match(ds, config);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].treated_id == "t1");
  CHECK(result.pairs[0].control_id == "c1");
  CHECK(result.pairs[0].index_time == 18.0);
}

TEST_CASE("eligibility respects not-yet-treated at the index time") {
  // A control treated at t=25 is eligible for index 18, not for index 30.
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x\n"
      "early,a,1,18,0\n"
      "later,a,1,25,0\n"
      "late,a,1,30,5\n"
      "never,a,0,,5\n");
  auto config = config_for({"x"});
  config.distance = match::DistanceKind::normalized_euclidean;
  const auto result = match::risk_set_match(ds, config);
  // early (t=18) grabs `later` (t=25, nearest by covariate and not yet
  // treated); late (t=30) cannot use `later` (already treated by 30) nor
  // early, leaving `never`.
  std::map<std::string, std::string> by_treated;
  for (const auto& p : result.pairs) by_treated[p.treated_id] = p.control_id;
  CHECK(by_treated.at("early") == "later");
  CHECK(by_treated.at("late") == "never");
  // `later` was consumed as a control, so it is not re-entered as treated.
  CHECK(by_treated.count("later") == 0);
}

TEST_CASE("caliper exclusion reports the subject unmatched") {
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x\n"
      "t1,a,1,18,0\n"
      "c1,a,0,,0.9\n");
  auto config = config_for({"x"});
  config.distance = match::DistanceKind::normalized_euclidean;
  config.caliper = 0.5;
  const auto result = match::risk_set_match(ds, config);
  CHECK(result.pairs.empty());
  CHECK(result.unmatched_treated == std::vector<std::string>{"t1"});
}

TEST_CASE("time window demands clearance beyond the index time") {
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x\n"
      "t1,a,1,18,0\n"
      "soon,a,1,19,0\n"
      "never,a,0,,3\n");
  auto config = config_for({"x"});
  config.distance = match::DistanceKind::normalized_euclidean;
  const auto plain = match::risk_set_match(ds, config);
  std::map<std::string, std::string> by_treated;
  for (const auto& p : plain.pairs) by_treated[p.treated_id] = p.control_id;
  CHECK(by_treated.at("t1") == "soon");  // eligible without a window

  config.time_window = 2.0;  // must stay untreated through t=20
  const auto gated = match::risk_set_match(ds, config);
  by_treated.clear();
  for (const auto& p : gated.pairs) by_treated[p.treated_id] = p.control_id;
  CHECK(by_treated.at("t1") == "never");
}

TEST_CASE("post-treatment covariates violate the precondition") {
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x@25\n"
      "t1,a,1,18,0\n"
      "c1,a,0,,1\n");
  CHECK_THROWS_AS(match::risk_set_match(ds, config_for({"x"})), Error);
}

TEST_CASE("config errors: empty and unknown covariates") {
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x\n"
      "t1,a,1,18,0\n");
  CHECK_THROWS_AS(match::risk_set_match(ds, config_for({})), Error);
  CHECK_THROWS_AS(match::risk_set_match(ds, config_for({"zz"})), Error);
}

TEST_CASE("mahalanobis: ridge keeps duplicated columns usable") {
  // x2 is an exact copy of x1; the ridge on the diagonal keeps the
  // covariance invertible, so no fallback happens and matching proceeds.
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x1,cov:x2\n"
      "t1,a,1,18,0,0\n"
      "c1,a,0,,1,1\n"
      "c2,a,0,,2,2\n");
  const auto result = match::risk_set_match(ds, config_for({"x1", "x2"}));
  CHECK(!result.covariance_fallback);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].control_id == "c1");
}

TEST_CASE("mahalanobis: inestimable covariance falls back with a warning flag") {
  // Only one complete covariate row: covariance cannot be estimated, the
  // result is flagged, and the incomplete control cannot be matched.
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x1,cov:x2\n"
      "t1,a,1,18,0,0\n"
      "c1,a,0,,1,\n");
  const auto result = match::risk_set_match(ds, config_for({"x1", "x2"}));
  CHECK(result.covariance_fallback);
  CHECK(result.pairs.empty());
  CHECK(result.unmatched_treated == std::vector<std::string>{"t1"});
}

TEST_CASE("matching is invariant to input row order") {
  Rng rng(99);
  const core::Dataset ds = fixtures::random_cohort(rng, 60, 0.6);
  auto config = config_for({"x1", "x2"});
  const auto baseline = match::risk_set_match(ds, config);

  core::Dataset shuffled = ds;
  std::reverse(shuffled.subjects.begin(), shuffled.subjects.end());
  const auto reordered = match::risk_set_match(shuffled, config);
  REQUIRE(baseline.pairs.size() == reordered.pairs.size());
  for (std::size_t i = 0; i < baseline.pairs.size(); ++i) {
    CHECK(baseline.pairs[i].treated_id == reordered.pairs[i].treated_id);
    CHECK(baseline.pairs[i].control_id == reordered.pairs[i].control_id);
  }
}

TEST_CASE("randomized fixtures: no control reuse, eligibility always holds") {
  for (int trial = 0; trial < 300; ++trial) {
    Rng rng(substream_seed(4242, std::uint64_t(trial)));
    const core::Dataset ds = fixtures::random_cohort(rng, 40, 0.5);
    auto config = config_for({"x1", "x2"});
    if (trial % 3 == 0) config.caliper = 1.0;
    if (trial % 4 == 0) config.time_window = 2.0;
    const auto result = match::risk_set_match(ds, config);
    std::set<std::string> controls;
    for (const auto& p : result.pairs) {
      CHECK(controls.insert(p.control_id).second);  // one use per control
      const core::Subject* t = ds.find(p.treated_id);
      const core::Subject* c = ds.find(p.control_id);
      REQUIRE(t);
      REQUIRE(c);
      CHECK(t->treated);
      CHECK(*t->treatment_time == p.index_time);
      if (c->treated) CHECK(*c->treatment_time > p.index_time);
      CHECK(p.distance >= 0.0);
      if (config.caliper) CHECK(p.distance <= *config.caliper);
    }
  }
}

TEST_CASE("balance: hand-computed standardized difference of 1.0") {
  // Treated {1 - r, 1 + r}, controls {-r, r} with r = sqrt(2)/2 gives both
  // group SDs 1, pooled SD 1, and mean difference 1.
  const double r = std::sqrt(2.0) / 2.0;
  const std::string csv =
      "id,split,treated,treat_time,cov:x\n"
      "t1,a,1,18," + format_double(1.0 - r) + "\n" +
      "t2,a,1,19," + format_double(1.0 + r) + "\n" +
      "c1,a,0,," + format_double(-r) + "\n" +
      "c2,a,0,," + format_double(r) + "\n";
  const auto ds = tiny(csv);
  const std::vector<match::MatchedPair> pairs{{"t1", "c1", 18.0, 0.0},
                                              {"t2", "c2", 19.0, 0.0}};
  const auto table = match::balance(ds, pairs, {"x"});
  REQUIRE(table.rows.size() == 1);
  CHECK(*table.rows[0].pre_std_diff == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*table.rows[0].post_std_diff == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(table.rows[0].flagged);
}

TEST_CASE("balance: identical matched values give post difference zero") {
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x\n"
      "t1,a,1,18,2\n"
      "t2,a,1,19,0\n"
      "c1,a,0,,2\n"
      "c2,a,0,,0\n"
      "c3,a,0,,9\n");
  const std::vector<match::MatchedPair> pairs{{"t1", "c1", 18.0, 0.0},
                                              {"t2", "c2", 19.0, 0.0}};
  const auto table = match::balance(ds, pairs, {"x"});
  CHECK(*table.rows[0].post_std_diff == doctest::Approx(0.0));
  CHECK(!table.rows[0].flagged);
}

TEST_CASE("balance: zero pooled SD reports missing; empty pairs error") {
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x\n"
      "t1,a,1,18,1\n"
      "c1,a,0,,1\n");
  const std::vector<match::MatchedPair> pairs{{"t1", "c1", 18.0, 0.0}};
  const auto table = match::balance(ds, pairs, {"x"});
  CHECK(!table.rows[0].pre_std_diff.has_value());
  CHECK(!table.rows[0].post_std_diff.has_value());
  CHECK_THROWS_AS(match::balance(ds, {}, {"x"}), Error);
}

TEST_CASE("balance CSV carries the 0.2 flag column") {
  const auto ds = tiny(
      "id,split,treated,treat_time,cov:x\n"
      "t1,a,1,18,3\n"
      "t2,a,1,19,4\n"
      "c1,a,0,,0\n"
      "c2,a,0,,1\n");
  const std::vector<match::MatchedPair> pairs{{"t1", "c1", 18.0, 0.0},
                                              {"t2", "c2", 19.0, 0.0}};
  const std::string csv = match::balance_to_csv(match::balance(ds, pairs, {"x"}));
  CHECK(csv.find("flag_ge_0.2") != std::string::npos);
  CHECK(csv.find(",1\n") != std::string::npos);  // flagged row
}

TEST_CASE("distance sanity: identical covariates sit at distance zero") {
  const auto dup = tiny(
      "id,split,treated,treat_time,cov:x1,cov:x2\n"
      "t1,a,1,18,1.5,-2\n"
      "c1,a,0,,1.5,-2\n"
      "c2,a,0,,9,9\n");
  const auto result = match::risk_set_match(dup, config_for({"x1", "x2"}));
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].distance == doctest::Approx(0.0));
}

TEST_CASE("pair table: treated minus control differences with missing pairs dropped") {
  const auto ds = tiny(
      "id,split,treated,treat_time,out:y\n"
      "t1,a,1,18,5\n"
      "t2,b,1,19,\n"
      "c1,a,0,,2\n"
      "c2,b,0,,1\n");
  const std::vector<match::MatchedPair> pairs{{"t1", "c1", 18.0, 0.0},
                                              {"t2", "c2", 19.0, 0.0}};
  const auto table = match::build_pair_table(ds, pairs);
  CHECK(table.n() == 2);
  CHECK(table.split == std::vector<std::string>{"a", "b"});
  const auto po = table.paired_outcome("y");
  CHECK(po.diffs == std::vector<double>{3.0});
  CHECK(po.n_dropped_missing == 1);
}

TEST_CASE("pairs CSV round trip") {
  const std::vector<match::MatchedPair> pairs{{"t1", "c9", 18.0, 0.25}};
  const auto parsed = match::pairs_from_csv(match::pairs_to_csv(pairs));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].treated_id == "t1");
  CHECK(parsed[0].control_id == "c9");
  CHECK(parsed[0].distance == 0.25);
}

TEST_SUITE_END();
