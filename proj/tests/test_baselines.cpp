#include <stdexcept>
#include <vector>

#include "csd/baselines.hpp"
#include "csd/rng.hpp"
#include "doctest.h"

using namespace csd;

TEST_SUITE("baselines") {

TEST_CASE("trust updates follow the three-band rule and clamp") {
  const double q_n = 0.15, q_d = 0.2;
  CHECK(tbs_update(TrustState{100, 100}, 0.10, q_n, q_d).trust == 101);
  CHECK(tbs_update(TrustState{100, 100}, 0.25, q_n, q_d).trust == 90);
  CHECK(tbs_update(TrustState{100, 100}, 0.17, q_n, q_d).trust == 99);
  CHECK(tbs_update(TrustState{0, 100}, 0.25, q_n, q_d).trust == 0);
  CHECK(tbs_update(TrustState{200, 100}, 0.01, q_n, q_d).trust == 200);
  // band edges take the -1 branch (strict comparisons on both sides)
  CHECK(tbs_update(TrustState{100, 100}, 0.15, q_n, q_d).trust == 99);
  CHECK(tbs_update(TrustState{100, 100}, 0.20, q_n, q_d).trust == 99);
  CHECK_THROWS_AS(tbs_update(TrustState{100, 100}, 1.5, q_n, q_d), std::invalid_argument);
}

TEST_CASE("trust never leaves its range under random updates") {
  RngStream rng(8080);
  TrustState state{100, 100};
  for (int i = 0; i < 5000; ++i) {
    state = tbs_update(state, rng.next_unit(), 0.15, 0.2);
    CHECK(state.trust >= 0);
    CHECK(state.trust <= 200);
  }
}

TEST_CASE("tbs verdict compares trust against the threshold") {
  CHECK(tbs_decision(TrustState{100, 100}).decision == Decision::Normal);  // boundary keeps
  CHECK(tbs_decision(TrustState{99, 100}).decision == Decision::Abnormal);
  for (int trust : {0, 50, 200}) {
    CHECK(tbs_decision(TrustState{trust, 0}).decision == Decision::Normal);  // threshold 0 never fires
  }
}

TEST_CASE("sbs generalized LRT pools counts and clamps the estimate") {
  const double q_n = 0.15;
  // all nodes dropping exactly q_n: estimate clamps, statistic is zero
  std::vector<ForwardingCounts> at_qn{{100, 15}, {200, 30}};
  const auto flat = sbs_glrt_decision(at_qn, q_n, 1.4);
  CHECK(flat.statistic == 0.0);
  CHECK(flat.decision == Decision::Normal);

  // heavy drops over many packets: statistic far above gamma
  std::vector<ForwardingCounts> heavy{{1000, 300}};
  const auto hot = sbs_glrt_decision(heavy, q_n, 1.4);
  CHECK(hot.decision == Decision::Abnormal);
  CHECK(hot.statistic == doctest::Approx(72.0349440593).epsilon(1e-9));

  // one-sided clamp from below
  std::vector<ForwardingCounts> light{{1000, 50}};
  const auto cool = sbs_glrt_decision(light, q_n, 1.4);
  CHECK(cool.statistic == 0.0);
  CHECK(cool.decision == Decision::Normal);

  CHECK_THROWS_AS(sbs_glrt_decision(std::vector<ForwardingCounts>{{0, 0}}, q_n, 1.4), std::invalid_argument);
}

TEST_CASE("sbs handles a fully-dropped observation without overflow") {
  std::vector<ForwardingCounts> all_dropped{{50, 50}};
  const auto v = sbs_glrt_decision(all_dropped, 0.15, 1.4);
  CHECK(v.decision == Decision::Abnormal);
  CHECK(std::isfinite(v.statistic));
}

}  // TEST_SUITE
