#include <gtest/gtest.h>

#include <vector>

#include "cchain/certainty.hpp"
#include "support.hpp"

using namespace cchain;
using testsupport::uniform;

namespace {

CertaintyValue cv(double p) { return CertaintyValue(p); }

// Textbook combination on the [-1, 1] fraction scale, written independently.
double oracle_combine(double x, double y) {
  x /= 100.0;
  y /= 100.0;
  double r;
  if (x >= 0 && y >= 0) {
    r = x + y - x * y;
  } else if (x < 0 && y < 0) {
    r = x + y + x * y;
  } else {
    r = (x + y) / (1.0 - std::min(std::fabs(x), std::fabs(y)));
  }
  return r * 100.0;
}

constexpr int kCases = 2000;

}  // namespace

TEST(CertaintyValue, RangeChecked) {
  EXPECT_NO_THROW(cv(-100));
  EXPECT_NO_THROW(cv(100));
  EXPECT_THROW(cv(100.5), Error);
  EXPECT_THROW(cv(-101), Error);
  EXPECT_THROW(cv(std::nan("")), Error);
  try {
    cv(150);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::range);
  }
  EXPECT_THROW(CertaintyEffect(1.2), Error);
}

TEST(RuleCf, ScalesPremiseByAntecedent) {
  EXPECT_DOUBLE_EQ(rule_cf(cv(100), cv(89)).percent(), 89.0);
  EXPECT_DOUBLE_EQ(rule_cf(cv(80), cv(50)).percent(), 40.0);
  EXPECT_THROW(rule_cf(cv(-10), cv(50)), Error);
}

TEST(ConjoinPremises, IsMinimum) {
  std::vector<CertaintyValue> v{cv(70), cv(40), cv(90)};
  EXPECT_DOUBLE_EQ(conjoin_premises(v).percent(), 40.0);
  EXPECT_THROW(conjoin_premises({}), Error);
}

TEST(CombineCf, WorkedValues) {
  EXPECT_NEAR(combine_cf(cv(60), cv(40)).percent(), 76.0, 1e-12);
  EXPECT_NEAR(combine_cf(cv(-60), cv(-40)).percent(), -76.0, 1e-12);
  EXPECT_NEAR(combine_cf(cv(60), cv(-40)).percent(), 20.0 / 0.6, 1e-12);
  EXPECT_NEAR(combine_cf(cv(100), cv(-40)).percent(), 100.0, 1e-12);
}

TEST(CombineCf, OppositeCertaintiesAreUndefined) {
  try {
    combine_cf(cv(100), cv(-100));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined_combination);
  }
}

TEST(CombineCf, MatchesIndependentOracle) {
  for (int i = 0; i < kCases; ++i) {
    double x = uniform(-100, 100), y = uniform(-100, 100);
    if (std::fabs(x) > 99.9 && std::fabs(y) > 99.9 && x * y < 0) continue;
    EXPECT_NEAR(combine_cf(cv(x), cv(y)).percent(), std::clamp(oracle_combine(x, y), -100.0, 100.0), 1e-9)
        << x << " " << y;
  }
}

TEST(CombineCfProperty, Commutative) {
  for (int i = 0; i < kCases; ++i) {
    double x = uniform(-100, 100), y = uniform(-100, 100);
    EXPECT_NEAR(combine_cf(cv(x), cv(y)).percent(), combine_cf(cv(y), cv(x)).percent(), 1e-9);
  }
}

TEST(CombineCfProperty, AssociativeOnEachSign) {
  for (int i = 0; i < kCases; ++i) {
    const double sign = i % 2 ? 1.0 : -1.0;
    auto x = cv(sign * uniform(0, 100)), y = cv(sign * uniform(0, 100)), z = cv(sign * uniform(0, 100));
    EXPECT_NEAR(combine_cf(combine_cf(x, y), z).percent(), combine_cf(x, combine_cf(y, z)).percent(), 1e-9);
  }
}

TEST(CombineCfProperty, ZeroIsIdentity) {
  for (int i = 0; i < kCases; ++i) {
    double x = uniform(-100, 100);
    EXPECT_NEAR(combine_cf(cv(x), cv(0)).percent(), x, 1e-12);
    EXPECT_NEAR(combine_cf(cv(0), cv(x)).percent(), x, 1e-12);
  }
}

TEST(CombineCfProperty, HundredAbsorbs) {
  for (int i = 0; i < kCases; ++i) {
    double x = uniform(0, 100);
    EXPECT_DOUBLE_EQ(combine_cf(cv(100), cv(x)).percent(), 100.0);
    EXPECT_DOUBLE_EQ(combine_cf(cv(x), cv(100)).percent(), 100.0);
  }
}

TEST(CombineCfProperty, ClosedOnNonNegatives) {
  for (int i = 0; i < kCases; ++i) {
    double r = combine_cf(cv(uniform(0, 100)), cv(uniform(0, 100))).percent();
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 100.0);
  }
}

TEST(CombineCfProperty, MonotoneInEachArgument) {
  for (int i = 0; i < kCases; ++i) {
    double x = uniform(0, 100), y1 = uniform(0, 100), y2 = uniform(0, 100);
    if (y1 > y2) std::swap(y1, y2);
    EXPECT_LE(combine_cf(cv(x), cv(y1)).percent(), combine_cf(cv(x), cv(y2)).percent() + 1e-12);
    // Combining never lowers the stronger piece of evidence.
    EXPECT_GE(combine_cf(cv(x), cv(y1)).percent() + 1e-12, std::max(x, y1));
  }
}

TEST(CombineCfProperty, SignSymmetric) {
  for (int i = 0; i < kCases; ++i) {
    double x = uniform(-100, 100), y = uniform(-100, 100);
    if (std::fabs(x) > 99.9 && std::fabs(y) > 99.9 && x * y < 0) continue;
    EXPECT_NEAR(combine_cf(cv(x), cv(y)).percent(), -combine_cf(cv(-x), cv(-y)).percent(), 1e-9);
  }
}

TEST(CombineMany, LeftFold) {
  std::vector<CertaintyValue> v{cv(50), cv(50), cv(50)};
  EXPECT_NEAR(combine_many(v).percent(), 87.5, 1e-12);
  EXPECT_THROW(combine_many({}), Error);
}

TEST(CertaintyDegree, MeanOfFiredRules) {
  std::vector<CertaintyValue> v{cv(89), cv(97), cv(89), cv(90), cv(66), cv(88), cv(97), cv(94)};
  EXPECT_NEAR(certainty_degree(v), 0.8875, 1e-12);
  try {
    certainty_degree({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_evidence);
  }
}

TEST(DisplayPercent, RoundsHalfUp) {
  EXPECT_EQ(display_percent(0.8875), 89);
  EXPECT_EQ(display_percent(0.885), 89);
  EXPECT_EQ(display_percent(0.8849), 88);
  EXPECT_EQ(display_percent(0.0), 0);
  EXPECT_EQ(display_percent(1.0), 100);
}
