#pragma once

// Certainty-factor arithmetic on the percent scale.
//
// Values live in [-100, +100]; everything the knowledge bases and sessions
// produce stays in [0, 100], the negative half exists so that the combination
// rule is total over its sign branches.

#include <algorithm>
#include <cmath>
#include <compare>
#include <numeric>
#include <span>
#include <string>

#include "cchain/error.hpp"

namespace cchain {

class CertaintyValue {
 public:
  constexpr CertaintyValue() = default;

  explicit CertaintyValue(double percent) : percent_(percent) {
    if (!(percent >= -100.0 && percent <= 100.0)) {
      throw Error(ErrorKind::range,
                  "certainty value " + std::to_string(percent) + " outside [-100, 100]");
    }
  }

  constexpr double percent() const noexcept { return percent_; }
  constexpr double fraction() const noexcept { return percent_ / 100.0; }

  friend constexpr auto operator<=>(const CertaintyValue&, const CertaintyValue&) = default;

 private:
  double percent_ = 0.0;
};

/// Fraction in [0, 1]. Compared against user answers in percent form, so an
/// effect of 0.484 acts as a threshold of 48.4.
class CertaintyEffect {
 public:
  constexpr CertaintyEffect() = default;

  explicit CertaintyEffect(double fraction) : fraction_(fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
      throw Error(ErrorKind::range,
                  "certainty effect " + std::to_string(fraction) + " outside [0, 1]");
    }
  }

  constexpr double fraction() const noexcept { return fraction_; }
  constexpr double percent() const noexcept { return fraction_ * 100.0; }

  friend constexpr auto operator<=>(const CertaintyEffect&, const CertaintyEffect&) = default;

 private:
  double fraction_ = 0.0;
};

namespace detail {

inline void require_non_negative(CertaintyValue v, const char* what) {
  if (v.percent() < 0.0) {
    throw Error(ErrorKind::range,
                std::string(what) + " must be in [0, 100], got " + std::to_string(v.percent()));
  }
}

// Clamp tiny floating excursions produced by the algebra back onto the scale.
inline CertaintyValue clamp_percent(double p) {
  return CertaintyValue(std::clamp(p, -100.0, 100.0));
}

}  // namespace detail

/// Certainty of a rule's conclusion: antecedent x premise / 100.
inline CertaintyValue rule_cf(CertaintyValue antecedent_cf, CertaintyValue premise_cf) {
  detail::require_non_negative(antecedent_cf, "antecedent CF");
  detail::require_non_negative(premise_cf, "premise CF");
  return detail::clamp_percent(antecedent_cf.percent() * premise_cf.percent() / 100.0);
}

/// Conjunction of a rule's premises (minimum).
inline CertaintyValue conjoin_premises(std::span<const CertaintyValue> premise_cfs) {
  if (premise_cfs.empty()) {
    throw Error(ErrorKind::empty_input, "conjunction of zero premises");
  }
  for (auto cf : premise_cfs) detail::require_non_negative(cf, "premise CF");
  return *std::min_element(premise_cfs.begin(), premise_cfs.end());
}

/// Merge two pieces of evidence for the same conclusion.
///
///   both >= 0 : x + y(100 - x)/100
///   both <= 0 : -combine(-x, -y)
///   mixed     : (x + y) / (1 - min(|x|, |y|)/100)
///
/// The same-sign case is evaluated as 100 - (100 - x)(100 - y)/100, which is
/// the same quantity but yields exactly 100 when either side is 100.
inline CertaintyValue combine_cf(CertaintyValue x, CertaintyValue y) {
  const double a = x.percent();
  const double b = y.percent();
  if (a >= 0.0 && b >= 0.0) {
    return detail::clamp_percent(100.0 - (100.0 - a) * (100.0 - b) / 100.0);
  }
  if (a <= 0.0 && b <= 0.0) {
    return detail::clamp_percent(-(100.0 - (100.0 + a) * (100.0 + b) / 100.0));
  }
  const double smaller = std::min(std::abs(a), std::abs(b));
  if (smaller >= 100.0) {
    throw Error(ErrorKind::undefined_combination,
                "combining +100 with -100 is undefined");
  }
  return detail::clamp_percent((a + b) / (1.0 - smaller / 100.0));
}

/// Left fold of combine_cf.
inline CertaintyValue combine_many(std::span<const CertaintyValue> cfs) {
  if (cfs.empty()) {
    throw Error(ErrorKind::empty_input, "combination of zero certainty values");
  }
  return std::accumulate(cfs.begin() + 1, cfs.end(), cfs.front(), combine_cf);
}

/// Mean of the fired goal-rule CFs, as a fraction in [0, 1].
inline double certainty_degree(std::span<const CertaintyValue> fired_rule_cfs) {
  if (fired_rule_cfs.empty()) {
    throw Error(ErrorKind::no_evidence, "no fired rules to average");
  }
  double sum = 0.0;
  for (auto cf : fired_rule_cfs) {
    detail::require_non_negative(cf, "fired rule CF");
    sum += cf.percent();
  }
  const double mean_percent = sum / static_cast<double>(fired_rule_cfs.size());
  return std::clamp(mean_percent / 100.0, 0.0, 1.0);
}

/// Nearest integer percent, as shown to users (0.8875 -> 89).
inline int display_percent(double fraction) {
  // Nudge so that x.5 stored as x.4999999... still rounds up.
  return static_cast<int>(std::lround(fraction * 100.0 + 1e-9));
}

}  // namespace cchain
