#pragma once

#include <cstdint>
#include <regex>
#include <string>
#include <vector>

#include "familia/errors.hpp"

namespace familia {

// Per-iteration sampler plan.  Grammar:
//   GS              every iteration collapsed Gibbs
//   MH / MH<s>      every iteration Metropolis-Hastings with s steps (default 1)
//   <a>MH-<b>GS     repeating cycle: a MH iterations then b GS iterations
//   GS-to-MH@<t>    GS for the first t iterations, MH afterwards
//   MH-to-GS@<t>    MH for the first t iterations, GS afterwards

enum class SamplerKind { GS, MH };

struct ScheduleEntry {
  SamplerKind kind = SamplerKind::GS;
  std::int32_t mh_steps = 1;  // meaningful for MH entries only
  bool operator==(const ScheduleEntry&) const = default;
};

using Schedule = std::vector<ScheduleEntry>;

inline Schedule parse_schedule(const std::string& expr,
                               std::int32_t total_iterations) {
  if (total_iterations < 1) {
    throw MalformedSchedule("schedule: need at least one iteration");
  }
  static const std::regex gs_re("GS");
  static const std::regex mh_re("MH([0-9]*)");
  static const std::regex cycle_re("([0-9]+)MH-([0-9]+)GS");
  static const std::regex gs_to_mh_re("GS-to-MH@([0-9]+)");
  static const std::regex mh_to_gs_re("MH-to-GS@([0-9]+)");

  const ScheduleEntry gs{SamplerKind::GS, 1};
  const auto mh = [](std::int32_t steps) {
    return ScheduleEntry{SamplerKind::MH, steps};
  };

  const auto number = [](const std::ssub_match& sm) -> std::int32_t {
    try {
      return std::stoi(sm.str());
    } catch (const std::exception&) {
      throw MalformedSchedule("schedule: number out of range");
    }
  };

  std::smatch m;
  Schedule plan;
  plan.reserve(total_iterations);

  if (std::regex_match(expr, m, gs_re)) {
    plan.assign(total_iterations, gs);
  } else if (std::regex_match(expr, m, mh_re)) {
    const std::int32_t steps = m[1].length() ? number(m[1]) : 1;
    if (steps < 1) throw MalformedSchedule("schedule: MH steps must be >= 1");
    plan.assign(total_iterations, mh(steps));
  } else if (std::regex_match(expr, m, cycle_re)) {
    const std::int32_t a = number(m[1]);
    const std::int32_t b = number(m[2]);
    if (a < 1 || b < 1) {
      throw MalformedSchedule("schedule: cycle lengths must be >= 1");
    }
    for (std::int32_t i = 0; i < total_iterations; ++i) {
      plan.push_back(i % (a + b) < a ? mh(1) : gs);
    }
  } else if (std::regex_match(expr, m, gs_to_mh_re)) {
    const std::int32_t t = number(m[1]);
    for (std::int32_t i = 0; i < total_iterations; ++i) {
      plan.push_back(i < t ? gs : mh(1));
    }
  } else if (std::regex_match(expr, m, mh_to_gs_re)) {
    const std::int32_t t = number(m[1]);
    for (std::int32_t i = 0; i < total_iterations; ++i) {
      plan.push_back(i < t ? mh(1) : gs);
    }
  } else {
    throw MalformedSchedule("schedule: cannot parse '" + expr + "'");
  }
  return plan;
}

inline const char* sampler_name(SamplerKind kind) {
  return kind == SamplerKind::GS ? "GS" : "MH";
}

}  // namespace familia
