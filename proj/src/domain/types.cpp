#include "dchub/domain/types.hpp"

#include <algorithm>
#include <cstdio>

#include "dchub/domain/errors.hpp"

namespace dchub {

std::string_view to_string(Resource r) {
  switch (r) {
    case Resource::cpu:
      return "CPU";
    case Resource::gpu:
      return "GPU";
    case Resource::mem_cpu:
      return "MEM-CPU";
    case Resource::mem_gpu:
      return "MEM-GPU";
  }
  return "?";
}

std::optional<Resource> parse_resource(std::string_view name) {
  for (Resource r : kAllResources) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

double OrcCurve::power_at(double heat_kw) const {
  if (samples.empty()) return 0.0;
  if (heat_kw <= samples.front().heat_kw) return samples.front().power_kw;
  if (heat_kw >= samples.back().heat_kw) return samples.back().power_kw;
  auto hi = std::upper_bound(samples.begin(), samples.end(), heat_kw,
                             [](double q, const OrcSample& s) { return q < s.heat_kw; });
  auto lo = hi - 1;
  const double w = (heat_kw - lo->heat_kw) / (hi->heat_kw - lo->heat_kw);
  return lo->power_kw + w * (hi->power_kw - lo->power_kw);
}

std::chrono::sys_seconds parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  const std::string buf(text);
  const int n = std::sscanf(buf.c_str(), "%4d-%2d-%2d%*1[T ]%2d:%2d:%2d", &y, &mo, &d, &h, &mi, &s);
  if (n != 6 && std::sscanf(buf.c_str(), "%4d-%2d-%2d", &y, &mo, &d) != 3) {
    throw InputError("invalid ISO-8601 timestamp '" + buf + "'");
  }
  if (n != 6) h = mi = s = 0;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw InputError("invalid ISO-8601 timestamp '" + buf + "'");
  }
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{s};
}

std::string format_timestamp(std::chrono::sys_seconds t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char out[64];
  std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), long(hms.hours().count()),
                long(hms.minutes().count()), long(hms.seconds().count()));
  return out;
}

}  // namespace dchub
