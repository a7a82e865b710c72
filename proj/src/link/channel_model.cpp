#include "pulsectl/link/channel_model.hpp"

#include <algorithm>
#include <cmath>

namespace pulsectl::link {

namespace {

void check(const FiberChannel& f) {
  if (!(f.alpha_db_per_km > 0.0)) throw std::invalid_argument("fiber attenuation must be positive");
}

void check(const FreeSpaceChannel& fs) {
  if (!(fs.d_ref_km > 0.0)) throw std::invalid_argument("free-space reference distance must be positive");
  if (!(fs.loss_at_ref_db >= 0.0)) throw std::invalid_argument("free-space reference loss must be non-negative");
}

}

double fiber_loss_db(double d_km, const FiberChannel& ch) {
  check(ch);
  if (!(d_km >= 0.0)) throw std::out_of_range("distance must be non-negative");
  return ch.alpha_db_per_km * d_km;
}

double freespace_loss_db(double d_km, const FreeSpaceChannel& ch) {
  check(ch);
  if (!(d_km >= ch.d_ref_km)) throw std::out_of_range("distance below the free-space reference distance");
  return ch.loss_at_ref_db + 20.0 * std::log10(d_km / ch.d_ref_km);
}

double crossover_distance(const FiberChannel& fiber, const FreeSpaceChannel& fs) {
  check(fiber);
  check(fs);
  auto excess = [&](double d) { return fiber_loss_db(d, fiber) - freespace_loss_db(d, fs); };

  // The excess is convex in d with its minimum at 20 / (alpha ln 10); it only
  // rises past that point, so at most one root lies beyond it.
  double lo = std::max(fs.d_ref_km, 20.0 / (fiber.alpha_db_per_km * std::log(10.0)));
  double hi = crossover_search_max_km;
  if (lo >= hi || excess(lo) > 0.0)
    throw NoCrossover("fiber loss exceeds free-space loss over the whole range from d_ref");
  if (excess(hi) <= 0.0) throw NoCrossover("no crossover below 1e6 km");

  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<LinkBudgetRow> link_budget_table(const FiberChannel& fiber, const FreeSpaceChannel& fs, double d_min,
                                             double d_max, int points) {
  if (points < 2 || !(d_max > d_min)) throw std::invalid_argument("need at least two points over a non-empty range");
  std::vector<LinkBudgetRow> rows;
  rows.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double d = d_min + (d_max - d_min) * i / (points - 1);
    rows.push_back({d, fiber_loss_db(d, fiber), freespace_loss_db(d, fs)});
  }
  return rows;
}

}
