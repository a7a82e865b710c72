#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pulsectl::link {

// Distances in km, losses in dB throughout.

struct FiberChannel {
  double alpha_db_per_km = 0.2;
};

// Pure geometric spreading (power ~ 1/d^2) referenced to d_ref; valid for d >= d_ref.
struct FreeSpaceChannel {
  double d_ref_km = 1.0;
  double loss_at_ref_db = 0.0;
};

class NoCrossover: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// alpha * d
double fiber_loss_db(double d_km, const FiberChannel& ch);
// loss_at_ref + 20 log10(d / d_ref)
double freespace_loss_db(double d_km, const FreeSpaceChannel& ch);

// Upper end of the crossover search. Bisection runs to double precision.
inline constexpr double crossover_search_max_km = 1e6;

// Largest distance where fiber and free-space losses are equal; beyond it fiber
// loss is strictly larger. Bracketing starts at the minimum of the loss
// difference (or d_ref) and bisects to 1 m. Throws NoCrossover when fiber loss
// already exceeds free-space loss over the whole model range.
double crossover_distance(const FiberChannel& fiber, const FreeSpaceChannel& fs);

struct LinkBudgetRow {
  double distance_km;
  double fiber_db;
  double freespace_db;
};

// `points` distances spaced evenly over [d_min, d_max], d_min >= d_ref.
std::vector<LinkBudgetRow> link_budget_table(const FiberChannel& fiber, const FreeSpaceChannel& fs, double d_min,
                                             double d_max, int points);

}
