#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulsectl/planner/plan.hpp"
#include "pulsectl/proto/emulator.hpp"
#include "pulsectl/proto/host_driver.hpp"
#include "pulsectl/signal/chain.hpp"

namespace pulsectl::bench {

// Pinned thresholds.
namespace criteria {
inline constexpr double delay_tolerance_s = 25e-12;
inline constexpr double delay_runtime_limit_s = 10.0;
inline constexpr double rise_nominal_s = 1.0e-9;
inline constexpr double rise_nominal_rel_tol = 0.02;
inline constexpr double rise_control_tau_s = 1.0e-9;
inline constexpr double rise_control_rel_tol = 0.01;
inline constexpr double injected_plateau_v = 8.0;
inline constexpr double protocol_runtime_limit_s = 30.0;
inline constexpr std::size_t fuzz_iterations = 100000;
inline constexpr double crossover_tolerance_km = 1e-3;
inline constexpr double crossover_residual_db = 1e-3;
// Largest root of 0.2 d - 20 log10(d) = 0 (alpha = 0.2 dB/km, d_ref = 1 km,
// L0 = 0), from an independent bracketing root finder.
inline constexpr double crossover_oracle_km = 237.581208759;
inline constexpr int link_grid_points = 50;
}

struct SuiteConfig {
  CaptureConfig capture;
  PulseTiming timing;
  ChannelId channel;  // output under test, AC1 by default
  std::size_t fuzz_iterations = criteria::fuzz_iterations;
  uint64_t seed = 20180601;
  planner::ModulatorCalibration calibration;
};

enum class CriterionStatus { Pass, Fail, NotRun };

struct CriterionResult {
  std::string id;
  std::string title;
  CriterionStatus status = CriterionStatus::NotRun;
  std::string detail;
  nlohmann::json measured = nlohmann::json::object();
  double elapsed_s = 0.0;
};

struct SuiteReport {
  std::vector<CriterionResult> criteria;
  bool aborted = false;
  std::string abort_reason;

  bool all_passed() const;
};

// Runs every bench criterion against a device reached through `control`, with
// the scope probing `probe`'s outputs. A transport or protocol failure aborts
// the run; criteria not reached are reported as not run.
SuiteReport run_acceptance_suite(proto::HostDriver& control, const proto::DeviceEmulator& probe,
                                 const SuiteConfig& config = {});

// Machine-readable form. Wall-clock times are left out so that equal devices
// give byte-identical reports.
nlohmann::json report_to_json(const SuiteReport& report);
// One line per criterion, plus its detail. Also free of wall-clock times.
std::string report_table(const SuiteReport& report);

std::string_view to_string(CriterionStatus s);

}
