#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pulsectl/planner/plan.hpp"

namespace pulsectl::planner {

class PlanFormatError: public std::runtime_error {
  public:
    PlanFormatError(int line, const std::string& what);
    int line() const { return line_; }

  private:
    int line_;
};

// Symbol files: one `intensity,basis,bit` per line (e.g. `signal,Z,0`);
// blank lines and `#` comments are skipped.
QkdSymbol parse_symbol(std::string_view text);
std::vector<QkdSymbol> parse_symbols(std::string_view text);
std::string format_symbol(const QkdSymbol& s);

// One slot per line: `slot_index | intensity,basis,bit | CH:amp:delay,...`
// with firings in wire order.
std::string format_plan(const PulsePlan& plan);
// Timing is not serialised; it is rebuilt from the calibration.
PulsePlan parse_plan(std::string_view text, const ModulatorCalibration& cal);

}
