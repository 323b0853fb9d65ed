#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "psim/case.hpp"
#include "psim/hybrid.hpp"
#include "psim/model.hpp"

namespace psim {

/// Aggregated validation failure: every problem found in an input file,
/// one per line, rather than the first only.
class ScenarioError : public std::runtime_error {
  public:
    explicit ScenarioError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

  private:
    std::vector<std::string> problems_;
};

Case parse_case(const std::string& json_text);
Case load_case(const std::string& path);
std::string serialize_case(const Case& c);

EventSchedule parse_schedule(const std::string& json_text);
EventSchedule load_schedule(const std::string& path);
std::string serialize_schedule(const EventSchedule& sched);

/// CSV trace with a deterministic header built from the model's variable
/// names and '#'-prefixed event annotation rows. Values are printed with
/// enough digits to round-trip exactly.
void write_trace_csv(std::ostream& os, const Trace& trace, const DynamicModel& model);
void write_trace_csv(const std::string& path, const Trace& trace, const DynamicModel& model);

struct ParsedTrace {
    std::vector<std::string> columns;  // after the leading "t"
    Trace trace;
};

ParsedTrace parse_trace_csv(std::istream& is);
ParsedTrace load_trace_csv(const std::string& path);

std::string serialize_verdict(const HybridResult& result, const std::string& mode);
void write_verdict(const std::string& path, const HybridResult& result, const std::string& mode);

}  // namespace psim
