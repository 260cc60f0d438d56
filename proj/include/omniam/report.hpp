#pragma once

#include "omniam/runner.hpp"
#include "omniam/scenario.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace omniam {

using Metrics = std::map<std::string, double>;

/// Scalar summaries of a control log: tracking and estimation RMSE, peak
/// errors, saturation runs, contact-force windows and slide statistics.
/// Columns that a log lacks are skipped.
Metrics computeMetrics(const LogTable& control, const AnalysisConfig& analysis = {});

/// Rise time between 10 % and 90 % of `final_value` for a series that starts
/// near zero; negative if the levels are never reached.
double riseTime(const std::vector<double>& t, const std::vector<double>& y, double final_value);

struct AssertionResult {
  Assertion assertion;
  double value = 0.0;
  bool found = false;
  bool passed = false;
};

std::vector<AssertionResult> evaluateAssertions(const Metrics& metrics, const std::vector<Assertion>& assertions);

void printMetrics(std::ostream& out, const Metrics& metrics);
void printAssertions(std::ostream& out, const std::vector<AssertionResult>& results);

}  // namespace omniam
