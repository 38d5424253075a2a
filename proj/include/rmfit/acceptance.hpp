#pragma once

#include <string>
#include <vector>

namespace rmfit {

struct AcceptanceResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

// Runs the full acceptance suite (12 criteria). Results are ordered by id;
// failures carry the measured values in `detail`.
std::vector<AcceptanceResult> run_acceptance(int threads = 0);

// One line per criterion: "PASS|FAIL  <id>  <name>  <detail>".
void print_acceptance(const std::vector<AcceptanceResult>& results);

}  // namespace rmfit
