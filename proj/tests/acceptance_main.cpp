// Acceptance suite runner: one pass/fail line per criterion, nonzero
// exit if any fail.

#include <cstdio>

#include "physvac/acceptance.hpp"

int main() {
  const auto results = physvac::acceptance::run_all();
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %2d %-28s %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str());
    all = all && r.pass;
  }
  std::printf("%s\n", all ? "acceptance: all criteria pass"
                          : "acceptance: FAILURES present");
  return all ? 0 : 1;
}
