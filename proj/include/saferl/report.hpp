#pragma once

#include <string>
#include <vector>

namespace saferl {

// Aggregates summary.json files from run directories into one comparison
// table CSV keyed by (env, algorithm, wiring, mitigation, w). Duplicate
// runs (same manifest hash) are collapsed; missing or unreadable
// directories are listed on stderr but not fatal.
void write_report(const std::vector<std::string>& run_dirs, const std::string& out_csv);

}  // namespace saferl
