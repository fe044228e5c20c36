#pragma once

#include "tqreg/diagnostics.hpp"
#include "tqreg/samplers.hpp"
#include "tqreg/simstudy.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <utility>
#include <vector>

namespace tqreg {

// Floating-point output uses 17 significant digits everywhere so files
// round-trip bit-exactly.
std::string format_double(double v);

// One row per retained iteration, one column per parameter.
void save_draws_csv(const Chain& chain, const std::string& path);

struct DrawsFile {
  std::vector<std::string> names;
  arma::mat draws;
};

DrawsFile load_draws_csv(const std::string& path);

void save_summary_json(const std::vector<std::pair<std::string, SummaryReport>>& blocks,
                       const std::string& path);

void save_report_csv(const ReplicationReport& report, const std::string& path);
void save_report_json(const ReplicationReport& report, const std::string& path);

void save_truths_json(const Truths& truths, const std::string& path);

}  // namespace tqreg
