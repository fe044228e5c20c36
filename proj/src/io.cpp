#include "tqreg/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tqreg {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void save_draws_csv(const Chain& chain, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write draws: " + path);
  for (std::size_t j = 0; j < chain.names.size(); ++j) {
    if (j) out << ",";
    out << chain.names[j];
  }
  bool latents = chain.g_draws.n_rows == chain.draws.n_rows &&
                 chain.g_draws.n_cols > 0;
  if (latents) {
    for (arma::uword i = 0; i < chain.g_draws.n_cols; ++i) out << ",g_" << i;
    for (arma::uword i = 0; i < chain.ystar_draws.n_cols; ++i) out << ",ystar_" << i;
    for (arma::uword i = 0; i < chain.h_draws.n_cols; ++i) out << ",h_" << i;
  }
  out << "\n";
  for (arma::uword r = 0; r < chain.draws.n_rows; ++r) {
    for (arma::uword j = 0; j < chain.draws.n_cols; ++j) {
      if (j) out << ",";
      out << format_double(chain.draws(r, j));
    }
    if (latents) {
      for (arma::uword i = 0; i < chain.g_draws.n_cols; ++i) {
        out << "," << format_double(chain.g_draws(r, i));
      }
      for (arma::uword i = 0; i < chain.ystar_draws.n_cols; ++i) {
        out << "," << format_double(chain.ystar_draws(r, i));
      }
      for (arma::uword i = 0; i < chain.h_draws.n_cols; ++i) {
        out << "," << format_double(chain.h_draws(r, i));
      }
    }
    out << "\n";
  }
}

DrawsFile load_draws_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open draws: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty draws file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  DrawsFile file;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) file.names.push_back(field);
  }
  if (file.names.empty()) throw std::runtime_error("malformed draws header: " + path);

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        vals.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                 ": cannot parse '" + field + "'");
      }
    }
    if (vals.size() != file.names.size()) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": wrong field count");
    }
    rows.push_back(std::move(vals));
  }
  file.draws.set_size(rows.size(), file.names.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < file.names.size(); ++j) {
      file.draws(r, j) = rows[r][j];
    }
  }
  return file;
}

namespace {

json summary_block_json(const SummaryReport& report) {
  json params = json::array();
  for (const ParameterSummary& ps : report.parameters) {
    json p = {{"name", ps.name},
              {"mean", ps.mean},
              {"lower", ps.lower},
              {"upper", ps.upper}};
    p["inefficiency"] = std::isfinite(ps.inefficiency)
                            ? json(ps.inefficiency)
                            : json(nullptr);
    if (std::isfinite(ps.psrf)) {
      p["psrf"] = ps.psrf;
      p["psrf_upper"] = ps.psrf_upper;
    }
    params.push_back(std::move(p));
  }
  return {{"level", report.level}, {"parameters", std::move(params)}};
}

}  // namespace

void save_summary_json(const std::vector<std::pair<std::string, SummaryReport>>& blocks,
                       const std::string& path) {
  json fits = json::array();
  for (const auto& [label, report] : blocks) {
    json block = summary_block_json(report);
    block["fit"] = label;
    fits.push_back(std::move(block));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary: " + path);
  out << json{{"fits", std::move(fits)}}.dump(2) << "\n";
}

void save_report_csv(const ReplicationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "setting,model,p,parameter,bias,rmse,median_if,mean_censoring_rate\n";
  for (const ReplicationRow& row : report.rows) {
    out << report.setting << "," << row.model << "," << format_double(row.p)
        << "," << row.parameter << "," << format_double(row.bias) << ","
        << format_double(row.rmse) << "," << format_double(row.median_if) << ","
        << format_double(report.mean_censoring_rate) << "\n";
  }
}

void save_report_json(const ReplicationReport& report, const std::string& path) {
  json rows = json::array();
  for (const ReplicationRow& row : report.rows) {
    rows.push_back({{"model", row.model},
                    {"p", row.p},
                    {"parameter", row.parameter},
                    {"bias", row.bias},
                    {"rmse", row.rmse},
                    {"median_if", row.median_if}});
  }
  json j = {{"setting", report.setting},
            {"reps", report.reps},
            {"n", report.n},
            {"mean_censoring_rate", report.mean_censoring_rate},
            {"rows", std::move(rows)},
            {"failures", report.failures}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

void save_truths_json(const Truths& truths, const std::string& path) {
  json j = {{"setting", truths.setting},
            {"beta0", truths.beta0},
            {"beta1", truths.beta1},
            {"delta", truths.delta},
            {"eta", truths.eta},
            {"gamma", std::vector<double>(truths.gamma.begin(), truths.gamma.end())},
            {"beta_p0_rule",
             "beta0 plus the p-quantile of the second-stage error"}};
  if (truths.setting == 0) j["rho"] = truths.rho;
  if (truths.setting == 6) j["gamma_w"] = truths.gamma_w;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write truths: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tqreg
