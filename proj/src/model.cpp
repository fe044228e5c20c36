#include "tqreg/model.hpp"

#include "tqreg/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tqreg {

arma::vec CensoredDataset::z_row(arma::uword i) const {
  arma::vec z(X.n_cols + 1);
  for (arma::uword j = 0; j < X.n_cols; ++j) z(j) = X(i, j);
  z(X.n_cols) = w(i);
  return z;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::TQR: return "tqr";
    case Family::AL: return "al";
    case Family::SN: return "sn";
    case Family::AEP: return "aep";
    case Family::ALDP: return "aldp";
    case Family::SNDP: return "sndp";
  }
  throw std::logic_error("unreachable");
}

Family family_from_name(const std::string& name) {
  if (name == "tqr") return Family::TQR;
  if (name == "al") return Family::AL;
  if (name == "sn") return Family::SN;
  if (name == "aep") return Family::AEP;
  if (name == "aldp") return Family::ALDP;
  if (name == "sndp") return Family::SNDP;
  throw std::invalid_argument("unknown model family: " + name);
}

bool family_is_dp(Family f) { return f == Family::ALDP || f == Family::SNDP; }

bool family_is_endogenous(Family f) { return f != Family::TQR; }

void PriorConfig::validate() const {
  auto pos = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string("prior: ") + what +
                                  " must be positive");
    }
  };
  pos(beta_var, "beta_var");
  pos(eta_var, "eta_var");
  pos(gamma_var, "gamma_var");
  pos(sigma_shape, "sigma_shape");
  pos(sigma_scale, "sigma_scale");
  pos(phi_shape, "phi_shape");
  pos(phi_scale, "phi_scale");
  pos(a_shape, "a_shape");
  pos(a_rate, "a_rate");
  pos(zeta_var, "zeta_var");
}

void resolve_base_measure(PriorConfig& priors, Family family) {
  if (priors.base_shape > 0.0 && priors.base_scale > 0.0) return;
  if (family == Family::SNDP) {
    priors.base_shape = 1.5;
    priors.base_scale = 1.5;
  } else {
    priors.base_shape = 2.0;
    priors.base_scale = 0.5;
  }
}

PriorConfig prior_preset(const std::string& name) {
  PriorConfig p;
  if (name == "default") return p;
  if (name == "alt1") {
    p.eta_var = 25.0;
    p.phi_shape = p.phi_scale = 0.01;
    return p;
  }
  if (name == "alt2") {
    p.eta_var = 100.0;
    p.sigma_shape = p.sigma_scale = 0.001;
    p.phi_shape = p.phi_scale = 0.001;
    return p;
  }
  throw std::invalid_argument("unknown prior preset: " + name);
}

void ModelSpec::validate() const {
  if (!(p > kUnitIntervalEdge && p < 1.0 - kUnitIntervalEdge)) {
    throw std::invalid_argument("quantile level p must lie inside (0,1)");
  }
  priors.validate();
}

ThetaTau theta_tau(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("theta_tau: q must lie in (0,1)");
  }
  double denom = q * (1.0 - q);
  return {(1.0 - 2.0 * q) / denom, 2.0 / denom};
}

arma::vec assemble_design(const arma::vec& x_i, double d_i, const arma::vec& z_i,
                          const arma::vec& gamma) {
  if (z_i.n_elem != x_i.n_elem + 1) {
    throw std::invalid_argument("assemble_design: z must append one instrument to x");
  }
  if (gamma.n_elem != z_i.n_elem) {
    throw std::invalid_argument("assemble_design: gamma not conformable with z");
  }
  arma::vec out(x_i.n_elem + 2);
  out.head(x_i.n_elem) = x_i;
  out(x_i.n_elem) = d_i;
  out(x_i.n_elem + 1) = d_i - arma::dot(z_i, gamma);
  return out;
}

double predict_quantile(const arma::vec& x_tilde, const arma::vec& beta_tilde) {
  if (x_tilde.n_elem != beta_tilde.n_elem) {
    throw std::invalid_argument("predict_quantile: dimension mismatch");
  }
  return std::max(0.0, arma::dot(x_tilde, beta_tilde));
}

std::vector<std::string> validate_dataset(const CensoredDataset& ds) {
  std::vector<std::string> errors;
  arma::uword n = ds.y.n_elem;
  auto bad_len = [&](arma::uword got, const char* what) {
    if (got != n) {
      errors.push_back(std::string(what) + " length " + std::to_string(got) +
                       " does not match n=" + std::to_string(n));
    }
  };
  bad_len(ds.censored.size(), "censored");
  bad_len(ds.X.n_rows, "X rows");
  bad_len(ds.d.n_elem, "d");
  if (ds.w.n_elem != 0) bad_len(ds.w.n_elem, "w");
  if (ds.X.n_cols == 0) {
    errors.push_back("X has no columns; an intercept column is required");
  }
  for (arma::uword i = 0; i < std::min(n, ds.X.n_rows); ++i) {
    if (ds.X(i, 0) != 1.0) {
      errors.push_back("intercept column not constant at index " + std::to_string(i));
      break;
    }
  }
  for (arma::uword i = 0; i < std::min<arma::uword>(n, ds.censored.size()); ++i) {
    if (ds.y(i) < 0.0) {
      errors.push_back("negative response at index " + std::to_string(i));
    }
    bool zero = (ds.y(i) == 0.0);
    if (zero != ds.censored[i]) {
      errors.push_back("censor flag mismatch at index " + std::to_string(i));
    }
  }
  return errors;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

CensoredDataset load_dataset_csv(const std::string& path, bool require_instrument) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);

  int y_col = -1, d_col = -1, w_col = -1;
  std::vector<int> x_cols;
  std::vector<std::string> x_names;
  for (size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "y") y_col = static_cast<int>(j);
    else if (header[j] == "d") d_col = static_cast<int>(j);
    else if (header[j] == "w") w_col = static_cast<int>(j);
    else {
      x_cols.push_back(static_cast<int>(j));
      x_names.push_back(header[j]);
    }
  }
  if (y_col < 0) throw std::runtime_error(path + ": missing required column 'y'");
  if (d_col < 0) throw std::runtime_error(path + ": missing required column 'd'");
  if (require_instrument && w_col < 0) {
    throw std::runtime_error(path + ": missing required column 'w'");
  }

  std::vector<std::vector<double>> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               " has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(header.size()));
    }
    std::vector<double> vals(fields.size());
    for (size_t j = 0; j < fields.size(); ++j) {
      try {
        vals[j] = std::stod(fields[j]);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                 ": cannot parse '" + fields[j] + "'");
      }
    }
    rows.push_back(std::move(vals));
  }

  arma::uword n = rows.size();
  CensoredDataset ds;
  ds.y.set_size(n);
  ds.d.set_size(n);
  ds.censored.resize(n);
  ds.X.set_size(n, 1 + x_cols.size());
  if (w_col >= 0) ds.w.set_size(n);
  ds.x_names = x_names;
  for (arma::uword i = 0; i < n; ++i) {
    ds.y(i) = rows[i][y_col];
    ds.d(i) = rows[i][d_col];
    ds.censored[i] = (ds.y(i) == 0.0);
    ds.X(i, 0) = 1.0;
    for (size_t j = 0; j < x_cols.size(); ++j) ds.X(i, j + 1) = rows[i][x_cols[j]];
    if (w_col >= 0) ds.w(i) = rows[i][w_col];
  }
  return ds;
}

void save_dataset_csv(const CensoredDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  out << "y,d";
  if (ds.has_instrument()) out << ",w";
  for (size_t j = 0; j < ds.x_names.size(); ++j) out << "," << ds.x_names[j];
  out << "\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (arma::uword i = 0; i < ds.n(); ++i) {
    put(ds.y(i));
    out << ",";
    put(ds.d(i));
    if (ds.has_instrument()) {
      out << ",";
      put(ds.w(i));
    }
    for (arma::uword j = 1; j < ds.X.n_cols; ++j) {
      out << ",";
      put(ds.X(i, j));
    }
    out << "\n";
  }
}

}  // namespace tqreg
