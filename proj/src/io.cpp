#include "rmfit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rmfit {

UnitCellGeometry parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_config: cannot open " + path);
  UnitCellGeometry geom;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    const auto eq = key.find('=');
    double value;
    if (eq != std::string::npos) {
      // key=value without spaces
      value = std::stod(key.substr(eq + 1));
      key.erase(eq);
    } else {
      std::string eqtok;
      if (!(ss >> eqtok >> value) || eqtok != "=")
        throw std::runtime_error("parse_config: bad line " +
                                 std::to_string(lineno) + " in " + path);
    }
    if (key == "l")
      geom.l = value;
    else if (key == "l1_factor")
      geom.l1_factor = value;
    else if (key == "l2_factor")
      geom.l2_factor = value;
    else if (key == "matrix_lambda")
      geom.matrix.lambda = value;
    else if (key == "matrix_mu")
      geom.matrix.mu = value;
    else if (key == "inclusion_lambda")
      geom.inclusion.lambda = value;
    else if (key == "inclusion_mu")
      geom.inclusion.mu = value;
    else
      throw std::runtime_error("parse_config: unknown key '" + key + "' in " +
                               path);
  }
  geom.validate();
  return geom;
}

void save_reference(const ReferenceDataset& ref, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("save_reference: cannot open " + path);
  std::fprintf(f, "# reference dataset, provenance %016llx\n",
               static_cast<unsigned long long>(ref.provenance));
  std::fprintf(f, "geom %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", ref.geom.l,
               ref.geom.l1_factor, ref.geom.l2_factor, ref.geom.matrix.lambda,
               ref.geom.matrix.mu, ref.geom.inclusion.lambda,
               ref.geom.inclusion.mu);
  std::fprintf(f, "bc %d refine %d\n", static_cast<int>(ref.bc), ref.refine);
  std::fprintf(f, "sizes %zu", ref.sizes.size());
  for (int n : ref.sizes) std::fprintf(f, " %d", n);
  std::fprintf(f, "\nmodes %zu\n", ref.modes.size());
  for (const auto& m : ref.modes) {
    std::fprintf(f, "%s\n", m.label.empty() ? "-" : m.label.c_str());
    std::fprintf(f, "%.17g %.17g %.17g %.17g\n", m.B(0, 0), m.B(0, 1), m.B(1, 0),
                 m.B(1, 1));
    std::fprintf(f, "%.17g %.17g %.17g %.17g %.17g %.17g\n", m.C(0, 0),
                 m.C(0, 1), m.C(0, 2), m.C(1, 0), m.C(1, 1), m.C(1, 2));
  }
  std::fprintf(f, "energies %zu\n", ref.energies.size());
  for (double e : ref.energies) std::fprintf(f, "%.17g\n", e);
  std::fclose(f);
}

ReferenceDataset load_reference(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw std::runtime_error("load_reference: cannot open " + path);
  ReferenceDataset ref;
  unsigned long long prov = 0;
  int bc = 0;
  size_t n_sizes = 0, n_modes = 0, n_energies = 0;
  bool ok = std::fscanf(f, "# reference dataset, provenance %llx\n", &prov) == 1;
  ok = ok && std::fscanf(f, "geom %lf %lf %lf %lf %lf %lf %lf\n", &ref.geom.l,
                         &ref.geom.l1_factor, &ref.geom.l2_factor,
                         &ref.geom.matrix.lambda, &ref.geom.matrix.mu,
                         &ref.geom.inclusion.lambda,
                         &ref.geom.inclusion.mu) == 7;
  ok = ok && std::fscanf(f, "bc %d refine %d\n", &bc, &ref.refine) == 2;
  ok = ok && std::fscanf(f, "sizes %zu", &n_sizes) == 1;
  for (size_t i = 0; ok && i < n_sizes; ++i) {
    int n;
    ok = std::fscanf(f, "%d", &n) == 1;
    ref.sizes.push_back(n);
  }
  ok = ok && std::fscanf(f, "\nmodes %zu\n", &n_modes) == 1;
  char label[256];
  for (size_t i = 0; ok && i < n_modes; ++i) {
    DeformationMode m;
    ok = std::fscanf(f, "%255s", label) == 1 &&
         std::fscanf(f, "%lf %lf %lf %lf", &m.B(0, 0), &m.B(0, 1), &m.B(1, 0),
                     &m.B(1, 1)) == 4 &&
         std::fscanf(f, "%lf %lf %lf %lf %lf %lf", &m.C(0, 0), &m.C(0, 1),
                     &m.C(0, 2), &m.C(1, 0), &m.C(1, 1), &m.C(1, 2)) == 6;
    if (ok) {
      m.label = std::string(label) == "-" ? "" : label;
      ref.modes.push_back(m);
    }
  }
  ok = ok && std::fscanf(f, " energies %zu", &n_energies) == 1;
  for (size_t i = 0; ok && i < n_energies; ++i) {
    double e;
    ok = std::fscanf(f, "%lf", &e) == 1;
    ref.energies.push_back(e);
  }
  std::fclose(f);
  if (!ok) throw std::runtime_error("load_reference: malformed file " + path);
  ref.bc = static_cast<RefBc>(bc);
  ref.provenance = prov;
  return ref;
}

void save_report(const FitReport& report, const std::string& path,
                 std::uint64_t provenance, double mu_eq) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("save_report: cannot open " + path);
  std::fprintf(f, "# fit report, provenance %016llx\n",
               static_cast<unsigned long long>(provenance));
  int i_lc = -1;
  std::fprintf(f, "iteration");
  for (size_t k = 0; k < report.param_names.size(); ++k) {
    std::fprintf(f, "\t%s", report.param_names[k].c_str());
    if (report.param_names[k] == "mu_lc_sq") i_lc = static_cast<int>(k);
  }
  if (mu_eq > 0.0 && i_lc >= 0) std::fprintf(f, "\tLc");
  std::fprintf(f, "\tr2\tbeta\tbeta_max\texcluded\n");
  for (size_t it = 0; it < report.trace.size(); ++it) {
    const auto& row = report.trace[it];
    std::fprintf(f, "%zu", it);
    for (int k = 0; k < row.theta.size(); ++k)
      std::fprintf(f, "\t%.10g", row.theta(k));
    if (mu_eq > 0.0 && i_lc >= 0)
      std::fprintf(f, "\t%.10g", std::sqrt(row.theta(i_lc) / mu_eq));
    std::fprintf(f, "\t%.10g\t%.10g\t%.10g\t", row.r2, row.beta, row.beta_max);
    if (row.excluded.empty()) {
      std::fprintf(f, "-");
    } else {
      for (size_t k = 0; k < row.excluded.size(); ++k)
        std::fprintf(f, "%s%s", k ? "," : "",
                     report.param_names[row.excluded[k]].c_str());
    }
    std::fprintf(f, "\n");
  }
  std::fprintf(f, "# converged=%d stalled=%d reason=%s\n", report.converged,
               report.stalled, report.reason.c_str());
  std::fclose(f);
}

void save_sweep_csv(const std::vector<SweepRecord>& records,
                    const std::string& path, std::uint64_t provenance) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("save_sweep_csv: cannot open " + path);
  std::fprintf(f, "# provenance %016llx\n",
               static_cast<unsigned long long>(provenance));
  std::fprintf(f, "model,mode,n,energy_kN_mm\n");
  for (const auto& r : records)
    std::fprintf(f, "%s,%s,%.10g,%.17g\n", r.model.c_str(), r.mode.c_str(), r.n,
                 r.energy);
  std::fclose(f);
}

}  // namespace rmfit
