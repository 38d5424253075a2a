#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmfit/fit.hpp"
#include "rmfit/mesh.hpp"

namespace rmfit {

// FNV-1a, the provenance hash embedded in every output file.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a_double(double v, std::uint64_t h) {
  return fnv1a(&v, sizeof v, h);
}

inline std::uint64_t fnv1a_int(std::int64_t v, std::uint64_t h) {
  return fnv1a(&v, sizeof v, h);
}

// Flat key=value config (keys: l, l1_factor, l2_factor, matrix_lambda,
// matrix_mu, inclusion_lambda, inclusion_mu; '#' comments). Missing keys keep
// the defaults; unknown keys are an error.
UnitCellGeometry parse_config(const std::string& path);

void save_reference(const ReferenceDataset& ref, const std::string& path);
ReferenceDataset load_reference(const std::string& path);

// Iteration table in the style of the result figures: one row per iterate,
// parameters then r2; mu_eq > 0 appends a derived Lc column for models whose
// parameter list contains mu_lc_sq.
void save_report(const FitReport& report, const std::string& path,
                 std::uint64_t provenance, double mu_eq = 0.0);

// Sweep CSV: header + one row per record.
struct SweepRecord {
  std::string model;
  std::string mode;
  double n = 0.0;
  double energy = 0.0;
};
void save_sweep_csv(const std::vector<SweepRecord>& records,
                    const std::string& path, std::uint64_t provenance);

}  // namespace rmfit
