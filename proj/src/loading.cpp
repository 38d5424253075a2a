#include "rmfit/loading.hpp"

#include <cstdio>
#include <random>
#include <stdexcept>

namespace rmfit {

Eigen::Vector2d eval_mode(const DeformationMode& mode, const Eigen::Vector2d& x) {
  const Eigen::Vector3d quad(x.x() * x.x(), x.x() * x.y(), x.y() * x.y());
  return mode.B * x + mode.C * quad;
}

Eigen::Matrix2d mode_mean_strain(const DeformationMode& mode) {
  return 0.5 * (mode.B + mode.B.transpose());
}

std::vector<DeformationMode> random_modes(int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("random_modes: count >= 1 required");
  std::mt19937_64 eng(seed);
  auto draw = [&eng] {
    const double u = static_cast<double>(eng() >> 11) * 0x1p-53;  // [0,1)
    return -0.05 + 0.1 * u;
  };
  std::vector<DeformationMode> modes(count);
  for (int i = 0; i < count; ++i) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) modes[i].B(r, c) = draw();
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) modes[i].C(r, c) = draw();
    modes[i].label = "random-" + std::to_string(seed) + "-" + std::to_string(i);
  }
  return modes;
}

std::vector<DeformationMode> canonical_affine_modes() {
  std::vector<DeformationMode> modes(4);
  modes[0].B << -0.02, 0.03, 0.03, 0.01;
  modes[1].B << 0.03, -0.01, -0.01, 0.05;
  modes[2].B << 0.01, 0.01, 0.01, -0.01;
  modes[3].B << 0.01, 0.0, 0.0, 0.02;
  for (int i = 0; i < 4; ++i) modes[i].label = "eps" + std::to_string(i + 1);
  return modes;
}

std::vector<DeformationMode> validation_modes() {
  std::vector<DeformationMode> modes(4);
  modes[0].B << 0.05, 0.0, 0.0, 0.0;
  modes[0].label = "0.05x,0";
  modes[1].B << 0.0, 0.05, 0.0, 0.0;
  modes[1].label = "0.05y,0";
  modes[2].C(0, 1) = 0.05;
  modes[2].label = "0.05xy,0";
  modes[3].C(1, 0) = 0.05;
  modes[3].label = "0,0.05x^2";
  return modes;
}

void save_modes(const std::vector<DeformationMode>& modes,
                const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("save_modes: cannot open " + path);
  std::fprintf(f, "# modes %zu\n", modes.size());
  for (const auto& m : modes) {
    std::fprintf(f, "%s\n", m.label.empty() ? "-" : m.label.c_str());
    std::fprintf(f, "%.17g %.17g %.17g %.17g\n", m.B(0, 0), m.B(0, 1), m.B(1, 0),
                 m.B(1, 1));
    std::fprintf(f, "%.17g %.17g %.17g %.17g %.17g %.17g\n", m.C(0, 0),
                 m.C(0, 1), m.C(0, 2), m.C(1, 0), m.C(1, 1), m.C(1, 2));
  }
  std::fclose(f);
}

std::vector<DeformationMode> load_modes(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw std::runtime_error("load_modes: cannot open " + path);
  size_t count = 0;
  if (std::fscanf(f, "# modes %zu\n", &count) != 1) {
    std::fclose(f);
    throw std::runtime_error("load_modes: bad header in " + path);
  }
  std::vector<DeformationMode> modes(count);
  char label[256];
  for (size_t i = 0; i < count; ++i) {
    auto& m = modes[i];
    if (std::fscanf(f, "%255s", label) != 1 ||
        std::fscanf(f, "%lf %lf %lf %lf", &m.B(0, 0), &m.B(0, 1), &m.B(1, 0),
                    &m.B(1, 1)) != 4 ||
        std::fscanf(f, "%lf %lf %lf %lf %lf %lf", &m.C(0, 0), &m.C(0, 1),
                    &m.C(0, 2), &m.C(1, 0), &m.C(1, 1), &m.C(1, 2)) != 6) {
      std::fclose(f);
      throw std::runtime_error("load_modes: truncated record in " + path);
    }
    m.label = std::string(label) == "-" ? "" : label;
  }
  std::fclose(f);
  return modes;
}

}  // namespace rmfit
