#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rmfit/io.hpp"

using namespace rmfit;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("config parsing") {
  const std::string path = temp_path("rmfit_config.txt");
  {
    std::ofstream f(path);
    f << "# geometry\n"
      << "l = 2.0\n"
      << "l1_factor = 0.8\n"
      << "matrix_mu = 30.0\n"
      << "inclusion_lambda = 0.01\n";
  }
  const UnitCellGeometry geom = parse_config(path);
  CHECK(geom.l == doctest::Approx(2.0));
  CHECK(geom.l1_factor == doctest::Approx(0.8));
  CHECK(geom.l2_factor == doctest::Approx(0.3));  // default retained
  CHECK(geom.matrix.mu == doctest::Approx(30.0));
  CHECK(geom.matrix.lambda == doctest::Approx(51.08));
  CHECK(geom.inclusion.lambda == doctest::Approx(0.01));

  {
    std::ofstream f(path);
    f << "unknown_key = 1\n";
  }
  CHECK_THROWS(parse_config(path));

  {
    std::ofstream f(path);
    f << "l1_factor = 0.2\n";  // narrower than the default arm width
  }
  CHECK_THROWS(parse_config(path));
  std::filesystem::remove(path);
}

TEST_CASE("reference dataset round trip") {
  ReferenceDataset ref;
  ref.modes = random_modes(3, 9);
  ref.sizes = {1, 2, 4};
  ref.bc = RefBc::Quadratic;
  ref.refine = 2;
  ref.geom.l2_factor = 0.35;
  ref.provenance = reference_provenance(ref.geom, ref.modes, ref.sizes, ref.bc,
                                        ref.refine);
  for (int i = 0; i < 9; ++i) ref.energies.push_back(0.125 * (i + 1));

  const std::string path = temp_path("rmfit_ref.txt");
  save_reference(ref, path);
  const ReferenceDataset back = load_reference(path);
  std::filesystem::remove(path);

  CHECK(back.provenance == ref.provenance);
  CHECK(back.bc == ref.bc);
  CHECK(back.refine == ref.refine);
  CHECK(back.sizes == ref.sizes);
  CHECK(back.geom.l2_factor == doctest::Approx(0.35));
  REQUIRE(back.n_modes() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK((back.modes[i].B - ref.modes[i].B).norm() < 1e-15);
    CHECK((back.modes[i].C - ref.modes[i].C).norm() < 1e-15);
  }
  REQUIRE(back.energies.size() == ref.energies.size());
  for (size_t k = 0; k < ref.energies.size(); ++k)
    CHECK(back.energies[k] == doctest::Approx(ref.energies[k]).epsilon(1e-15));
}

TEST_CASE("fit report file carries the trace and the derived length") {
  FitReport rep;
  rep.param_names = {"mu_micro", "mu_star_micro", "lambda_micro", "mu_lc_sq"};
  Eigen::VectorXd t0(4), t1(4);
  t0 << 26.32, 26.32, 51.08, 1.537;
  t1 << 10.55, 26.32, 8.22, 1.939;
  rep.trace.push_back({t0, 4.5, 0.0, 0.0, {}});
  rep.trace.push_back({t1, 0.9, 0.5, 1.0, {}});
  rep.final_theta = t1;
  rep.final_r2 = 0.9;
  rep.converged = true;
  rep.reason = "relative r2 decrease below tolerance";

  const std::string path = temp_path("rmfit_report.txt");
  save_report(rep, path, 0x1234abcdULL, 1.537);
  std::ifstream f(path);
  REQUIRE(f.good());
  std::string contents((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
  std::filesystem::remove(path);
  CHECK(contents.find("mu_lc_sq") != std::string::npos);
  CHECK(contents.find("r2") != std::string::npos);
  CHECK(contents.find("Lc") != std::string::npos);
  CHECK(contents.find("converged") != std::string::npos);
}

TEST_CASE("sweep csv") {
  const std::string path = temp_path("rmfit_sweep.csv");
  save_sweep_csv({{"rmm", "shear", 1.0, 0.25}, {"rmm", "shear", 2.0, 0.5}}, path,
                 7);
  std::ifstream f(path);
  REQUIRE(f.good());
  std::string line;
  int rows = 0;
  bool header = false;
  while (std::getline(f, line)) {
    if (line.find("model") != std::string::npos) header = true;
    if (line.find("rmm") != std::string::npos) ++rows;
  }
  std::filesystem::remove(path);
  CHECK(header);
  CHECK(rows == 2);
}
