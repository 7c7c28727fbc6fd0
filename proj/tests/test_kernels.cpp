#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "vortexlab/kernels.hpp"

using namespace vortexlab;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("kernel evaluation on the catalog") {
  const Kernel ind = indicator_kernel(1.0);
  CHECK(ind.evaluate(0.5) == 1.0);
  CHECK(ind.evaluate(2.0) == 0.0);
  CHECK(ind.evaluate(1.0) == 1.0);

  const Kernel tri = triangle_kernel(1.0);
  CHECK(tri.evaluate(0.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(tri.evaluate(1.5) == 0.0);

  CHECK_THROWS_AS(ind.evaluate(-0.1), std::invalid_argument);
}

TEST_CASE("second moment closed forms") {
  // indicator on [0,1]: 2 pi int r^3 = pi/2 (d=2), 4 pi int r^4 = 4 pi/5 (d=3)
  const Kernel ind = indicator_kernel(1.0);
  CHECK(second_moment(ind, 2) == doctest::Approx(kPi / 2.0).epsilon(1e-9));
  CHECK(second_moment(ind, 3) == doctest::Approx(4.0 * kPi / 5.0).epsilon(1e-9));

  const Kernel zero = table_kernel({{0.0, 0.0}, {1.0, 0.0}});
  CHECK(second_moment(zero, 2) == doctest::Approx(0.0));

  CHECK_THROWS_AS(second_moment(ind, 4), std::invalid_argument);
}

TEST_CASE("gamma limit constant") {
  const Kernel ind = indicator_kernel(1.0);
  CHECK(gamma_limit_constant(ind, 2) == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-9));
  CHECK(gamma_limit_constant(ind, 3) == doctest::Approx(8.0 * kPi * kPi / 15.0).epsilon(1e-9));
  const Kernel zero = table_kernel({{0.0, 0.0}, {1.0, 0.0}});
  CHECK(gamma_limit_constant(zero, 2) == doctest::Approx(0.0));
}

TEST_CASE("second moment is invariant under the natural rescaling") {
  // rho_s(t) = rho(t/s) / s^{d+2} has the same second moment.
  for (int d : {2, 3}) {
    for (double s : {0.5, 2.0}) {
      const Kernel base = triangle_kernel(1.0);
      const double sd2 = std::pow(s, d + 2);
      const Kernel scaled(
          "scaled", [s, sd2, base](double t) { return base.evaluate(t / s) / sd2; }, s, 0.1,
          0.1 * s);
      CHECK(second_moment(scaled, d) ==
            doctest::Approx(second_moment(base, d)).epsilon(1e-6));
    }
  }
}

TEST_CASE("second moment monotone in the profile and positive on plateaus") {
  const Kernel small = gaussian_kernel(0.3, 1.0);
  const Kernel big = indicator_kernel(1.0);  // gauss <= 1 = indicator on [0,1]
  CHECK(second_moment(small, 2) < second_moment(big, 2));
  CHECK(second_moment(small, 2) > 0.0);
  CHECK(second_moment(small, 3) > 0.0);
}

TEST_CASE("normalization query reports the plateau scale") {
  const Kernel ind = indicator_kernel(2.0);
  CHECK(ind.is_normalized(2));  // plateau radius 2 >= sqrt(2)
  CHECK_FALSE(indicator_kernel(1.0).is_normalized(2));
  CHECK(indicator_kernel(1.0).normalization_scale(2) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("tabulated kernels interpolate linearly and parse from CSV") {
  const Kernel tab = table_kernel({{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.0}});
  CHECK(tab.evaluate(0.5) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(tab.evaluate(1.5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(tab.evaluate(3.0) == 0.0);
  CHECK(tab.support_radius() == 2.0);

  const std::string path = "test_kernel_table.csv";
  {
    std::ofstream out(path);
    out << "t,rho\n0,1\n0.5,0.5\n1,0\n";
  }
  const Kernel from_csv = parse_kernel_spec("table:" + path);
  CHECK(from_csv.evaluate(0.25) == doctest::Approx(0.75).epsilon(1e-12));
  std::remove(path.c_str());
}

TEST_CASE("kernel spec strings") {
  CHECK(parse_kernel_spec("indicator:1").evaluate(0.9) == 1.0);
  CHECK(parse_kernel_spec("triangle:2").evaluate(1.0) == doctest::Approx(0.5));
  CHECK(parse_kernel_spec("gauss:0.5:1").evaluate(0.0) == doctest::Approx(1.0));
  CHECK_THROWS(parse_kernel_spec("parabola:1"));
}
