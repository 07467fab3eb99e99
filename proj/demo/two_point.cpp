// Two points at distance 1: the symmetrized integral along the jump curve,
// the 2-modulus of that curve, and the minimal Hajlasz gradient of f = (0, 1).
#include <cstdio>

#include "tcurve/tcurve.hpp"

int main() {
  using namespace tcurve;
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 1, 0;
  const Space s(d, Eigen::Vector2d(1, 1));
  checked(s);

  const auto c = TestCurve::two_point(0, 1);
  const ScalarFunction f({0.0, 1.0});
  std::printf("V = %g\n", variation(s, c));
  std::printf("int f = %g, sym int f = %g\n", integrate(s, c, f), sym_integrate(s, c, f));

  const CurveFamily fam(s, {c});
  const auto mod = modulus(fam, 2.0, s);
  std::printf("Mod^2 = %g, rho = (%g, %g)\n", mod.value, mod.density[0], mod.density[1]);

  const auto h = minimal_hajlasz(f, s, 2.0);
  std::printf("minimal Hajlasz g = (%g, %g), ||g||_2 = %g\n", h.g[0], h.g[1], h.norm);

  const auto uno = pipeline_uno(f, h.g.scaled(2.0), 2.0, s);
  std::printf("2g upper S-gradient => g Hajlasz: %s\n", uno.ok() ? "ok" : "violated");
  return uno.ok() && std::abs(mod.value - 2.0) < 1e-8 ? 0 : 1;
}
