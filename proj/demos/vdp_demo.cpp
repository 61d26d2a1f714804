// Van der Pol oscillator with a velocity-scaling reset on the line x = 1:
// simulate to steady state, then report the return-map stability factors.

#include <cstdio>

#include "hybridcycles/hybridcycles.hpp"

using namespace hybridcycles;

int main() {
  Model m = make_vdp_scale();

  const std::vector<ImpactEvent> evs = impact_sequence(m.sys, m.x0, 120);
  std::printf("%zu impacts from (1, 3); last five section values:\n",
              evs.size());
  for (std::size_t i = evs.size() - 5; i < evs.size(); ++i)
    std::printf("  #%3zu  y- = %+.6f   y+ = %+.6f\n", i,
                evs[i].x_minus[1], evs[i].x_plus[1]);

  HybridOptions opts;
  opts.ode.rel_tol = 1e-10;
  opts.ode.abs_tol = 1e-12;
  const double s = find_fixed_point(m.sys, m.chart, m.s_guess, opts);
  const StabilityReport rep = derivative_planar(m.sys, m.chart, s, opts);
  std::printf("\nfixed point            y- = %.6f\n", s);
  std::printf("reset derivative       %.6f\n", rep.reset_derivative);
  std::printf("speed ratio            %.6f\n", rep.speed_ratio);
  std::printf("sine ratio             %.6f\n", rep.sine_ratio);
  std::printf("divergence factor      %.6f\n", rep.divergence_factor);
  std::printf("|P'| = %.6f (signed %+.6f, fd %+.6f) -> %s\n", rep.product,
              rep.product_signed, rep.fd_check, rep.verdict.c_str());
  return 0;
}
