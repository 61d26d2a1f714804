// Rimless wheel rolling downhill: gait existence inequality, simulated
// period-1 gait, and the analytic step-speed recursion.

#include <cmath>
#include <cstdio>

#include "hybridcycles/hybridcycles.hpp"

using namespace hybridcycles;

int main() {
  RimlessWheelParams p;  // delta = pi/10, alpha = pi/30, zeta = 9.8

  const ExistenceInequality iq = existence_inequality(p);
  std::printf("existence inequality: %.6f %s %.6f\n", iq.lhs,
              iq.holds ? ">" : "<=", iq.rhs);
  std::printf("energy gain per step  %.6f\n", energy_gain(p));
  const double v2 = wheel_fixed_speed_sq(p);
  std::printf("balance speed         %.6f (loss there %.6f)\n",
              std::sqrt(v2), energy_loss(p, std::sqrt(v2)));

  const WheelGaitResult gait = classify_wheel_gait(p);
  if (gait.cycle_found)
    std::printf("gait found: pre-impact speed %.8f, |P'| = cos^2(2 delta) = %.6f\n",
                gait.speed, gait.product);
  else
    std::printf("no gait: %s\n", gait.note.c_str());

  // one spoke pitch of the recursion, from rest-ish
  double s2 = 0.5;
  std::printf("\nstep-speed recursion from v^2 = %.2f:\n", s2);
  for (int k = 0; k < 8; ++k) {
    std::printf("  step %d: v^2 = %.8f\n", k, s2);
    s2 = wheel_step_speed_sq(p, s2);
  }
  std::printf("  fixed point        %.8f\n", v2);
  return 0;
}
