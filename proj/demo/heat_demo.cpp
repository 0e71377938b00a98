// Runs Example 1 on a few meshes with k = sqrt(h)/20 and prints the errors.
#include <cstdio>
#include <vector>

#include "dpg_heat/dpg_heat.hpp"

int main() {
  using namespace dpg_heat;
  std::vector<double> h, err_u;
  std::printf("%4s %10s %10s %5s %12s %12s %12s %12s\n", "n", "h", "k", "N", "err_u", "err_sigma", "err_energy",
              "stab_ratio");
  for (int n : {4, 8, 16}) {
    LevelSpec spec;
    spec.n = n;
    const auto r = run_level(spec).report;
    std::printf("%4d %10.4g %10.4g %5d %12.5e %12.5e %12.5e %12.8f\n", r.n, r.h, r.k, r.N, r.err_u, r.err_sigma,
                r.err_energy, r.stability_ratio);
    h.push_back(r.h);
    err_u.push_back(r.err_u);
  }
  std::printf("fitted err_u slope: %.3f\n", convergence_rates(h, err_u).slope);
}
