#pragma once

#include <cstddef>
#include <vector>

namespace locsim {

// Standard-form LP: minimize objective·x subject to rows·x = rhs, x >= 0.
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
};

struct LpSolution {
  double objective = 0.0;
  std::vector<double> x;
};

// Dense two-phase tableau simplex (Dantzig pricing, Bland's rule once a run of
// degenerate pivots is detected). Throws SolverError when the program is
// infeasible, unbounded, or the pivot budget is exhausted.
LpSolution solve_lp(const LinearProgram& lp, double tolerance = 1e-9);

}  // namespace locsim
