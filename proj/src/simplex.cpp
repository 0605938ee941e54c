#include "locsim/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "locsim/errors.hpp"

namespace locsim {
namespace {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, double tol)
      : m_(lp.rows.size()), n_(lp.num_vars), width_(n_ + m_ + 1), tol_(tol),
        cells_((m_ + 1) * width_, 0.0), basis_(m_) {
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * lp.rows[i][j];
      at(i, n_ + i) = 1.0;
      at(i, width_ - 1) = sign * lp.rhs[i];
      basis_[i] = n_ + i;
    }
  }

  double& at(std::size_t r, std::size_t c) { return cells_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return cells_[r * width_ + c]; }

  // Phase 1: minimize the sum of artificials.
  void phase_one() {
    set_objective([&](std::size_t j) { return j >= n_ && j < n_ + m_ ? 1.0 : 0.0; });
    iterate(n_ + m_);
    if (-at(m_, width_ - 1) > tol_ * std::max(1.0, rhs_scale())) {
      throw SolverError("linear program is infeasible");
    }
    drive_out_artificials();
  }

  void phase_two(const std::vector<double>& c) {
    set_objective([&](std::size_t j) { return j < n_ ? c[j] : 0.0; });
    iterate(n_);
  }

  LpSolution solution(const std::vector<double>& c) const {
    LpSolution s;
    s.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_ && !dropped(i)) s.x[basis_[i]] = at(i, width_ - 1);
    }
    for (std::size_t j = 0; j < n_; ++j) s.objective += c[j] * s.x[j];
    return s;
  }

 private:
  template <class Cost>
  void set_objective(Cost cost) {
    for (std::size_t j = 0; j < width_; ++j) at(m_, j) = j + 1 < width_ ? cost(j) : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (dropped(i)) continue;
      const double cb = basis_[i] < width_ - 1 ? cost(basis_[i]) : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(m_, j) -= cb * at(i, j);
    }
  }

  double rhs_scale() const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) s = std::max(s, std::abs(at(i, width_ - 1)));
    return s;
  }

  bool dropped(std::size_t row) const { return basis_[row] == kDropped; }

  // Columns >= limit never enter the basis.
  void iterate(std::size_t limit) {
    const std::size_t max_pivots = 50 * (m_ + width_) + 1000;
    std::size_t degenerate_run = 0;
    for (std::size_t pivots = 0; pivots < max_pivots; ++pivots) {
      const bool bland = degenerate_run > 50;
      std::size_t enter = limit;
      double best = -tol_;
      for (std::size_t j = 0; j < limit; ++j) {
        const double rc = at(m_, j);
        if (rc < best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter == limit) return;

      std::size_t leave = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        if (dropped(i)) continue;
        const double a = at(i, enter);
        if (a <= tol_) continue;
        const double r = at(i, width_ - 1) / a;
        if (r < ratio - tol_ || (r <= ratio + tol_ && leave < m_ && basis_[i] < basis_[leave])) {
          ratio = r;
          leave = i;
        }
      }
      if (leave == m_) throw SolverError("linear program is unbounded");
      degenerate_run = ratio <= tol_ ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
    throw SolverError("simplex pivot budget exhausted");
  }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(row, col);
    double* prow = &cells_[row * width_];
    for (std::size_t j = 0; j < width_; ++j) prow[j] /= p;
    prow[col] = 1.0;
    nonzero_.clear();
    for (std::size_t j = 0; j < width_; ++j) {
      if (prow[j] != 0.0) nonzero_.push_back(j);
    }
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == row) continue;
      double* r = &cells_[i * width_];
      const double f = r[col];
      if (f == 0.0) continue;
      for (std::size_t j : nonzero_) r[j] -= f * prow[j];
      r[col] = 0.0;
    }
    basis_[row] = col;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      std::size_t col = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(at(i, j)) > tol_) {
          col = j;
          break;
        }
      }
      if (col < n_) {
        pivot(i, col);
      } else {
        // Redundant equality; it can no longer constrain anything.
        basis_[i] = kDropped;
        for (std::size_t j = 0; j < width_; ++j) at(i, j) = 0.0;
      }
    }
  }

  static constexpr std::size_t kDropped = std::numeric_limits<std::size_t>::max();

  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  double tol_;
  std::vector<double> cells_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nonzero_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, double tolerance) {
  if (lp.objective.size() != lp.num_vars || lp.rows.size() != lp.rhs.size()) {
    throw InputError("linear program dimensions are inconsistent");
  }
  for (const auto& row : lp.rows) {
    if (row.size() != lp.num_vars) throw InputError("linear program row has wrong width");
  }
  Tableau t(lp, tolerance);
  t.phase_one();
  t.phase_two(lp.objective);
  return t.solution(lp.objective);
}

}  // namespace locsim
