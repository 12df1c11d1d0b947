#include "incdim/simplex_lp.hpp"

#include <cmath>
#include <stdexcept>

namespace incdim {

FeasibilityResult simplex_feasibility(const LinearRows& eq, const LinearRows& le,
                                      std::size_t dimension, double tolerance) {
  const std::size_t n = dimension;
  const std::size_t n_eq = eq.a.size() + 1;
  const std::size_t n_le = le.a.size();
  const std::size_t rows = n_eq + n_le;
  const std::size_t art0 = n + n_le;
  const std::size_t cols = art0 + rows;
  const std::size_t rhs = cols;
  if (eq.b.size() != eq.a.size() || le.b.size() != le.a.size()) {
    throw std::invalid_argument("constraint rows and right-hand sides differ in length");
  }

  std::vector<std::vector<double>> t(rows, std::vector<double>(cols + 1, 0.0));
  std::vector<double> sign(rows, 1.0);
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double>& row = t[r];
    if (r == 0) {
      for (std::size_t j = 0; j < n; ++j) row[j] = 1.0;
      row[rhs] = 1.0;
    } else if (r < n_eq) {
      const std::vector<double>& a = eq.a[r - 1];
      if (a.size() != n) throw std::invalid_argument("equality row has the wrong length");
      for (std::size_t j = 0; j < n; ++j) row[j] = a[j];
      row[rhs] = eq.b[r - 1];
    } else {
      const std::vector<double>& a = le.a[r - n_eq];
      if (a.size() != n) throw std::invalid_argument("inequality row has the wrong length");
      for (std::size_t j = 0; j < n; ++j) row[j] = a[j];
      row[n + (r - n_eq)] = 1.0;
      row[rhs] = le.b[r - n_eq];
    }
    if (row[rhs] < 0.0) {
      sign[r] = -1.0;
      for (double& v : row) v = -v;
    }
    row[art0 + r] = 1.0;
    basis[r] = art0 + r;
  }

  // Reduced costs of the phase-1 objective sum(artificials).
  std::vector<double> obj(cols + 1, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < art0; ++j) obj[j] -= t[r][j];
    obj[rhs] -= t[r][rhs];
  }

  const double eps = 1e-12;
  const std::size_t max_pivots = 50 * (rows + cols);
  for (std::size_t pivots = 0; pivots < max_pivots; ++pivots) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (obj[j] < -eps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = rows;
    double best = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (t[r][enter] > eps) {
        const double ratio = t[r][rhs] / t[r][enter];
        if (leave == rows || ratio < best - eps ||
            (ratio <= best + eps && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
    }
    if (leave == rows) break;  // unbounded direction; cannot happen in phase 1
    std::vector<double>& prow = t[leave];
    const double piv = prow[enter];
    for (double& v : prow) v /= piv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == leave) continue;
      const double f = t[r][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) t[r][j] -= f * prow[j];
    }
    const double f = obj[enter];
    for (std::size_t j = 0; j <= cols; ++j) obj[j] -= f * prow[j];
    basis[leave] = enter;
  }

  FeasibilityResult out;
  out.violation = std::max(0.0, -obj[rhs]);
  out.feasible = out.violation <= tolerance;
  out.point.assign(n, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < n) out.point[basis[r]] = t[r][rhs];
  }
  out.multipliers.resize(rows - 1);
  for (std::size_t r = 1; r < rows; ++r) out.multipliers[r - 1] = sign[r] * (1.0 - obj[art0 + r]);
  return out;
}

}  // namespace incdim
