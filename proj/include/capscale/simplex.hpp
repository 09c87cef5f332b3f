#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace capscale::lp {

/// Sparse column of the constraint matrix.
struct Column {
  std::vector<int> rows;
  std::vector<double> values;
};

/// minimize cost . x  subject to  A x >= rhs,  x >= 0.
struct Problem {
  int num_rows = 0;
  std::vector<Column> columns;
  std::vector<double> cost;
  std::vector<double> rhs;

  int num_columns() const { return static_cast<int>(columns.size()); }
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Options {
  /// 0 selects 20 * (rows + columns) + 1000.
  int max_iterations = 0;
  int refactor_interval = 64;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-9;
  /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
  int degenerate_limit = 50;
  /// Optional starting basis: one column id per row, where ids below
  /// num_columns() are structural and num_columns() + i is the surplus of row i.
  std::vector<int> initial_basis;
  /// Columns minimized lexicographically, in order, over the optimal face.
  std::vector<int> tie_break;
};

struct Solution {
  Status status = Status::kOptimal;
  std::vector<double> x;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  double complementarity = 0.0;
  int iterations = 0;
  int phase_one_iterations = 0;
  int bland_pivots = 0;
};

class IterationLimit : public std::runtime_error {
 public:
  explicit IterationLimit(const std::string& what) : std::runtime_error(what) {}
};

/// Revised primal simplex over a sparse LU basis factorization with
/// product-form updates. Deterministic for a given problem and options.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace capscale::lp
