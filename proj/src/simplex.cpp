#include "capscale/simplex.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace capscale::lp {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

class Simplex {
 public:
  Simplex(const Problem& p, const Options& opt) : p_(p), opt_(opt) {
    m_ = p.num_rows;
    n_ = p.num_columns();
    total_ = n_ + 2 * m_;
    if (static_cast<int>(p.cost.size()) != n_ || static_cast<int>(p.rhs.size()) != m_) {
      throw std::invalid_argument("problem dimensions are inconsistent");
    }
    for (const Column& c : p.columns) {
      if (c.rows.size() != c.values.size()) throw std::invalid_argument("malformed column");
      for (int r : c.rows) {
        if (r < 0 || r >= m_) throw std::invalid_argument("column row index out of range");
      }
    }
    max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 20 * (m_ + n_) + 1000;
    pos_.assign(total_, -1);
    enterable_.assign(total_, true);
    for (int i = 0; i < m_; ++i) enterable_[artificial(i)] = false;
  }

  Solution run() {
    Solution sol;
    if (!try_initial_basis()) {
      phase_one(sol);
      if (sol.status != Status::kOptimal) return sol;
    }
    objective_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) objective_[j] = p_.cost[j];
    if (!optimize(sol)) {
      sol.status = Status::kUnbounded;
      return sol;
    }
    tie_break(sol);
    certify(sol);
    sol.iterations = iterations_;
    sol.bland_pivots = bland_pivots_;
    return sol;
  }

 private:
  int surplus(int i) const { return n_ + i; }
  int artificial(int i) const { return n_ + m_ + i; }
  bool is_artificial(int j) const { return j >= n_ + m_; }

  double dot(const Vec& y, int j) const {
    if (j < n_) {
      const Column& c = p_.columns[j];
      double s = 0.0;
      for (std::size_t e = 0; e < c.rows.size(); ++e) s += y[c.rows[e]] * c.values[e];
      return s;
    }
    if (j < n_ + m_) return -y[j - n_];
    return y[j - n_ - m_];
  }

  void scatter(int j, Vec& out) const {
    out.setZero(m_);
    if (j < n_) {
      const Column& c = p_.columns[j];
      for (std::size_t e = 0; e < c.rows.size(); ++e) out[c.rows[e]] += c.values[e];
    } else if (j < n_ + m_) {
      out[j - n_] = -1.0;
    } else {
      out[j - n_ - m_] = 1.0;
    }
  }

  bool factorize() {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m_) * 3);
    for (int s = 0; s < m_; ++s) {
      const int j = basis_[s];
      if (j < n_) {
        const Column& c = p_.columns[j];
        for (std::size_t e = 0; e < c.rows.size(); ++e) trip.emplace_back(c.rows[e], s, c.values[e]);
      } else if (j < n_ + m_) {
        trip.emplace_back(j - n_, s, -1.0);
      } else {
        trip.emplace_back(j - n_ - m_, s, 1.0);
      }
    }
    SpMat b(m_, m_);
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    lu_.analyzePattern(b);
    lu_.factorize(b);
    etas_.clear();
    return lu_.info() == Eigen::Success;
  }

  void ftran(Vec& a) const {
    a = lu_.solve(a).eval();
    for (const Eta& eta : etas_) {
      const double wr = a[eta.row] / eta.pivot;
      if (wr != 0.0) {
        for (std::size_t e = 0; e < eta.idx.size(); ++e) a[eta.idx[e]] -= eta.val[e] * wr;
      }
      a[eta.row] = wr;
    }
  }

  void btran(Vec& c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c[it->row];
      for (std::size_t e = 0; e < it->idx.size(); ++e) s -= c[it->idx[e]] * it->val[e];
      c[it->row] = s / it->pivot;
    }
    c = lu_.transpose().solve(c).eval();
  }

  void recompute_primal() {
    Vec b(m_);
    for (int i = 0; i < m_; ++i) b[i] = p_.rhs[i];
    Vec x = b;
    ftran(x);
    // One step of iterative refinement.
    Vec r = b;
    for (int s = 0; s < m_; ++s) {
      const int j = basis_[s];
      if (j < n_) {
        const Column& c = p_.columns[j];
        for (std::size_t e = 0; e < c.rows.size(); ++e) r[c.rows[e]] -= c.values[e] * x[s];
      } else if (j < n_ + m_) {
        r[j - n_] += x[s];
      } else {
        r[j - n_ - m_] -= x[s];
      }
    }
    ftran(r);
    xb_ = x + r;
  }

  void set_basis(const std::vector<int>& basis) {
    basis_ = basis;
    std::fill(pos_.begin(), pos_.end(), -1);
    for (int s = 0; s < m_; ++s) pos_[basis_[s]] = s;
  }

  bool try_initial_basis() {
    const std::vector<int>& hint = opt_.initial_basis;
    if (static_cast<int>(hint.size()) != m_) return false;
    std::vector<char> seen(total_, 0);
    for (int j : hint) {
      if (j < 0 || j >= n_ + m_ || seen[j]) return false;
      seen[j] = 1;
    }
    set_basis(hint);
    if (!factorize()) return false;
    recompute_primal();
    for (int s = 0; s < m_; ++s) {
      if (!(xb_[s] >= -opt_.feasibility_tol)) return false;
    }
    return true;
  }

  void phase_one(Solution& sol) {
    std::vector<int> basis(m_);
    for (int i = 0; i < m_; ++i) basis[i] = p_.rhs[i] > 0.0 ? artificial(i) : surplus(i);
    set_basis(basis);
    if (!factorize()) throw std::runtime_error("slack basis is singular");
    recompute_primal();
    objective_.assign(total_, 0.0);
    double scale = 1.0;
    for (int i = 0; i < m_; ++i) {
      objective_[artificial(i)] = 1.0;
      scale = std::max(scale, std::abs(p_.rhs[i]));
    }
    if (!optimize(sol)) throw std::runtime_error("phase one is unbounded");
    sol.phase_one_iterations = iterations_;
    double infeasibility = 0.0;
    for (int s = 0; s < m_; ++s) {
      if (is_artificial(basis_[s])) infeasibility += std::max(xb_[s], 0.0);
    }
    if (infeasibility > 1e-7 * scale) {
      sol.status = Status::kInfeasible;
      return;
    }
    drive_out_artificials();
  }

  void drive_out_artificials() {
    for (int s = 0; s < m_; ++s) {
      if (!is_artificial(basis_[s])) continue;
      Vec rho = Vec::Zero(m_);
      rho[s] = 1.0;
      btran(rho);
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < n_ + m_; ++j) {
        if (pos_[j] >= 0) continue;
        const double a = std::abs(dot(rho, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best < 0) continue;
      Vec w;
      scatter(best, w);
      ftran(w);
      pivot(s, best, w, xb_[s] / w[s]);
    }
  }

  void pivot(int r, int q, const Vec& w, double step) {
    for (int i = 0; i < m_; ++i) xb_[i] -= step * w[i];
    xb_[r] = step;
    pos_[basis_[r]] = -1;
    basis_[r] = q;
    pos_[q] = r;
    Eta eta;
    eta.row = r;
    eta.pivot = w[r];
    for (int i = 0; i < m_; ++i) {
      if (i != r && w[i] != 0.0) {
        eta.idx.push_back(i);
        eta.val.push_back(w[i]);
      }
    }
    etas_.push_back(std::move(eta));
    if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
      if (!factorize()) throw std::runtime_error("basis became singular");
      recompute_primal();
    }
  }

  Vec basic_costs() const {
    Vec cb(m_);
    for (int s = 0; s < m_; ++s) cb[s] = objective_[basis_[s]];
    return cb;
  }

  // Runs primal simplex on objective_ restricted to enterable_ columns.
  // Returns false when the objective is unbounded below.
  bool optimize(Solution&) {
    int degenerate = 0;
    bool bland = false;
    Vec w;
    while (true) {
      if (iterations_ >= max_iter_) {
        throw IterationLimit("simplex iteration limit of " + std::to_string(max_iter_) + " exceeded");
      }
      Vec y = basic_costs();
      btran(y);
      int q = -1;
      double best = -opt_.optimality_tol;
      for (int j = 0; j < total_; ++j) {
        if (pos_[j] >= 0 || !enterable_[j]) continue;
        const double d = objective_[j] - dot(y, j);
        if (d < best) {
          best = d;
          q = j;
          if (bland) break;
        }
      }
      if (q < 0) return true;
      scatter(q, w);
      ftran(w);
      // Two-pass ratio test with a small feasibility relaxation.
      double bound = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (w[i] > opt_.pivot_tol) bound = std::min(bound, (std::max(xb_[i], 0.0) + opt_.feasibility_tol) / w[i]);
      }
      if (!std::isfinite(bound)) return false;
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (w[i] <= opt_.pivot_tol || std::max(xb_[i], 0.0) / w[i] > bound) continue;
        if (r < 0) {
          r = i;
        } else if (bland ? basis_[i] < basis_[r] : w[i] > w[r]) {
          r = i;
        }
      }
      const double step = std::max(xb_[r], 0.0) / w[r];
      ++iterations_;
      if (bland) ++bland_pivots_;
      if (step * w[r] <= opt_.feasibility_tol) {
        if (++degenerate > opt_.degenerate_limit) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
      pivot(r, q, w, step);
    }
  }

  void tie_break(Solution& sol) {
    if (opt_.tie_break.empty()) return;
    // Columns whose reduced cost is strictly positive leave the optimal face when entered.
    auto freeze_positive = [&]() {
      Vec y = basic_costs();
      btran(y);
      bool any_free = false;
      for (int j = 0; j < total_; ++j) {
        if (pos_[j] >= 0 || !enterable_[j]) continue;
        if (objective_[j] - dot(y, j) > opt_.optimality_tol) {
          enterable_[j] = false;
        } else {
          any_free = true;
        }
      }
      return any_free;
    };
    if (!freeze_positive()) return;
    for (int col : opt_.tie_break) {
      if (pos_[col] < 0) {
        enterable_[col] = false;
        continue;
      }
      objective_.assign(total_, 0.0);
      objective_[col] = 1.0;
      if (!optimize(sol)) throw std::runtime_error("tie-break objective is unbounded");
      if (!freeze_positive()) break;
    }
    objective_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) objective_[j] = p_.cost[j];
  }

  void certify(Solution& sol) {
    if (!factorize()) throw std::runtime_error("final basis is singular");
    recompute_primal();
    sol.x.assign(n_, 0.0);
    for (int s = 0; s < m_; ++s) {
      if (basis_[s] < n_) sol.x[basis_[s]] = xb_[s];
    }
    Vec y = basic_costs();
    btran(y);
    sol.duals.assign(y.data(), y.data() + m_);
    sol.reduced_costs.assign(n_, 0.0);

    std::vector<double> ax(m_, 0.0);
    double primal = 0.0, dual_res = 0.0, comp = 0.0;
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) {
      const Column& c = p_.columns[j];
      for (std::size_t e = 0; e < c.rows.size(); ++e) ax[c.rows[e]] += c.values[e] * sol.x[j];
      sol.objective += p_.cost[j] * sol.x[j];
      const double d = p_.cost[j] - dot(y, j);
      sol.reduced_costs[j] = d;
      primal = std::max(primal, -sol.x[j]);
      dual_res = std::max(dual_res, -d);
      comp = std::max(comp, std::abs(d * sol.x[j]));
    }
    sol.dual_objective = 0.0;
    for (int i = 0; i < m_; ++i) {
      sol.dual_objective += p_.rhs[i] * y[i];
      const double slack = ax[i] - p_.rhs[i];
      primal = std::max(primal, -slack);
      dual_res = std::max(dual_res, -y[i]);
      comp = std::max(comp, std::abs(y[i] * slack));
    }
    sol.primal_residual = std::max(primal, 0.0);
    sol.dual_residual = std::max(dual_res, 0.0);
    sol.complementarity = comp;
    sol.duality_gap = std::abs(sol.objective - sol.dual_objective);
    sol.status = Status::kOptimal;
  }

  struct Eta {
    int row = 0;
    double pivot = 1.0;
    std::vector<int> idx;
    std::vector<double> val;
  };

  const Problem& p_;
  const Options& opt_;
  int m_ = 0, n_ = 0, total_ = 0;
  int max_iter_ = 0;
  int iterations_ = 0;
  int bland_pivots_ = 0;
  std::vector<int> basis_;
  std::vector<int> pos_;
  std::vector<bool> enterable_;
  std::vector<double> objective_;
  Vec xb_;
  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  Simplex simplex(problem, options);
  return simplex.run();
}

}  // namespace capscale::lp
