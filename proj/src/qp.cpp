// Copyright 2026 The screwest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "screwest/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "screwest/error.hpp"

namespace screwest {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One half-space n.x >= b (or hyperplane n.x = b when `equality`).
struct Constraint {
  Eigen::VectorXd n;
  double b = 0.0;
  bool equality = false;
  bool on_row = false;  // from A rather than a variable bound
  int source = 0;       // variable or row index
  bool upper = false;   // upper side of a two-sided bound
};

std::vector<Constraint> collect(const QProblem& p) {
  const Eigen::Index nv = p.cost.rows();
  std::vector<Constraint> out;
  auto add = [&](const Eigen::VectorXd& row, double lo, double hi, bool on_row, int src) {
    if (lo > hi) {
      throw Error(ErrorCode::kInfeasible, "lower bound exceeds upper bound");
    }
    if (lo == hi) {
      out.push_back({row, lo, true, on_row, src, false});
      return;
    }
    if (std::isfinite(lo)) out.push_back({row, lo, false, on_row, src, false});
    if (std::isfinite(hi)) out.push_back({-row, -hi, false, on_row, src, true});
  };
  for (Eigen::Index i = 0; i < nv; ++i) {
    add(Eigen::VectorXd::Unit(nv, i), p.lb(i), p.ub(i), false, static_cast<int>(i));
  }
  for (Eigen::Index i = 0; i < p.a.rows(); ++i) {
    add(p.a.row(i).transpose(), p.lb_a(i), p.ub_a(i), true, static_cast<int>(i));
  }
  return out;
}

void check_dimensions(const QProblem& p) {
  const Eigen::Index n = p.cost.rows();
  if (p.cost.cols() != n || p.lb.size() != n || p.ub.size() != n ||
      (p.a.rows() > 0 && p.a.cols() != n) || p.lb_a.size() != p.a.rows() ||
      p.ub_a.size() != p.a.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent QP dimensions");
  }
}

}  // namespace

QpSolution solve_qp(const QProblem& p, int max_iterations) {
  check_dimensions(p);
  const Eigen::Index n = p.cost.rows();
  const std::vector<Constraint> cons = collect(p);

  Eigen::MatrixXd c = 0.5 * (p.cost + p.cost.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    // Semidefinite cost: a tiny ridge keeps the dual method well posed.
    c += 1e-12 * (1.0 + c.diagonal().cwiseAbs().maxCoeff()) *
         Eigen::MatrixXd::Identity(n, n);
    llt.compute(c);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kInvalidArgument, "QP cost is not positive semidefinite");
    }
  }
  const Eigen::MatrixXd ginv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<int> active;     // indices into cons
  std::vector<double> sign;    // orientation applied to each active normal
  std::vector<double> u;       // multipliers of the oriented constraints
  std::vector<char> is_active(cons.size(), 0);
  int iterations = 0;

  auto slack = [&](int i) { return cons[i].n.dot(x) - cons[i].b; };
  auto tol_of = [&](int i) { return 1e-12 * std::max(1.0, std::abs(cons[i].b)); };

  while (true) {
    int pick = -1;
    for (std::size_t i = 0; i < cons.size() && pick < 0; ++i) {
      if (cons[i].equality && !is_active[i]) pick = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < cons.size() && pick < 0; ++i) {
      if (!cons[i].equality && !is_active[i] && slack(static_cast<int>(i)) < -tol_of(static_cast<int>(i))) {
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) break;

    double sp = 1.0;
    if (cons[pick].equality && slack(pick) > 0.0) sp = -1.0;
    const Eigen::VectorXd np = sp * cons[pick].n;
    const double bp = sp * cons[pick].b;
    double u_plus = 0.0;

    while (true) {
      if (++iterations > max_iterations) {
        throw Error(ErrorCode::kMaxIterations, "active set did not settle");
      }
      const int q = static_cast<int>(active.size());
      Eigen::VectorXd r(q);
      Eigen::VectorXd z = ginv * np;
      if (q > 0) {
        Eigen::MatrixXd nmat(n, q);
        for (int j = 0; j < q; ++j) nmat.col(j) = sign[j] * cons[active[j]].n;
        const Eigen::MatrixXd gin = ginv * nmat;
        const Eigen::MatrixXd m = nmat.transpose() * gin;
        r = m.ldlt().solve(gin.transpose() * np);
        z -= gin * r;
      }

      double t1 = kInf;
      int drop = -1;
      for (int j = 0; j < q; ++j) {
        if (cons[active[j]].equality || r(j) <= 1e-14) continue;
        const double ratio = u[j] / r(j);
        if (ratio < t1) {
          t1 = ratio;
          drop = j;
        }
      }
      const double curvature = z.dot(np);
      const double scale = np.dot(ginv * np);
      double t2 = kInf;
      if (curvature > 1e-13 * scale) {
        t2 = -(np.dot(x) - bp) / curvature;
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        throw Error(ErrorCode::kInfeasible, "constraints admit no feasible point");
      }
      for (int j = 0; j < q; ++j) u[j] -= t * r(j);
      u_plus += t;
      if (std::isfinite(t2)) x += t * z;

      if (std::isfinite(t2) && t2 <= t1) {
        active.push_back(pick);
        sign.push_back(sp);
        u.push_back(u_plus);
        is_active[pick] = 1;
        break;
      }
      is_active[active[drop]] = 0;
      active.erase(active.begin() + drop);
      sign.erase(sign.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }

  QpSolution sol;
  sol.x = x.cwiseMax(p.lb).cwiseMin(p.ub);
  sol.z_lb = Eigen::VectorXd::Zero(n);
  sol.z_ub = Eigen::VectorXd::Zero(n);
  sol.y_lb = Eigen::VectorXd::Zero(p.a.rows());
  sol.y_ub = Eigen::VectorXd::Zero(p.a.rows());
  sol.iterations = iterations;
  for (std::size_t j = 0; j < active.size(); ++j) {
    const Constraint& k = cons[active[j]];
    double mult = u[j];
    if (k.equality) mult *= sign[j];
    Eigen::VectorXd& lo = k.on_row ? sol.y_lb : sol.z_lb;
    Eigen::VectorXd& hi = k.on_row ? sol.y_ub : sol.z_ub;
    (k.upper ? hi : lo)(k.source) += mult;
  }
  return sol;
}

double kkt_residual(const QProblem& p, const QpSolution& s) {
  const Eigen::VectorXd& x = s.x;
  double worst = 0.0;
  Eigen::VectorXd stat = p.cost * x - (s.z_lb - s.z_ub);
  if (p.a.rows() > 0) stat -= p.a.transpose() * (s.y_lb - s.y_ub);
  worst = std::max(worst, stat.lpNorm<Eigen::Infinity>());

  auto side = [&](double value, double lo, double hi, double m_lo, double m_hi) {
    if (std::isfinite(lo)) worst = std::max(worst, lo - value);
    if (std::isfinite(hi)) worst = std::max(worst, value - hi);
    if (lo == hi) return;
    worst = std::max({worst, -m_lo, -m_hi});
    if (std::isfinite(lo)) worst = std::max(worst, std::abs(m_lo * (value - lo)));
    if (std::isfinite(hi)) worst = std::max(worst, std::abs(m_hi * (hi - value)));
  };
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    side(x(i), p.lb(i), p.ub(i), s.z_lb(i), s.z_ub(i));
  }
  if (p.a.rows() > 0) {
    const Eigen::VectorXd ax = p.a * x;
    for (Eigen::Index i = 0; i < ax.size(); ++i) {
      side(ax(i), p.lb_a(i), p.ub_a(i), s.y_lb(i), s.y_ub(i));
    }
  }
  return worst;
}

}  // namespace screwest
