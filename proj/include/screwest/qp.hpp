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

#pragma once

#include <Eigen/Core>

namespace screwest {

/// min 1/2 x^T C x  s.t.  lb <= x <= ub,  lb_a <= A x <= ub_a.
/// Infinite bounds are allowed; equal bounds make an equality.
struct QProblem {
  Eigen::MatrixXd cost;  // C, symmetric positive definite
  Eigen::MatrixXd a;     // may have zero rows
  Eigen::VectorXd lb, ub;
  Eigen::VectorXd lb_a, ub_a;
};

struct QpSolution {
  Eigen::VectorXd x;
  // Multipliers; inequality sides are >= 0, equality sides carry any sign
  // in the lower slot. Stationarity: C x = (z_lb - z_ub) + A^T (y_lb - y_ub).
  Eigen::VectorXd z_lb, z_ub;
  Eigen::VectorXd y_lb, y_ub;
  int iterations = 0;
};

/// Dual active-set (Goldfarb-Idnani) solver with lowest-index pivoting.
/// Throws kInfeasible for contradictory bounds or an empty feasible set and
/// kMaxIterations if the active set does not settle.
QpSolution solve_qp(const QProblem& p, int max_iterations = 1000);

/// Max-norm of the KKT conditions: stationarity, primal feasibility, dual
/// feasibility and complementary slackness.
double kkt_residual(const QProblem& p, const QpSolution& s);

}  // namespace screwest
