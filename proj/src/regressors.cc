// Copyright 2026 The vqalab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vqalab/error.h"
#include "vqalab/evaluation.h"
#include "vqalab/random.h"

namespace vqalab::eval {

Standardizer Standardizer::Fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean();
  s.scale = Eigen::RowVectorXd::Ones(x.cols());
  if (x.rows() < 2) return s;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().sum() / (n - 1);
    if (var > 0) s.scale(j) = std::sqrt(var);
  }
  return s;
}

Eigen::MatrixXd Standardizer::Apply(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

Eigen::MatrixXd SquaredDistances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
    }
  }
  return d;
}

Eigen::MatrixXd RbfKernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  return (-gamma * SquaredDistances(a, b).array()).exp().matrix();
}

SvrSolution SolveSvrDual(const Eigen::MatrixXd& k, const Eigen::VectorXd& target, double c,
                         double epsilon, double tol, int max_iter, const SvrSolution* warm) {
  const Eigen::Index l = k.rows();
  if (k.cols() != l || target.size() != l) {
    throw Error(ErrorCode::kShapeMismatch, "kernel and targets disagree in size");
  }
  const Eigen::Index n = 2 * l;
  // Variables 0..l-1 are alpha (label +1), l..2l-1 alpha* (label -1).
  std::vector<double> a(n, 0.0), g(n), y(n);
  for (Eigen::Index t = 0; t < l; ++t) {
    y[t] = 1;
    y[t + l] = -1;
    g[t] = epsilon - target(t);
    g[t + l] = epsilon + target(t);
  }
  if (warm != nullptr && warm->alpha.size() == l &&
      std::max(warm->alpha.maxCoeff(), warm->alpha_star.maxCoeff()) <= c) {
    for (Eigen::Index t = 0; t < l; ++t) {
      a[t] = warm->alpha(t);
      a[t + l] = warm->alpha_star(t);
    }
    const Eigen::VectorXd beta = warm->alpha - warm->alpha_star;
    const Eigen::VectorXd kb = k * beta;
    for (Eigen::Index t = 0; t < l; ++t) {
      g[t] += kb(t);
      g[t + l] -= kb(t);
    }
  }
  const double* kd = k.data();
  auto kcol = [&](Eigen::Index t) { return kd + (t % l) * l; };
  auto up = [&](Eigen::Index t) { return (y[t] > 0 && a[t] < c) || (y[t] < 0 && a[t] > 0); };
  auto low = [&](Eigen::Index t) { return (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < c); };

  SvrSolution s;
  for (int iter = 0;; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (up(t) && -y[t] * g[t] >= gmax) {
        gmax = -y[t] * g[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    const double* ki = i >= 0 ? kcol(i) : nullptr;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!low(t)) continue;
      gmax2 = std::max(gmax2, y[t] * g[t]);
      const double b = gmax + y[t] * g[t];
      if (i < 0 || b <= 0) continue;
      // y_i * Q_it reduces to y_t * K_it.
      double quad = ki[i % l] + kd[(t % l) * l + t % l] - 2.0 * y[t] * ki[t % l];
      if (quad <= 0) quad = 1e-12;
      const double obj = -b * b / quad;
      if (obj <= best) {
        best = obj;
        j = t;
      }
    }
    s.kkt_gap = gmax + gmax2;
    s.iterations = iter;
    if (i < 0 || j < 0 || s.kkt_gap < tol) {
      s.converged = true;
      break;
    }
    if (iter >= max_iter) break;

    const double* kj = kcol(j);
    const double old_i = a[i], old_j = a[j];
    const double qii = ki[i % l], qjj = kj[j % l], qij = y[i] * y[j] * ki[j % l];
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2 * qij;
      if (quad <= 0) quad = 1e-12;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = -diff;
      }
      if (diff > 0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else if (a[j] > c) {
        a[j] = c;
        a[i] = c + diff;
      }
    } else {
      double quad = qii + qjj - 2 * qij;
      if (quad <= 0) quad = 1e-12;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else if (a[j] < 0) {
        a[j] = 0;
        a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = sum;
      }
    }
    const double wi = y[i] * (a[i] - old_i), wj = y[j] * (a[j] - old_j);
    for (Eigen::Index u = 0; u < l; ++u) {
      const double w = ki[u] * wi + kj[u] * wj;
      g[u] += w;
      g[u + l] -= w;
    }
  }

  // Offset from free variables, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum = 0;
  int free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * g[t];
    if (a[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free;
      sum += yg;
    }
  }
  const double rho = free > 0 ? sum / free : 0.5 * (ub + lb);
  s.bias = -rho;
  s.alpha.resize(l);
  s.alpha_star.resize(l);
  for (Eigen::Index t = 0; t < l; ++t) {
    s.alpha(t) = a[t];
    s.alpha_star(t) = a[t + l];
  }
  return s;
}

double SvrDualObjective(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double epsilon,
                        const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha_star) {
  const Eigen::VectorXd beta = alpha - alpha_star;
  return 0.5 * beta.dot(k * beta) + epsilon * (alpha.sum() + alpha_star.sum()) - y.dot(beta);
}

Eigen::VectorXd SolveKernelRidge(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                 double lambda) {
  const Eigen::MatrixXd a = k + lambda * Eigen::MatrixXd::Identity(k.rows(), k.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.isInvertible()) return llt.solve(y);
  }
  throw Error(ErrorCode::kSingularKernel, "kernel system is singular");
}

RegressorGrid RegressorGrid::Default() {
  RegressorGrid g;
  for (int e = -3; e <= 10; ++e) g.c.push_back(std::ldexp(1.0, e));
  for (int e = -10; e <= 3; ++e) g.gamma.push_back(std::ldexp(1.0, e));
  g.epsilon = {0.1, 0.5, 1.0};
  for (int e = -6; e <= 1; ++e) g.lambda.push_back(std::pow(10.0, e));
  return g;
}

std::vector<Hyperparams> RegressorGrid::Expand(RegressorKind kind) const {
  std::vector<Hyperparams> out;
  for (double gm : gamma) {
    if (kind == RegressorKind::kSvrRbf) {
      for (double e : epsilon)
        for (double cc : c) out.push_back({.c = cc, .epsilon = e, .gamma = gm});
    } else {
      for (double lm : lambda) out.push_back({.gamma = gm, .lambda = lm});
    }
  }
  return out;
}

Eigen::VectorXd KernelRegressor::Predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd kx = RbfKernel(standardizer.Apply(x), support, params.gamma);
  return (kx * coef).array() + bias;
}

namespace {

// Model selection only needs the ranking of grid points; the final refit is
// solved well past the required KKT bound so predictions are stable under
// target shifts.
constexpr double kSearchTolerance = 1e-3;
constexpr int kSearchMaxIter = 1000000;
constexpr double kRefitTolerance = 1e-7;
constexpr int kRefitMaxIter = 100000;

// Fits on a precomputed training kernel; returns (coef, bias).
std::pair<Eigen::VectorXd, double> FitOnKernel(const Eigen::MatrixXd& k,
                                               const Eigen::VectorXd& y, RegressorKind kind,
                                               const Hyperparams& p,
                                               double tol, int max_iter,
                                               const SvrSolution* warm = nullptr,
                                               SvrSolution* warm_out = nullptr) {
  if (kind == RegressorKind::kSvrRbf) {
    // The dual ignores a common target offset; centering keeps the solver
    // path independent of it.
    const double mean = y.mean();
    const SvrSolution s =
        SolveSvrDual(k, (y.array() - mean).matrix(), p.c, p.epsilon, tol, max_iter, warm);
    if (warm_out != nullptr) *warm_out = s;
    return {s.alpha - s.alpha_star, s.bias + mean};
  }
  const double mean = y.mean();
  const Eigen::VectorXd centered = y.array() - mean;
  return {SolveKernelRidge(k, centered, p.lambda), mean};
}

Eigen::MatrixXd Rows(const Eigen::MatrixXd& x, const std::vector<size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::VectorXd Rows(const Eigen::VectorXd& y, const std::vector<size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

KernelRegressor FitRegressor(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             RegressorKind kind, const Hyperparams& params) {
  if (x.rows() != y.size() || x.rows() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "features and targets disagree in size");
  }
  KernelRegressor r;
  r.kind = kind;
  r.params = params;
  r.standardizer = Standardizer::Fit(x);
  r.support = r.standardizer.Apply(x);
  const auto [coef, bias] = FitOnKernel(RbfKernel(r.support, r.support, params.gamma), y, kind,
                                        params, kRefitTolerance, kRefitMaxIter);
  r.coef = coef;
  r.bias = bias;
  return r;
}

KernelRegressor TrainRegressor(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               RegressorKind kind, const TrainOptions& options) {
  const size_t n = static_cast<size_t>(x.rows());
  const size_t folds = static_cast<size_t>(std::max(2, options.cv_folds));
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::kShapeMismatch, "features and targets disagree in size");
  }
  if (n < 2 * folds) {
    throw Error(ErrorCode::kTooFewItems, "too few samples for cross-validation");
  }
  const std::vector<Hyperparams> grid = options.grid.Expand(kind);
  if (grid.empty()) throw Error(ErrorCode::kUsageError, "empty hyperparameter grid");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 g = rng::DerivedEngine(options.seed, 0);
  rng::Shuffle(order, g);

  struct Fold {
    Eigen::MatrixXd d_train, d_val;
    Eigen::VectorXd y_train, y_val;
  };
  std::vector<Fold> cv(folds);
  for (size_t f = 0; f < folds; ++f) {
    std::vector<size_t> tr, va;
    for (size_t i = 0; i < n; ++i) (i % folds == f ? va : tr).push_back(order[i]);
    const Eigen::MatrixXd xtr = Rows(x, tr), xva = Rows(x, va);
    const Standardizer st = Standardizer::Fit(xtr);
    const Eigen::MatrixXd str = st.Apply(xtr);
    cv[f] = {SquaredDistances(str, str), SquaredDistances(st.Apply(xva), str), Rows(y, tr),
             Rows(y, va)};
  }

  std::vector<double> score(grid.size(), 0.0);
  for (const Fold& f : cv) {
    double gamma = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd ktr, kva;
    SvrSolution warm;
    bool have_warm = false;
    for (size_t h = 0; h < grid.size(); ++h) {
      if (grid[h].gamma != gamma) {
        gamma = grid[h].gamma;
        ktr = (-gamma * f.d_train.array()).exp().matrix();
        kva = (-gamma * f.d_val.array()).exp().matrix();
      }
      // Consecutive entries sharing gamma and epsilon with growing C reuse
      // the previous multipliers, which stay feasible.
      const bool reuse = have_warm && h > 0 && grid[h - 1].gamma == grid[h].gamma &&
                         grid[h - 1].epsilon == grid[h].epsilon && grid[h - 1].c <= grid[h].c;
      double rmse;
      try {
        SvrSolution next;
        const auto [coef, bias] =
            FitOnKernel(ktr, f.y_train, kind, grid[h], kSearchTolerance, kSearchMaxIter,
                        reuse ? &warm : nullptr, &next);
        warm = std::move(next);
        have_warm = kind == RegressorKind::kSvrRbf;
        const Eigen::VectorXd pred = (kva * coef).array() + bias;
        rmse = std::sqrt((pred - f.y_val).squaredNorm() / static_cast<double>(f.y_val.size()));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSingularKernel) throw;
        rmse = std::numeric_limits<double>::infinity();
      }
      score[h] += rmse / static_cast<double>(folds);
    }
  }
  const size_t best = static_cast<size_t>(std::min_element(score.begin(), score.end()) - score.begin());
  return FitRegressor(x, y, kind, grid[best]);
}

}  // namespace vqalab::eval
