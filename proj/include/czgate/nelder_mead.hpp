#pragma once

// Nelder-Mead downhill simplex (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). Converged when the spread of objective values over the simplex
// and the per-coordinate distance of every vertex from the best one are both
// below their tolerances.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "czgate/errors.hpp"

namespace czgate {

struct NelderMeadOptions {
  int max_evaluations = 500;
  double value_tolerance = 1e-9;
  Eigen::VectorXd coordinate_tolerance;  // per coordinate
  Eigen::VectorXd initial_step;          // per coordinate
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

template <class Objective>
NelderMeadResult nelder_mead(Objective&& objective, const Eigen::VectorXd& x0, const NelderMeadOptions& opt) {
  const Eigen::Index n = x0.size();
  if (n < 1) throw ValidationError("nelder_mead: empty parameter vector");
  if (opt.initial_step.size() != n || opt.coordinate_tolerance.size() != n) {
    throw ValidationError("nelder_mead: step and tolerance sizes must match the parameter vector");
  }
  if (opt.max_evaluations < static_cast<int>(n) + 1) {
    throw ValidationError("nelder_mead: max_evaluations too small for the simplex");
  }

  NelderMeadResult out;
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  auto eval = [&](const Eigen::VectorXd& x) {
    ++out.evaluations;
    return objective(x);
  };
  vals[0] = eval(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[i + 1](i) += opt.initial_step(i);
    vals[i + 1] = eval(pts[i + 1]);
  }

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> v2;
    for (std::size_t k : order) {
      p2.push_back(pts[k]);
      v2.push_back(vals[k]);
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };
  auto converged = [&] {
    if (vals.back() - vals.front() >= opt.value_tolerance) return false;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      if (((pts[k] - pts[0]).cwiseAbs().array() >= opt.coordinate_tolerance.array()).any()) return false;
    }
    return true;
  };

  sort_simplex();
  while (!converged()) {
    if (out.evaluations + 2 > opt.max_evaluations) break;
    const std::size_t worst = pts.size() - 1;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < worst; ++k) centroid += pts[k];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double f_r = eval(reflected);
    if (f_r < vals[0]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double f_e = eval(expanded);
      if (f_e < f_r) {
        pts[worst] = expanded;
        vals[worst] = f_e;
      } else {
        pts[worst] = reflected;
        vals[worst] = f_r;
      }
    } else if (f_r < vals[worst - 1]) {
      pts[worst] = reflected;
      vals[worst] = f_r;
    } else {
      const bool outside = f_r < vals[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
      const double f_c = eval(contracted);
      if (f_c < (outside ? f_r : vals[worst])) {
        pts[worst] = contracted;
        vals[worst] = f_c;
      } else {
        if (out.evaluations + n > opt.max_evaluations) break;
        for (std::size_t k = 1; k < pts.size(); ++k) {
          pts[k] = pts[0] + 0.5 * (pts[k] - pts[0]);
          vals[k] = eval(pts[k]);
        }
      }
    }
    sort_simplex();
  }
  out.converged = converged();
  out.x = pts[0];
  out.value = vals[0];
  return out;
}

}  // namespace czgate
