#ifndef OPO_MINIMIZE_HPP
#define OPO_MINIMIZE_HPP

// Small derivative-free minimizers used by the calibration fits.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace opo {

template <typename Scalar = double>
struct ScalarMinimum {
  Scalar argmin{};
  Scalar value{};
  int iterations{};
};

/// Brent's bounded minimization on [lo, hi] (golden section with parabolic
/// interpolation). Deterministic; converges to a local minimum.
template <typename Scalar, typename F>
ScalarMinimum<Scalar> brent_minimize(F&& f, Scalar lo, Scalar hi, Scalar rel_tol = Scalar(1e-10),
                                     int max_iterations = 500) {
  if (!(lo < hi)) throw std::invalid_argument("brent_minimize: empty interval");
  using std::abs;
  using std::sqrt;
  const Scalar golden = (Scalar(3) - sqrt(Scalar(5))) / Scalar(2);
  const Scalar abs_tol = Scalar(1e-14);

  Scalar a = lo, b = hi;
  Scalar x = a + golden * (b - a);
  Scalar w = x, v = x;
  Scalar fx = f(x), fw = fx, fv = fx;
  Scalar d = 0, e = 0;

  int it = 0;
  for (; it < max_iterations; ++it) {
    const Scalar mid = (a + b) / 2;
    const Scalar tol1 = rel_tol * abs(x) + abs_tol;
    const Scalar tol2 = 2 * tol1;
    if (abs(x - mid) <= tol2 - (b - a) / 2) break;

    bool golden_step = true;
    if (abs(e) > tol1) {
      Scalar r = (x - w) * (fx - fv);
      Scalar q = (x - v) * (fx - fw);
      Scalar p = (x - v) * q - (x - w) * r;
      q = 2 * (q - r);
      if (q > 0) p = -p;
      q = abs(q);
      const Scalar e_prev = e;
      e = d;
      if (abs(p) < abs(q * e_prev / 2) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const Scalar u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (mid >= x) ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= mid) ? a - x : b - x;
      d = golden * e;
    }
    const Scalar u = abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const Scalar fu = f(u);
    if (fu <= fx) {
      (u >= x ? a : b) = x;
      v = w, fv = fw;
      w = x, fw = fx;
      x = u, fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w, fv = fw;
        w = u, fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u, fv = fu;
      }
    }
  }
  return {x, fx, it};
}

template <typename Scalar, int Dim>
struct SimplexMinimum {
  Eigen::Matrix<Scalar, Dim, 1> argmin;
  Scalar value{};
  int iterations{};
  bool converged{};
};

/// Nelder-Mead simplex descent inside an axis-aligned box. Trial points are
/// projected onto the box. Standard coefficients (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2); vertex ordering breaks ties by index so the
/// path is deterministic.
///
/// Converges when the simplex spans less than `x_tol` (in units of `step`)
/// along every axis and the spread of function values is below `f_tol`.
template <typename Scalar, int Dim, typename F>
SimplexMinimum<Scalar, Dim> nelder_mead_box(F&& f, const Eigen::Matrix<Scalar, Dim, 1>& start,
                                            const Eigen::Matrix<Scalar, Dim, 1>& step,
                                            const Eigen::Matrix<Scalar, Dim, 1>& lower,
                                            const Eigen::Matrix<Scalar, Dim, 1>& upper,
                                            int max_iterations, Scalar x_tol = Scalar(1e-12),
                                            Scalar f_tol = Scalar(1e-22)) {
  static_assert(Dim > 0, "fixed dimension required");
  using Point = Eigen::Matrix<Scalar, Dim, 1>;
  constexpr int n_vertices = Dim + 1;

  auto project = [&](const Point& p) -> Point { return p.cwiseMax(lower).cwiseMin(upper); };

  std::array<Point, n_vertices> simplex;
  std::array<Scalar, n_vertices> values;
  simplex[0] = project(start);
  for (int i = 0; i < Dim; ++i) {
    Point p = simplex[0];
    // step away from the nearer wall so the initial simplex is never degenerate
    p(i) += (p(i) + step(i) <= upper(i)) ? step(i) : -step(i);
    simplex[i + 1] = project(p);
  }
  for (int i = 0; i < n_vertices; ++i) values[i] = f(simplex[i]);

  std::array<int, n_vertices> order;
  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    std::array<Point, n_vertices> s;
    std::array<Scalar, n_vertices> v;
    for (int i = 0; i < n_vertices; ++i) {
      s[i] = simplex[order[i]];
      v[i] = values[order[i]];
    }
    simplex = s;
    values = v;
  };

  int it = 0;
  bool converged = false;
  for (; it < max_iterations; ++it) {
    sort_vertices();

    Scalar span = 0;
    for (int i = 1; i < n_vertices; ++i) {
      span = std::max(span, ((simplex[i] - simplex[0]).array().abs() / step.array()).maxCoeff());
    }
    if (span <= x_tol && values[Dim] - values[0] <= f_tol) {
      converged = true;
      break;
    }

    Point centroid = Point::Zero();
    for (int i = 0; i < Dim; ++i) centroid += simplex[i];
    centroid /= Scalar(Dim);

    const Point& worst = simplex[Dim];
    const Point reflected = project(centroid + (centroid - worst));
    const Scalar f_reflected = f(reflected);

    if (f_reflected < values[0]) {
      const Point expanded = project(centroid + Scalar(2) * (centroid - worst));
      const Scalar f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        simplex[Dim] = expanded, values[Dim] = f_expanded;
      } else {
        simplex[Dim] = reflected, values[Dim] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[Dim - 1]) {
      simplex[Dim] = reflected, values[Dim] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[Dim];
    const Point contracted = outside ? project(centroid + Scalar(0.5) * (reflected - centroid))
                                     : project(centroid + Scalar(0.5) * (worst - centroid));
    const Scalar f_contracted = f(contracted);
    if (f_contracted < (outside ? f_reflected : values[Dim])) {
      simplex[Dim] = contracted, values[Dim] = f_contracted;
      continue;
    }
    for (int i = 1; i < n_vertices; ++i) {
      simplex[i] = project(simplex[0] + Scalar(0.5) * (simplex[i] - simplex[0]));
      values[i] = f(simplex[i]);
    }
  }
  sort_vertices();
  return {simplex[0], values[0], it, converged};
}

}  // namespace opo

#endif  // OPO_MINIMIZE_HPP
