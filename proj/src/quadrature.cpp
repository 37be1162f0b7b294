#include "ptransit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace ptransit {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  Complex value;
  double err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk15(const std::function<Complex(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  Complex fc = f(c);
  Complex resk = kWgk[7] * fc;
  Complex resg = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    double dx = h * kXgk[j];
    Complex f1 = f(c - dx);
    Complex f2 = f(c + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = resk * h;
  double diff = std::abs(resk - resg) * h;
  p.err = std::pow(200.0 * diff, 1.5);
  p.err = std::min(p.err, diff);
  if (diff > 0 && p.err < diff) p.err = std::max(p.err, 1e-18 * std::abs(p.value));
  return p;
}

}  // namespace

QuadResult integrate_gk(const std::function<Complex(double)>& f, double a,
                        double b, double abs_tol,
                        const std::vector<double>& breakpoints, int max_panels) {
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  if (a == b) return {0.0, 0.0, 0};

  std::vector<double> edges = {a, b};
  for (double x : breakpoints)
    if (x > a && x < b) edges.push_back(x);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::priority_queue<Panel> heap;
  Complex total = 0.0;
  double err = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    Panel p = gk15(f, edges[i], edges[i + 1]);
    total += p.value;
    err += p.err;
    heap.push(p);
  }

  int panels = int(edges.size()) - 1;
  while (err > abs_tol && panels < max_panels) {
    Panel worst = heap.top();
    heap.pop();
    total -= worst.value;
    err -= worst.err;
    double m = 0.5 * (worst.a + worst.b);
    if (m <= worst.a || m >= worst.b) {  // interval exhausted by roundoff
      total += worst.value;
      err += worst.err;
      break;
    }
    Panel left = gk15(f, worst.a, m);
    Panel right = gk15(f, m, worst.b);
    total += left.value + right.value;
    err += left.err + right.err;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  if (err > 1e3 * std::max(abs_tol, 1e-300) && panels >= max_panels)
    throw NumericError("integrate_gk: failed to meet tolerance");
  return {sign * total, err, panels};
}

}  // namespace ptransit
