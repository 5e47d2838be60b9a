#include "rkreg/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "rkreg/errors.hpp"

namespace rkreg {
namespace {

// Kronrod 15-point nodes on [0, 1]; odd indices are the embedded Gauss nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr int kInitialPieces = 16;

struct Piece {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Piece& other) const { return error < other.error; }
};

Piece gauss_kronrod(const std::function<double(double)>& fn, double a,
                    double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_center = fn(center);
  double kronrod = f_center * kKronrodWeights[7];
  double gauss = f_center * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double pair = fn(center - dx) + fn(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& fn, double a,
                           double b, double abs_tol, int max_intervals) {
  std::priority_queue<Piece> pieces;
  double total = 0.0;
  double total_error = 0.0;
  // A single 15-point rule over a wide window can miss a narrow peak
  // entirely, so start from a uniform partition.
  for (int i = 0; i < kInitialPieces; ++i) {
    const double lo = a + (b - a) * i / kInitialPieces;
    const double hi = i + 1 == kInitialPieces ? b : a + (b - a) * (i + 1) / kInitialPieces;
    const Piece p = gauss_kronrod(fn, lo, hi);
    pieces.push(p);
    total += p.value;
    total_error += p.error;
  }

  while (total_error > abs_tol) {
    if (static_cast<int>(pieces.size()) >= max_intervals) {
      throw QuadratureError("adaptive quadrature did not converge on [" +
                            std::to_string(a) + ", " + std::to_string(b) +
                            "]; integrand may be ill-behaved");
    }
    const Piece worst = pieces.top();
    pieces.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Piece left = gauss_kronrod(fn, worst.a, mid);
    const Piece right = gauss_kronrod(fn, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    pieces.push(left);
    pieces.push(right);
  }

  // Re-sum to shed drift from the incremental updates above.
  double value = 0.0;
  double error = 0.0;
  const int count = static_cast<int>(pieces.size());
  while (!pieces.empty()) {
    value += pieces.top().value;
    error += pieces.top().error;
    pieces.pop();
  }
  if (!std::isfinite(value)) {
    throw QuadratureError("integrand produced a non-finite value");
  }
  return {value, error, count};
}

}  // namespace rkreg
