#include "sgdinfer/linalg.hpp"

#include <cmath>
#include <sstream>

#include "sgdinfer/rng.hpp"

namespace sgdinfer {

namespace {

std::string pivot_message(Index pivot, double value) {
  std::ostringstream os;
  os << "matrix is not positive definite: pivot " << pivot << " has value " << value;
  return os.str();
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square");
  }
}

}  // namespace

FactorizationError::FactorizationError(Index pivot, double value)
    : std::runtime_error(pivot_message(pivot, value)), pivot_(pivot), value_(value) {}

Matrix cholesky_factor(const Matrix& m) {
  require_square(m, "cholesky_factor");
  const Index p = m.rows();
  Matrix l = Matrix::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    double diag = m(j, j);
    for (Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) throw FactorizationError(j, diag);
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (Index i = j + 1; i < p; ++i) {
      double s = m(i, j);
      for (Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix invert_spd(const Matrix& m) {
  const Matrix l = cholesky_factor(m);
  const Index p = l.rows();
  // L⁻¹ by forward substitution, then m⁻¹ = L⁻ᵀ L⁻¹
  Matrix linv = Matrix::Zero(p, p);
  for (Index c = 0; c < p; ++c) {
    linv(c, c) = 1.0 / l(c, c);
    for (Index i = c + 1; i < p; ++i) {
      double s = 0.0;
      for (Index k = c; k < i; ++k) s -= l(i, k) * linv(k, c);
      linv(i, c) = s / l(i, i);
    }
  }
  Matrix inv = linv.transpose() * linv;
  return 0.5 * (inv + inv.transpose());
}

Vector solve_spd(const Matrix& m, const Vector& rhs) {
  const Matrix l = cholesky_factor(m);
  const Index p = l.rows();
  if (rhs.size() != p) throw std::invalid_argument("solve_spd: dimension mismatch");
  Vector z(p);
  for (Index i = 0; i < p; ++i) {
    double s = rhs(i);
    for (Index k = 0; k < i; ++k) s -= l(i, k) * z(k);
    z(i) = s / l(i, i);
  }
  Vector x(p);
  for (Index i = p - 1; i >= 0; --i) {
    double s = z(i);
    for (Index k = i + 1; k < p; ++k) s -= l(k, i) * x(k);
    x(i) = s / l(i, i);
  }
  return x;
}

double spectral_norm(const Matrix& m) {
  const Index p = m.cols();
  if (p == 0) return 0.0;
  const Matrix gram = m.transpose() * m;
  if (gram.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  // fixed-seed start so the result is reproducible
  RngStream rng(0x5eed, 0);
  Vector v(p);
  for (Index i = 0; i < p; ++i) v(i) = rng.uniform01() + 0.5;
  v.normalize();

  double lambda = 0.0;
  constexpr int kMaxIter = 100000;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    Vector w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (iter > 0 && std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace sgdinfer
