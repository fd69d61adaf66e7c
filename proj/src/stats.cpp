#include "sgdinfer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgdinfer {

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("empirical_quantile: q must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double empirical_quantile(std::span<const double> samples, double q) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, q);
}

Matrix sample_covariance(std::span<const Vector> samples) {
  if (samples.size() < 2) throw std::invalid_argument("sample_covariance: need at least 2 samples");
  const Index p = samples.front().size();
  Vector mean = Vector::Zero(p);
  for (const auto& s : samples) {
    if (s.size() != p) throw std::invalid_argument("sample_covariance: dimension mismatch");
    mean += s;
  }
  mean /= static_cast<double>(samples.size());

  Matrix cov = Matrix::Zero(p, p);
  for (const auto& s : samples) {
    const Vector c = s - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  cov /= static_cast<double>(samples.size() - 1);
  // mirror the lower triangle so the result is exactly symmetric
  Matrix out = cov.selfadjointView<Eigen::Lower>();
  return out;
}

CiTable quantile_intervals(std::span<const Vector> samples, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  if (samples.size() < 2) throw std::invalid_argument("quantile intervals need at least 2 samples");
  const Index p = samples.front().size();
  const double alpha = 1.0 - level;
  CiTable table;
  table.level = level;
  table.intervals.reserve(static_cast<std::size_t>(p));
  std::vector<double> coord(samples.size());
  for (Index j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].size() != p) throw std::invalid_argument("quantile intervals: dimension mismatch");
      coord[i] = samples[i](j);
    }
    std::sort(coord.begin(), coord.end());
    table.intervals.push_back({sorted_quantile(coord, alpha / 2.0), sorted_quantile(coord, 1.0 - alpha / 2.0)});
  }
  return table;
}

double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("normal_quantile: p must lie in [0, 1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }

  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                0.127045825245236838258e1) * r + 0.3647848324763204605e1) * r + 0.5769497221460691405e1) * r +
              0.4630337846156545295e1) * r + 0.1423437110749683577e1) /
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                 0.14810397642748007459) * r + 0.68976733498510000455) * r + 0.1676384830183803849e1) * r +
              0.205319162663775882187e1) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                0.026532189526576123093) * r + 0.29656057182850489123) * r + 0.1784826539917291336e1) * r +
              0.5463784911164114369e1) * r + 0.6657904643501103777e1) /
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

}  // namespace sgdinfer
