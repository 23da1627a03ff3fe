#include "lisal/types.hpp"

#include <cmath>
#include <set>
#include <string>
#include <tuple>

#include "lisal/error.hpp"

namespace lisal {

bool Point::is_finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(t);
}

void require_finite(PointSpan points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].is_finite()) {
      throw InvalidInput("non-finite coordinate at point " + std::to_string(i));
    }
  }
}

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ObservationSet::ObservationSet(PointList points, std::vector<double> values)
    : ObservationSet(std::move(points), to_vector(values)) {}

ObservationSet::ObservationSet(PointList points, Eigen::VectorXd values)
    : points_(std::move(points)), values_(std::move(values)) {
  if (points_.size() != static_cast<std::size_t>(values_.size())) {
    throw InvalidInput("observation set: " + std::to_string(points_.size()) + " points but " +
                       std::to_string(values_.size()) + " values");
  }
  require_finite(points_);
  std::set<std::tuple<double, double, double>> seen;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(values_[static_cast<Eigen::Index>(i)])) {
      throw InvalidInput("non-finite value at observation " + std::to_string(i));
    }
    const auto& p = points_[i];
    if (!seen.emplace(p.x, p.y, p.t).second) {
      throw InvalidInput("duplicate input point at observation " + std::to_string(i));
    }
  }
}

ObservationSet ObservationSet::subset(std::span<const std::size_t> indices) const {
  PointList pts;
  Eigen::VectorXd vals(static_cast<Eigen::Index>(indices.size()));
  pts.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    pts.push_back(points_.at(indices[k]));
    vals[static_cast<Eigen::Index>(k)] = values_[static_cast<Eigen::Index>(indices[k])];
  }
  return ObservationSet(std::move(pts), std::move(vals));
}

}  // namespace lisal
