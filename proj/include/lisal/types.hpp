#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lisal {

// A spatio-temporal input location: spatial pair (x, y) and time t.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;

  bool operator==(const Point&) const = default;
  bool is_finite() const;
};

using PointList = std::vector<Point>;
using PointSpan = std::span<const Point>;

// Throws InvalidInput if any coordinate is NaN or infinite.
void require_finite(PointSpan points);

// Paired inputs and scalar readings. Immutable once built; construction
// rejects length mismatches, non-finite entries and duplicate inputs.
class ObservationSet {
 public:
  ObservationSet() = default;
  ObservationSet(PointList points, std::vector<double> values);
  ObservationSet(PointList points, Eigen::VectorXd values);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const PointList& points() const { return points_; }
  const Eigen::VectorXd& values() const { return values_; }

  ObservationSet subset(std::span<const std::size_t> indices) const;

 private:
  PointList points_;
  Eigen::VectorXd values_;
};

}  // namespace lisal
