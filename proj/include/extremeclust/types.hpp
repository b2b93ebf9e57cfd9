#pragma once

#include <Eigen/Dense>
#include <vector>

namespace extremeclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Unordered site pair, stored with first < second (0-based indices).
using SitePair = std::pair<int, int>;

}  // namespace extremeclust
