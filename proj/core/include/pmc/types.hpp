#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pmc {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Nodal scalar data on a mesh (one value per node).
struct ScalarField : Eigen::VectorXd {
    ScalarField() = default;
    explicit ScalarField(Eigen::Index n) : Eigen::VectorXd(Eigen::VectorXd::Zero(n)) {}
    template <typename Derived>
    ScalarField(const Eigen::MatrixBase<Derived>& other) : Eigen::VectorXd(other) {}
    template <typename Derived>
    ScalarField& operator=(const Eigen::MatrixBase<Derived>& other) {
        Eigen::VectorXd::operator=(other);
        return *this;
    }
};

/// Boundary data, one value per boundary node in loop order.
struct BoundaryFunction : Eigen::VectorXd {
    BoundaryFunction() = default;
    explicit BoundaryFunction(Eigen::Index n) : Eigen::VectorXd(Eigen::VectorXd::Zero(n)) {}
    template <typename Derived>
    BoundaryFunction(const Eigen::MatrixBase<Derived>& other) : Eigen::VectorXd(other) {}
    template <typename Derived>
    BoundaryFunction& operator=(const Eigen::MatrixBase<Derived>& other) {
        Eigen::VectorXd::operator=(other);
        return *this;
    }
};

/// Per-triangle constant 2-vectors (P1 gradients and friends).
using GradientField = std::vector<Vec2>;

}  // namespace pmc
