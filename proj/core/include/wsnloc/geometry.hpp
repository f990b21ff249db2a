#pragma once

#include <cmath>

namespace wsnloc {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

inline double squared_norm(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Symmetric 2x2 matrix.
struct Mat2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    constexpr double det() const { return xx * yy - xy * xy; }
    constexpr double trace() const { return xx + yy; }

    static constexpr Mat2 identity(double s = 1.0) { return {s, 0.0, s}; }
    friend constexpr Mat2 operator+(Mat2 a, Mat2 b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
    friend constexpr Mat2 operator*(double s, Mat2 a) { return {s * a.xx, s * a.xy, s * a.yy}; }
    friend constexpr bool operator==(Mat2 a, Mat2 b) = default;
};

/// Axis-aligned rectangle [xmin,xmax] x [ymin,ymax].
struct Box {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    bool contains(Vec2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
    Vec2 clamp(Vec2 p) const;
    Box padded(double r) const { return {xmin - r, ymin - r, xmax + r, ymax + r}; }
    double area() const { return (xmax - xmin) * (ymax - ymin); }
    Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    double diagonal() const { return std::hypot(xmax - xmin, ymax - ymin); }
};

/// Field of size width x height anchored at the origin.
inline Box field_box(double width, double height) { return {0.0, 0.0, width, height}; }

/// Bivariate normal N(mean, cov) evaluated through a precomputed inverse.
/// Singular covariances are jittered until positive definite.
class Gaussian2 {
public:
    explicit Gaussian2(Mat2 cov);

    /// Density at an offset (x - mean).
    double pdf(Vec2 offset) const {
        return norm_ * std::exp(-0.5 * mahalanobis2(offset));
    }

    /// Squared Mahalanobis distance of an offset.
    double mahalanobis2(Vec2 offset) const {
        return inv_.xx * offset.x * offset.x + 2.0 * inv_.xy * offset.x * offset.y + inv_.yy * offset.y * offset.y;
    }

    double log_norm() const { return log_norm_; }

    /// Maps a standard-normal pair onto this covariance (Cholesky factor).
    Vec2 transform(Vec2 z) const { return {l11_ * z.x, l21_ * z.x + l22_ * z.y}; }

    const Mat2& covariance() const { return cov_; }

private:
    Mat2 cov_;
    Mat2 inv_;
    double norm_ = 0.0;
    double log_norm_ = 0.0;
    double l11_ = 0.0;
    double l21_ = 0.0;
    double l22_ = 0.0;
};

}  // namespace wsnloc
