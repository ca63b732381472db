#include "core/window.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qlap {

Window Window::ball(Vec center, double radius) {
    if (!(radius > 0)) throw std::invalid_argument("ball radius must be positive");
    Window w;
    w.dim_ = static_cast<int>(center.size());
    w.is_ball_ = true;
    w.center_ = std::move(center);
    w.radius_ = radius;
    w.diameter_ = 2.0 * radius;
    return w;
}

Window Window::annulus(AnisotropyMatrix matrix, double inner, double outer) {
    if (!(inner >= 0) || !(outer > inner))
        throw std::invalid_argument("annulus radii must satisfy 0 <= inner < outer");
    Window w;
    w.dim_ = matrix.dim();
    w.is_ball_ = false;
    w.inner_ = inner;
    w.outer_ = outer;
    // {|x|_{A^{-1}} = outer} has Euclidean semi-axes outer * sqrt(eig(A)).
    w.diameter_ = 2.0 * outer * std::sqrt(matrix.eig_max());
    w.matrix_ = std::move(matrix);
    return w;
}

Window Window::annulus(int dim, double inner, double outer) {
    return annulus(AnisotropyMatrix::identity(dim), inner, outer);
}

bool Window::contains(const Vec& x) const {
    if (is_ball_) return (x - center_).norm() < radius_;
    const double s = matrix_->anorm_inv(x);
    return s >= inner_ && s < outer_;
}

bool Window::closure_contains_origin() const {
    if (is_ball_) return center_.norm() <= radius_;
    return inner_ == 0.0;
}

std::pair<Vec, Vec> Window::bounding_box() const {
    if (is_ball_) {
        return {center_.array() - radius_, center_.array() + radius_};
    }
    const double half = outer_ * std::sqrt(matrix_->eig_max());
    Vec lo = Vec::Constant(dim_, -half), hi = Vec::Constant(dim_, half);
    return {lo, hi};
}

namespace {

// Roots of q(t) = at^2 + bt + c <= 0 as an interval, empty if none.
std::optional<std::pair<double, double>> quadratic_sublevel(double a, double b, double c) {
    // a > 0 always here (a is a positive-definite form of the direction).
    const double disc = b * b - 4.0 * a * c;
    if (disc <= 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    // Numerically stable root pair.
    const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
    double t1 = q / a, t2 = (c == 0.0 ? 0.0 : c / q);
    if (t1 > t2) std::swap(t1, t2);
    return std::make_pair(t1, t2);
}

} // namespace

std::vector<std::pair<double, double>> Window::ray_intervals(const Vec& origin, const Vec& dir) const {
    std::vector<std::pair<double, double>> out;
    if (is_ball_) {
        const Vec rel = origin - center_;
        const auto iv = quadratic_sublevel(dir.squaredNorm(), 2.0 * rel.dot(dir),
                                           rel.squaredNorm() - radius_ * radius_);
        if (iv) {
            const double lo = std::max(0.0, iv->first);
            if (iv->second > lo) out.emplace_back(lo, iv->second);
        }
        return out;
    }
    const Mat& Ainv = matrix_->inverse();
    const double a = dir.dot(Ainv * dir);
    const double b = 2.0 * origin.dot(Ainv * dir);
    const double c0 = origin.dot(Ainv * origin);
    const auto outer_iv = quadratic_sublevel(a, b, c0 - outer_ * outer_);
    if (!outer_iv) return out;
    double lo = std::max(0.0, outer_iv->first);
    double hi = outer_iv->second;
    if (!(hi > lo)) return out;
    const auto hole = inner_ > 0
                          ? quadratic_sublevel(a, b, c0 - inner_ * inner_)
                          : std::nullopt;
    if (!hole || hole->second <= lo || hole->first >= hi) {
        out.emplace_back(lo, hi);
        return out;
    }
    if (hole->first > lo) out.emplace_back(lo, hole->first);
    if (hi > hole->second) out.emplace_back(std::max(lo, hole->second), hi);
    return out;
}

} // namespace qlap
