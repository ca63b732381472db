#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "core/geometry.hpp"

namespace qlap {

// Bounded measurable region over which Morrey-type suprema run.  Two shapes
// cover everything the suite needs: Euclidean balls and (possibly anisotropic)
// annuli {inner <= |x|_{A^{-1}} < outer}.  Both admit exact diameters and
// exact ray intersections, which the ball quadrature relies on.
class Window {
public:
    static Window ball(Vec center, double radius);
    static Window annulus(AnisotropyMatrix matrix, double inner, double outer);
    // Euclidean annulus around the origin.
    static Window annulus(int dim, double inner, double outer);

    int dim() const { return dim_; }
    bool is_ball() const { return is_ball_; }
    double diameter() const { return diameter_; }
    bool contains(const Vec& x) const;
    bool closure_contains_origin() const;

    // Axis-aligned bounding box (conservative for anisotropic annuli).
    std::pair<Vec, Vec> bounding_box() const;

    // Sorted, disjoint parameter intervals {t >= 0 : origin + t dir in window},
    // dir a unit vector.  At most two intervals for an annulus.
    std::vector<std::pair<double, double>> ray_intervals(const Vec& origin, const Vec& dir) const;

    const AnisotropyMatrix& matrix() const { return matrix_.value(); }
    double inner() const { return inner_; }
    double outer() const { return outer_; }
    const Vec& center() const { return center_; }
    double radius() const { return radius_; }

private:
    Window() = default;

    int dim_ = 0;
    bool is_ball_ = false;
    Vec center_;
    double radius_ = 0;
    std::optional<AnisotropyMatrix> matrix_;
    double inner_ = 0, outer_ = 0;
    double diameter_ = 0;
};

} // namespace qlap
