#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace qlap {

// Radial potential V.  All built-in kinds are functions of the Euclidean
// radius |x|; `eval` accepts a point, `radial` the radius directly.
//
//   power_law     V(x) = coefficient * |x|^exponent     (constants: exponent 0)
//   radial_table  log-linear interpolation of samples (clamped outside)
//   annulus_bump  coefficient on {support_inner <= |x| < support_outer}, else 0
//   generic       arbitrary callable, metadata supplied by the caller
//
// Dilation V -> R^p V(R .) maps every built-in kind to the same kind with
// transformed parameters, so homogeneity and breakpoint metadata survive.
class Potential {
public:
    enum class Kind { power_law, radial_table, annulus_bump, generic };

    static Potential power_law(double coefficient, double exponent);
    static Potential zero() { return power_law(0.0, 0.0); }
    // Sign convention: the Hardy potential enters the operator as
    // V = -lambda |x|^{-p}, so lambda > 0 is the attractive case.
    static Potential hardy(double lambda, double p);
    static Potential radial_table(std::vector<double> radii, std::vector<double> values);
    static Potential annulus_bump(double support_inner, double support_outer, double coefficient);
    static Potential generic(std::function<double(double)> radial,
                             std::optional<double> homogeneity = std::nullopt,
                             std::vector<double> breakpoints = {},
                             double origin_exponent = 0.0);

    Kind kind() const { return kind_; }
    double radial(double r) const;
    double operator()(const Vec& x) const { return radial(x.norm()); }

    // Degree s with V(tx) = t^s V(x), when the kind makes it known.
    std::optional<double> homogeneity() const { return homogeneity_; }
    // Radii where V may be discontinuous or non-smooth; quadrature splits there.
    const std::vector<double>& radial_breakpoints() const { return breakpoints_; }
    // Local behaviour |V(x)| ~ |x|^s near the origin; power-law exponent for
    // power_law, 0 (bounded) for the other built-ins.
    double origin_exponent() const { return origin_exponent_; }

    // R^p V(R x) with the same kind.
    Potential dilate(double R, double p) const;

    // |x|^t V(x), used to form weighted norms; keeps metadata consistent.
    Potential multiply_radial_power(double t) const;

    // Parameter access for serialization (meaningful per kind).
    double coefficient() const { return coefficient_; }
    double exponent() const { return exponent_; }
    double support_inner() const { return support_inner_; }
    double support_outer() const { return support_outer_; }
    const std::vector<double>& table_radii() const { return table_r_; }
    const std::vector<double>& table_values() const { return table_v_; }

private:
    Potential() = default;

    Kind kind_ = Kind::power_law;
    double coefficient_ = 0, exponent_ = 0;
    double support_inner_ = 0, support_outer_ = 0;
    std::vector<double> table_r_, table_v_;
    std::function<double(double)> fn_;
    std::optional<double> homogeneity_;
    std::vector<double> breakpoints_;
    double origin_exponent_ = 0;
};

} // namespace qlap
