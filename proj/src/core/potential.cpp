#include "core/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qlap {

Potential Potential::power_law(double coefficient, double exponent) {
    Potential v;
    v.kind_ = Kind::power_law;
    v.coefficient_ = coefficient;
    v.exponent_ = exponent;
    v.homogeneity_ = exponent;
    v.origin_exponent_ = coefficient == 0.0 ? 0.0 : exponent;
    return v;
}

Potential Potential::hardy(double lambda, double p) {
    return power_law(-lambda, -p);
}

Potential Potential::radial_table(std::vector<double> radii, std::vector<double> values) {
    if (radii.size() != values.size() || radii.size() < 2)
        throw std::invalid_argument("radial table needs >= 2 matching samples");
    if (!std::is_sorted(radii.begin(), radii.end()) || !(radii.front() > 0))
        throw std::invalid_argument("radial table radii must be positive and increasing");
    Potential v;
    v.kind_ = Kind::radial_table;
    v.breakpoints_ = radii;
    v.table_r_ = std::move(radii);
    v.table_v_ = std::move(values);
    return v;
}

Potential Potential::annulus_bump(double support_inner, double support_outer, double coefficient) {
    if (!(support_inner >= 0) || !(support_outer > support_inner))
        throw std::invalid_argument("bump support must satisfy 0 <= inner < outer");
    Potential v;
    v.kind_ = Kind::annulus_bump;
    v.support_inner_ = support_inner;
    v.support_outer_ = support_outer;
    v.coefficient_ = coefficient;
    if (support_inner > 0) v.breakpoints_ = {support_inner, support_outer};
    else v.breakpoints_ = {support_outer};
    return v;
}

Potential Potential::generic(std::function<double(double)> radial,
                             std::optional<double> homogeneity,
                             std::vector<double> breakpoints,
                             double origin_exponent) {
    Potential v;
    v.kind_ = Kind::generic;
    v.fn_ = std::move(radial);
    v.homogeneity_ = homogeneity;
    v.breakpoints_ = std::move(breakpoints);
    v.origin_exponent_ = origin_exponent;
    return v;
}

double Potential::radial(double r) const {
    switch (kind_) {
    case Kind::power_law:
        if (coefficient_ == 0.0) return 0.0;
        return coefficient_ * std::pow(r, exponent_);
    case Kind::radial_table: {
        if (r <= table_r_.front()) return table_v_.front();
        if (r >= table_r_.back()) return table_v_.back();
        const auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
        const size_t i = static_cast<size_t>(it - table_r_.begin());
        const double t = std::log(r / table_r_[i - 1]) / std::log(table_r_[i] / table_r_[i - 1]);
        return table_v_[i - 1] + t * (table_v_[i] - table_v_[i - 1]);
    }
    case Kind::annulus_bump:
        return (r >= support_inner_ && r < support_outer_) ? coefficient_ : 0.0;
    case Kind::generic:
        return fn_(r);
    }
    return 0.0;
}

Potential Potential::dilate(double R, double p) const {
    if (!(R > 0)) throw std::invalid_argument("dilation scale must be positive");
    const double factor = std::pow(R, p);
    switch (kind_) {
    case Kind::power_law:
        return power_law(coefficient_ * factor * std::pow(R, exponent_), exponent_);
    case Kind::radial_table: {
        std::vector<double> radii(table_r_), values(table_v_);
        for (auto& r : radii) r /= R;
        for (auto& v : values) v *= factor;
        return radial_table(std::move(radii), std::move(values));
    }
    case Kind::annulus_bump:
        return annulus_bump(support_inner_ / R, support_outer_ / R, coefficient_ * factor);
    case Kind::generic: {
        auto base = fn_;
        std::vector<double> bps(breakpoints_);
        for (auto& b : bps) b /= R;
        std::optional<double> hom = homogeneity_;
        return generic([base, R, factor](double r) { return factor * base(R * r); },
                       hom, std::move(bps), origin_exponent_);
    }
    }
    throw std::logic_error("unreachable");
}

Potential Potential::multiply_radial_power(double t) const {
    if (t == 0.0) return *this;
    switch (kind_) {
    case Kind::power_law:
        return power_law(coefficient_, exponent_ + t);
    default: {
        const Potential base = *this;
        std::optional<double> hom;
        if (homogeneity_) hom = *homogeneity_ + t;
        return generic([base, t](double r) { return std::pow(r, t) * base.radial(r); },
                       hom, breakpoints_, origin_exponent_ + t);
    }
    }
}

} // namespace qlap
