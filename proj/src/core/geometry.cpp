#include "core/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/quadrature.hpp"

namespace qlap {

AnisotropyMatrix::AnisotropyMatrix(Mat entries) : entries_(std::move(entries)) {
    const auto n = entries_.rows();
    if (n < 1 || entries_.cols() != n)
        throw std::invalid_argument("anisotropy matrix must be square and nonempty");
    const double scale = entries_.cwiseAbs().maxCoeff();
    if (!(scale > 0) || !entries_.allFinite())
        throw std::invalid_argument("anisotropy matrix must be finite and nonzero");
    if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("anisotropy matrix must be symmetric");
    // Symmetrise exactly so downstream algebra sees a bitwise-symmetric matrix.
    entries_ = ((entries_ + entries_.transpose()) / 2).eval();

    Eigen::LLT<Mat> llt(entries_);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("anisotropy matrix must be positive definite");
    chol_ = llt.matrixL();

    Eigen::SelfAdjointEigenSolver<Mat> es(entries_);
    eig_min_ = es.eigenvalues().minCoeff();
    eig_max_ = es.eigenvalues().maxCoeff();
    if (!(eig_min_ > 0))
        throw std::invalid_argument("anisotropy matrix must be positive definite");

    inverse_ = llt.solve(Mat::Identity(n, n));
    inverse_ = ((inverse_ + inverse_.transpose()) / 2).eval();
    det_ = entries_.determinant();
}

AnisotropyMatrix AnisotropyMatrix::identity(int dim) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    return AnisotropyMatrix(Mat::Identity(dim, dim));
}

AnisotropyMatrix AnisotropyMatrix::diagonal(const std::vector<double>& diag) {
    Mat m = Mat::Zero(static_cast<long>(diag.size()), static_cast<long>(diag.size()));
    for (size_t i = 0; i < diag.size(); ++i) m(static_cast<long>(i), static_cast<long>(i)) = diag[i];
    return AnisotropyMatrix(std::move(m));
}

double AnisotropyMatrix::anorm(const Vec& x) const {
    if (x.size() != entries_.rows()) throw std::invalid_argument("vector dimension mismatch");
    return std::sqrt(x.dot(entries_ * x));
}

double AnisotropyMatrix::anorm_inv(const Vec& x) const {
    if (x.size() != entries_.rows()) throw std::invalid_argument("vector dimension mismatch");
    return std::sqrt(x.dot(inverse_ * x));
}

Vec AnisotropyMatrix::quad_form_gradient(const Vec& x) const {
    if (x.size() != entries_.rows()) throw std::invalid_argument("vector dimension mismatch");
    return 2.0 * (entries_ * x);
}

Vec AnisotropyMatrix::invert_point(const Vec& x) const {
    const double s2 = x.dot(inverse_ * x);
    if (!(s2 > 0)) throw std::domain_error("cannot invert the origin");
    return x / s2;
}

double kelvin_transform(const AnisotropyMatrix& A, const ScalarField& u, const Vec& x) {
    return u(A.invert_point(x));
}

Ellipsoid::Ellipsoid(AnisotropyMatrix m, double r) : matrix(std::move(m)), radius(r) {
    if (!(r > 0)) throw std::invalid_argument("ellipsoid radius must be positive");
}

bool Ellipsoid::contains(const Vec& x) const {
    return matrix.anorm_inv(x) < radius;
}

double unit_sphere_area(int dim) {
    // omega_d = 2 pi^{d/2} / Gamma(d/2)
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    return 2.0 * std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0);
}

double Ellipsoid::surface_area() const {
    const int d = matrix.dim();
    return std::pow(radius, d - 1) * std::sqrt(matrix.det()) * unit_sphere_area(d);
}

namespace {

// One refinement level of the pulled-back sphere rule.  d=2: trapezoid with n
// equal angles (spectral for smooth periodic integrands).  d=3: tensor of
// Gauss-Legendre in cos(polar) with a periodic trapezoid in azimuth.
double sphere_level(const Ellipsoid& ell, const ScalarField& f, int level) {
    const int d = ell.matrix.dim();
    const Mat& L = ell.matrix.cholesky();
    const double r = ell.radius;
    const double jac = std::pow(r, d - 1) * std::sqrt(ell.matrix.det());
    if (d == 2) {
        const int n = 16 << level;
        double sum = 0;
        Vec theta(2);
        for (int k = 0; k < n; ++k) {
            const double a = 2.0 * std::numbers::pi * k / n;
            theta << std::cos(a), std::sin(a);
            sum += f(r * (L * theta));
        }
        return jac * (2.0 * std::numbers::pi / n) * sum;
    }
    if (d == 3) {
        const int ngl = 8 << level;
        const int naz = 16 << level;
        const auto& rule = gauss_legendre_rule(ngl);
        double sum = 0;
        Vec theta(3);
        for (int i = 0; i < ngl; ++i) {
            const double u = rule.nodes[i]; // cos(polar) on [-1, 1]
            const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
            double ring = 0;
            for (int k = 0; k < naz; ++k) {
                const double a = 2.0 * std::numbers::pi * k / naz;
                theta << s * std::cos(a), s * std::sin(a), u;
                ring += f(r * (L * theta));
            }
            sum += rule.weights[i] * ring * (2.0 * std::numbers::pi / naz);
        }
        return jac * sum;
    }
    throw unsupported_error("surface quadrature supports d = 2 and d = 3 only");
}

} // namespace

double surface_integral(const Ellipsoid& ell, const ScalarField& integrand,
                        const SurfaceQuadratureOptions& opt) {
    const int d = ell.matrix.dim();
    if (d != 2 && d != 3)
        throw unsupported_error("surface quadrature supports d = 2 and d = 3 only");
    double prev = sphere_level(ell, integrand, 0);
    for (int level = 1; level <= opt.max_level; ++level) {
        const double cur = sphere_level(ell, integrand, level);
        if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur) + opt.abs_tol)
            return cur;
        prev = cur;
    }
    return prev;
}

} // namespace qlap
