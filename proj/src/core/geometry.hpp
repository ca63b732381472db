#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace qlap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using ScalarField = std::function<double(const Vec&)>;

// Symmetric positive definite coefficient matrix A with its derived data
// (inverse, determinant, Cholesky factor, eigenvalue bounds) computed once at
// construction.  Construction rejects non-symmetric or non-SPD input.
class AnisotropyMatrix {
public:
    explicit AnisotropyMatrix(Mat entries);

    static AnisotropyMatrix identity(int dim);
    static AnisotropyMatrix diagonal(const std::vector<double>& diag);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Mat& entries() const { return entries_; }
    const Mat& inverse() const { return inverse_; }
    // Lower-triangular L with A = L L^T.
    const Mat& cholesky() const { return chol_; }
    double det() const { return det_; }
    double eig_min() const { return eig_min_; }
    double eig_max() const { return eig_max_; }

    // sqrt(Ax . x)
    double anorm(const Vec& x) const;
    // sqrt(A^{-1}x . x)
    double anorm_inv(const Vec& x) const;
    // Gradient of x -> Ax.x, i.e. 2Ax.
    Vec quad_form_gradient(const Vec& x) const;
    // x / |x|^2_{A^{-1}}.  Involutive; fixes the unit ellipsoid pointwise.
    Vec invert_point(const Vec& x) const;

private:
    Mat entries_, inverse_, chol_;
    double det_ = 0, eig_min_ = 0, eig_max_ = 0;
};

// K[u](x) = u(x / |x|^2_{A^{-1}}).
double kelvin_transform(const AnisotropyMatrix& A, const ScalarField& u, const Vec& x);

// Level set {x : |x|_{A^{-1}} < radius}.
struct Ellipsoid {
    AnisotropyMatrix matrix;
    double radius;

    Ellipsoid(AnisotropyMatrix m, double r);
    bool contains(const Vec& x) const;
    // r^{d-1} |A|^{1/2} omega_d, the measure of the boundary in the surface
    // element matched to the normal A^{-1}x / |x|_{A^{-1}} (the one that makes
    // the divergence theorem hold with that normal).
    double surface_area() const;
};

// Hypersurface area of the unit sphere in R^d (2pi for d=2, 4pi for d=3).
double unit_sphere_area(int dim);

struct SurfaceQuadratureOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    int max_level = 8; // refinement doublings past the base rule
};

// Integral of `integrand` over the boundary of `ell` in the surface element
// described at Ellipsoid::surface_area.  The boundary is parametrised through
// the Cholesky factor of A (x = r L theta, |theta| = 1), under which that
// element pulls back to r^{d-1}|A|^{1/2} times the uniform sphere measure.
// Supports d = 2 (periodic trapezoid) and d = 3 (Gauss-Legendre x trapezoid
// product); refuses other dimensions.  Refines until two consecutive levels
// agree to the requested tolerance; deterministic evaluation order.
double surface_integral(const Ellipsoid& ell, const ScalarField& integrand,
                        const SurfaceQuadratureOptions& opt = {});

} // namespace qlap
