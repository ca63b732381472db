#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "core/geometry.hpp"

namespace qlap {

// Cartesian lattice covering an anisotropic annulus {inner < |x|_{A^{-1}} <
// outer}.  Interior nodes are the lattice points strictly inside; band nodes
// are the `band_layers` rings of outside nodes reachable from the interior,
// and carry Dirichlet data.  Every interior node has all 4 neighbours active,
// and cells (for the energy) are the lattice squares with 4 active corners.
class AnnularGrid2D {
public:
    enum class Node : std::uint8_t { exterior, interior, band_inner, band_outer };

    static std::shared_ptr<const AnnularGrid2D> build(AnisotropyMatrix matrix, double inner,
                                                      double outer, double h,
                                                      int band_layers = 1);

    const AnisotropyMatrix& matrix() const { return matrix_; }
    double inner() const { return inner_; }
    double outer() const { return outer_; }
    double h() const { return h_; }
    int band_layers() const { return band_layers_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t num_nodes() const { return type_.size(); }
    std::size_t num_interior() const { return interior_.size(); }

    int index(int i, int j) const { return j * nx_ + i; }
    Eigen::Vector2d position(int i, int j) const { return {x0_ + i * h_, y0_ + j * h_}; }
    Node type(int i, int j) const { return type_[static_cast<size_t>(index(i, j))]; }
    Node type_at(int idx) const { return type_[static_cast<size_t>(idx)]; }
    bool active(int i, int j) const { return type(i, j) != Node::exterior; }

    const std::vector<int>& interior_nodes() const { return interior_; }
    const std::vector<int>& band_nodes() const { return band_; }
    // Lower-left corner index (i, j) per cell.
    const std::vector<std::pair<int, int>>& cells() const { return cells_; }
    Eigen::Vector2d node_position(int idx) const {
        return position(idx % nx_, idx / nx_);
    }

private:
    AnnularGrid2D() = default;

    AnisotropyMatrix matrix_ = AnisotropyMatrix::identity(2);
    double inner_ = 0, outer_ = 0, h_ = 0;
    int band_layers_ = 1;
    int nx_ = 0, ny_ = 0;
    double x0_ = 0, y0_ = 0;
    std::vector<Node> type_;
    std::vector<int> interior_, band_;
    std::vector<std::pair<int, int>> cells_;
};

// Node values on the full lattice (zero at exterior nodes).
struct DiscreteField2D {
    std::shared_ptr<const AnnularGrid2D> grid;
    std::vector<double> values;

    explicit DiscreteField2D(std::shared_ptr<const AnnularGrid2D> g)
        : grid(std::move(g)), values(grid->num_nodes(), 0.0) {}

    double& at(int i, int j) { return values[static_cast<size_t>(grid->index(i, j))]; }
    double at(int i, int j) const { return values[static_cast<size_t>(grid->index(i, j))]; }

    // Fills every active node from a position callable.
    void fill(const std::function<double(const Eigen::Vector2d&)>& f);

    // Tensor cubic Lagrange interpolation on the lattice (falls back to
    // bilinear when the 4x4 stencil leaves the active set; throws if even the
    // 2x2 cell does).
    double interpolate(const Eigen::Vector2d& x) const;
};

// Spec of the discrete functional
//   sum_cells h^2 [ w(x_c) (|grad_h u|_A^2 + eps^2)^{p/2} + V(x_c) |u_c|^p ]
// with the cell gradient from corner differences and u_c the corner average.
struct PlanarEnergySpec {
    double p = 2;
    AnisotropyMatrix A = AnisotropyMatrix::identity(2);
    std::function<double(const Eigen::Vector2d&)> potential;  // optional
    std::function<double(const Eigen::Vector2d&)> weight;     // optional
    double epsilon = 0; // gradient regularization (used for p < 2)
};

double discrete_energy(const DiscreteField2D& u, const PlanarEnergySpec& spec);

// dE/du at every node; entries at non-interior nodes are zeroed (Dirichlet).
std::vector<double> discrete_energy_gradient(const DiscreteField2D& u,
                                             const PlanarEnergySpec& spec);

// Dirichlet data: position plus which side of the annulus the band node sits on.
using DirichletData = std::function<double(const Eigen::Vector2d&, bool /*inner side*/)>;

struct MinimizeOptions {
    double residual_tol = 1e-8; // on max |dE/du| / h^2 over interior nodes
    int max_outer = 200;
    int max_inner_cg = 6000;
    bool record_energies = true;
};

struct MinimizeResult {
    DiscreteField2D field;
    std::vector<double> energies; // one entry per accepted step, nonincreasing
    double residual = 0;          // final max |dE/du| / h^2
    int iterations = 0;
    bool converged = false;
};

// Energy minimization with the band held at the Dirichlet data: truncated
// Newton (inner CG on analytic Hessian-vector products, curvature-truncated)
// with an Armijo backtracking line search, so the energy trace is strictly
// nonincreasing.  For p = 2 the first Newton step is the exact linear solve.
MinimizeResult minimize_dirichlet(std::shared_ptr<const AnnularGrid2D> grid,
                                  const PlanarEnergySpec& spec, const DirichletData& data,
                                  const MinimizeOptions& opt = {});

// sup/inf of the field over interior nodes with |x|_{A^{-1}} in
// [factor_lo * R, factor_hi * R), one entry per rung.  Requires positivity on
// the sampled nodes.
std::vector<double> harnack_ratio(const DiscreteField2D& field, const std::vector<double>& rungs,
                                  double factor_lo = 0.5, double factor_hi = 1.5);

// Max-norm discrete Euler-Lagrange residual (scaled by 1/h^2) of the inverted
// field v(x) = u(x / |x|^2_{A^{-1}}) on the image annulus, under the operator
// that the inversion maps the p-equation to in 2D: the plain one for p = 2,
// the |x|_{A^{-1}}^{2(p-2)}-weighted one for p > 2.  The image field is
// produced by lattice interpolation, so the source grid needs enough band
// layers (>= 4 is safe) for the stencils near the rim.
double kelvin_residual(const DiscreteField2D& u, double p);

} // namespace qlap
