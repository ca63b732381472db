#pragma once

#include <vector>

#include "core/bump.hpp"
#include "core/geometry.hpp"
#include "core/potential.hpp"
#include "core/window.hpp"

namespace qlap {

// Which flavour of the scale-matched Morrey space applies:
//   subdim    p < d: M^q with q > d/p
//   critical  p = d: logarithmically weighted M^q with q > d
//   superdim  p > d: plain L^1 (q is forced to 1)
enum class MorreyRegime { subdim, critical, superdim };

struct MorreyContext {
    double p = 2;
    double q = 2;
    int d = 2;
    MorreyRegime regime = MorreyRegime::subdim;
    double q_eff = 2; // q used by the norm (1 in the superdim regime)

    static MorreyContext make(double p, double q, int d);
    // Exponent of the ball-radius weight r^{-d/q'}; 0 when q_eff = 1.
    double radius_weight_exponent() const;
};

// Finite search family for the supremum over centers and radii: lattice of
// (2^centers_level + 1)^d points over the window's bounding box kept inside
// the closed window, crossed with the dyadic radius ladder diam(w)/2^j,
// j = 1..radii_count.  `refine` deepens both (lattice doubling is nested, the
// ladder only grows), so reported values are nondecreasing under refinement.
struct MorreyGridSpec {
    int centers_level = 3;
    int radii_count = 6;
    int refine = 0;
    double ball_rel_tol = 1e-6;
};

// Integral of |f| over window ∩ B_r(y): exact ray/window intersections per
// angular node, Gauss panels along each ray split at the radial breakpoints
// of f, angular panels split at the tangency directions where the
// intersection geometry changes.  Throws diverged_error when the closed
// window contains the origin and |f| ~ |x|^s there with s <= -d.
double window_ball_integral(const Potential& f, const Window& w, const Vec& y, double r,
                            double rel_tol = 1e-6);

// sup over the family of r^{-d/q'} * integral of |f| over window ∩ B_r(y).
// A finite family, so the value is a certified lower bound for the true norm.
double morrey_norm(const MorreyContext& ctx, const Potential& f, const Window& w,
                   const MorreyGridSpec& grid = {});

// Same supremum with the radius weight replaced by the critical-regime weight
// phi_q(r) = log^{q/d'}(diam(w)/r), d' = d/(d-1).  Radii >= diam are skipped.
double morrey_norm_critical(const MorreyContext& ctx, const Potential& f, const Window& w,
                            const MorreyGridSpec& grid = {});

// Regime dispatch: plain norm (subdim), critical weight (p = d), or the L^1
// flavour (superdim, q_eff = 1).
double special_morrey_norm(const MorreyContext& ctx, const Potential& f, const Window& w,
                           const MorreyGridSpec& grid = {});

// Annulus {inner_factor * scale <= |x|_{A^{-1}} < outer_factor * scale}.
struct AnnulusSpec {
    AnisotropyMatrix matrix;
    double scale;
    double inner_factor = 0.5;
    double outer_factor = 1.5;

    AnnulusSpec(AnisotropyMatrix m, double s) : matrix(std::move(m)), scale(s) {}
    AnnulusSpec(int dim, double s) : matrix(AnisotropyMatrix::identity(dim)), scale(s) {}
    Window window() const { return Window::annulus(matrix, inner_factor * scale, outer_factor * scale); }
};

// Norm that measures the strength of a singularity at 0 or infinity on the
// annulus at the given scale: for p != d the special norm of |x|^{p - d/q} V
// (superdim: weight |x|^{p-d} with the L^1 norm), for p = d the critical norm
// of V itself.
double weighted_fuchsian_norm(const MorreyContext& ctx, const Potential& V,
                              const AnnulusSpec& annulus, const MorreyGridSpec& grid = {});

enum class Zeta { origin, infinity };

struct FuchsianReport {
    Zeta zeta = Zeta::origin;
    std::vector<double> scales;
    std::vector<double> norms;       // NaN where the integral diverged
    std::vector<char> diverged;
    double bound = 0;                // max finite norm
    double stability_ratio = 1;      // max/min over the ladder (inf if min = 0 < max)
    double stability_factor = 10;
    bool is_fuchsian = false;        // all finite and ratio <= factor
};

// Sweeps annuli along a ladder of scales approaching the singular point and
// reports whether the weighted norms stay uniformly bounded (ratio across the
// ladder within the declared stability factor).  Needs >= 4 scales, strictly
// monotone toward zeta.
FuchsianReport fuchsian_check(const MorreyContext& ctx, const Potential& V, Zeta zeta,
                              const std::vector<double>& scales,
                              double stability_factor = 10.0,
                              const AnisotropyMatrix* annulus_matrix = nullptr,
                              const MorreyGridSpec& grid = {});

// Norms of the dilated potentials R^p V(R .) on one fixed test window, one
// entry per scale.  The trend of this sequence is what dilation probes
// classify.
std::vector<double> dilation_norm_sequence(const MorreyContext& ctx, const Potential& V,
                                           const std::vector<double>& scales,
                                           const Window& test_window,
                                           const MorreyGridSpec& grid = {});

// Smallest constant that closes the bound
//   int |V| u^p <= delta ||grad u||_p^p + C ||u||_p^p
// for this particular radial test function and delta, i.e.
//   (int |V| u^p - delta ||grad u||_p^p) / ||u||_p^p.
// All three integrals reduce to 1D radial quadrature.
double morrey_adams_min_constant(const MorreyContext& ctx, const Potential& V,
                                 const RadialBump& u, double delta);

} // namespace qlap
