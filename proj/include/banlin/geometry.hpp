#pragma once

#include <vector>

#include "banlin/linalg.hpp"

// Minimum-volume enclosing ellipsoid (MVEE) of a finite point set, the
// preprocessing pipeline that maps an action set into MVEE coordinates,
// and the contact-point exploration distribution it supports.
//
// Pipeline for a point set A in R^d:
//   1. reduce_rank: rewrite A in the lowest-dimensional affine coordinates
//      that still carry it (losses are preserved up to a per-loss-vector
//      constant, see AffineMap::loss_offset).
//   2. mvee: E = {x : (x - x0)^T H^{-1} (x - x0) <= 1} enclosing A.
//   3. map a -> a' = H^{-1}(a - x0); with the inner product <x,y> = x^T H y
//      the MVEE of the mapped set is the unit ball.
//   4. john_weights: contact points u_i and simplex weights mu with
//      d * sum_i mu_i u_i u_i^T H = I, giving an exploration distribution
//      whose covariance is I/d in the metric.

namespace banlin {

// original = basis * reduced + offset.
struct AffineMap {
    Matrix basis;  // d x d'
    Vec offset;    // d

    Vec apply(const Vec& reduced) const;
    // Loss functional in reduced coordinates under the standard pairing:
    // dot(reduced, pullback_loss(z)) == (original - offset) . z. Losses of
    // two embedded points differ exactly as the originals do; absolute
    // losses shift by the constant loss_offset(z).
    Vec pullback_loss(const Vec& z) const { return basis.apply_transposed(z); }
    double loss_offset(const Vec& z) const { return dot(offset, z); }
};

struct Ellipsoid {
    Vec center;    // x0
    Matrix shape;  // H, positive definite
    double dual_gap = 0.0;
    long iterations = 0;
};

// Positive definite inner product <x,y> = x^T H y with cached square roots.
class Metric {
public:
    explicit Metric(const Matrix& h);

    int dim() const { return shape_.rows(); }
    const Matrix& shape() const { return shape_; }
    const Matrix& sqrt() const { return sqrt_; }
    const Matrix& inv_sqrt() const { return inv_sqrt_; }

    double inner(const Vec& x, const Vec& y) const { return dot(x, shape_.apply(y)); }
    double squared_norm(const Vec& x) const { return inner(x, x); }

private:
    Matrix shape_;
    Matrix sqrt_;
    Matrix inv_sqrt_;
};

struct JohnExploration {
    std::vector<Vec> contact_points;  // u_i, unit metric norm
    Vec weights;                      // mu on the simplex, one per contact point
    Metric metric;
    std::vector<int> action_indices;  // index of each u_i in the source action list
};

struct PreprocessedActions {
    std::vector<Vec> original;  // the input points
    std::vector<Vec> actions;   // a' = H^{-1}(a - x0) in reduced coordinates
    Metric metric;              // H of the reduced-space MVEE
    AffineMap embed;            // reduced a' -> original coordinates
    Matrix reduction_basis;     // orthonormal columns of the rank reduction
    int rank = 0;               // d'

    Vec center() const { return embed.offset; }
    // Loss vector in reduced coordinates, paired through the metric:
    // metric.inner(a'_i, metric_loss(z)) == (original_i - center) . z.
    // This is the vector the importance-weighted estimator is unbiased for.
    Vec metric_loss(const Vec& z_original) const { return reduction_basis.apply_transposed(z_original); }
    double reduced_loss(int index, const Vec& z_original) const;
};

// Rewrites the points in the lowest-dimensional coordinates whose centered
// covariance has full rank. If the points already span affinely, the map is
// the identity. N = 0 raises EmptySet; a single repeated point yields rank 0.
struct RankReduction {
    std::vector<Vec> points;
    AffineMap embed;
    int rank = 0;
};
RankReduction reduce_rank(const std::vector<Vec>& points, double rel_tol = 1e-12);

// Khachiyan first-order ascent with Todd-Yildirim drop steps on the lifted
// determinant program. Stops when the relative dual gap guarantees
// containment within 1 + tol; raises Degenerate for affinely rank-deficient
// input and NoConvergence at the iteration cap.
Ellipsoid mvee(const std::vector<Vec>& points, double tol = 1e-8, long max_iter = 1000000);

PreprocessedActions preprocess(const std::vector<Vec>& points, double mvee_tol = 1e-9);

// Nonnegative least squares min ||A x - b|| s.t. x >= 0 (Lawson-Hanson
// active set; rank-deficient active sets are handled through the spectral
// pseudo-inverse of the Gram block).
Vec nnls(const Matrix& a, const Vec& b, int max_iter = 0);

// Detects the contact points (metric norm >= 1 - contact_tol), solves for
// simplex weights reproducing the identity, splits weight equally across
// points with identical outer products when that respects the
// d(d+1)/2 + 1 support bound, prunes weights below 1e-10 and renormalizes.
// `tol` bounds the Frobenius residual of d * sum mu_i u_i u_i^T H - I;
// raises ResidualTooLarge when the fit cannot reach it.
JohnExploration john_weights(const PreprocessedActions& pre, double tol = 1e-6,
                             double contact_tol = 1e-6);

// Frobenius norm of d * sum_i mu_i u_i u_i^T H - I.
double verify_john(const JohnExploration& j);

}  // namespace banlin
