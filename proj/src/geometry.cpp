#include "banlin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "banlin/errors.hpp"

namespace banlin {

Vec AffineMap::apply(const Vec& reduced) const {
    Vec out = basis.apply(reduced);
    for (size_t i = 0; i < out.size(); ++i) out[i] += offset[i];
    return out;
}

Metric::Metric(const Matrix& h) : shape_(h) {
    SymMatrix sym(h);
    if (min_eig(sym) <= 0.0) throw Degenerate("Metric: shape matrix must be positive definite");
    sqrt_ = psd_power(sym, 0.5).mat();
    inv_sqrt_ = psd_power(sym, -0.5).mat();
}

double PreprocessedActions::reduced_loss(int index, const Vec& z_original) const {
    const Vec& a = original[static_cast<size_t>(index)];
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - embed.offset[i]) * z_original[i];
    return s;
}

RankReduction reduce_rank(const std::vector<Vec>& points, double rel_tol) {
    if (points.empty()) throw EmptySet("reduce_rank: no points");
    const int d = static_cast<int>(points.front().size());
    const int n = static_cast<int>(points.size());

    Vec mean = zeros(d);
    for (const Vec& p : points) add_scaled(mean, 1.0 / n, p);

    Matrix cov(d, d);
    for (const Vec& p : points)
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) cov(r, c) += (p[static_cast<size_t>(r)] - mean[static_cast<size_t>(r)]) * (p[static_cast<size_t>(c)] - mean[static_cast<size_t>(c)]);

    SpectralDecomp dec = sym_eig(SymMatrix(cov, 1e-6));
    const double lam_max = std::max(dec.eigenvalues.front(), 0.0);
    int rank = 0;
    for (double lam : dec.eigenvalues)
        if (lam > rel_tol * lam_max && lam > 0.0) ++rank;

    RankReduction out;
    out.rank = rank;
    if (rank == d) {
        out.points = points;
        out.embed.basis = Matrix::identity(d);
        out.embed.offset = zeros(d);
        return out;
    }

    Matrix basis(d, rank);
    for (int c = 0; c < rank; ++c)
        for (int r = 0; r < d; ++r) basis(r, c) = dec.eigenvectors(r, c);
    out.embed.basis = basis;
    out.embed.offset = mean;
    out.points.reserve(points.size());
    for (const Vec& p : points) out.points.push_back(basis.apply_transposed(p - mean));
    return out;
}

namespace {

// Lifted point q_i = (a_i; 1); M(u) = sum u_i q_i q_i^T. The iteration keeps
// M^{-1} updated by Sherman-Morrison and refreshes it periodically to shed
// accumulated rounding.
struct LiftedState {
    std::vector<Vec> q;
    Vec u;
    Matrix minv;
    int dim;  // lifted dimension d + 1

    void refresh() {
        Matrix m(dim, dim);
        for (size_t i = 0; i < q.size(); ++i) {
            if (u[i] == 0.0) continue;
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c) m(r, c) += u[i] * q[i][static_cast<size_t>(r)] * q[i][static_cast<size_t>(c)];
        }
        SymMatrix sym(m, 1e-6);
        SpectralDecomp dec = sym_eig(sym);
        if (dec.eigenvalues.back() <= 1e-13 * std::max(dec.eigenvalues.front(), 0.0))
            throw Degenerate("mvee: points are affinely rank-deficient");
        minv = psd_pinv(sym).mat();
    }

    double w(size_t i) const { return dot(q[i], minv.apply(q[i])); }
};

}  // namespace

Ellipsoid mvee(const std::vector<Vec>& points, double tol, long max_iter) {
    if (points.empty()) throw EmptySet("mvee: no points");
    if (tol <= 0.0) throw std::invalid_argument("mvee: tol must be positive");
    const int d = static_cast<int>(points.front().size());
    const int n = static_cast<int>(points.size());
    const int ld = d + 1;

    LiftedState st;
    st.dim = ld;
    st.u = Vec(static_cast<size_t>(n), 1.0 / n);
    st.q.reserve(points.size());
    for (const Vec& p : points) {
        Vec q = p;
        q.push_back(1.0);
        st.q.push_back(std::move(q));
    }
    st.refresh();

    // Stopping rule: relative dual gap below tol * d/(d+1), which makes the
    // worst containment value (w_max - 1)/d at most 1 + tol.
    const double gap_stop = tol * static_cast<double>(d) / ld;
    double gap = 0.0;
    long it = 0;
    bool converged = false;
    for (; it < max_iter; ++it) {
        if (it > 0 && it % 100 == 0) st.refresh();

        double w_max = -1.0;
        size_t j_max = 0;
        double w_min = std::numeric_limits<double>::max();
        size_t j_min = 0;
        bool have_min = false;
        for (size_t i = 0; i < st.q.size(); ++i) {
            double wi = st.w(i);
            if (wi > w_max) {
                w_max = wi;
                j_max = i;
            }
            if (st.u[i] > 0.0 && wi < w_min) {
                w_min = wi;
                j_min = i;
                have_min = true;
            }
        }
        gap = w_max / ld - 1.0;
        if (gap <= gap_stop) {
            converged = true;
            break;
        }
        double drop_gap = have_min ? 1.0 - w_min / ld : 0.0;

        size_t j;
        double beta;
        bool add_step = gap >= drop_gap;
        if (add_step) {
            j = j_max;
            beta = (w_max - ld) / (ld * (w_max - 1.0));
        } else {
            j = j_min;
            double full = (ld - w_min) / (ld * (w_min - 1.0));
            beta = std::min(full, st.u[j] / (1.0 - st.u[j]));
        }

        Vec h = st.minv.apply(st.q[j]);
        double wj = dot(st.q[j], h);
        if (add_step) {
            double denom = (1.0 - beta) + beta * wj;
            if (denom <= 1e-14) {
                st.refresh();
                continue;
            }
            double f = beta / denom;
            for (int r = 0; r < ld; ++r)
                for (int c = 0; c < ld; ++c)
                    st.minv(r, c) = (st.minv(r, c) - f * h[static_cast<size_t>(r)] * h[static_cast<size_t>(c)]) / (1.0 - beta);
            for (double& ui : st.u) ui *= (1.0 - beta);
            st.u[j] += beta;
        } else {
            double denom = (1.0 + beta) - beta * wj;
            if (denom <= 1e-14) {
                st.refresh();
                continue;
            }
            double f = beta / denom;
            for (int r = 0; r < ld; ++r)
                for (int c = 0; c < ld; ++c)
                    st.minv(r, c) = (st.minv(r, c) + f * h[static_cast<size_t>(r)] * h[static_cast<size_t>(c)]) / (1.0 + beta);
            for (double& ui : st.u) ui *= (1.0 + beta);
            st.u[j] -= beta;
            if (st.u[j] < 1e-17) st.u[j] = 0.0;
        }
    }
    if (!converged) throw NoConvergence("mvee: iteration cap reached before tolerance");

    Ellipsoid e;
    e.dual_gap = gap;
    e.iterations = it;
    e.center = zeros(d);
    for (size_t i = 0; i < points.size(); ++i) add_scaled(e.center, st.u[i], points[i]);
    Matrix lam(d, d);
    for (size_t i = 0; i < points.size(); ++i) {
        if (st.u[i] == 0.0) continue;
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                lam(r, c) += st.u[i] * (points[i][static_cast<size_t>(r)] - e.center[static_cast<size_t>(r)]) * (points[i][static_cast<size_t>(c)] - e.center[static_cast<size_t>(c)]);
    }
    e.shape = lam.scaled(static_cast<double>(d));
    return e;
}

PreprocessedActions preprocess(const std::vector<Vec>& points, double mvee_tol) {
    RankReduction red = reduce_rank(points);
    if (red.rank == 0) throw Degenerate("preprocess: all points coincide");

    Ellipsoid ell = mvee(red.points, mvee_tol);
    Metric metric(ell.shape);
    Matrix h_inv = psd_pinv(SymMatrix(ell.shape)).mat();

    PreprocessedActions pre{points, {}, metric, AffineMap{}, red.embed.basis, red.rank};
    pre.actions.reserve(points.size());
    for (const Vec& r : red.points) pre.actions.push_back(h_inv.apply(r - ell.center));

    // original = B_red (H a' + x0) + m_red = (B_red H) a' + (B_red x0 + m_red)
    pre.embed.basis = red.embed.basis * ell.shape;
    pre.embed.offset = red.embed.apply(ell.center);
    return pre;
}

Vec nnls(const Matrix& a, const Vec& b, int max_iter) {
    const int cols = a.cols();
    if (max_iter <= 0) max_iter = 30 * std::max(cols, 8);

    Matrix gram = a.transposed() * a;
    Vec atb = a.apply_transposed(b);

    Vec x(static_cast<size_t>(cols), 0.0);
    std::vector<bool> active(static_cast<size_t>(cols), false);
    const double grad_floor = 1e-12 * std::max(norm_inf(atb), 1e-300);

    auto solve_active = [&](const std::vector<int>& idx) {
        const int k = static_cast<int>(idx.size());
        Matrix g(k, k);
        Vec rhs(static_cast<size_t>(k), 0.0);
        for (int r = 0; r < k; ++r) {
            rhs[static_cast<size_t>(r)] = atb[static_cast<size_t>(idx[static_cast<size_t>(r)])];
            for (int c = 0; c < k; ++c) g(r, c) = gram(idx[static_cast<size_t>(r)], idx[static_cast<size_t>(c)]);
        }
        return psd_pinv(SymMatrix(g, 1e-6), 1e-12).mat().apply(rhs);
    };

    for (int outer = 0; outer < max_iter; ++outer) {
        // gradient of 0.5||Ax-b||^2 is A^T(Ax-b); pick the most negative
        Vec grad = gram.apply(x);
        for (size_t i = 0; i < grad.size(); ++i) grad[i] = atb[i] - grad[i];
        int best = -1;
        double best_val = grad_floor;
        for (int i = 0; i < cols; ++i) {
            if (active[static_cast<size_t>(i)]) continue;
            if (grad[static_cast<size_t>(i)] > best_val) {
                best_val = grad[static_cast<size_t>(i)];
                best = i;
            }
        }
        if (best < 0) break;
        active[static_cast<size_t>(best)] = true;

        for (int inner = 0; inner < max_iter; ++inner) {
            std::vector<int> idx;
            for (int i = 0; i < cols; ++i)
                if (active[static_cast<size_t>(i)]) idx.push_back(i);
            Vec trial = solve_active(idx);

            double alpha = 1.0;
            for (size_t k = 0; k < idx.size(); ++k) {
                if (trial[k] > 0.0) continue;
                double xi = x[static_cast<size_t>(idx[k])];
                if (xi - trial[k] > 0.0) alpha = std::min(alpha, xi / (xi - trial[k]));
            }
            if (alpha >= 1.0) {
                for (size_t k = 0; k < idx.size(); ++k) x[static_cast<size_t>(idx[k])] = trial[k];
                break;
            }
            for (size_t k = 0; k < idx.size(); ++k) {
                double xi = x[static_cast<size_t>(idx[k])];
                double xv = xi + alpha * (trial[k] - xi);
                x[static_cast<size_t>(idx[k])] = xv;
            }
            for (size_t k = 0; k < idx.size(); ++k)
                if (x[static_cast<size_t>(idx[k])] <= 1e-15) {
                    x[static_cast<size_t>(idx[k])] = 0.0;
                    active[static_cast<size_t>(idx[k])] = false;
                }
        }
    }
    return x;
}

namespace {

Matrix john_operator(const std::vector<Vec>& contacts, const Vec& mu, const Metric& metric) {
    const int d = metric.dim();
    Matrix sum(d, d);
    for (size_t i = 0; i < contacts.size(); ++i) {
        if (mu[i] == 0.0) continue;
        Vec hu = metric.shape().apply(contacts[i]);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) sum(r, c) += mu[i] * contacts[i][static_cast<size_t>(r)] * hu[static_cast<size_t>(c)];
    }
    return sum.scaled(static_cast<double>(d));
}

double residual_of(const std::vector<Vec>& contacts, const Vec& mu, const Metric& metric) {
    return frobenius_distance(john_operator(contacts, mu, metric), Matrix::identity(metric.dim()));
}

}  // namespace

JohnExploration john_weights(const PreprocessedActions& pre, double tol, double contact_tol) {
    const int d = pre.rank;
    const Metric& metric = pre.metric;

    std::vector<int> contact_idx;
    for (size_t i = 0; i < pre.actions.size(); ++i)
        if (metric.squared_norm(pre.actions[i]) >= 1.0 - contact_tol) contact_idx.push_back(static_cast<int>(i));
    if (contact_idx.empty()) throw ResidualTooLarge("john_weights: no contact points detected");

    const int m = static_cast<int>(contact_idx.size());
    std::vector<Vec> contacts;
    contacts.reserve(contact_idx.size());
    for (int idx : contact_idx) contacts.push_back(pre.actions[static_cast<size_t>(idx)]);

    // Columns are vec(d * u u^T H); the target is vec(I), so the NNLS
    // residual is exactly the Frobenius defect of the decomposition.
    Matrix a(d * d, m);
    for (int c = 0; c < m; ++c) {
        const Vec& u = contacts[static_cast<size_t>(c)];
        Vec hu = metric.shape().apply(u);
        for (int r1 = 0; r1 < d; ++r1)
            for (int r2 = 0; r2 < d; ++r2)
                a(r1 * d + r2, c) = d * u[static_cast<size_t>(r1)] * hu[static_cast<size_t>(r2)];
    }
    Vec b(static_cast<size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) b[static_cast<size_t>(i * d + i)] = 1.0;

    Vec mu = nnls(a, b);

    // Points with identical columns (e.g. u and -u) can share their weight
    // arbitrarily; split it equally unless that overruns the support bound.
    const long max_support = static_cast<long>(d) * (d + 1) / 2 + 1;
    {
        Vec col_scale(static_cast<size_t>(m), 0.0);
        for (int c = 0; c < m; ++c)
            for (int r = 0; r < d * d; ++r) col_scale[static_cast<size_t>(c)] = std::max(col_scale[static_cast<size_t>(c)], std::abs(a(r, c)));
        std::vector<int> group(static_cast<size_t>(m), -1);
        int next_group = 0;
        for (int i = 0; i < m; ++i) {
            if (group[static_cast<size_t>(i)] >= 0) continue;
            group[static_cast<size_t>(i)] = next_group;
            for (int j = i + 1; j < m; ++j) {
                if (group[static_cast<size_t>(j)] >= 0) continue;
                double diff = 0.0;
                for (int r = 0; r < d * d; ++r) diff = std::max(diff, std::abs(a(r, i) - a(r, j)));
                double scale = std::max({col_scale[static_cast<size_t>(i)], col_scale[static_cast<size_t>(j)], 1e-300});
                if (diff <= 1e-9 * scale) group[static_cast<size_t>(j)] = next_group;
            }
            ++next_group;
        }
        Vec split = mu;
        std::map<int, double> totals;
        std::map<int, int> sizes;
        for (int i = 0; i < m; ++i) {
            totals[group[static_cast<size_t>(i)]] += mu[static_cast<size_t>(i)];
            sizes[group[static_cast<size_t>(i)]] += 1;
        }
        for (int i = 0; i < m; ++i)
            split[static_cast<size_t>(i)] = totals[group[static_cast<size_t>(i)]] / sizes[group[static_cast<size_t>(i)]];
        long support = 0;
        for (double w : split)
            if (w > 1e-10) ++support;
        if (support <= max_support) mu = split;
    }

    // Prune and renormalize onto the simplex.
    std::vector<Vec> kept_points;
    std::vector<int> kept_idx;
    Vec kept_mu;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        if (mu[static_cast<size_t>(i)] <= 1e-10) continue;
        kept_points.push_back(contacts[static_cast<size_t>(i)]);
        kept_idx.push_back(contact_idx[static_cast<size_t>(i)]);
        kept_mu.push_back(mu[static_cast<size_t>(i)]);
        total += mu[static_cast<size_t>(i)];
    }
    if (kept_mu.empty() || total <= 0.0) throw ResidualTooLarge("john_weights: empty weight support");
    for (double& w : kept_mu) w /= total;

    JohnExploration out{std::move(kept_points), std::move(kept_mu), metric, std::move(kept_idx)};
    double res = verify_john(out);
    if (res > tol)
        throw ResidualTooLarge("john_weights: residual " + std::to_string(res) + " exceeds tolerance (mvee tolerance or contact_tol may be too loose)");
    return out;
}

double verify_john(const JohnExploration& j) {
    return residual_of(j.contact_points, j.weights, j.metric);
}

}  // namespace banlin
