#pragma once

// Test-only oracles: exhaustive enumerations, finite differences, random
// instance generators and distribution-test helpers. Everything here is
// independent of the library's computation paths it is used to check.

#include <cmath>
#include <functional>
#include <vector>

#include "banlin/ball.hpp"
#include "banlin/hypercube.hpp"
#include "banlin/linalg.hpp"
#include "banlin/rng.hpp"

namespace oracles {

using banlin::Matrix;
using banlin::RngStream;
using banlin::Vec;
using banlin::operator*;
using banlin::operator+;
using banlin::operator-;

inline Vec random_vec(int d, RngStream& rng, double scale = 1.0) {
    Vec v(static_cast<size_t>(d));
    for (double& x : v) x = scale * rng.gaussian();
    return v;
}

inline Vec random_unit(int d, RngStream& rng) {
    Vec v = random_vec(d, rng);
    double n = banlin::norm2(v);
    while (n < 1e-9) {
        v = random_vec(d, rng);
        n = banlin::norm2(v);
    }
    return (1.0 / n) * v;
}

inline Matrix random_sym(int d, RngStream& rng) {
    Matrix m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = r; c < d; ++c) {
            double v = rng.gaussian();
            m(r, c) = v;
            m(c, r) = v;
        }
    return m;
}

inline Matrix random_psd(int d, int rank, RngStream& rng) {
    Matrix m(d, d);
    for (int k = 0; k < rank; ++k) {
        Vec v = random_vec(d, rng);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) m(r, c) += v[static_cast<size_t>(r)] * v[static_cast<size_t>(c)];
    }
    return m;
}

inline std::vector<Vec> random_points(int n, int d, RngStream& rng, double scale = 1.0) {
    std::vector<Vec> pts;
    pts.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pts.push_back(random_vec(d, rng, scale));
    return pts;
}

inline std::vector<Vec> cross_polytope_points(int d) {
    std::vector<Vec> pts;
    for (int i = 0; i < d; ++i) {
        pts.push_back(banlin::basis_vector(d, i, 1.0));
        pts.push_back(banlin::basis_vector(d, i, -1.0));
    }
    return pts;
}

// Enumerates every outcome of the hypercube perturbation of `a` with its
// probability: 2^d corner outcomes and 2d exploration outcomes.
struct HyperOutcome {
    banlin::HypercubePerturbOutcome outcome;
    double prob;
};

inline std::vector<HyperOutcome> enumerate_hyper(const Vec& a, double gamma) {
    const int d = static_cast<int>(a.size());
    std::vector<HyperOutcome> out;
    for (long mask = 0; mask < (1L << d); ++mask) {
        HyperOutcome ho;
        ho.outcome.played.resize(static_cast<size_t>(d));
        ho.prob = 1.0 - gamma;
        for (int i = 0; i < d; ++i) {
            bool plus = (mask >> i) & 1;
            ho.outcome.played[static_cast<size_t>(i)] = plus ? 1.0 : -1.0;
            ho.prob *= plus ? 0.5 * (1.0 + a[static_cast<size_t>(i)]) : 0.5 * (1.0 - a[static_cast<size_t>(i)]);
        }
        out.push_back(std::move(ho));
    }
    for (int i = 0; i < d; ++i)
        for (int s = -1; s <= 1; s += 2) {
            HyperOutcome ho;
            ho.outcome.was_exploration = true;
            ho.outcome.basis_index = i;
            ho.outcome.sign = s;
            ho.outcome.played = banlin::basis_vector(d, i, s);
            ho.prob = gamma / (2.0 * d);
            out.push_back(std::move(ho));
        }
    return out;
}

// Enumerates the 2d + 1 outcomes of the ball perturbation of `a`.
struct BallOutcome {
    banlin::BallPerturbOutcome outcome;
    double prob;
};

inline std::vector<BallOutcome> enumerate_ball(const Vec& a) {
    const int d = static_cast<int>(a.size());
    const double na = banlin::norm2(a);
    std::vector<BallOutcome> out;
    if (na > 0.0) {
        BallOutcome bo;
        bo.outcome.xi = true;
        bo.outcome.played = (1.0 / na) * a;
        bo.prob = na;
        out.push_back(std::move(bo));
    }
    for (int i = 0; i < d; ++i)
        for (int s = -1; s <= 1; s += 2) {
            BallOutcome bo;
            bo.outcome.basis_index = i;
            bo.outcome.sign = s;
            bo.outcome.played = banlin::basis_vector(d, i, s);
            bo.prob = (1.0 - na) / (2.0 * d);
            out.push_back(std::move(bo));
        }
    return out;
}

// Central finite difference of a scalar field.
inline Vec finite_diff(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
    Vec g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

// Pearson chi-square statistic against expected probabilities, plus the
// Wilson-Hilferty approximation of the 99.9% quantile for the threshold.
inline double chi2_stat(const std::vector<long>& counts, const std::vector<double>& probs, long total) {
    double stat = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
        double expected = probs[i] * static_cast<double>(total);
        if (expected <= 0.0) continue;
        double diff = static_cast<double>(counts[i]) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

inline double chi2_quantile_999(int dof) {
    const double z = 3.0902;  // N(0,1) 99.9% quantile
    double nu = static_cast<double>(dof);
    double t = 1.0 - 2.0 / (9.0 * nu) + z * std::sqrt(2.0 / (9.0 * nu));
    return nu * t * t * t;
}

}  // namespace oracles
