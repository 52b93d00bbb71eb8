#ifndef NJGEOM_PROJECTION_HPP
#define NJGEOM_PROJECTION_HPP

#include "njgeom/cone.hpp"
#include "njgeom/topology.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace njgeom {

struct ProjectionOptions {
    /// Feasibility and tightness tolerance on (h, x) for unit normals h.
    double tol = 1e-9;
    std::size_t max_iterations = 1000;
};

struct ProjectionResult {
    std::vector<double> point;
    double distance = 0.0;
    /// Constraints with |(h, point)| <= tol, indices into cone.halfspaces.
    std::vector<std::size_t> active_set;
};

namespace detail {

/// Constraint rows scaled to unit length.
inline Eigen::MatrixXd unit_normals(const NJCone& cone) {
    const std::size_t m = cone.dimension();
    Eigen::MatrixXd h(static_cast<Eigen::Index>(cone.halfspaces.size()), static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < cone.halfspaces.size(); ++k) {
        const auto& nrm = cone.halfspaces[k].normal;
        if (nrm.size() != m) throw std::invalid_argument("projection: normal has wrong length");
        for (std::size_t j = 0; j < m; ++j) h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = static_cast<double>(nrm[j]);
        const double len = h.row(static_cast<Eigen::Index>(k)).norm();
        if (len == 0.0) throw std::invalid_argument("projection: zero normal");
        h.row(static_cast<Eigen::Index>(k)) /= len;
    }
    return h;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline ProjectionResult finish(const Eigen::MatrixXd& h, const Eigen::VectorXd& v, const Eigen::VectorXd& x, double tol) {
    ProjectionResult r;
    r.point = from_eigen(x);
    r.distance = (x - v).norm();
    const Eigen::VectorXd s = h * x;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (std::abs(s(k)) <= tol) r.active_set.push_back(static_cast<std::size_t>(k));
    return r;
}

/// Lawson-Hanson active-set NNLS: argmin_{y >= 0} ||E y - f||.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& e, const Eigen::VectorXd& f, double tol, std::size_t max_iter) {
    const Eigen::Index k = e.cols();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    std::vector<bool> passive(static_cast<std::size_t>(k), false);
    auto solve_passive = [&]() {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < k; ++j)
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        Eigen::MatrixXd ep(e.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) ep.col(static_cast<Eigen::Index>(c)) = e.col(idx[c]);
        const Eigen::VectorXd zp = ep.completeOrthogonalDecomposition().solve(f);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
        for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zp(static_cast<Eigen::Index>(c));
        return z;
    };
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd w = e.transpose() * (f - e * y);
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < k; ++j)
            if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
                best_w = w(j);
                best = j;
            }
        if (best < 0) return y;
        passive[static_cast<std::size_t>(best)] = true;
        for (std::size_t inner = 0; inner < max_iter; ++inner) {
            const Eigen::VectorXd z = solve_passive();
            bool positive = true;
            for (Eigen::Index j = 0; j < k; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0) positive = false;
            if (positive) {
                y = z;
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < k; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0) alpha = std::min(alpha, y(j) / (y(j) - z(j)));
            y += alpha * (z - y);
            for (Eigen::Index j = 0; j < k; ++j)
                if (passive[static_cast<std::size_t>(j)] && y(j) <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    y(j) = 0;
                }
        }
    }
    throw std::runtime_error("nnls: iteration limit reached");
}

/// Orthogonal projection of v onto {x : rows(x) = 0}.
inline Eigen::VectorXd project_onto_kernel(const Eigen::MatrixXd& rows, const Eigen::VectorXd& v) {
    if (rows.rows() == 0) return v;
    const Eigen::VectorXd coeff = rows.transpose().completeOrthogonalDecomposition().solve(v);
    return v - rows.transpose() * coeff;
}

}  // namespace detail

/// Nearest point of the cone {x : (h_k, x) >= 0} to v in the Euclidean norm.
///
/// With unit normals H, the point is x = v + H^T mu where mu >= 0 minimizes ||v + H^T mu||
/// (the dual of the projection problem), solved by Lawson-Hanson NNLS.
inline ProjectionResult nearest_point(const NJCone& cone, const std::vector<double>& v, const ProjectionOptions& opt = {}) {
    if (v.size() != cone.dimension()) throw std::invalid_argument("nearest_point: dimension mismatch");
    const Eigen::VectorXd ve = detail::to_eigen(v);
    if (cone.halfspaces.empty()) return {v, 0.0, {}};
    const Eigen::MatrixXd h = detail::unit_normals(cone);
    const Eigen::VectorXd s = h * ve;
    if (s.minCoeff() >= -opt.tol) return detail::finish(h, ve, ve, opt.tol);
    const Eigen::VectorXd mu = detail::nnls(h.transpose(), -ve, opt.tol * 1e-3, opt.max_iterations);
    const Eigen::VectorXd x = ve + h.transpose() * mu;
    return detail::finish(h, ve, x, opt.tol);
}

/// Greedy recursion: project onto the hyperplane of the most violated constraint, keep it
/// as an equality and repeat on the resulting face until the point is feasible. Always
/// returns a point of the cone, but not necessarily the nearest one.
inline ProjectionResult nearest_point_greedy(const NJCone& cone, const std::vector<double>& v, const ProjectionOptions& opt = {}) {
    if (v.size() != cone.dimension()) throw std::invalid_argument("nearest_point_greedy: dimension mismatch");
    const Eigen::VectorXd ve = detail::to_eigen(v);
    if (cone.halfspaces.empty()) return {v, 0.0, {}};
    const Eigen::MatrixXd h = detail::unit_normals(cone);
    std::vector<Eigen::Index> equalities;
    Eigen::VectorXd u = ve;
    for (;;) {
        const Eigen::VectorXd s = h * u;
        Eigen::Index worst = -1;
        double worst_s = -opt.tol;
        for (Eigen::Index k = 0; k < s.size(); ++k)
            if (s(k) < worst_s) {
                worst_s = s(k);
                worst = k;
            }
        if (worst < 0) break;
        equalities.push_back(worst);
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(equalities.size()), h.cols());
        for (std::size_t r = 0; r < equalities.size(); ++r) rows.row(static_cast<Eigen::Index>(r)) = h.row(equalities[r]);
        u = detail::project_onto_kernel(rows, ve);
        if (equalities.size() > static_cast<std::size_t>(h.rows())) break;
    }
    return detail::finish(h, ve, u, opt.tol);
}

/// Distance from v to the boundary of the cone when v is inside: min_k (h_k, v) / ||h_k||.
inline double distance_to_boundary(const NJCone& cone, const std::vector<double>& v) {
    const Eigen::MatrixXd h = detail::unit_normals(cone);
    return (h * detail::to_eigen(v)).minCoeff();
}

enum class Verdict { correct, incorrect };

inline const char* to_string(Verdict v) { return v == Verdict::correct ? "correct" : "incorrect"; }

struct ClassificationRecord {
    Verdict verdict = Verdict::incorrect;
    double boundary_distance = 0.0;
    /// Topology of the cone realizing the distance.
    TreeTopology nearest_region;
};

/// Correct inputs (inside a cone of the true topology) get the distance to the nearest
/// cone of any other topology; incorrect ones get the distance to the nearest cone of the
/// true topology.
inline ClassificationRecord distance_to_wrong(const std::vector<double>& d, const TreeTopology& truth,
                                              const std::vector<NJCone>& census, const ProjectionOptions& opt = {}) {
    bool any_true = false;
    bool inside_true = false;
    for (const auto& c : census) {
        if (!c.topology) throw std::invalid_argument("distance_to_wrong: census cone without topology");
        if (c.n != truth.taxa()) throw std::invalid_argument("distance_to_wrong: census and topology disagree on n");
        if (*c.topology == truth) {
            any_true = true;
            if (membership(c, d, opt.tol) != Membership::outside) inside_true = true;
        }
    }
    if (!any_true) throw std::invalid_argument("distance_to_wrong: census has no cone of the true topology");
    ClassificationRecord rec;
    rec.verdict = inside_true ? Verdict::correct : Verdict::incorrect;
    rec.boundary_distance = std::numeric_limits<double>::infinity();
    for (const auto& c : census) {
        const bool same = *c.topology == truth;
        if (same == inside_true) continue;
        const auto p = nearest_point(c, d, opt);
        if (p.distance < rec.boundary_distance) {
            rec.boundary_distance = p.distance;
            rec.nearest_region = *c.topology;
        }
    }
    return rec;
}

}  // namespace njgeom

#endif  // NJGEOM_PROJECTION_HPP
