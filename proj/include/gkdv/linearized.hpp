#pragma once

/// The linearized operator L_{c,y} u = -u'' + c^2 u - 4 Q_{c,y}^3 u around a
/// soliton, its projections, discrete spectrum, quadratic forms and the
/// Moore-Penrose inverse on the complement of Q'.

#include <cmath>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gkdv/errors.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/soliton.hpp"

namespace gkdv {

struct Eigenpair {
    double value;
    Field field;      // L^2-normalized
    double residual;  // ||L e - value e||_{L^2}
};

class LinearizedOperator {
public:
    LinearizedOperator(const SolitonParams& params, const GridSpec& grid)
        : params_(params), grid_(grid), potential_(grid), cache_(std::make_shared<Cache>()) {
        params_.validate();
        const Field q = profile(params_, grid_);
        for (std::size_t j = 0; j < grid_.n(); ++j) potential_[j] = 4.0 * q[j] * q[j] * q[j];
    }

    const SolitonParams& params() const noexcept { return params_; }
    const GridSpec& grid() const noexcept { return grid_; }
    /// 4 Q_{c,y}^3
    const Field& potential() const noexcept { return potential_; }

    Field apply(const Field& f) const {
        if (!(f.grid() == grid_)) throw GridMismatch();
        Field out = -derivative(f, 2);
        const double c2 = params_.c * params_.c;
        for (std::size_t j = 0; j < grid_.n(); ++j) out[j] += (c2 - potential_[j]) * f[j];
        return out;
    }

    /// The n x n matrix of apply() in the sample basis, symmetrized.
    const Eigen::MatrixXd& matrix() const {
        std::call_once(cache_->matrix_once, [this] { build_matrix(); });
        return cache_->matrix;
    }

    /// The k lowest eigenpairs by a dense symmetric eigensolve.  Eigenfields
    /// are L^2-normalized and oriented to be positive at the soliton center
    /// (odd ones: positive just left of it).
    std::vector<Eigenpair> spectrum(std::size_t k) const {
        if (k == 0 || k > 20) throw InvalidArgument("spectrum: requested count must be in 1..20");
        std::call_once(cache_->eigen_once, [this] {
            cache_->eigen.compute(matrix());
        });
        const auto& es = cache_->eigen;
        if (es.info() != Eigen::Success) throw NoConvergence("symmetric eigensolve failed", NAN);
        const double scale = 1.0 / std::sqrt(grid_.dx());
        const std::size_t center = nearest_index(params_.y);
        std::vector<Eigenpair> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<double> v(grid_.n());
            for (std::size_t j = 0; j < grid_.n(); ++j) v[j] = es.eigenvectors()(static_cast<long>(j), static_cast<long>(i)) * scale;
            Field e(grid_, std::move(v));
            const double peak = sup_norm(e);
            double orient = e[center];
            if (std::abs(orient) < 1e-6 * peak) orient = e[(center + grid_.n() - 2) % grid_.n()];
            if (orient < 0.0) e *= -1.0;
            const double lambda = es.eigenvalues()(static_cast<long>(i));
            Field r = apply(e);
            r.axpy(-lambda, e);
            out.push_back({lambda, std::move(e), l2_norm(r)});
        }
        return out;
    }

    /// Solves L u = P_{Q'}^perp f with <u, Q'> = 0 through the bordered system
    /// [[L, Q'], [Q'^T, 0]] (one step of iterative refinement).
    Field pinv_solve(const Field& f) const {
        if (!(f.grid() == grid_)) throw GridMismatch();
        std::call_once(cache_->lu_once, [this] { build_bordered(); });
        const Field rhs = project_perp_dx(f);
        const auto n = static_cast<long>(grid_.n());
        Eigen::VectorXd b(n + 1);
        for (long j = 0; j < n; ++j) b(j) = rhs[static_cast<std::size_t>(j)];
        b(n) = 0.0;
        Eigen::VectorXd x = cache_->lu.solve(b);
        const Eigen::VectorXd r = b - cache_->bordered * x;
        x += cache_->lu.solve(r);

        std::vector<double> u(grid_.n());
        for (long j = 0; j < n; ++j) u[static_cast<std::size_t>(j)] = x(j);
        Field out(grid_, std::move(u));
        Field res = apply(out);
        res -= rhs;
        const double fn = l2_norm(f);
        const double rn = l2_norm(res);
        if (rn > 1e-9 * std::max(fn, 1e-300) && rn > 1e-300) {
            throw NoConvergence("bordered pseudo-inverse solve lost accuracy", rn);
        }
        return out;
    }

    /// P^perp_{Q'} for this operator's soliton.
    Field project_perp_dx(const Field& f) const {
        std::call_once(cache_->profile_once, [this] { build_profiles(); });
        Field out = f;
        out.axpy(-inner_product(f, cache_->dq) / cache_->dq_norm2, cache_->dq);
        return out;
    }

private:
    struct Cache {
        std::once_flag matrix_once, eigen_once, lu_once, profile_once;
        Eigen::MatrixXd matrix;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen;
        Eigen::MatrixXd bordered;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu;
        Field dq{GridSpec(8, 1.0)};
        double dq_norm2 = 0.0;
    };

    std::size_t nearest_index(double y) const {
        const double pos = (y + 0.5 * grid_.length()) / grid_.dx();
        const auto n = static_cast<long>(grid_.n());
        const long j = static_cast<long>(std::lround(pos));
        return static_cast<std::size_t>(((j % n) + n) % n);
    }

    void build_matrix() const {
        const auto n = static_cast<long>(grid_.n());
        Eigen::MatrixXd m(n, n);
        Field e(grid_);
        for (long j = 0; j < n; ++j) {
            e[static_cast<std::size_t>(j)] = 1.0;
            const Field col = apply(e);
            for (long i = 0; i < n; ++i) m(i, j) = col[static_cast<std::size_t>(i)];
            e[static_cast<std::size_t>(j)] = 0.0;
        }
        cache_->matrix = 0.5 * (m + m.transpose());
    }

    void build_profiles() const {
        cache_->dq = profile_dx(params_, grid_);
        cache_->dq_norm2 = inner_product(cache_->dq, cache_->dq);
    }

    void build_bordered() const {
        std::call_once(cache_->profile_once, [this] { build_profiles(); });
        const auto n = static_cast<long>(grid_.n());
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + 1, n + 1);
        b.topLeftCorner(n, n) = matrix();
        for (long j = 0; j < n; ++j) {
            b(j, n) = cache_->dq[static_cast<std::size_t>(j)];
            b(n, j) = cache_->dq[static_cast<std::size_t>(j)];
        }
        cache_->bordered = b;
        cache_->lu.compute(cache_->bordered);
    }

    SolitonParams params_;
    GridSpec grid_;
    Field potential_;
    std::shared_ptr<Cache> cache_;
};

/// P^perp_{Q'} f = f - <f, Q'>/<Q', Q'> Q'
inline Field project_perp_qprime(const Field& f, const SolitonParams& params) {
    const Field dq = profile_dx(params, f.grid());
    Field out = f;
    out.axpy(-inner_product(f, dq) / inner_product(dq, dq), dq);
    return out;
}

/// Ptilde f = f - <f, Q>/<Q, Qtilde> Qtilde
inline Field project_tilde(const Field& f, const SolitonParams& params) {
    const Field q = profile(params, f.grid());
    const Field qt = tilde_profile(params, f.grid());
    Field out = f;
    out.axpy(-inner_product(f, q) / inner_product(q, qt), qt);
    return out;
}

/// K(w) = integral of w'^2/2 + c^2 w^2/2 - 2 Q^3 w^2 = <L w, w>/2
inline double quadratic_form_K(const Field& w, const SolitonParams& params = {}) {
    const Field q = profile(params, w.grid());
    const Field dw = derivative(w, 1);
    const double c2 = params.c * params.c;
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        s += 0.5 * dw[j] * dw[j] + 0.5 * c2 * w[j] * w[j] - 2.0 * q[j] * q[j] * q[j] * w[j] * w[j];
    }
    return s * w.grid().dx();
}

/// ||w||_{H^1}^2 = ||w||^2 + ||w'||^2
inline double h1_norm_squared(const Field& w) {
    const Field dw = derivative(w, 1);
    return inner_product(w, w) + inner_product(dw, dw);
}

/// ||P^perp_{Q'} u||_{H^2} / ||L u||_{L^2}, the s = 0 instance of the
/// weighted resolvent bound.  Reported, never asserted.
inline double resolvent_bound_ratio(const LinearizedOperator& op, const Field& u) {
    return sobolev_norm(op.project_perp_dx(u), 2.0) / l2_norm(op.apply(u));
}

}  // namespace gkdv
