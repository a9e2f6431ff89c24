#include "hinfland/policy_search.hpp"

#include "hinfland/errors.hpp"
#include "hinfland/log.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hinfland {

namespace {

// Projection onto the probability simplex (sort-based).
Vector project_simplex(const Vector& v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    int rho = 0;
    for (int i = 0; i < n; ++i) {
        cum += u[static_cast<size_t>(i)];
        const double t = (cum - 1.0) / (i + 1);
        if (u[static_cast<size_t>(i)] - t > 0.0) {
            rho = i + 1;
            theta = t;
        }
    }
    (void)rho;
    return (v.array() - theta).cwiseMax(0.0);
}

// Minimum-norm element of conv{g_1, ..., g_m}: projected gradient on the
// simplex with a Wolfe-gap stopping rule.
Vector min_norm_hull_element(const Matrix& gmat) {
    const int m = static_cast<int>(gmat.cols());
    const Matrix gram = gmat.transpose() * gmat;
    const double lip = 2.0 * std::max(gram.diagonal().maxCoeff() * m, 1e-300);
    const double gap_tol = 1e-10 * (1.0 + gram.diagonal().maxCoeff());

    Vector lambda = Vector::Constant(m, 1.0 / m);
    for (int iter = 0; iter < 50000; ++iter) {
        const Vector grad = 2.0 * (gram * lambda);
        lambda = project_simplex(Vector(lambda - grad / lip));
        if (iter % 16 == 0) {
            const Vector gx = gram * lambda; // <g_i, x> per column
            const double xx = lambda.dot(gx);
            if (xx - gx.minCoeff() <= gap_tol) break;
        }
    }
    return gmat * lambda;
}

struct HullSample {
    double measure = 0.0;
    Vector direction;     // minus the min-norm element, flattened
    bool left_domain = false; // a sampled point was not stabilizing
};

Matrix unflatten(const Vector& v, int rows, int cols) {
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Vector flatten(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

// Draws gradients at uniform perturbations in the radius ball around k and
// returns the min-norm element of their hull. Nonsmooth hits are resampled.
HullSample sample_gradient_hull(const Plant& plant, const Controller& k, double radius, int n_samples,
                                std::mt19937_64& rng, double norm_rel_tol, int workers) {
    const int rows = static_cast<int>(k.block().rows());
    const int cols = static_cast<int>(k.block().cols());
    const int dim = rows * cols;

    HullSample out;
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<Vector> gradients;
    gradients.reserve(static_cast<size_t>(n_samples));
    const int max_draws = 50 * n_samples;
    int draws = 0;
    while (static_cast<int>(gradients.size()) < n_samples) {
        const int want = n_samples - static_cast<int>(gradients.size());
        std::vector<Matrix> points(static_cast<size_t>(want));
        for (int i = 0; i < want; ++i) {
            if (++draws > max_draws)
                throw NumericalError("gradient sampling: too many nonsmooth hits; widen the tolerance or move the point");
            Vector dir(dim);
            for (int j = 0; j < dim; ++j) dir(j) = gauss(rng);
            dir.normalize();
            const double r = radius * std::pow(unif(rng), 1.0 / dim);
            points[static_cast<size_t>(i)] = k.block() + unflatten(Vector(r * dir), rows, cols);
        }
        std::vector<int> status(static_cast<size_t>(want), 0); // 0 nonsmooth, 1 ok, 2 unstable
        std::vector<Vector> grads(static_cast<size_t>(want));
        parallel_for_index(want, workers, [&](int i) {
            const Controller ki = k.with_block(points[static_cast<size_t>(i)]);
            if (!is_stabilizing(plant, ki)) {
                status[static_cast<size_t>(i)] = 2;
                return;
            }
            const NormResult norm = hinf_norm(assemble_closed_loop(plant, ki), norm_rel_tol);
            const GradientResult g = hinf_gradient(plant, ki, norm);
            if (g.smooth()) {
                grads[static_cast<size_t>(i)] = flatten(*g.gradient);
                status[static_cast<size_t>(i)] = 1;
            }
        });
        for (int i = 0; i < want; ++i) {
            if (status[static_cast<size_t>(i)] == 2) {
                out.left_domain = true;
                return out;
            }
            if (status[static_cast<size_t>(i)] == 1) gradients.push_back(grads[static_cast<size_t>(i)]);
        }
    }

    Matrix gmat(dim, n_samples);
    for (int i = 0; i < n_samples; ++i) gmat.col(i) = gradients[static_cast<size_t>(i)];
    const Vector x = min_norm_hull_element(gmat);
    out.measure = x.norm();
    out.direction = -x;
    return out;
}

} // namespace

double stationarity_measure(const Plant& plant, const Controller& k, double radius, int n_samples,
                            std::uint64_t seed, double norm_rel_tol) {
    if (!(radius > 0.0)) throw DomainError("stationarity_measure: radius must be positive");
    if (n_samples < 1) throw DomainError("stationarity_measure: n_samples must be >= 1");
    if (!is_stabilizing(plant, k)) throw DomainError("stationarity_measure: controller is not stabilizing");

    std::mt19937_64 rng(seed);
    const HullSample s = sample_gradient_hull(plant, k, radius, n_samples, rng, norm_rel_tol, 1);
    if (s.left_domain)
        throw DomainError("stationarity_measure: sampled ball leaves the stabilizing set; use a smaller radius");
    return s.measure;
}

SearchTrace search(const Plant& plant, const Controller& k0, int budget, std::uint64_t seed,
                   const SearchParams& params) {
    if (!is_stabilizing(plant, k0)) throw DomainError("search: initial controller is not stabilizing");
    if (budget < 1) throw DomainError("search: budget must be >= 1");
    if (params.radius_ladder.empty()) throw DomainError("search: radius ladder is empty");

    const int dim = static_cast<int>(k0.block().size());
    const int n_samples = params.n_samples > 0 ? params.n_samples : 2 * dim + 1;

    SearchTrace trace;
    trace.seed = seed;
    std::mt19937_64 rng(seed);

    Controller k = k0;
    double j = hinf_norm(assemble_closed_loop(plant, k), params.norm_rel_tol).gamma;
    size_t rung = 0;
    double last_step = 0.0;
    int enrich = 1; // sample-count multiplier after a failed line search

    for (int iter = 0; iter < budget; ++iter) {
        const double radius = params.radius_ladder[rung] * (1.0 + k.block().norm());
        HullSample hull = sample_gradient_hull(plant, k, radius, n_samples * enrich, rng,
                                               params.norm_rel_tol, params.workers);
        while (hull.left_domain) {
            // Ball touches the stability boundary; fall down the ladder.
            if (rung + 1 >= params.radius_ladder.size()) {
                trace.status = SearchStatus::Stalled;
                return trace;
            }
            ++rung;
            hull = sample_gradient_hull(plant, k, params.radius_ladder[rung] * (1.0 + k.block().norm()),
                                        n_samples, rng, params.norm_rel_tol, params.workers);
        }

        trace.iterates.push_back({k, j, hull.measure, last_step});

        if (hull.measure <= params.tol_stat) {
            if (rung + 1 >= params.radius_ladder.size()) {
                trace.status = SearchStatus::Converged;
                return trace;
            }
            ++rung;
            enrich = 1;
            last_step = 0.0;
            continue;
        }

        const Matrix d = unflatten(hull.direction, static_cast<int>(k.block().rows()),
                                   static_cast<int>(k.block().cols()));
        const double dn = hull.measure; // ||d||
        double alpha = radius / std::max(dn, 1e-300);
        bool accepted = false;
        for (int bt = 0; bt < params.max_backtracks; ++bt, alpha *= 0.5) {
            const Controller kt = k.with_block(k.block() + alpha * d);
            if (!is_stabilizing(plant, kt)) continue;
            const double jt = hinf_norm(assemble_closed_loop(plant, kt), params.norm_rel_tol).gamma;
            if (jt <= j - params.armijo_c * alpha * dn * dn) {
                k = kt;
                j = jt;
                last_step = alpha;
                accepted = true;
                break;
            }
        }
        if (accepted) {
            enrich = 1;
        } else {
            // Near a nonsmooth ridge the sampled hull may miss the descent
            // cone; retry once with a richer hull before moving down the
            // ladder.
            if (enrich == 1) {
                enrich = 3;
                continue;
            }
            if (rung + 1 >= params.radius_ladder.size()) {
                trace.status = SearchStatus::Stalled;
                return trace;
            }
            ++rung;
            enrich = 1;
            last_step = 0.0;
        }
    }
    trace.status = SearchStatus::BudgetExhausted;
    return trace;
}

Controller random_stabilizing(const Plant& plant, std::uint64_t seed, const Matrix& box_lo,
                              const Matrix& box_hi, int max_attempts) {
    const int rows = plant.nu() + plant.nx();
    const int cols = plant.ny() + plant.nx();
    if (box_lo.rows() != rows || box_lo.cols() != cols || box_hi.rows() != rows || box_hi.cols() != cols)
        throw DimensionError("random_stabilizing: box bounds must be controller-shaped");
    if (((box_hi - box_lo).array() < 0.0).any())
        throw DomainError("random_stabilizing: box upper bounds must dominate lower bounds");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Matrix block(rows, cols);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r)
                block(r, c) = box_lo(r, c) + (box_hi(r, c) - box_lo(r, c)) * unif(rng);
        const Controller k(block, plant.nu(), plant.ny());
        if (is_stabilizing(plant, k)) return k;
    }
    std::ostringstream oss;
    oss << "random_stabilizing: no stabilizing controller after " << max_attempts
        << " draws; enlarge the box or warm start";
    throw NumericalError(oss.str());
}

} // namespace hinfland
