#include "crc/clustering.hpp"

#include <cmath>
#include <limits>

#include "crc/error.hpp"
#include "crc/random.hpp"

namespace crc {
namespace {

std::span<const double> row(const Tensor& t, std::size_t r) {
    return t.values().subspan(r * t.dim(1), t.dim(1));
}

void check_points(const Tensor& points, const ClusterModel& model) {
    if (points.rank() != 2 || points.dim(1) != model.dim())
        throw DimensionError("clustering: points " + shape_string(points.shape()) + " vs centers " +
                             shape_string(model.centers.shape()));
}

ClusterModel seed_centers(const Tensor& points, std::size_t k, Rng& rng) {
    const std::size_t m = points.dim(0), n = points.dim(1);
    Tensor centers({k, n});
    std::vector<bool> taken(m, false);
    std::vector<double> d2(m, std::numeric_limits<double>::infinity());
    std::size_t pick = rng.below(m);
    for (std::size_t c = 0; c < k; ++c) {
        if (c > 0) {
            double total = 0.0;
            for (std::size_t i = 0; i < m; ++i) total += taken[i] ? 0.0 : d2[i];
            pick = m;
            if (total > 0.0) {
                double target = rng.uniform() * total;
                for (std::size_t i = 0; i < m; ++i) {
                    if (taken[i] || d2[i] <= 0.0) continue;
                    pick = i;
                    target -= d2[i];
                    if (target < 0.0) break;
                }
            }
            if (pick == m)  // every remaining point coincides with a center
                for (std::size_t i = 0; i < m; ++i)
                    if (!taken[i]) {
                        pick = i;
                        break;
                    }
        }
        taken[pick] = true;
        const auto p = row(points, pick);
        std::copy(p.begin(), p.end(), centers.data() + c * n);
        for (std::size_t i = 0; i < m; ++i) d2[i] = std::min(d2[i], squared_distance(row(points, i), p));
    }
    return ClusterModel{std::move(centers)};
}

}  // namespace

NearestCenter nearest_distance(std::span<const double> r, const ClusterModel& model) {
    if (r.size() != model.dim())
        throw DimensionError("nearest_distance: representation has " + std::to_string(r.size()) +
                             " entries, centers have " + std::to_string(model.dim()));
    NearestCenter best{std::numeric_limits<double>::infinity(), 0};
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.k(); ++c) {
        const double d = squared_distance(r, row(model.centers, c));
        if (d < best_sq) {
            best_sq = d;
            best.index = c;
        }
    }
    best.distance = std::sqrt(best_sq);
    return best;
}

std::vector<std::size_t> assign(const Tensor& points, const ClusterModel& model) {
    check_points(points, model);
    std::vector<std::size_t> out(points.dim(0));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = nearest_distance(row(points, i), model).index;
    return out;
}

double inertia(const Tensor& points, const ClusterModel& model) {
    check_points(points, model);
    double total = 0.0;
    for (std::size_t i = 0; i < points.dim(0); ++i) {
        const double d = nearest_distance(row(points, i), model).distance;
        total += d * d;
    }
    return total;
}

ClusterModel update_centers(const ClusterModel& model, const Tensor& points) {
    const auto labels = assign(points, model);
    const std::size_t k = model.k(), n = model.dim();
    Tensor sums({k, n}, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++counts[labels[i]];
        const auto p = row(points, i);
        for (std::size_t j = 0; j < n; ++j) sums.at(labels[i], j) += p[j];
    }
    ClusterModel out = model;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (std::size_t j = 0; j < n; ++j) out.centers.at(c, j) = sums.at(c, j) / static_cast<double>(counts[c]);
    }
    return out;
}

ClusterModel kmeans_fit(const Tensor& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options,
                        KMeansTrace* trace) {
    if (points.rank() != 2) throw DimensionError("kmeans_fit expects an m x n matrix");
    if (k == 0) throw ConfigError("kmeans_fit needs k >= 1");
    if (points.dim(0) < k)
        throw ConfigError("kmeans_fit: " + std::to_string(points.dim(0)) + " points cannot fill k=" +
                          std::to_string(k) + " clusters");
    Rng rng(seed);
    ClusterModel best;
    double best_inertia = std::numeric_limits<double>::infinity();
    KMeansTrace best_trace;
    const std::size_t runs = std::max<std::size_t>(1, options.restarts);
    for (std::size_t run = 0; run < runs; ++run) {
        ClusterModel model = seed_centers(points, k, rng);
        KMeansTrace local;
        auto labels = assign(points, model);
        local.inertia.push_back(inertia(points, model));
        for (std::size_t it = 0; it < options.max_iter; ++it) {
            model = update_centers(model, points);
            const double current = inertia(points, model);
            local.inertia.push_back(current);
            auto next = assign(points, model);
            if (next == labels) break;
            labels = std::move(next);
        }
        const double final_inertia = local.inertia.back();
        if (final_inertia < best_inertia) {
            best_inertia = final_inertia;
            best = std::move(model);
            best_trace = std::move(local);
        }
    }
    if (trace) *trace = std::move(best_trace);
    return best;
}

Var clustering_loss(Var repr, const ClusterModel& model) {
    const Tensor& r = repr.value();
    check_points(r, model);
    Tape& tape = *repr.tape;
    Var centers = ad::gather_rows(tape.constant(model.centers), assign(r, model));
    return ad::scale(ad::sum(ad::square(ad::sub(repr, centers))), 1.0 / static_cast<double>(r.dim(0)));
}

double clustering_loss(const Tensor& repr, const ClusterModel& model) {
    return inertia(repr, model) / static_cast<double>(repr.dim(0));
}

}  // namespace crc
