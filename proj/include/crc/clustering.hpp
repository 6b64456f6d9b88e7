#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crc/autodiff.hpp"

namespace crc {

struct ClusterModel {
    Tensor centers;  // k x n

    std::size_t k() const { return centers.dim(0); }
    std::size_t dim() const { return centers.dim(1); }
};

struct KMeansOptions {
    std::size_t max_iter = 100;
    std::size_t restarts = 50;  // best-of by final inertia
};

// Per-iteration within-cluster sum of squares of the run that was kept.
struct KMeansTrace {
    std::vector<double> inertia;
};

// Lloyd iterations from D^2-weighted (k-means++) seeding. Throws ConfigError when m < k.
ClusterModel kmeans_fit(const Tensor& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {},
                        KMeansTrace* trace = nullptr);

struct NearestCenter {
    double distance = 0.0;  // Euclidean
    std::size_t index = 0;
};

// Ties resolve to the lowest center index.
NearestCenter nearest_distance(std::span<const double> r, const ClusterModel& model);

std::vector<std::size_t> assign(const Tensor& points, const ClusterModel& model);
double inertia(const Tensor& points, const ClusterModel& model);

// Mean squared distance of each row of R to its nearest center; centers are constants.
Var clustering_loss(Var repr, const ClusterModel& model);
double clustering_loss(const Tensor& repr, const ClusterModel& model);

// Each center moves to the mean of the points currently assigned to it;
// centers with no points stay where they are.
ClusterModel update_centers(const ClusterModel& model, const Tensor& points);

}  // namespace crc
