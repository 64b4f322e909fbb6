#include "vqnnf/codebook.hpp"
#include "vqnnf/error.hpp"
#include "vqnnf/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace vqnnf {
namespace {

/// Centers stored dimension-major so the distance loop runs across centers.
class CenterTable {
public:
    CenterTable(std::span<const double> centers, int dim) : dim_(dim), k_(static_cast<int>(centers.size() / dim)) {
        table_.resize(centers.size());
        for (int j = 0; j < k_; ++j)
            for (int d = 0; d < dim_; ++d) table_[static_cast<std::size_t>(d) * k_ + j] = centers[static_cast<std::size_t>(j) * dim_ + d];
    }

    [[nodiscard]] int k() const { return k_; }

    /// Label of the nearest center; `scratch` must hold k doubles.
    std::int32_t nearest(const float* point, double* scratch, double& best_dist) const {
        std::fill(scratch, scratch + k_, 0.0);
        for (int d = 0; d < dim_; ++d) {
            const double x = point[d];
            const double* row = table_.data() + static_cast<std::size_t>(d) * k_;
            for (int j = 0; j < k_; ++j) {
                const double diff = x - row[j];
                scratch[j] += diff * diff;
            }
        }
        std::int32_t best = 0;
        best_dist = scratch[0];
        for (int j = 1; j < k_; ++j) {
            if (scratch[j] < best_dist) {
                best_dist = scratch[j];
                best = j;
            }
        }
        return best;
    }

private:
    int dim_;
    int k_;
    std::vector<double> table_;
};

double squared_distance(const float* a, std::span<const double> c) {
    double s = 0.0;
    for (std::size_t d = 0; d < c.size(); ++d) {
        const double diff = static_cast<double>(a[d]) - c[d];
        s += diff * diff;
    }
    return s;
}

/// Assigns every point; returns the inertia.
double assign_points(const FeatureMap& f, const std::vector<double>& centers, std::vector<std::int32_t>& labels) {
    const CenterTable table(centers, f.channels);
    std::vector<double> scratch(table.k());
    labels.resize(f.pixels());
    double inertia = 0.0;
    for (std::size_t i = 0; i < f.pixels(); ++i) {
        double d = 0.0;
        labels[i] = table.nearest(f.data.data() + i * f.channels, scratch.data(), d);
        inertia += d;
    }
    return inertia;
}

/// Cluster means, dropping empty clusters and renumbering labels to match.
std::vector<double> update_centers(const FeatureMap& f, int k, std::vector<std::int32_t>& labels) {
    const int dim = f.channels;
    std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    std::vector<std::size_t> first(k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int l = labels[i];
        if (counts[l]++ == 0) first[l] = i;
    }
    // Accumulate offsets from the first member so identical points give an
    // exact mean.
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int l = labels[i];
        const float* p = f.data.data() + i * dim;
        const float* ref = f.data.data() + first[l] * dim;
        double* s = sums.data() + static_cast<std::size_t>(l) * dim;
        for (int d = 0; d < dim; ++d) s[d] += static_cast<double>(p[d]) - static_cast<double>(ref[d]);
    }

    std::vector<std::int32_t> remap(k, -1);
    std::vector<double> centers;
    int next = 0;
    for (int l = 0; l < k; ++l) {
        if (counts[l] == 0) continue;
        remap[l] = next++;
        const float* ref = f.data.data() + first[l] * dim;
        for (int d = 0; d < dim; ++d)
            centers.push_back(static_cast<double>(ref[d]) + sums[static_cast<std::size_t>(l) * dim + d] / static_cast<double>(counts[l]));
    }
    for (auto& l : labels) l = remap[l];
    return centers;
}

std::vector<double> seed_kmeanspp(const FeatureMap& f, int k, std::uint64_t seed) {
    const std::size_t n = f.pixels();
    const int dim = f.channels;
    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    std::vector<double> centers;
    auto push_center = [&](std::size_t i) {
        const float* p = f.data.data() + i * dim;
        for (int d = 0; d < dim; ++d) centers.push_back(p[d]);
    };

    std::size_t first = std::min(n - 1, static_cast<std::size_t>(uniform01() * static_cast<double>(n)));
    push_center(first);

    std::vector<double> min_d2(n);
    for (std::size_t i = 0; i < n; ++i)
        min_d2[i] = squared_distance(f.data.data() + i * dim, {centers.data(), static_cast<std::size_t>(dim)});

    for (int m = 1; m < k; ++m) {
        double total = 0.0;
        for (double d : min_d2) total += d;
        if (!(total > 0.0)) break; // every point coincides with a chosen center

        const double target = uniform01() * total;
        double cum = 0.0;
        std::size_t pick = n;
        std::size_t last_positive = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (min_d2[i] <= 0.0) continue;
            last_positive = i;
            cum += min_d2[i];
            if (cum > target) {
                pick = i;
                break;
            }
        }
        if (pick == n) pick = last_positive;
        push_center(pick);

        const std::span<const double> c(centers.data() + static_cast<std::size_t>(m) * dim, static_cast<std::size_t>(dim));
        for (std::size_t i = 0; i < n; ++i)
            min_d2[i] = std::min(min_d2[i], squared_distance(f.data.data() + i * dim, c));
    }
    return centers;
}

void collapse_duplicates(Codebook& cb) {
    std::vector<double> unique;
    const int dim = cb.dim;
    for (int i = 0; i < cb.k(); ++i) {
        const auto c = cb.center(i);
        bool seen = false;
        for (std::size_t j = 0; j < unique.size(); j += dim) {
            if (std::equal(c.begin(), c.end(), unique.begin() + static_cast<std::ptrdiff_t>(j))) {
                seen = true;
                break;
            }
        }
        if (!seen) unique.insert(unique.end(), c.begin(), c.end());
    }
    cb.centers = std::move(unique);
}

} // namespace

Codebook fit_codebook(const FeatureMap& template_features, int k, int max_iters, std::uint64_t seed,
                      KMeansTrace* trace) {
    if (k < 1) throw InvalidInput("fit_codebook: k must be >= 1");
    if (max_iters < 1) throw InvalidInput("fit_codebook: max_iters must be >= 1");
    validate(template_features);

    KMeansTrace local;
    KMeansTrace& tr = trace ? *trace : local;
    tr = {};

    std::vector<double> centers = seed_kmeanspp(template_features, k, seed);
    std::vector<std::int32_t> labels;
    tr.inertia.push_back(assign_points(template_features, centers, labels));

    std::vector<std::int32_t> next_labels;
    for (int it = 0; it < max_iters; ++it) {
        const int current_k = static_cast<int>(centers.size() / template_features.channels);
        centers = update_centers(template_features, current_k, labels);
        tr.inertia.push_back(assign_points(template_features, centers, next_labels));
        ++tr.iterations;
        if (next_labels == labels) {
            tr.converged = true;
            break;
        }
        labels.swap(next_labels);
    }

    Codebook cb;
    cb.dim = template_features.channels;
    cb.seed = seed;
    cb.centers = std::move(centers);
    collapse_duplicates(cb);
    return cb;
}

NnfLabelMap assign_nnf(const FeatureMap& features, const Codebook& codebook, int threads) {
    if (codebook.k() < 1) throw InvalidInput("assign_nnf: empty codebook");
    if (features.channels != codebook.dim)
        throw InvalidInput("assign_nnf: feature dimension " + std::to_string(features.channels) +
                           " does not match codebook dimension " + std::to_string(codebook.dim));
    if (features.data.size() != features.pixels() * features.channels)
        throw InvalidInput("assign_nnf: malformed feature map");

    NnfLabelMap out;
    out.height = features.height;
    out.width = features.width;
    out.labels.resize(features.pixels());

    const CenterTable table(codebook.centers, codebook.dim);
    constexpr std::size_t kChunk = 4096;
    const std::size_t n = features.pixels();
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    detail::parallel_chunks(chunks, threads, [&](std::size_t chunk) {
        std::vector<double> scratch(table.k());
        const std::size_t end = std::min(n, (chunk + 1) * kChunk);
        for (std::size_t i = chunk * kChunk; i < end; ++i) {
            double d = 0.0;
            out.labels[i] = table.nearest(features.data.data() + i * features.channels, scratch.data(), d);
        }
    });
    return out;
}

std::string codebook_to_json(const Codebook& codebook) {
    nlohmann::json j;
    j["k"] = codebook.k();
    j["dim"] = codebook.dim;
    j["seed"] = codebook.seed;
    auto centers = nlohmann::json::array();
    for (int i = 0; i < codebook.k(); ++i) {
        const auto c = codebook.center(i);
        centers.push_back(std::vector<double>(c.begin(), c.end()));
    }
    j["centers"] = std::move(centers);
    return j.dump(2);
}

Codebook codebook_from_json(std::string_view json) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("codebook JSON: ") + e.what());
    }
    try {
        Codebook cb;
        cb.dim = j.at("dim").get<int>();
        cb.seed = j.at("seed").get<std::uint64_t>();
        const int k = j.at("k").get<int>();
        const auto& centers = j.at("centers");
        if (cb.dim < 1 || k < 1 || static_cast<int>(centers.size()) != k)
            throw FormatError("codebook JSON: inconsistent k/dim/centers");
        for (const auto& c : centers) {
            const auto v = c.get<std::vector<double>>();
            if (static_cast<int>(v.size()) != cb.dim) throw FormatError("codebook JSON: center length != dim");
            for (double x : v)
                if (!std::isfinite(x)) throw FormatError("codebook JSON: non-finite center value");
            cb.centers.insert(cb.centers.end(), v.begin(), v.end());
        }
        return cb;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("codebook JSON: ") + e.what());
    }
}

} // namespace vqnnf
