#include "vqnnf/matching.hpp"
#include "vqnnf/error.hpp"
#include "vqnnf/parallel.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace vqnnf {
namespace {

// Placement rows and columns per streaming chunk, independent of the thread
// count and the query size.
constexpr int kBandRows = 64;
constexpr int kBlockCols = 256;

std::string dims(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

void check_placements(const FilterPlan& plan, int template_width, int template_height, int query_width,
                      int query_height) {
    if (template_width != plan.template_width || template_height != plan.template_height)
        throw InvalidInput("plan was built for a " + dims(plan.template_width, plan.template_height) +
                           " template, got " + dims(template_width, template_height));
    if (query_width < template_width || query_height < template_height)
        throw InvalidInput("query " + dims(query_width, query_height) + " is smaller than template " +
                           dims(template_width, template_height));
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

} // namespace

ResponseSet template_responses(const IntegralHistogram& template_ii, const FilterPlan& plan) {
    if (template_ii.width != plan.template_width || template_ii.height != plan.template_height)
        throw InvalidInput("template_responses: plan covers a " + dims(plan.template_width, plan.template_height) +
                           " template but the integral histogram is " + dims(template_ii.width, template_ii.height));
    for (const auto& sp : plan.scales) {
        if (sp.offset_x < 0 || sp.offset_y < 0 || sp.offset_x + sp.field_width > template_ii.width ||
            sp.offset_y + sp.field_height > template_ii.height)
            throw InvalidInput("template_responses: scale " + std::to_string(sp.scale) + " field exceeds the template");
    }

    ResponseSet rs;
    rs.scales = plan.scale_count();
    rs.filters = plan.filter_count();
    rs.k = template_ii.k;
    rs.values.resize(static_cast<std::size_t>(rs.scales) * rs.filters * rs.k);

    ResponseScratch scratch;
    std::vector<double> out(rs.filters);
    for (int s = 0; s < rs.scales; ++s) {
        const ScalePlan& sp = plan.scales[s];
        for (int c = 0; c < rs.k; ++c) {
            dilated_responses_row(template_ii.plane(c), template_ii.stride(), sp.offset_x, sp.offset_y, 1, sp,
                                  plan.kernels, scratch, out.data());
            for (int f = 0; f < rs.filters; ++f)
                rs.values[(static_cast<std::size_t>(s) * rs.filters + f) * rs.k + c] = out[f];
        }
    }
    return rs;
}

QueryResponseMaps query_response_maps(const IntegralHistogram& query_ii, const FilterPlan& plan, int template_width,
                                      int template_height) {
    check_placements(plan, template_width, template_height, query_ii.width, query_ii.height);

    QueryResponseMaps qr;
    qr.rows = query_ii.height - template_height + 1;
    qr.cols = query_ii.width - template_width + 1;
    qr.scales = plan.scale_count();
    qr.filters = plan.filter_count();
    qr.k = query_ii.k;
    const std::size_t placements = static_cast<std::size_t>(qr.rows) * qr.cols;
    qr.values.resize(placements * qr.scales * qr.filters * qr.k);

    ResponseScratch scratch;
    std::vector<double> out(static_cast<std::size_t>(qr.filters) * qr.cols);
    for (int s = 0; s < qr.scales; ++s) {
        const ScalePlan& sp = plan.scales[s];
        for (int c = 0; c < qr.k; ++c) {
            for (int y = 0; y < qr.rows; ++y) {
                dilated_responses_row(query_ii.plane(c), query_ii.stride(), sp.offset_x, y + sp.offset_y, qr.cols, sp,
                                      plan.kernels, scratch, out.data());
                for (int f = 0; f < qr.filters; ++f) {
                    double* base = qr.values.data() + (static_cast<std::size_t>(s) * qr.filters + f) * placements * qr.k;
                    for (int x = 0; x < qr.cols; ++x)
                        base[(static_cast<std::size_t>(y) * qr.cols + x) * qr.k + c] =
                            out[static_cast<std::size_t>(f) * qr.cols + x];
                }
            }
        }
    }
    return qr;
}

SimilarityHeatmap similarity_map(const ResponseSet& tr, const QueryResponseMaps& qr, const FilterPlan& plan) {
    if (tr.scales != plan.scale_count() || qr.scales != plan.scale_count() || tr.filters != plan.filter_count() ||
        qr.filters != plan.filter_count() || tr.k != qr.k)
        throw InvalidInput("similarity_map: template and query responses were built from different plans or codebooks");

    SimilarityHeatmap heat;
    heat.rows = qr.rows;
    heat.cols = qr.cols;
    heat.scores.resize(static_cast<std::size_t>(qr.rows) * qr.cols);
    for (int y = 0; y < qr.rows; ++y) {
        for (int x = 0; x < qr.cols; ++x) {
            double penalty = 0.0;
            for (int s = 0; s < tr.scales; ++s) {
                for (int f = 0; f < tr.filters; ++f) {
                    const double* t = tr.vector(s, f);
                    const double* q = qr.vector(s, f, x, y);
                    double l1 = 0.0;
                    for (int c = 0; c < tr.k; ++c) l1 += std::abs(t[c] - q[c]);
                    penalty += plan.scales[s].weights[f] * l1;
                }
            }
            heat.scores[static_cast<std::size_t>(y) * qr.cols + x] = 0.0 - penalty;
        }
    }
    return heat;
}

SimilarityHeatmap compute_heatmap(const ResponseSet& tr, const NnfLabelMap& query, const FilterPlan& plan,
                                  int threads) {
    const int w = plan.template_width;
    const int h = plan.template_height;
    check_placements(plan, w, h, query.width, query.height);
    if (tr.scales != plan.scale_count() || tr.filters != plan.filter_count())
        throw InvalidInput("compute_heatmap: template responses were built from a different plan");
    if (query.labels.size() != static_cast<std::size_t>(query.width) * query.height)
        throw InvalidInput("compute_heatmap: malformed query label map");
    for (auto l : query.labels)
        if (l < 0 || l >= tr.k) throw InvalidInput("compute_heatmap: query label outside the codebook range");

    SimilarityHeatmap heat;
    heat.rows = query.height - h + 1;
    heat.cols = query.width - w + 1;
    heat.scores.assign(static_cast<std::size_t>(heat.rows) * heat.cols, 0.0);

    const int F = tr.filters;
    const int S = tr.scales;
    const int cols = heat.cols;
    const std::size_t bands = (static_cast<std::size_t>(heat.rows) + kBandRows - 1) / kBandRows;
    const std::size_t blocks = (static_cast<std::size_t>(cols) + kBlockCols - 1) / kBlockCols;

    detail::parallel_chunks(bands * blocks, threads, [&](std::size_t chunk) {
        const int r0 = static_cast<int>(chunk / blocks) * kBandRows;
        const int r1 = std::min(heat.rows, r0 + kBandRows);
        const int x0 = static_cast<int>(chunk % blocks) * kBlockCols;
        const int n = std::min(kBlockCols, cols - x0);
        const int img_rows = r1 - 1 + h - r0;
        const int img_cols = n - 1 + w;
        const std::size_t stride = static_cast<std::size_t>(img_cols) + 1;
        std::vector<std::uint32_t> plane((static_cast<std::size_t>(img_rows) + 1) * stride);
        std::vector<double> out(static_cast<std::size_t>(F) * n);
        std::vector<double> acc(static_cast<std::size_t>(r1 - r0) * n, 0.0);
        ResponseScratch scratch;

        std::vector<char> present(tr.k, 0);
        for (int y = r0; y < r0 + img_rows; ++y) {
            const std::int32_t* src = query.labels.data() + static_cast<std::size_t>(y) * query.width + x0;
            for (int x = 0; x < img_cols; ++x) present[src[x]] = 1;
        }

        for (int c = 0; c < tr.k; ++c) {
            if (!present[c]) {
                // Every response is zero, so each placement pays w * |T|.
                for (int y = r0; y < r1; ++y) {
                    double* row = acc.data() + static_cast<std::size_t>(y - r0) * n;
                    for (int s = 0; s < S; ++s) {
                        for (int f = 0; f < F; ++f) {
                            const double term = plan.scales[s].weights[f] * std::abs(tr.vector(s, f)[c] - 0.0);
                            for (int x = 0; x < n; ++x) row[x] += term;
                        }
                    }
                }
                continue;
            }
            integral_plane(query, c, r0, r0 + img_rows, x0, x0 + img_cols, plane);
            for (int y = r0; y < r1; ++y) {
                double* row = acc.data() + static_cast<std::size_t>(y - r0) * n;
                for (int s = 0; s < S; ++s) {
                    const ScalePlan& sp = plan.scales[s];
                    dilated_responses_row(plane.data(), stride, sp.offset_x, y - r0 + sp.offset_y, n, sp, plan.kernels,
                                          scratch, out.data());
                    for (int f = 0; f < F; ++f) {
                        const double t = tr.vector(s, f)[c];
                        const double wsf = sp.weights[f];
                        const double* r = out.data() + static_cast<std::size_t>(f) * n;
                        for (int x = 0; x < n; ++x) row[x] += wsf * std::abs(t - r[x]);
                    }
                }
            }
        }
        for (int y = r0; y < r1; ++y) {
            const double* src = acc.data() + static_cast<std::size_t>(y - r0) * n;
            double* dst = heat.scores.data() + static_cast<std::size_t>(y) * cols + x0;
            for (int x = 0; x < n; ++x) dst[x] = 0.0 - src[x];
        }
    });
    return heat;
}

MatchResult locate(const SimilarityHeatmap& heatmap, int template_width, int template_height) {
    if (heatmap.empty() || heatmap.rows < 1 || heatmap.cols < 1 ||
        heatmap.scores.size() != static_cast<std::size_t>(heatmap.rows) * heatmap.cols)
        throw InvalidInput("locate: empty heatmap");
    std::size_t best = 0;
    for (std::size_t i = 1; i < heatmap.scores.size(); ++i)
        if (heatmap.scores[i] > heatmap.scores[best]) best = i;
    MatchResult r;
    r.box = {static_cast<int>(best % heatmap.cols), static_cast<int>(best / heatmap.cols), template_width,
             template_height};
    r.score = heatmap.scores[best];
    return r;
}

FilterPlan make_plan(const MatchConfig& config, int template_width, int template_height) {
    return plan_scales(template_width, template_height, config.scales,
                       make_filter_bank(config.filter_set, config.sigma, config.uniform_gaussian, config.haar_weight));
}

MatchOutput match(const FeatureMap& template_features, const FeatureMap& query_features, const MatchConfig& config) {
    validate(template_features);
    validate(query_features);
    if (template_features.channels != query_features.channels)
        throw InvalidInput("match: template has " + std::to_string(template_features.channels) +
                           " channels, query has " + std::to_string(query_features.channels));
    const int w = template_features.width;
    const int h = template_features.height;
    if (query_features.width < w || query_features.height < h)
        throw InvalidInput("match: query " + dims(query_features.width, query_features.height) +
                           " is smaller than template " + dims(w, h));

    MatchOutput out;
    auto t0 = std::chrono::steady_clock::now();
    const FilterPlan plan = make_plan(config, w, h);
    out.codebook = fit_codebook(template_features, config.k, config.max_iters, config.seed);
    out.timings.codebook_ms = elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    const NnfLabelMap template_nnf = assign_nnf(template_features, out.codebook, config.threads);
    const NnfLabelMap query_nnf = assign_nnf(query_features, out.codebook, config.threads);
    out.timings.nnf_ms = elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    const IntegralHistogram template_ii = integral_histogram(template_nnf, out.codebook.k());
    const ResponseSet tr = template_responses(template_ii, plan);
    SimilarityHeatmap heat = compute_heatmap(tr, query_nnf, plan, config.threads);
    out.result = locate(heat, w, h);
    out.timings.heatmap_ms = elapsed_ms(t0);
    if (config.keep_heatmap) out.result.heatmap = std::move(heat);
    return out;
}

} // namespace vqnnf
