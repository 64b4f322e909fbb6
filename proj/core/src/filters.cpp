#include "vqnnf/filters.hpp"
#include "vqnnf/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace vqnnf {

HaarVariant parse_haar_variant(std::string_view name) {
    if (name == "2x") return HaarVariant::X2;
    if (name == "2y") return HaarVariant::Y2;
    if (name == "3x") return HaarVariant::X3;
    if (name == "3y") return HaarVariant::Y3;
    throw InvalidInput("unknown Haar variant '" + std::string(name) + "' (expected 2x, 2y, 3x or 3y)");
}

FilterSet parse_filter_set(std::string_view name) {
    if (name == "gauss") return FilterSet::Gauss;
    if (name == "2rect") return FilterSet::Rect2;
    if (name == "3rect") return FilterSet::Rect3;
    if (name == "23rect") return FilterSet::Rect23;
    throw InvalidInput("unknown filter set '" + std::string(name) + "' (expected gauss, 2rect, 3rect or 23rect)");
}

std::string_view to_string(FilterSet set) {
    switch (set) {
    case FilterSet::Gauss: return "gauss";
    case FilterSet::Rect2: return "2rect";
    case FilterSet::Rect3: return "3rect";
    case FilterSet::Rect23: return "23rect";
    }
    return "?";
}

CoarseFilter make_gaussian_filter(double sigma, bool uniform) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("make_gaussian_filter: sigma must be > 0");
    CoarseFilter f;
    f.name = uniform ? "gauss-uniform" : "gauss";
    f.rows = 3;
    f.cols = 3;
    f.base_weight = kGaussianBaseWeight;
    f.weights.resize(9);
    if (uniform) {
        std::fill(f.weights.begin(), f.weights.end(), 1.0 / 9.0);
        return f;
    }
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double x = j - 1;
            const double y = i - 1;
            const double g = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
            f.weights[i * 3 + j] = g;
            total += g;
        }
    }
    for (double& w : f.weights) w /= total;
    return f;
}

CoarseFilter make_haar_filter(HaarVariant variant, const CoarseFilter& gaussian, double base_weight) {
    if (gaussian.rows != 3 || gaussian.cols != 3 || gaussian.weights.size() != 9)
        throw InvalidInput("make_haar_filter: Gaussian modulation kernel must be 3x3");

    static constexpr std::array<double, 3> kTwo{+1.0, 0.0, -1.0};
    static constexpr std::array<double, 3> kThree{+1.0, -2.0, +1.0};

    CoarseFilter f;
    f.rows = 3;
    f.cols = 3;
    f.base_weight = base_weight;
    f.weights.resize(9);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double sign = 0.0;
            switch (variant) {
            case HaarVariant::X2: sign = kTwo[j]; break;
            case HaarVariant::Y2: sign = kTwo[i]; break;
            case HaarVariant::X3: sign = kThree[j]; break;
            case HaarVariant::Y3: sign = kThree[i]; break;
            }
            f.weights[i * 3 + j] = sign * gaussian.at(i, j);
        }
    }
    switch (variant) {
    case HaarVariant::X2: f.name = "haar-2x"; break;
    case HaarVariant::Y2: f.name = "haar-2y"; break;
    case HaarVariant::X3: f.name = "haar-3x"; break;
    case HaarVariant::Y3: f.name = "haar-3y"; break;
    }
    return f;
}

std::vector<CoarseFilter> make_filter_bank(FilterSet set, double sigma, bool uniform_gaussian, double haar_weight) {
    const CoarseFilter gauss = make_gaussian_filter(sigma, uniform_gaussian);
    std::vector<CoarseFilter> bank{gauss};
    if (set == FilterSet::Rect2 || set == FilterSet::Rect23) {
        bank.push_back(make_haar_filter(HaarVariant::X2, gauss, haar_weight));
        bank.push_back(make_haar_filter(HaarVariant::Y2, gauss, haar_weight));
    }
    if (set == FilterSet::Rect3 || set == FilterSet::Rect23) {
        bank.push_back(make_haar_filter(HaarVariant::X3, gauss, haar_weight));
        bank.push_back(make_haar_filter(HaarVariant::Y3, gauss, haar_weight));
    }
    return bank;
}

DilatedKernel to_dilated_kernel(const CoarseFilter& filter) {
    static constexpr std::array<std::array<double, 2>, 2> kMultiplier{{{1.0, -1.0}, {-1.0, 1.0}}};
    DilatedKernel d;
    d.source = filter.name;
    d.rows = filter.rows + 1;
    d.cols = filter.cols + 1;
    d.weights.assign(static_cast<std::size_t>(d.rows) * d.cols, 0.0);
    for (int i = 0; i < filter.rows; ++i) {
        for (int j = 0; j < filter.cols; ++j) {
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    d.weights[static_cast<std::size_t>(i + a) * d.cols + (j + b)] += filter.at(i, j) * kMultiplier[a][b];
        }
    }
    return d;
}

FilterPlan plan_scales(int template_width, int template_height, int num_scales, std::vector<CoarseFilter> bank) {
    if (num_scales < 1) throw InvalidInput("plan_scales: number of scales must be >= 1");
    if (bank.empty()) throw InvalidInput("plan_scales: empty filter bank");
    if (template_width < 1 || template_height < 1) throw InvalidInput("plan_scales: template size must be >= 1");
    const int rows = bank.front().rows;
    const int cols = bank.front().cols;
    for (const auto& f : bank) {
        if (f.rows != rows || f.cols != cols || rows < 1 || cols < 1 ||
            f.weights.size() != static_cast<std::size_t>(rows) * cols)
            throw InvalidInput("plan_scales: all filters must share one non-empty kernel size");
        for (double w : f.weights)
            if (!std::isfinite(w)) throw InvalidInput("plan_scales: non-finite filter weight in " + f.name);
    }

    FilterPlan plan;
    plan.template_width = template_width;
    plan.template_height = template_height;
    plan.kernel_rows = rows;
    plan.kernel_cols = cols;
    for (const auto& f : bank) plan.kernels.push_back(to_dilated_kernel(f));
    plan.filters = std::move(bank);

    for (int s = 1; s <= num_scales; ++s) {
        const int sub_w = template_width / s;
        const int sub_h = template_height / s;
        ScalePlan sp;
        sp.scale = s;
        sp.dilation_x = sub_w / cols;
        sp.dilation_y = sub_h / rows;
        if (sp.dilation_x < 1 || sp.dilation_y < 1)
            throw InvalidInput("plan_scales: template " + std::to_string(template_width) + "x" +
                               std::to_string(template_height) + " too small for scale " + std::to_string(s) +
                               " (sub-window " + std::to_string(sub_w) + "x" + std::to_string(sub_h) +
                               " cannot hold " + std::to_string(cols) + "x" + std::to_string(rows) + " bins)");
        sp.field_width = cols * sp.dilation_x;
        sp.field_height = rows * sp.dilation_y;
        sp.offset_x = (template_width - 1) / 2 - (sp.field_width - 1) / 2;
        sp.offset_y = (template_height - 1) / 2 - (sp.field_height - 1) / 2;
        sp.normalization =
            1.0 / (static_cast<double>(cols) * sp.dilation_x * static_cast<double>(rows) * sp.dilation_y);
        for (const auto& f : plan.filters) sp.weights.push_back((1.0 / s) * f.base_weight);
        plan.scales.push_back(std::move(sp));
    }
    return plan;
}

void dilated_responses_row(const std::uint32_t* plane, std::size_t stride, int x0, int y0, int n,
                           const ScalePlan& scale, std::span<const DilatedKernel> kernels, ResponseScratch& scratch,
                           double* out) {
    if (kernels.empty() || n <= 0) return;
    const int bins_y = kernels.front().rows - 1;
    const int bins_x = kernels.front().cols - 1;
    const auto count = static_cast<std::size_t>(n);
    scratch.counts.resize(static_cast<std::size_t>(bins_y) * bins_x * count);
    scratch.sums.resize(count);

    const std::uint32_t* top = plane + static_cast<std::size_t>(y0) * stride + x0;
    for (int a = 1; a <= bins_y; ++a) {
        const std::uint32_t* bottom = top + static_cast<std::size_t>(a) * scale.dilation_y * stride;
        for (int b = 1; b <= bins_x; ++b) {
            const std::size_t bx = static_cast<std::size_t>(b) * scale.dilation_x;
            double* dst = scratch.counts.data() + (static_cast<std::size_t>(a - 1) * bins_x + (b - 1)) * count;
            for (std::size_t i = 0; i < count; ++i) {
                const std::uint32_t c = bottom[i + bx] + top[i] - top[i + bx] - bottom[i];
                dst[i] = static_cast<double>(c);
            }
        }
    }

    double* sums = scratch.sums.data();
    for (std::size_t f = 0; f < kernels.size(); ++f) {
        const DilatedKernel& kernel = kernels[f];
        std::fill(sums, sums + count, 0.0);
        for (int a = 1; a <= bins_y; ++a) {
            for (int b = 1; b <= bins_x; ++b) {
                const double w = kernel.at(a, b);
                if (w == 0.0) continue;
                const double* cnt = scratch.counts.data() + (static_cast<std::size_t>(a - 1) * bins_x + (b - 1)) * count;
                for (std::size_t i = 0; i < count; ++i) sums[i] += w * cnt[i];
            }
        }
        double* dst = out + f * count;
        for (std::size_t i = 0; i < count; ++i) dst[i] = scale.normalization * sums[i];
    }
}

double dilated_response(const std::uint32_t* plane, std::size_t stride, int x0, int y0, const ScalePlan& scale,
                        const DilatedKernel& kernel) {
    ResponseScratch scratch;
    double out = 0.0;
    dilated_responses_row(plane, stride, x0, y0, 1, scale, std::span<const DilatedKernel>(&kernel, 1), scratch, &out);
    return out;
}

} // namespace vqnnf
