/**
 * @file commands.hpp
 * @brief The `vqnnf` command-line front end: match, evaluate, codebook.
 *
 * Exit codes: 0 success, 1 runtime or partial failure, 2 usage error.
 */
#pragma once

#include "vqnnf/eval.hpp"
#include "vqnnf/matching.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vqnnf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Bad or conflicting arguments; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int k = kDefaultCodebookSize;
    int scales = kDefaultScales;
    std::string filter_set = "23rect";
    double sigma = kDefaultSigma;
    bool uniform_gaussian = false;
    double haar_weight = kHaarBaseWeight;
    std::optional<int> pca_dim;
    std::uint64_t seed = 0;
    int threads = 1;
    int max_iters = kDefaultKMeansIterations;
    std::string features = "color"; ///< color | file | file:<dir>
};

/// Throws UsageError on invalid values.
MatchConfig to_match_config(const RunConfig& rc);

struct MatchArgs {
    std::filesystem::path template_path;
    std::filesystem::path query_path;
    std::optional<Box> template_box;
    std::optional<std::filesystem::path> output;
    std::optional<std::filesystem::path> heatmap;
    std::optional<std::filesystem::path> heatmap_pgm;
    std::optional<double> rotate_deg;
    std::optional<double> scale_factor;
};

struct EvaluateArgs {
    std::filesystem::path manifest;
    std::optional<std::filesystem::path> output;
    std::optional<double> rotate_deg;
    std::optional<double> scale_factor;
};

struct CodebookArgs {
    std::filesystem::path template_path;
    std::optional<Box> template_box;
    std::filesystem::path output;
    std::optional<std::filesystem::path> nnf_pgm; ///< defaults to the output path with a .pgm extension
};

int cmd_match(const MatchArgs& args, const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateArgs& args, const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_codebook(const CodebookArgs& args, const RunConfig& rc, std::ostream& out, std::ostream& err);

/// Parses `args` (without the program name) and dispatches.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vqnnf::cli
