#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pftrunc/losses.hpp"

namespace pftrunc {

enum class Task { classification, regression };

std::string_view to_string(Task task);

struct Dataset {
    std::string name;
    Task task = Task::classification;
    std::size_t n_features = 0;
    std::vector<LabeledExample> examples;

    std::size_t size() const noexcept { return examples.size(); }

    /// Dataset equality ignores the name.
    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.task == b.task && a.n_features == b.n_features && a.examples == b.examples;
    }
};

/// LIBSVM text: `label idx:val idx:val ...` with 1-based ascending indices.
/// Blank lines and lines starting with '#' are skipped. For classification,
/// label sets {0,1} and {1,2} are mapped to {-1,+1}; other label sets are kept
/// as-is (see binarize_by_median). Throws ParseError with the line number.
Dataset parse_libsvm(std::istream& in, Task task = Task::classification, std::string name = {});

/// Inverse of parse_libsvm for already-mapped labels; values printed with 17 significant digits.
void write_libsvm(std::ostream& out, const Dataset& ds);

/// CSV with a header row. Columns whose every cell parses as a number are kept
/// as numeric features; any other column is one-hot encoded with categories in
/// first-appearance order. Classification targets go through the same label
/// mapping as LIBSVM; a two-valued string target maps first-seen -> -1.
Dataset parse_csv(std::istream& in, std::string_view target_column, Task task, std::string name = {});

/// Published size of a benchmark dataset.
struct DatasetInfo {
    std::string_view name;
    Task task;
    std::size_t samples;
    std::size_t features;
};

/// The six benchmark datasets (CPU-act, 2dPlane, Houses, Rainfall, Bank32nh, Houses-8L).
const std::vector<DatasetInfo>& benchmark_datasets();

/// True when every target is -1 or +1.
bool has_binary_labels(const Dataset& ds);

struct SplitSpec {
    double train_ratio = 0.70;
    double val_ratio = 0.15;
    double test_ratio = 0.15;
    std::uint64_t seed = 0;
    std::uint32_t repetition = 0;
};

inline constexpr std::string_view kPermutationAlgorithm = "splitmix64-seeded-mt19937_64/fisher-yates-rejection";

/// Portable permutation of [0, n) determined by (seed, repetition).
std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed, std::uint32_t repetition);

struct Splits {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Sizes floor(0.70 n) / floor(0.15 n) / remainder. Requires n >= 10.
Splits shuffle_split(const Dataset& ds, const SplitSpec& spec);

/// Everything needed to reproduce a preprocessing pass.
struct TransformRecord {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::size_t zero_variance_features = 0;
    bool binarized = false;
    double binarize_threshold = 0.0;
    std::string permutation_algorithm{kPermutationAlgorithm};
    std::uint64_t seed = 0;
    std::uint32_t repetition = 0;

    /// `key=value` lines; vectors comma separated.
    void write(std::ostream& out) const;
};

/// Median of training targets; y > median -> +1, else -1. Applied to all splits.
double binarize_by_median(Splits& splits);

/// Fits per-feature mean/std on `splits.train`, applies the same transform to
/// all three splits, then scales every nonzero row to unit Euclidean norm.
/// Zero-variance features use std = 1. Throws if the training split is empty.
TransformRecord standardize_then_unit_normalize(Splits& splits);

}  // namespace pftrunc
