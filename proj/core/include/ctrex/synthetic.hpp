#pragma once

// Seeded synthetic benchmark datasets with mixed constraint annotations, and
// helpers to store datasets as CSV + schema files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "ctrex/dataset.hpp"

namespace ctrex {

/// Two Gaussian blobs six standard deviations apart on income, with weak
/// signal on savings and debt. Features:
/// age (increase-only), income, savings, debt (decrease-only), race
/// (immutable categorical), housing (categorical).
Dataset make_blobs(std::size_t rows, std::uint64_t seed);

/// Interleaving half circles in (x1, x2) with Gaussian noise, plus tenure
/// (increase-only), group (immutable categorical) and channel (categorical).
Dataset make_moons(std::size_t rows, std::uint64_t seed, double noise = 0.15);

/// Label = (a > 0) xor (b > 0), a and b uniform in [-1, 1].
Dataset make_xor(std::size_t rows, std::uint64_t seed);

/// Rows of `digits` whose label is `a` or `b`, relabelled 0 and 1.
Dataset digit_pair(const Dataset& digits, int a, int b);

/// Writes `<stem>.csv` and `<stem>.schema.json` with the label stored in
/// column `label_column`.
void save_dataset(const Dataset& data, const std::string& label_column, const std::filesystem::path& csv_path,
                  const std::filesystem::path& schema_path);

/// Dataset text in the CSV layout `load_dataset` reads.
std::string dataset_to_csv(const Dataset& data, const std::string& label_column);

}  // namespace ctrex
