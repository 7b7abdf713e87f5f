#pragma once

// Sparse COO storage for a 3-way (station x parameter x time) tensor,
// with min-max normalization and the train/validation/test split.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace clr {

struct Dims {
  std::size_t stations = 0;
  std::size_t parameters = 0;
  std::size_t slots = 0;

  std::size_t cells() const noexcept { return stations * parameters * slots; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct EntryIndex {
  std::size_t i = 0;  // station
  std::size_t j = 0;  // parameter
  std::size_t k = 0;  // time slot

  friend bool operator==(const EntryIndex&, const EntryIndex&) = default;
};

struct Entry {
  EntryIndex index;
  double value = 0.0;
};

bool in_bounds(const EntryIndex& idx, const Dims& dims) noexcept;

/// Row-major cell number of an index; unique per cell of `dims`.
std::uint64_t linear_index(const EntryIndex& idx, const Dims& dims) noexcept;

/// Affine map x -> (x - min) / (max - min) and its inverse.
struct NormStats {
  double min = 0.0;
  double max = 1.0;

  double apply(double x) const noexcept { return (x - min) / (max - min); }
  double invert(double y) const noexcept { return min + y * (max - min); }
};

/// Fits min/max over `entries`. Throws DegenerateRangeError when fewer than
/// two distinct values are present.
NormStats fit_norm(std::span<const Entry> entries);

class SparseTensor {
 public:
  SparseTensor() = default;

  /// Validates bounds and uniqueness of every entry.
  SparseTensor(Dims dims, std::vector<Entry> entries,
               std::optional<NormStats> norm = std::nullopt);

  const Dims& dims() const noexcept { return dims_; }
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::optional<NormStats>& norm() const noexcept { return norm_; }

  /// Position of `idx` in entries(), if observed.
  std::optional<std::size_t> find(const EntryIndex& idx) const;
  bool contains(const EntryIndex& idx) const { return find(idx).has_value(); }

 private:
  Dims dims_{};
  std::vector<Entry> entries_;
  std::optional<NormStats> norm_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

// ---------------------------------------------------------------------------
// COO text I/O
// ---------------------------------------------------------------------------

/// Reads 4-column (i, j, k, value) records separated by comma or tab.
/// A first line whose leading field is non-numeric is treated as a header.
/// When `dims` is empty the bounds are inferred as max index + 1.
SparseTensor load_coo(std::istream& in, std::optional<Dims> dims);
SparseTensor load_coo(const std::filesystem::path& path, std::optional<Dims> dims);

/// Writes entries with 17 significant digits so a reload is exact.
void write_coo(std::ostream& out, const SparseTensor& t, bool header = true);
void write_coo(const std::filesystem::path& path, const SparseTensor& t, bool header = true);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Min-max scales every value into [0, 1] using statistics of all entries.
SparseTensor normalize(const SparseTensor& t);

/// Applies fixed statistics; values outside the fitted range are kept as is.
SparseTensor normalize_with(const SparseTensor& t, const NormStats& stats);

/// Inverse of normalize. Throws DataError when `t` carries no statistics.
SparseTensor denormalize(const SparseTensor& t);

// ---------------------------------------------------------------------------
// Train / validation / test split
// ---------------------------------------------------------------------------

enum class Label : std::uint8_t { train = 0, validation = 1, test = 2 };

struct SplitRatios {
  double train = 0.1;
  double validation = 0.2;
  double test = 0.7;
};

struct SplitAssignment {
  std::vector<Label> labels;  // parallel to SparseTensor::entries()
  SplitRatios ratios;
  std::uint64_t seed = 0;

  std::size_t count(Label l) const;
};

/// Independent seeded draw per entry. Throws RatioError unless the ratios are
/// non-negative and sum to 1 within 1e-9.
SplitAssignment split(const SparseTensor& t, const SplitRatios& ratios, std::uint64_t seed);

/// Entries grouped by label.
struct SplitData {
  std::vector<Entry> train;
  std::vector<Entry> validation;
  std::vector<Entry> test;
};

SplitData partition(const SparseTensor& t, const SplitAssignment& assignment);

/// Normalizes with statistics fitted on the training entries only.
SparseTensor normalize_on_training(const SparseTensor& t, const SplitAssignment& assignment);

/// Split file: i, j, k, label with label 0/1/2 = train/validation/test.
void write_split(std::ostream& out, const SparseTensor& t, const SplitAssignment& assignment);
void write_split(const std::filesystem::path& path, const SparseTensor& t,
                 const SplitAssignment& assignment);

/// Every observed entry of `t` must be labelled exactly once.
SplitAssignment read_split(std::istream& in, const SparseTensor& t);
SplitAssignment read_split(const std::filesystem::path& path, const SparseTensor& t);

}  // namespace clr
