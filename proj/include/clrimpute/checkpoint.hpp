#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <variant>

#include "clrimpute/baseline_cp.hpp"
#include "clrimpute/clr_model.hpp"
#include "clrimpute/tensor_store.hpp"

namespace clr {

using Model = std::variant<ClrParams, BiasCpParams>;

std::string_view model_name(const Model& m) noexcept;
double predict(const Model& m, const EntryIndex& idx) noexcept;
const Dims& model_dims(const Model& m) noexcept;

/// Trained model plus the metadata needed to score and impute with it.
struct Checkpoint {
  Model model;
  std::optional<NormStats> norm;
  double eta = 0.0;
  double lambda = 0.0;
  double train_seconds = 0.0;
};

/// Versioned text format; every real is written with 17 significant digits,
/// so read(write(x)) reproduces x bit for bit.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws ParseError / DataError on malformed input.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace clr
