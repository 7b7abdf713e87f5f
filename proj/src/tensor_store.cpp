#include "clrimpute/tensor_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "clrimpute/error.hpp"

namespace clr {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t pos = 0; pos <= line.size(); ++pos) {
    if (pos == line.size() || line[pos] == ',' || line[pos] == '\t') {
      std::string_view f = line.substr(start, pos - start);
      while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
      while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
      fields.push_back(f);
      start = pos + 1;
    }
  }
  return fields;
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool looks_numeric(std::string_view s) { return parse_real(s).has_value(); }

std::string strip_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  return line;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

// Shared record reader for COO and split files: 3 index fields + one trailing field.
template <typename OnRecord>
void read_records(std::istream& in, OnRecord&& on_record) {
  std::string raw;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_line(std::move(raw));
    if (is_blank(line)) continue;
    const auto fields = split_fields(line);
    if (first_content) {
      first_content = false;
      if (!fields.empty() && !looks_numeric(fields[0])) continue;  // header
    }
    if (fields.size() != 4) {
      throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    long long idx[3];
    for (int m = 0; m < 3; ++m) {
      auto v = parse_int(fields[m]);
      if (!v) throw ParseError(line_no, "index '" + std::string(fields[m]) + "' is not an integer");
      idx[m] = *v;
    }
    on_record(line_no, idx, fields[3]);
  }
}

void check_nonnegative(std::size_t line_no, const long long (&idx)[3]) {
  for (long long v : idx) {
    if (v < 0) {
      throw BoundsError("line " + std::to_string(line_no) + ": negative index " + std::to_string(v));
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

bool in_bounds(const EntryIndex& idx, const Dims& dims) noexcept {
  return idx.i < dims.stations && idx.j < dims.parameters && idx.k < dims.slots;
}

std::uint64_t linear_index(const EntryIndex& idx, const Dims& dims) noexcept {
  return (static_cast<std::uint64_t>(idx.i) * dims.parameters + idx.j) * dims.slots + idx.k;
}

NormStats fit_norm(std::span<const Entry> entries) {
  if (entries.empty()) throw DegenerateRangeError("cannot normalize an empty entry set");
  auto [lo, hi] = std::minmax_element(entries.begin(), entries.end(),
                                      [](const Entry& a, const Entry& b) { return a.value < b.value; });
  if (!(hi->value > lo->value)) {
    throw DegenerateRangeError("all values are identical; min-max range is zero");
  }
  return NormStats{lo->value, hi->value};
}

SparseTensor::SparseTensor(Dims dims, std::vector<Entry> entries, std::optional<NormStats> norm)
    : dims_(dims), entries_(std::move(entries)), norm_(norm) {
  if (dims_.stations == 0 || dims_.parameters == 0 || dims_.slots == 0) {
    throw DataError("tensor dimensions must be positive");
  }
  lookup_.reserve(entries_.size());
  for (std::size_t n = 0; n < entries_.size(); ++n) {
    const auto& e = entries_[n];
    if (!in_bounds(e.index, dims_)) {
      std::ostringstream msg;
      msg << "index (" << e.index.i << "," << e.index.j << "," << e.index.k << ") outside dims ("
          << dims_.stations << "," << dims_.parameters << "," << dims_.slots << ")";
      throw BoundsError(msg.str());
    }
    if (!std::isfinite(e.value)) throw DataError("non-finite value in entry set");
    if (!lookup_.emplace(linear_index(e.index, dims_), n).second) {
      std::ostringstream msg;
      msg << "duplicate index (" << e.index.i << "," << e.index.j << "," << e.index.k << ")";
      throw DuplicateError(msg.str());
    }
  }
}

std::optional<std::size_t> SparseTensor::find(const EntryIndex& idx) const {
  if (!in_bounds(idx, dims_)) return std::nullopt;
  auto it = lookup_.find(linear_index(idx, dims_));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

SparseTensor load_coo(std::istream& in, std::optional<Dims> dims) {
  std::vector<Entry> entries;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  Dims inferred{};
  read_records(in, [&](std::size_t line_no, const long long (&idx)[3], std::string_view value_field) {
    check_nonnegative(line_no, idx);
    auto value = parse_real(value_field);
    if (!value || !std::isfinite(*value)) {
      throw ParseError(line_no, "value '" + std::string(value_field) + "' is not a finite real");
    }
    EntryIndex ei{static_cast<std::size_t>(idx[0]), static_cast<std::size_t>(idx[1]),
                  static_cast<std::size_t>(idx[2])};
    if (dims) {
      if (!in_bounds(ei, *dims)) {
        std::ostringstream msg;
        msg << "line " << line_no << ": index (" << ei.i << "," << ei.j << "," << ei.k
            << ") outside dims (" << dims->stations << "," << dims->parameters << ","
            << dims->slots << ")";
        throw BoundsError(msg.str());
      }
      if (!seen.emplace(linear_index(ei, *dims), line_no).second) {
        throw DuplicateError("line " + std::to_string(line_no) + ": duplicate index (" +
                             std::to_string(ei.i) + "," + std::to_string(ei.j) + "," +
                             std::to_string(ei.k) + ")");
      }
    } else {
      inferred.stations = std::max(inferred.stations, ei.i + 1);
      inferred.parameters = std::max(inferred.parameters, ei.j + 1);
      inferred.slots = std::max(inferred.slots, ei.k + 1);
    }
    entries.push_back({ei, *value});
  });
  if (!dims) {
    if (entries.empty()) throw DataError("cannot infer dimensions of an empty file");
    dims = inferred;
  }
  return SparseTensor(*dims, std::move(entries));
}

SparseTensor load_coo(const std::filesystem::path& path, std::optional<Dims> dims) {
  auto in = open_in(path);
  return load_coo(in, dims);
}

void write_coo(std::ostream& out, const SparseTensor& t, bool header) {
  if (header) out << "i,j,k,value\n";
  out << std::setprecision(17);
  for (const auto& e : t.entries()) {
    out << e.index.i << ',' << e.index.j << ',' << e.index.k << ',' << e.value << '\n';
  }
}

void write_coo(const std::filesystem::path& path, const SparseTensor& t, bool header) {
  auto out = open_out(path);
  write_coo(out, t, header);
}

SparseTensor normalize(const SparseTensor& t) { return normalize_with(t, fit_norm(t.entries())); }

SparseTensor normalize_with(const SparseTensor& t, const NormStats& stats) {
  std::vector<Entry> out(t.entries().begin(), t.entries().end());
  for (auto& e : out) e.value = stats.apply(e.value);
  return SparseTensor(t.dims(), std::move(out), stats);
}

SparseTensor denormalize(const SparseTensor& t) {
  if (!t.norm()) throw DataError("tensor carries no normalization statistics");
  std::vector<Entry> out(t.entries().begin(), t.entries().end());
  for (auto& e : out) e.value = t.norm()->invert(e.value);
  return SparseTensor(t.dims(), std::move(out));
}

std::size_t SplitAssignment::count(Label l) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

SplitAssignment split(const SparseTensor& t, const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0) {
    throw RatioError("split ratios must be non-negative");
  }
  const double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw RatioError("split ratios must sum to 1 (got " + std::to_string(sum) + ")");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  SplitAssignment out;
  out.ratios = ratios;
  out.seed = seed;
  out.labels.reserve(t.size());
  const double val_edge = ratios.train + ratios.validation;
  for (std::size_t n = 0; n < t.size(); ++n) {
    const double u = uniform(rng);
    if (u < ratios.train) {
      out.labels.push_back(Label::train);
    } else if (u < val_edge) {
      out.labels.push_back(Label::validation);
    } else {
      out.labels.push_back(ratios.test > 0 ? Label::test
                                           : (ratios.validation > 0 ? Label::validation : Label::train));
    }
  }
  return out;
}

SplitData partition(const SparseTensor& t, const SplitAssignment& assignment) {
  if (assignment.labels.size() != t.size()) {
    throw DataError("split assignment does not match the tensor's entry count");
  }
  SplitData out;
  const auto entries = t.entries();
  for (std::size_t n = 0; n < entries.size(); ++n) {
    switch (assignment.labels[n]) {
      case Label::train: out.train.push_back(entries[n]); break;
      case Label::validation: out.validation.push_back(entries[n]); break;
      case Label::test: out.test.push_back(entries[n]); break;
    }
  }
  return out;
}

SparseTensor normalize_on_training(const SparseTensor& t, const SplitAssignment& assignment) {
  return normalize_with(t, fit_norm(partition(t, assignment).train));
}

void write_split(std::ostream& out, const SparseTensor& t, const SplitAssignment& assignment) {
  if (assignment.labels.size() != t.size()) {
    throw DataError("split assignment does not match the tensor's entry count");
  }
  out << "i,j,k,label\n";
  const auto entries = t.entries();
  for (std::size_t n = 0; n < entries.size(); ++n) {
    const auto& idx = entries[n].index;
    out << idx.i << ',' << idx.j << ',' << idx.k << ','
        << static_cast<int>(assignment.labels[n]) << '\n';
  }
}

void write_split(const std::filesystem::path& path, const SparseTensor& t,
                 const SplitAssignment& assignment) {
  auto out = open_out(path);
  write_split(out, t, assignment);
}

SplitAssignment read_split(std::istream& in, const SparseTensor& t) {
  constexpr auto unset = static_cast<Label>(255);
  SplitAssignment out;
  out.labels.assign(t.size(), unset);
  read_records(in, [&](std::size_t line_no, const long long (&idx)[3], std::string_view label_field) {
    check_nonnegative(line_no, idx);
    EntryIndex ei{static_cast<std::size_t>(idx[0]), static_cast<std::size_t>(idx[1]),
                  static_cast<std::size_t>(idx[2])};
    auto pos = t.find(ei);
    if (!pos) throw BoundsError("line " + std::to_string(line_no) + ": index not observed in data");
    auto label = parse_int(label_field);
    if (!label || *label < 0 || *label > 2) {
      throw ParseError(line_no, "label must be 0, 1 or 2");
    }
    if (out.labels[*pos] != unset) {
      throw DuplicateError("line " + std::to_string(line_no) + ": index labelled twice");
    }
    out.labels[*pos] = static_cast<Label>(*label);
  });
  if (std::find(out.labels.begin(), out.labels.end(), unset) != out.labels.end()) {
    throw DataError("split file does not label every observed entry");
  }
  const double n = static_cast<double>(std::max<std::size_t>(t.size(), 1));
  out.ratios = {out.count(Label::train) / n, out.count(Label::validation) / n,
                out.count(Label::test) / n};
  return out;
}

SplitAssignment read_split(const std::filesystem::path& path, const SparseTensor& t) {
  auto in = open_in(path);
  return read_split(in, t);
}

}  // namespace clr
