#include "clrimpute/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "clrimpute/error.hpp"

namespace clr {

namespace {

constexpr std::string_view kMagic = "clrimpute-checkpoint";
constexpr int kVersion = 1;

void write_block(std::ostream& out, std::string_view name, std::span<const double> values,
                 std::size_t cols) {
  out << name << ' ' << values.size() << '\n';
  for (std::size_t n = 0; n < values.size(); ++n) {
    out << values[n] << ((n + 1) % cols == 0 || n + 1 == values.size() ? '\n' : ' ');
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) fail("unexpected end of checkpoint");
    ++tokens_;
    return w;
  }

  void expect(std::string_view key) {
    const auto w = word();
    if (w != key) fail("expected '" + std::string(key) + "', got '" + w + "'");
  }

  std::size_t size() {
    const auto w = word();
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size()) {
      fail("expected a count, got '" + w + "'");
    }
    return v;
  }

  double real() { return to_real(word()); }

  double to_real(const std::string& w) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size()) {
      fail("expected a real, got '" + w + "'");
    }
    return v;
  }

  void block(std::string_view name, std::span<double> dest) {
    expect(name);
    const std::size_t n = size();
    if (n != dest.size()) {
      fail("block " + std::string(name) + " has " + std::to_string(n) + " values, expected " +
           std::to_string(dest.size()));
    }
    for (double& v : dest) v = real();
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw DataError("checkpoint token " + std::to_string(tokens_) + ": " + what);
  }

  std::istream& in_;
  std::size_t tokens_ = 0;
};

}  // namespace

std::string_view model_name(const Model& m) noexcept {
  return std::holds_alternative<ClrParams>(m) ? "clr" : "baseline";
}

double predict(const Model& m, const EntryIndex& idx) noexcept {
  return std::visit([&](const auto& p) { return predict(p, idx); }, m);
}

const Dims& model_dims(const Model& m) noexcept {
  return std::visit([](const auto& p) -> const Dims& { return p.dims; }, m);
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << kMagic << ' ' << kVersion << '\n';
  out << "model " << model_name(ckpt.model) << '\n';
  const Dims& d = model_dims(ckpt.model);
  out << "dims " << d.stations << ' ' << d.parameters << ' ' << d.slots << '\n';
  if (ckpt.norm) {
    out << "norm " << ckpt.norm->min << ' ' << ckpt.norm->max << '\n';
  } else {
    out << "norm none\n";
  }
  out << "eta " << ckpt.eta << "\nlambda " << ckpt.lambda << "\ntrain_seconds "
      << ckpt.train_seconds << '\n';
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        out << "rank " << p.rank << '\n';
        if constexpr (std::is_same_v<P, ClrParams>) out << "kernel " << p.kernel << '\n';
        write_block(out, "S", p.S.data(), p.rank);
        write_block(out, "U", p.U.data(), p.rank);
        write_block(out, "V", p.V.data(), p.rank);
        if constexpr (std::is_same_v<P, ClrParams>) write_block(out, "W", p.W.data(), p.rank);
        write_block(out, "a", p.a, p.a.size());
        write_block(out, "e", p.e, p.e.size());
        write_block(out, "o", p.o, p.o.size());
      },
      ckpt.model);
  out << "end\n";
  out.precision(prec);
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader rd(in);
  rd.expect(kMagic);
  if (rd.size() != kVersion) throw DataError("unsupported checkpoint version");
  rd.expect("model");
  const std::string kind = rd.word();
  if (kind != "clr" && kind != "baseline") throw DataError("unknown model kind '" + kind + "'");
  rd.expect("dims");
  Dims d;
  d.stations = rd.size();
  d.parameters = rd.size();
  d.slots = rd.size();
  if (d.cells() == 0) throw DataError("checkpoint dimensions must be positive");

  Checkpoint ckpt;
  rd.expect("norm");
  const std::string first = rd.word();
  if (first != "none") {
    NormStats stats;
    stats.min = rd.to_real(first);
    stats.max = rd.real();
    ckpt.norm = stats;
  }
  rd.expect("eta");
  ckpt.eta = rd.real();
  rd.expect("lambda");
  ckpt.lambda = rd.real();
  rd.expect("train_seconds");
  ckpt.train_seconds = rd.real();
  rd.expect("rank");
  const std::size_t rank = rd.size();

  if (kind == "clr") {
    rd.expect("kernel");
    const std::size_t kernel = rd.size();
    ClrParams p = ClrParams::zeros(d, rank, kernel);
    rd.block("S", p.S.data());
    rd.block("U", p.U.data());
    rd.block("V", p.V.data());
    rd.block("W", p.W.data());
    rd.block("a", p.a);
    rd.block("e", p.e);
    rd.block("o", p.o);
    ckpt.model = std::move(p);
  } else {
    BiasCpParams p = BiasCpParams::zeros(d, rank);
    rd.block("S", p.S.data());
    rd.block("U", p.U.data());
    rd.block("V", p.V.data());
    rd.block("a", p.a);
    rd.block("e", p.e);
    rd.block("o", p.o);
    ckpt.model = std::move(p);
  }
  rd.expect("end");
  return ckpt;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace clr
