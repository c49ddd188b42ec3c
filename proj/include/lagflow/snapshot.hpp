#pragma once

#include <lagflow/field.hpp>
#include <lagflow/flowmap.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

// Binary snapshot formats, little-endian throughout.
//
// FLD1: "FLD1", u32 n, u32 ncomp, f64 time, then ncomp blocks of n*n f64
//       node values with x fastest.
// FMP1: "FMP1", u32 m, f64 time, then m*m particle records of 10 f64:
//       eta1, eta2, T11, T12, T21, T22, Tinv11, Tinv12, Tinv21, Tinv22.

namespace lagflow {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void tag(const char (&t)[5]) { bytes_.insert(bytes_.end(), t, t + 4); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes, std::string what) : bytes_(std::move(bytes)), what_(std::move(what)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void expect_tag(const char (&t)[5]) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, t, 4) != 0) throw SnapshotError(what_ + ": bad magic, expected " + t);
    pos_ += 4;
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) throw SnapshotError(what_ + ": trailing bytes");
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t k) const {
    if (pos_ + k > bytes_.size()) throw SnapshotError(what_ + ": truncated file");
  }
  std::vector<char> bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

/// Writes to a sibling temporary file, then renames over the target.
inline void atomic_write(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SnapshotError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

/// Node values of a field as read back from an FLD1 file.
struct FieldSnapshot {
  int n = 0;
  double t = 0.0;
  std::vector<std::vector<double>> components;
};

template <std::size_t N>
std::vector<char> encode_field(const PhysicalField<N>& f, double t) {
  detail::ByteWriter w;
  w.tag("FLD1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(f.grid().n()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(N));
  w.put<double>(t);
  for (std::size_t c = 0; c < N; ++c)
    for (double v : f[c]) w.put<double>(v);
  return w.bytes();
}

template <std::size_t N>
void write_field(const std::filesystem::path& path, const PhysicalField<N>& f, double t) {
  detail::atomic_write(path, encode_field(f, t));
}

inline FieldSnapshot decode_field(std::vector<char> bytes, const std::string& what = "FLD1") {
  detail::ByteReader r(std::move(bytes), what);
  r.expect_tag("FLD1");
  FieldSnapshot s;
  s.n = static_cast<int>(r.get<std::uint32_t>());
  const auto ncomp = r.get<std::uint32_t>();
  s.t = r.get<double>();
  const std::size_t count = static_cast<std::size_t>(s.n) * s.n;
  if (r.remaining() != count * ncomp * sizeof(double)) throw SnapshotError(what + ": size does not match header");
  s.components.assign(ncomp, std::vector<double>(count));
  for (auto& c : s.components)
    for (double& v : c) v = r.get<double>();
  r.expect_end();
  return s;
}

inline FieldSnapshot read_field(const std::filesystem::path& path) {
  return decode_field(detail::read_all(path), path.string());
}

inline std::vector<char> encode_flow_map(const FlowMap& fm) {
  detail::ByteWriter w;
  w.tag("FMP1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(fm.m));
  w.put<double>(fm.t);
  for (std::size_t p = 0; p < fm.size(); ++p) {
    for (double v : fm.positions[p]) w.put<double>(v);
    for (double v : fm.tangent[p]) w.put<double>(v);
    for (double v : fm.inverse_tangent[p]) w.put<double>(v);
  }
  return w.bytes();
}

inline void write_flow_map(const std::filesystem::path& path, const FlowMap& fm) {
  detail::atomic_write(path, encode_flow_map(fm));
}

inline FlowMap decode_flow_map(std::vector<char> bytes, const std::string& what = "FMP1") {
  detail::ByteReader r(std::move(bytes), what);
  r.expect_tag("FMP1");
  const int m = static_cast<int>(r.get<std::uint32_t>());
  if (m < 2) throw SnapshotError(what + ": m must be >= 2");
  FlowMap fm = init_flow_map(m);
  fm.t = r.get<double>();
  if (r.remaining() != fm.size() * 10 * sizeof(double)) throw SnapshotError(what + ": size does not match header");
  for (std::size_t p = 0; p < fm.size(); ++p) {
    for (double& v : fm.positions[p]) v = r.get<double>();
    for (double& v : fm.tangent[p]) v = r.get<double>();
    for (double& v : fm.inverse_tangent[p]) v = r.get<double>();
  }
  r.expect_end();
  return fm;
}

inline FlowMap read_flow_map(const std::filesystem::path& path) {
  return decode_flow_map(detail::read_all(path), path.string());
}

}  // namespace lagflow
