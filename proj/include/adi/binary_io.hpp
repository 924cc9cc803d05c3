#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "adi/errors.hpp"

namespace adi::io {

/// Little-endian stream reader that tracks the byte offset for error reports.
class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw MalformedFile(path_, 0, "cannot open file");
  }

  std::uint8_t read_u8() { return read_bytes<1>(); }
  std::uint16_t read_u16() { return static_cast<std::uint16_t>(read_bytes<2>()); }
  std::uint32_t read_u32() { return static_cast<std::uint32_t>(read_bytes<4>()); }
  std::uint64_t read_u64() { return read_bytes<8>(); }
  double read_f64() { return std::bit_cast<double>(read_bytes<8>()); }

  void read_magic(const char (&expect)[5]) {
    char got[4];
    if (!in_.read(got, 4)) throw MalformedFile(path_, offset_, "truncated magic");
    offset_ += 4;
    for (int i = 0; i < 4; ++i) {
      if (got[i] != expect[i]) throw MalformedFile(path_, offset_ - 4, "bad magic");
    }
  }

  std::string read_string(std::size_t len) {
    std::string s(len, '\0');
    if (len > 0 && !in_.read(s.data(), static_cast<std::streamsize>(len)))
      throw MalformedFile(path_, offset_, "truncated string");
    offset_ += len;
    return s;
  }

  std::size_t offset() const { return offset_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& detail) const {
    throw MalformedFile(path_, offset_, detail);
  }

 private:
  template <int N>
  std::uint64_t read_bytes() {
    unsigned char buf[N];
    if (!in_.read(reinterpret_cast<char*>(buf), N))
      throw MalformedFile(path_, offset_, "unexpected end of file");
    offset_ += N;
    std::uint64_t v = 0;
    for (int i = N - 1; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
  }

  std::string path_;
  std::ifstream in_;
  std::size_t offset_ = 0;
};

/// Little-endian stream writer.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open " + path + " for writing");
  }

  void write_u8(std::uint8_t v) { write_bytes<1>(v); }
  void write_u16(std::uint16_t v) { write_bytes<2>(v); }
  void write_u32(std::uint32_t v) { write_bytes<4>(v); }
  void write_u64(std::uint64_t v) { write_bytes<8>(v); }
  void write_f64(double v) { write_bytes<8>(std::bit_cast<std::uint64_t>(v)); }
  void write_magic(const char (&magic)[5]) { out_.write(magic, 4); }
  void write_string(const std::string& s) {
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  void close() {
    out_.close();
    if (!out_) throw Error("failed writing " + path_);
  }

 private:
  template <int N>
  void write_bytes(std::uint64_t v) {
    unsigned char buf[N];
    for (int i = 0; i < N; ++i) {
      buf[i] = static_cast<unsigned char>(v & 0xff);
      v >>= 8;
    }
    out_.write(reinterpret_cast<char*>(buf), N);
  }

  std::string path_;
  std::ofstream out_;
};

}  // namespace adi::io
