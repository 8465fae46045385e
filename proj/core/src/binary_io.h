#pragma once

// Little-endian binary file helpers shared by the container formats.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "pcfill/errors.h"

namespace pcfill::detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open for writing: " + path.string());
  return f;
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open: " + path.string());
  f.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(f.tellg());
  f.seekg(0);
  std::vector<unsigned char> buf(size);
  if (size > 0) f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size));
  if (!f) throw FormatError("short read of " + path.string(), 0);
  return buf;
}

// Sequential reader over an in-memory buffer; every failure reports the
// byte offset it happened at.
class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& buf, std::string name)
      : data_(buf.data()), size_(buf.size()), name_(std::move(name)) {}
  ByteReader(const unsigned char* data, std::size_t size, std::string name)
      : data_(data), size_(size), name_(std::move(name)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

  void expect_magic(const char magic[4]) {
    if (remaining() < 4 || std::memcmp(data_ + pos_, magic, 4) != 0) {
      throw FormatError(name_ + ": bad magic, expected \"" + std::string(magic, 4) + "\"", pos_);
    }
    pos_ += 4;
  }

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    if (remaining() < sizeof(T)) throw FormatError(name_ + ": truncated file", pos_);
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string(std::size_t len) {
    if (remaining() < len) throw FormatError(name_ + ": truncated file", pos_);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
    pos_ += len;
    return s;
  }

  void get_floats(float* dst, std::size_t count) {
    const std::size_t bytes = count * sizeof(float);
    if (remaining() < bytes) throw FormatError(name_ + ": truncated file", pos_);
    std::memcpy(dst, data_ + pos_, bytes);
    pos_ += bytes;
  }

  void expect_end() {
    if (remaining() != 0) throw FormatError(name_ + ": trailing bytes", pos_);
  }

  const std::string& name() const { return name_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::string name_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::ofstream& f, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

inline void put_bytes(std::ofstream& f, const void* data, std::size_t bytes) {
  f.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

}  // namespace pcfill::detail
