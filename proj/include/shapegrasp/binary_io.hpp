#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace shapegrasp {

// Little-endian byte buffer writer for the on-disk artifact formats.
class BinaryWriter {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void str(std::string_view s);  // u32 length + bytes

  const std::vector<char>& bytes() const { return bytes_; }
  // Writes to a temporary file and renames it into place.
  void save(const std::string& path) const;

 private:
  std::vector<char> bytes_;
};

class BinaryReader {
 public:
  static BinaryReader open(const std::string& path);
  explicit BinaryReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  // Throws kVersionMismatch when only a trailing version digit differs,
  // kBadMagic otherwise.
  void expect_magic(std::string_view m);
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  std::string str();
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

// Atomically replaces `path` with `content`.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace shapegrasp
