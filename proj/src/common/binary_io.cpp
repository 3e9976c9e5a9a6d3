#include "shapegrasp/binary_io.hpp"

#include <bit>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

namespace {

void write_atomically(const std::string& path, const char* data, std::size_t size) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + tmp + " for writing");
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot move " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace

void BinaryWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void BinaryWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void BinaryWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void BinaryWriter::save(const std::string& path) const { write_atomically(path, bytes_.data(), bytes_.size()); }

BinaryReader BinaryReader::open(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return BinaryReader(std::move(bytes));
}

void BinaryReader::need(std::size_t n) const {
  if (pos_ + n > bytes_.size()) throw Error(ErrorCode::kIo, "unexpected end of file");
}

void BinaryReader::expect_magic(std::string_view m) {
  if (pos_ + m.size() > bytes_.size()) throw Error(ErrorCode::kBadMagic, "file too short for magic");
  const std::string_view got(bytes_.data() + pos_, m.size());
  if (got != m) {
    const bool versioned = std::isdigit(static_cast<unsigned char>(m.back())) != 0;
    if (versioned && got.substr(0, m.size() - 1) == m.substr(0, m.size() - 1))
      throw Error(ErrorCode::kVersionMismatch,
                  "expected " + std::string(m) + ", found " + std::string(got));
    throw Error(ErrorCode::kBadMagic, "expected magic " + std::string(m));
  }
  pos_ += m.size();
}

std::uint32_t BinaryReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t BinaryReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
  pos_ += 8;
  return v;
}

float BinaryReader::f32() { return std::bit_cast<float>(u32()); }

std::string BinaryReader::str() {
  const auto n = u32();
  need(n);
  std::string s(bytes_.data() + pos_, n);
  pos_ += n;
  return s;
}

void write_text_file(const std::string& path, const std::string& content) {
  write_atomically(path, content.data(), content.size());
}

}  // namespace shapegrasp
