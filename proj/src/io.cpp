#include "homog/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace homog {

std::string format_double(double x) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.16e", x);
  return buf.data();
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
  os_ << '\n';
}

void CsvWriter::sep() {
  if (filled_ == columns_) throw std::logic_error("CSV row has more cells than the header");
  if (filled_++ > 0) os_ << ',';
}

CsvWriter& CsvWriter::cell(double x) {
  sep();
  os_ << format_double(x);
  return *this;
}

CsvWriter& CsvWriter::cell(long long x) {
  sep();
  os_ << x;
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  sep();
  os_ << s;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("CSV row has fewer cells than the header");
  os_ << '\n';
  filled_ = 0;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace homog
