#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homog/errors.hpp"
#include "homog/io.hpp"

using namespace homog;

TEST_SUITE("io") {
  TEST_CASE("format_double round-trips 64-bit values") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
      const std::string s = format_double(x);
      CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(format_double(0.5) == "5.0000000000000000e-01");
  }

  TEST_CASE("csv writer enforces the column count") {
    std::ostringstream os;
    CsvWriter csv(os, {"a", "b"});
    csv.cell(1).cell("x");
    csv.end_row();
    CHECK(os.str() == "a,b\n1,x\n");
    csv.cell(2.0);
    CHECK_THROWS(csv.end_row());
  }

  TEST_CASE("sha256 of a known message") {
    const auto path = std::filesystem::temp_directory_path() / "homog_sha_test.txt";
    {
      std::ofstream f(path, std::ios::binary);
      f << "abc";
    }
    // FIPS 180-2 test vector
    CHECK(sha256_file(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    std::filesystem::remove(path);
  }

  TEST_CASE("atomic write replaces the target and leaves no temp file") {
    const auto dir = std::filesystem::temp_directory_path() / "homog_atomic_test";
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "f.txt", "one");
    write_file_atomic(dir / "f.txt", "two");
    std::ifstream in(dir / "f.txt");
    std::string s;
    in >> s;
    CHECK(s == "two");
    CHECK(std::distance(std::filesystem::directory_iterator(dir), {}) == 1);
    std::filesystem::remove_all(dir);
  }
}
